"""
Radar detection layer.

The radar averages N received samples into P_rad and compares it with p_th.
Conditioned on the total interference, P_rad is a scaled (noncentral)
chi-squared variable; the spatial probabilities mix that conditional tail
over the dominant-interferer law of r_dom.
"""
import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import gamma, gammainc, gammaincc, ndtr
from scipy.stats import poisson

from coexistApp.choices import Hypothesis, Method
from coexistApp.exceptions import ConvergenceError
from coexistApp.intdist import expect_over_rdom, itot_di
from coexistApp.stochgeom import Deployment

logger = logging.getLogger(__name__)

# Poisson mass left out on each side of the Marcum series window
MARCUM_TAIL = 1e-12
MARCUM_MAX_TERMS = 1_000_000
MARCUM_CHUNK = 2048
MONOTONE_TOL = 1e-9


# ============================
# TYPES
# ============================
@dataclass(frozen=True)
class DetectionSetup:
    n_samples: int
    p_tar: float
    noise_w: float
    p_th: float = 0.0

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError(f"n_samples must be an integer >= 1, got {self.n_samples}")
        for name in ("p_tar", "noise_w", "p_th"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")

    def with_threshold(self, p_th):
        return replace(self, p_th=float(p_th))


class RocPoint(NamedTuple):
    p_th: float
    pfa: float
    pd: float
    method: str


def _as_output(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


# ============================
# SPECIAL FUNCTIONS
# ============================
def lower_inc_gamma(n, x):
    """Unnormalised lower incomplete gamma integral of z^(n-1) e^-z over [0, x]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    return _as_output(gammainc(n, x) * gamma(n))


def _poisson_window(mu):
    mu_lo, mu_hi = float(np.min(mu)), float(np.max(mu))
    lo = int(poisson.ppf(MARCUM_TAIL, mu_lo)) if mu_lo > 0 else 0
    hi = int(poisson.isf(MARCUM_TAIL, mu_hi)) if mu_hi > 0 else 0
    if hi - lo + 1 > MARCUM_MAX_TERMS:
        raise ConvergenceError(f"Marcum Q series needs {hi - lo + 1} terms (noncentrality {2 * mu_hi:.3e})")
    return np.arange(max(lo, 0), hi + 1)


def marcum_q(n, a, b):
    """
    Generalised Marcum Q_n(a, b) as a Poisson(a^2/2) mixture of Erlang tails:
    sum_k P(K = k) * P(Gamma(n + k) > b^2/2).
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("a and b must be nonnegative")
    mu = 0.5 * a.ravel() ** 2
    half_b_sq = 0.5 * b.ravel() ** 2
    k = _poisson_window(mu) if mu.size else np.arange(1)

    value = np.empty(mu.size)
    for start in range(0, mu.size, MARCUM_CHUNK):
        m = mu[start:start + MARCUM_CHUNK, None]
        zero = m == 0
        weights = np.where(zero, k == 0, poisson.pmf(k, np.where(zero, 1.0, m)))
        tails = gammaincc(n + k, half_b_sq[start:start + MARCUM_CHUNK, None])
        value[start:start + MARCUM_CHUNK] = np.sum(weights * tails, axis=-1)
    value = np.clip(value, 0.0, 1.0).reshape(b.shape)
    return _as_output(np.where(b == 0, 1.0, value))


# ============================
# CONDITIONAL LAWS
# ============================
def cond_cdf(setup: DetectionSetup, i_tot, hypothesis, p, method=Method.CHISQ):
    """
    CDF at p of the window-average power given total interference i_tot.
    Interference plus noise is a complex Gaussian of power s = i_tot + noise_w.
    """
    p = np.asarray(p, dtype=float)
    n = setup.n_samples
    s = float(i_tot) + setup.noise_w
    if hypothesis == Hypothesis.H1 and setup.p_tar == 0:
        hypothesis = Hypothesis.H0
    positive = p > 0
    safe = np.where(positive, p, 0.0)

    if s <= 0:
        # no random component: P_rad is p_tar under H1, 0 under H0
        level = setup.p_tar if hypothesis == Hypothesis.H1 else 0.0
        return _as_output(np.where(positive & (safe >= level), 1.0, 0.0))

    if method == Method.CHISQ:
        if hypothesis == Hypothesis.H0:
            value = gammainc(n, n * safe / s)
        else:
            value = 1.0 - marcum_q(n, np.sqrt(2.0 * n * setup.p_tar / s), np.sqrt(2.0 * n * safe / s))
    elif method == Method.CLT:
        if hypothesis == Hypothesis.H0:
            value = ndtr(np.sqrt(n) * (safe - s) / s)
        else:
            spread = np.sqrt((setup.p_tar + s) ** 2 - setup.p_tar ** 2)
            value = ndtr(np.sqrt(n) * (safe - setup.p_tar - s) / spread)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _as_output(np.where(positive, np.clip(value, 0.0, 1.0), 0.0))


# ============================
# SPATIAL PROBABILITIES
# ============================
def spatial_probabilities(dep: Deployment, setup: DetectionSetup, thresholds, method=Method.CHISQ):
    """(pd, pfa) arrays over `thresholds`, averaged over the BS point process in one mixing pass."""
    thresholds = np.atleast_1d(np.asarray(thresholds, dtype=float))

    def tails(r_dom):
        i_tot = itot_di(dep, float(r_dom))
        pd = 1.0 - cond_cdf(setup, i_tot, Hypothesis.H1, thresholds, method)
        pfa = 1.0 - cond_cdf(setup, i_tot, Hypothesis.H0, thresholds, method)
        return np.stack([np.atleast_1d(pd), np.atleast_1d(pfa)])

    values = np.clip(expect_over_rdom(dep, tails), 0.0, 1.0)
    logger.debug("spatial probabilities at r_exc=%g: %d thresholds (%s)", dep.r_exc, thresholds.size, method)
    return values[0], values[1]


def spatial_pd(dep: Deployment, setup: DetectionSetup, method=Method.CHISQ):
    pd, _ = spatial_probabilities(dep, setup, setup.p_th, method)
    return float(pd[0])


def spatial_pfa(dep: Deployment, setup: DetectionSetup, method=Method.CHISQ):
    _, pfa = spatial_probabilities(dep, setup, setup.p_th, method)
    return float(pfa[0])


def roc_curve(dep: Deployment, setup: DetectionSetup, thresholds, method=Method.CHISQ):
    thresholds = np.asarray(thresholds, dtype=float)
    if thresholds.ndim != 1 or thresholds.size == 0:
        raise ValueError("thresholds must be a non-empty 1-D sequence")
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be sorted ascending")
    pd, pfa = spatial_probabilities(dep, setup, thresholds, method)
    # both tails fall with the threshold; strip quadrature ripple
    pd = np.minimum.accumulate(pd)
    pfa = np.minimum.accumulate(pfa)
    return [RocPoint(float(t), float(f), float(d), str(method)) for t, f, d in zip(thresholds, pfa, pd)]


# ============================
# MINIMUM EXCLUSION RADIUS
# ============================
def min_exclusion_radius(dep: Deployment, setup: DetectionSetup, pd_thr, pfa_thr, candidates,
                         method=Method.CHISQ, evaluate=None):
    """
    Smallest candidate r_exc at which P_d >= pd_thr and P_fa <= pfa_thr.

    `dep.r_exc` is ignored. `evaluate(dep) -> (pd, pfa)` replaces the analytic
    probabilities, e.g. with Monte Carlo estimates. Returns None when no
    candidate qualifies. Candidates <= 0 never qualify.
    """
    candidates = [float(c) for c in candidates]
    if not candidates:
        raise ValueError("candidate grid is empty")
    if any(b < a for a, b in zip(candidates, candidates[1:])):
        raise ValueError("candidates must be sorted ascending")
    if pd_thr <= 0 and pfa_thr >= 1:
        return candidates[0]

    if evaluate is None:
        def evaluate(d):
            pd, pfa = spatial_probabilities(d, setup, setup.p_th, method)
            return float(pd[0]), float(pfa[0])

    seen = {}

    def probabilities(index):
        if index not in seen:
            seen[index] = evaluate(dep.replace(r_exc=candidates[index]))
        return seen[index]

    def feasible(index):
        if candidates[index] <= 0:
            return False
        pd, pfa = probabilities(index)
        return pd >= pd_thr and pfa <= pfa_thr

    def monotone():
        ordered = [seen[i] for i in sorted(seen)]
        return all(
            b_pd >= a_pd - MONOTONE_TOL and b_pfa <= a_pfa + MONOTONE_TOL
            for (a_pd, a_pfa), (b_pd, b_pfa) in zip(ordered, ordered[1:])
        )

    lo, hi = 0, len(candidates) - 1
    if feasible(hi):
        while lo < hi:
            mid = (lo + hi) // 2
            if feasible(mid):
                hi = mid
            else:
                lo = mid + 1
        found = hi
    else:
        found = None

    if monotone():
        return None if found is None else candidates[found]

    logger.warning(
        "non-monotone detection probabilities over r_exc (pd_thr=%g, pfa_thr=%g); scanning all candidates",
        pd_thr, pfa_thr,
    )
    for index in range(len(candidates)):
        if feasible(index):
            return candidates[index]
    return None
