"""
Monte Carlo oracle.

Each trial draws the BS field in the radar's front half-plane outside r_exc
and sums the per-BS worst-case interference, with exact elevation angles
unless `McConfig.exact_geometry` is off. Trials own counter-based Philox
substreams keyed by the seed, so results do not depend on how trials are
spread over worker processes.
"""
import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, partial
from itertools import repeat
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import jensenshannon

from coexistApp.avgint import bs_interference
from coexistApp.choices import BinScale, CellModel, Hypothesis
from coexistApp.detection import DetectionSetup
from coexistApp.exceptions import DegenerateHistogramError
from coexistApp.intdist import kappa
from coexistApp.stochgeom import Deployment, circumradius_cdf, circumradius_upper, sample_ppp_polar

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1
TRIAL_SHIFT = 192
STREAM_SHIFT = 128
NETWORK_STREAM = 0
SIGNAL_STREAM = 1
# fraction of the mean interference allowed beyond the sampling radius
SAMPLING_TAIL = 1e-3
WINDOW_CHUNK = 100_000


@dataclass(frozen=True)
class McConfig:
    trials: int
    seed: int
    cell_model: str = CellModel.AAECC
    bins: int = 200
    exact_geometry: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if not 0 <= self.seed <= SEED_MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.cell_model not in CellModel.values:
            raise ValueError(f"unknown cell model {self.cell_model!r}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


class TrialOutcome(NamedTuple):
    i_tot: float
    i_dom: float
    r_dom: float


class DetectionEstimate(NamedTuple):
    pd_hat: float
    pfa_hat: float
    stderr_pd: float
    stderr_pfa: float


# ============================
# RANDOM STREAMS
# ============================
def trial_generator(seed, trial_index, stream=NETWORK_STREAM):
    counter = (int(trial_index) << TRIAL_SHIFT) + (int(stream) << STREAM_SHIFT)
    return np.random.Generator(np.random.Philox(key=int(seed) & SEED_MASK, counter=counter))


def sampling_radius(dep: Deployment, tail=SAMPLING_TAIL):
    """Radius beyond which the far-field mean interference is below `tail` of the total."""
    return dep.r_exc * tail ** (-1.0 / (dep.alpha - 2.0))


@lru_cache(maxsize=32)
def _circumradius_table(density, k_max=3, points=4001):
    r = np.linspace(0.0, circumradius_upper(density), points)
    cdf = np.maximum.accumulate(circumradius_cdf(density, r, k_max))
    return r, cdf / cdf[-1]


def sample_circumradius(density, size, rng, k_max=3):
    """Inverse-CDF draws from the truncated-series circumradius law."""
    r, cdf = _circumradius_table(density, k_max)
    return np.interp(rng.uniform(size=size), cdf, r)


# ============================
# TRIALS
# ============================
def realize_interference(dep: Deployment, mc: McConfig, trial_index):
    rng = trial_generator(mc.seed, trial_index)
    r, theta = sample_ppp_polar(dep.density, dep.r_exc, sampling_radius(dep), -0.5 * math.pi, 0.5 * math.pi, rng)
    if r.size == 0:
        return TrialOutcome(0.0, 0.0, math.inf)

    if mc.cell_model == CellModel.CBC:
        # one independent circumradius per BS
        phi_m = dep.phi_m(sample_circumradius(dep.density, r.size, rng))
    else:
        phi_m = float(dep.phi_m(dep.r_a))
    per_bs = np.atleast_1d(bs_interference(dep, r, theta, phi_m, exact_geometry=mc.exact_geometry))
    i_dom = float(per_bs.max())
    r_dom = float(kappa(dep).distance(i_dom)) if i_dom > 0 else math.inf
    return TrialOutcome(float(per_bs.sum()), i_dom, r_dom)


def circumcircle_interference_trial(dep: Deployment, mc: McConfig, trial_index):
    return realize_interference(dep, mc.replace(cell_model=CellModel.CBC), trial_index).i_tot


def _run_chunk(fn, dep, mc, start, stop):
    return [fn(dep, mc, index) for index in range(start, stop)]


def run_trials(fn, dep: Deployment, mc: McConfig, workers=1):
    """fn(dep, mc, trial_index) for every trial, in trial order."""
    if workers <= 1:
        return _run_chunk(fn, dep, mc, 0, mc.trials)
    size = max(1, math.ceil(mc.trials / (4 * workers)))
    starts = list(range(0, mc.trials, size))
    stops = [min(s + size, mc.trials) for s in starts]
    results = []
    with ProcessPoolExecutor(max_workers=workers) as executor:
        for chunk in executor.map(_run_chunk, repeat(fn), repeat(dep), repeat(mc), starts, stops):
            results.extend(chunk)
    logger.debug("ran %d trials of %s on %d workers", mc.trials, getattr(fn, "__name__", fn), workers)
    return results


def interference_samples(dep: Deployment, mc: McConfig, workers=1):
    outcomes = run_trials(realize_interference, dep, mc, workers)
    return np.array(outcomes, dtype=float).reshape(-1, 3)


# ============================
# EMPIRICAL DISTRIBUTIONS
# ============================
@dataclass(frozen=True)
class EmpiricalCdf:
    samples: np.ndarray

    def __call__(self, x):
        value = np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.samples.size
        return float(value) if np.ndim(value) == 0 else value


def empirical_cdf(samples):
    samples = np.sort(np.ravel(np.asarray(samples, dtype=float)))
    if samples.size == 0:
        raise ValueError("empirical CDF needs at least one sample")
    return EmpiricalCdf(samples)


def _bin_edges(lo, hi, bins, scale):
    if bins < 2:
        raise DegenerateHistogramError("at least two bins are required")
    if not hi > lo:
        raise DegenerateHistogramError("samples span a zero-width range")
    if scale == BinScale.LOG:
        if lo <= 0:
            raise DegenerateHistogramError("log-scaled bins need strictly positive samples")
        return np.geomspace(lo, hi, bins + 1)
    return np.linspace(lo, hi, bins + 1)


def jsd(samples_a, other, bins=200, scale=BinScale.LINEAR):
    """
    Jensen-Shannon divergence (base 2) between the histogram of samples_a and
    either a second sample set or a CDF callable, on shared bins.
    """
    a = np.ravel(np.asarray(samples_a, dtype=float))
    if a.size == 0:
        raise ValueError("samples_a is empty")
    if callable(other):
        edges = _bin_edges(a.min(), a.max(), bins, scale)
        q = np.clip(np.diff(np.asarray(other(edges), dtype=float)), 0.0, None)
    else:
        b = np.ravel(np.asarray(other, dtype=float))
        if b.size == 0:
            raise ValueError("samples_b is empty")
        edges = _bin_edges(min(a.min(), b.min()), max(a.max(), b.max()), bins, scale)
        q, _ = np.histogram(b, bins=edges)
    p, _ = np.histogram(a, bins=edges)
    if q.sum() <= 0:
        raise DegenerateHistogramError("reference distribution puts no mass on the sample range")
    value = jensenshannon(p, q, base=2.0) ** 2
    return float(min(max(value, 0.0), 1.0))


# ============================
# DETECTION TRIALS
# ============================
def simulate_test_statistic(setup: DetectionSetup, i_tot, hypothesis, windows, rng):
    """Window-average received power over `windows` independent windows of N samples."""
    scale = math.sqrt(0.5 * (float(i_tot) + setup.noise_w))
    target = math.sqrt(setup.p_tar) if hypothesis == Hypothesis.H1 else 0.0
    out = np.empty(int(windows))
    for start in range(0, out.size, WINDOW_CHUNK):
        count = min(WINDOW_CHUNK, out.size - start)
        shape = (count, setup.n_samples)
        y = target + scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        out[start:start + count] = np.mean(np.abs(y) ** 2, axis=1)
    return out


def _detection_trial(dep, mc, trial_index, setup):
    i_tot = realize_interference(dep, mc, trial_index).i_tot
    rng = trial_generator(mc.seed, trial_index, SIGNAL_STREAM)
    h0 = simulate_test_statistic(setup, i_tot, Hypothesis.H0, 1, rng)[0]
    h1 = simulate_test_statistic(setup, i_tot, Hypothesis.H1, 1, rng)[0]
    return h0, h1


def detection_statistics(dep: Deployment, setup: DetectionSetup, mc: McConfig, workers=1):
    """Per-trial (H0, H1) test statistics, each trial on its own network draw."""
    pairs = np.array(run_trials(partial(_detection_trial, setup=setup), dep, mc, workers), dtype=float).reshape(-1, 2)
    return pairs[:, 0], pairs[:, 1]


def _estimate(h0, h1, p_th):
    n = h0.size
    pd = float(np.mean(h1 >= p_th))
    pfa = float(np.mean(h0 >= p_th))
    return DetectionEstimate(pd, pfa, math.sqrt(pd * (1.0 - pd) / n), math.sqrt(pfa * (1.0 - pfa) / n))


def empirical_detection(dep: Deployment, setup: DetectionSetup, mc: McConfig, workers=1):
    h0, h1 = detection_statistics(dep, setup, mc, workers)
    return _estimate(h0, h1, setup.p_th)


def empirical_detection_sweep(dep: Deployment, setup: DetectionSetup, mc: McConfig, thresholds, workers=1):
    """One set of detection trials thresholded at every value of `thresholds`."""
    h0, h1 = detection_statistics(dep, setup, mc, workers)
    return [_estimate(h0, h1, float(t)) for t in np.atleast_1d(thresholds)]
