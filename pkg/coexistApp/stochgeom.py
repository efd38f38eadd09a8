"""
Stochastic geometry primitives: the deployment description, PPP sampling over
annular sectors, the Poisson-Voronoi circumradius law (truncated series with a
Voronoi Monte Carlo oracle), the AAECC radius and the 3D UMa LoS pathloss.

Lengths are metres and densities are per m^2 here. `Deployment.lambda_bs` is the
one place that takes km^-2; use `Deployment.density` downstream.
"""
import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.spatial import Voronoi
from scipy.stats import qmc

from coexistApp.antenna import ArrayConfig, Pointing
from coexistApp.exceptions import ConvergenceError, RegimeWarning, WindowTooSmallError

logger = logging.getLogger(__name__)

KM2_TO_M2 = 1e-6
REGIME_FACTOR = 50.0
# 4*pi*density*r^2 at which the circumradius tail drops below 1e-10
CIRCUMRADIUS_TAIL_EXPONENT = 120.0


# ============================
# DEPLOYMENT
# ============================
@dataclass(frozen=True)
class Deployment:
    lambda_bs: float                    # km^-2
    r_exc: float                        # m
    h_bs: float = 50.0
    h_rad: float = 20.0
    p_bs: float = 1.0                   # W
    k_users: int = 4
    alpha: float = 4.0
    pl_ref: Optional[float] = None      # linear PL(r0); None -> 3D UMa intercept
    f_c: float = 5.0                    # GHz
    bs_array: ArrayConfig = ArrayConfig(10, 10)
    rad_array: ArrayConfig = ArrayConfig(10, 10)
    rad_point: Pointing = Pointing(math.radians(60.0), math.radians(-10.0))

    def __post_init__(self):
        if not self.lambda_bs > 0:
            raise ValueError(f"lambda_bs must be positive, got {self.lambda_bs}")
        if not self.r_exc > 0:
            raise ValueError(f"r_exc must be positive, got {self.r_exc}")
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")
        if self.h_bs < 0 or self.h_rad < 0:
            raise ValueError("antenna heights must be nonnegative")
        if self.p_bs < 0:
            raise ValueError("p_bs must be nonnegative")
        if self.k_users < 1:
            raise ValueError("k_users must be >= 1")
        if not self.f_c > 0:
            raise ValueError("f_c must be positive")
        if self.pl_ref is not None and not self.pl_ref > 0:
            raise ValueError("pl_ref must be positive when given")

    def __str__(self):
        return (
            f"lambda={self.lambda_bs:g}/km2 r_exc={self.r_exc:g}m "
            f"bs={self.bs_array} rad={self.rad_array} steer={self.rad_point}"
        )

    @property
    def density(self):
        return self.lambda_bs * KM2_TO_M2

    @property
    def dh(self):
        return self.h_bs - self.h_rad

    @property
    def beta0(self):
        if self.pl_ref is not None:
            return self.pl_ref
        return db_to_linear(-uma_intercept_db(self))

    @property
    def r_a(self):
        return aaecc_radius(self.density)

    def phi_m(self, r_c):
        """Lowest elevation (as a positive angle) a BS beam reaches at cell radius r_c."""
        return np.arctan(self.h_bs / np.asarray(r_c, dtype=float))

    def in_regime(self, factor=REGIME_FACTOR):
        return self.r_exc >= factor * max(self.h_bs, self.h_rad)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def check_regime(dep: Deployment, where: str):
    if dep.in_regime():
        return True
    message = (
        f"{where}: r_exc={dep.r_exc:g} m is below {REGIME_FACTOR:g}x max antenna height "
        f"({max(dep.h_bs, dep.h_rad):g} m); far-field approximation is unreliable"
    )
    logger.warning(message)
    warnings.warn(message, RegimeWarning, stacklevel=3)
    return False


@dataclass(frozen=True)
class PlanarPoint:
    r: float
    theta: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("radius must be nonnegative")
        if not -math.pi <= self.theta < math.pi:
            raise ValueError("azimuth must lie in [-pi, pi)")


# ============================
# PATHLOSS
# ============================
def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(value)


def watts_to_dbm(watts):
    return 10.0 * np.log10(watts) + 30.0


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def uma_intercept_db(dep: Deployment):
    if dep.dh == 0:
        raise ValueError("3D UMa pathloss is undefined for equal BS and radar heights")
    return 28.0 - 9.0 * math.log10(dep.dh ** 2) + 20.0 * math.log10(dep.f_c)


def pathloss_db(d, dep: Deployment):
    """3D UMa LoS pathloss in dB at 3D distance d (m)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    value = uma_intercept_db(dep) + 40.0 * np.log10(d)
    return float(value) if value.ndim == 0 else value


def pathloss_gain(d, dep: Deployment):
    """Linear channel gain PL(r0) * d^-alpha."""
    value = dep.beta0 * np.asarray(d, dtype=float) ** (-dep.alpha)
    return float(value) if np.ndim(value) == 0 else value


# ============================
# PPP SAMPLING
# ============================
def sample_ppp_polar(density, r_min, r_max, theta_lo, theta_hi, rng):
    """One PPP draw in the annular sector, as (r, theta) arrays."""
    for bound in (density, r_min, r_max, theta_lo, theta_hi):
        if not np.isfinite(bound):
            raise ValueError("sector bounds and density must be finite")
    if not (density > 0 and 0 <= r_min < r_max and theta_lo < theta_hi):
        raise ValueError("need density > 0, 0 <= r_min < r_max and theta_lo < theta_hi")

    mean = density * 0.5 * (theta_hi - theta_lo) * (r_max ** 2 - r_min ** 2)
    count = rng.poisson(mean)
    r = np.sqrt(rng.uniform(r_min ** 2, r_max ** 2, size=count))
    theta = rng.uniform(theta_lo, theta_hi, size=count)
    return r, theta


def sample_ppp_sector(density, r_min, r_max, theta_lo, theta_hi, rng):
    r, theta = sample_ppp_polar(density, r_min, r_max, theta_lo, theta_hi, rng)
    return [PlanarPoint(float(a), float(b)) for a, b in zip(r, theta)]


def aaecc_radius(density):
    if not density > 0:
        raise ValueError("density must be positive")
    return 1.0 / math.sqrt(math.pi * density)


# ============================
# CIRCUMRADIUS LAW
# ============================
def _coverage(t):
    """F(t): sin^2(pi t) up to 1/2, then 1."""
    t = np.asarray(t, dtype=float)
    return np.where(t <= 0.5, np.sin(np.pi * t) ** 2, 1.0)


def _coverage_integral(t):
    """Integral of F from 0 to t."""
    t = np.asarray(t, dtype=float)
    return np.where(t <= 0.5, 0.5 * t - np.sin(2.0 * np.pi * t) / (4.0 * np.pi), t - 0.25)


@lru_cache(maxsize=32)
def _simplex_rule(k, order=32, qmc_points=4096):
    """
    Nodes (n, k) and weights on {u in [0,1]^k : sum u = 1}, with the measure of
    the projection onto the first k-1 coordinates.
    """
    if k == 1:
        return np.ones((1, 1)), np.ones(1)

    x, w = np.polynomial.legendre.leggauss(order)
    halves = [(0.25 * (x + 1.0), 0.25 * w), (0.5 + 0.25 * (x + 1.0), 0.25 * w)]

    if k == 2:
        u1 = np.concatenate([h[0] for h in halves])
        weights = np.concatenate([h[1] for h in halves])
        return np.column_stack([u1, 1.0 - u1]), weights

    if k == 3:
        s, ws = 0.5 * (x + 1.0), 0.5 * w
        u1 = np.concatenate([h[0] for h in halves])
        w1 = np.concatenate([h[1] for h in halves])
        U1, S = np.meshgrid(u1, s, indexing="ij")
        W1, WS = np.meshgrid(w1, ws, indexing="ij")
        U2 = (1.0 - U1) * S
        points = np.column_stack([U1.ravel(), U2.ravel(), (1.0 - U1 - U2).ravel()])
        return points, (W1 * WS * (1.0 - U1)).ravel()

    # uniform spacings of sorted Sobol points are uniform on the simplex
    sobol = qmc.Sobol(d=k - 1, scramble=True, seed=k).random(qmc_points)
    cuts = np.sort(sobol, axis=1)
    edges = np.hstack([np.zeros((qmc_points, 1)), cuts, np.ones((qmc_points, 1))])
    points = np.diff(edges, axis=1)
    return points, np.full(qmc_points, 1.0 / (math.factorial(k - 1) * qmc_points))


def _scaled_zeta(a, k, order):
    """(e^-a zeta_k, e^-a psi_k / (8 pi lambda r)) as functions of a = 4 pi lambda r^2."""
    points, weights = _simplex_rule(k, order)
    prod_f = np.prod(_coverage(points), axis=1)
    sum_g = np.sum(_coverage_integral(points), axis=1)
    kernel = np.exp(np.multiply.outer(a, sum_g - 1.0)) * prod_f
    zeta = kernel @ weights
    psi = kernel @ (weights * sum_g)
    if not (np.all(np.isfinite(zeta)) and np.all(np.isfinite(psi))):
        raise ConvergenceError(f"simplex quadrature for k={k} produced non-finite values")
    return zeta, psi


def _series_terms(a, k_max, order):
    """
    Terms of the density bracket and of the complementary CDF bracket, scaled
    by e^-a. term 0 is the series head.
    """
    a = np.asarray(a, dtype=float)
    head = np.exp(-a)
    density_terms, ccdf_terms = [head], [head]
    for k in range(1, k_max + 1):
        zeta, psi = _scaled_zeta(a, k, order)
        c_k = (-a) ** k / math.factorial(k)
        c_prev = (-a) ** (k - 1) / math.factorial(k - 1)
        density_terms.append(c_k * (psi - zeta) - c_prev * zeta)
        ccdf_terms.append(-c_k * zeta)
    return density_terms, ccdf_terms


@lru_cache(maxsize=16)
def _check_decay(k_max, order):
    # the bracket depends on a only, so one reference grid covers every density
    a = np.linspace(0.0, 2.0 * CIRCUMRADIUS_TAIL_EXPONENT, 481)
    density_terms, _ = _series_terms(a, k_max, order)
    sup = [float(np.max(np.abs(t))) for t in density_terms[1:]]
    for k in range(1, len(sup)):
        if sup[k] > sup[k - 1] and sup[k] > 1e-6:
            raise ConvergenceError(
                f"circumradius series term {k + 1} (sup {sup[k]:.3e}) does not decay "
                f"relative to term {k} (sup {sup[k - 1]:.3e})"
            )
    logger.debug("circumradius series sup-norms per term: %s", sup)
    return tuple(sup)


def zeta_k(density, r_c, k, order=32):
    if k < 1:
        raise ValueError("k must be >= 1")
    a = 4.0 * math.pi * density * np.asarray(r_c, dtype=float) ** 2
    zeta, _ = _scaled_zeta(a, k, order)
    value = zeta * np.exp(a)
    return float(value) if np.ndim(value) == 0 else value


def _series(density, r_c, k_max, order):
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    r = np.asarray(r_c, dtype=float)
    if np.any(r < 0):
        raise ValueError("circumradius must be nonnegative")
    if k_max >= 2:
        _check_decay(k_max, order)
    a = 4.0 * math.pi * density * r ** 2
    return r, _series_terms(a, k_max, order)


def circumradius_pdf(density, r_c, k_max=3, order=32):
    r, (density_terms, _) = _series(density, r_c, k_max, order)
    value = np.maximum(8.0 * math.pi * density * r * np.sum(density_terms, axis=0), 0.0)
    return float(value) if value.ndim == 0 else value


def circumradius_cdf(density, r_c, k_max=3, order=32):
    _, (_, ccdf_terms) = _series(density, r_c, k_max, order)
    value = np.clip(1.0 - np.sum(ccdf_terms, axis=0), 0.0, 1.0)
    return float(value) if value.ndim == 0 else value


def circumradius_truncation_residual(density, r_c, k_max=3, order=32):
    """Magnitude of the last included density term."""
    r, (density_terms, _) = _series(density, r_c, k_max, order)
    value = np.abs(8.0 * math.pi * density * r * density_terms[-1])
    return float(value) if value.ndim == 0 else value


def circumradius_upper(density):
    return math.sqrt(CIRCUMRADIUS_TAIL_EXPONENT / (4.0 * math.pi * density))


@lru_cache(maxsize=32)
def circumradius_rule(density, k_max=3, panels=96, order=16):
    """
    Composite Gauss-Legendre nodes on [0, r_hi] with the circumradius density
    folded into the weights; r_hi is where the law's tail drops below 1e-10.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    h = circumradius_upper(density) / panels
    starts = h * np.arange(panels)
    nodes = (starts[:, None] + 0.5 * h * (x + 1.0)).ravel()
    weights = np.tile(0.5 * h * w, panels) * circumradius_pdf(density, nodes, k_max)
    logger.debug(
        "circumradius rule: density=%g mass=%.8f", density, float(weights.sum())
    )
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def circumradius_mean(density, k_max=3):
    nodes, weights = circumradius_rule(density, k_max)
    return float(nodes @ weights)


# ============================
# VORONOI ORACLE
# ============================
def circumradius_samples(density, n, rng, window_scale=10.0):
    """Circumradii of the origin's Voronoi cell amid a PPP in a disk of radius window_scale/sqrt(density)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    window = window_scale / math.sqrt(density)
    samples = np.empty(n)
    for i in range(n):
        count = rng.poisson(density * math.pi * window ** 2)
        rho = window * np.sqrt(rng.uniform(size=count))
        ang = rng.uniform(-math.pi, math.pi, size=count)
        points = np.vstack([[0.0, 0.0], np.column_stack([rho * np.cos(ang), rho * np.sin(ang)])])
        vor = Voronoi(points)
        region = vor.regions[vor.point_region[0]]
        if not region or -1 in region:
            raise WindowTooSmallError("origin cell is unbounded inside the sampling window")
        radius = float(np.max(np.hypot(*vor.vertices[region].T)))
        # nuclei farther than 2*radius cannot shape the cell
        if radius >= 0.5 * window:
            raise WindowTooSmallError(f"circumradius {radius:.1f} m reaches half the window {window:.1f} m")
        samples[i] = radius
    return samples
