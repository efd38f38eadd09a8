"""
Dominant-interferer (DI) distribution layer.

With elevations frozen at the horizon, every BS at (r, theta) produces
kappa * r^-alpha * ratio(theta)^2 at the radar, so the set of positions that
beat a given power is the region inside a beam-shaped contour. The farthest
point of that contour, r_dom, has a void-probability law; I_dom and the DI
total interference are monotone maps of r_dom.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad_vec
from scipy.optimize import brentq

from coexistApp.antenna import Pointing, angular_quadrature, azimuth_gain_ratio, bf_gain_max, radar_gain, theta_max
from coexistApp.avgint import bs_interference
from coexistApp.exceptions import ConvergenceError, OutsideSupportError
from coexistApp.stochgeom import Deployment, check_regime

logger = logging.getLogger(__name__)

TAIL_MASS = 1e-10
INVERSION_RTOL = 1e-12
MAX_BRACKET_DOUBLINGS = 200


# ============================
# TYPES
# ============================
@dataclass(frozen=True)
class ContourSpec:
    r_dom: float
    dep: Deployment

    def __post_init__(self):
        if self.r_dom < self.dep.r_exc * (1.0 - 1e-12):
            raise ValueError(f"r_dom={self.r_dom} is inside the exclusion zone r_exc={self.dep.r_exc}")


@dataclass(frozen=True)
class KappaConstant:
    kappa: float
    alpha: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    def interference(self, r):
        return self.kappa * np.asarray(r, dtype=float) ** (-self.alpha)

    def distance(self, i):
        with np.errstate(divide="ignore"):
            return (self.kappa / np.asarray(i, dtype=float)) ** (1.0 / self.alpha)


class ClampedProbability(NamedTuple):
    value: float
    clamped: bool


class _Profile(NamedTuple):
    theta: np.ndarray
    weights: np.ndarray
    ratio_sq: np.ndarray
    # |ratio|^(4/alpha): squared contour radius per unit r_dom^2
    rho: np.ndarray


@lru_cache(maxsize=128)
def _profile(dep: Deployment):
    theta, weights = angular_quadrature(dep.rad_array.n_az, dep.rad_point)
    ratio = np.abs(azimuth_gain_ratio(dep.rad_array.n_az, dep.rad_point, theta))
    return _Profile(theta, weights, ratio ** 2, ratio ** (4.0 / dep.alpha))


# ============================
# KAPPA AND CONTOURS
# ============================
def kappa(dep: Deployment):
    g_bs = bf_gain_max(dep.bs_array, 0.0, float(dep.phi_m(dep.r_a)))
    g_rad = radar_gain(dep.rad_array, dep.rad_point, Pointing(theta_max(dep.rad_point), 0.0))
    return KappaConstant(dep.p_bs * dep.beta0 * g_bs * g_rad / dep.k_users, dep.alpha)


def contour_radius(spec: ContourSpec, theta):
    ratio = np.abs(azimuth_gain_ratio(spec.dep.rad_array.n_az, spec.dep.rad_point, theta))
    value = spec.r_dom * ratio ** (2.0 / spec.dep.alpha)
    return float(value) if np.ndim(value) == 0 else value


def contour_table(dep: Deployment, r_dom, n_points=721):
    theta = np.linspace(-0.5 * np.pi, 0.5 * np.pi, n_points)
    return theta, contour_radius(ContourSpec(r_dom, dep), theta)


def exact_contour_radius(dep: Deployment, i_dom, theta):
    """
    Ground range along azimuth theta at which one BS, with exact elevation
    geometry, produces i_dom at the radar. 0 when no range reaches i_dom.
    """
    phi_m = float(dep.phi_m(dep.r_a))

    def excess(r):
        return bs_interference(dep, r, theta, phi_m) / i_dom - 1.0

    k = kappa(dep)
    guess = float(contour_radius(ContourSpec(max(float(k.distance(i_dom)), dep.r_exc), dep), theta))
    hi = max(guess, 1.0) * 2.0
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if bs_interference(dep, hi, theta, phi_m) < i_dom:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("exact contour bracket did not close")
    lo = hi / 2.0
    while bs_interference(dep, lo, theta, phi_m) < i_dom:
        lo /= 2.0
        if lo < 1e-3:
            return 0.0
    return brentq(excess, lo, hi, rtol=INVERSION_RTOL)


def _area_raw(dep: Deployment, r):
    prof = _profile(dep)
    r = np.maximum(np.asarray(r, dtype=float), dep.r_exc)
    excess = np.maximum(np.multiply.outer(r ** 2, prof.rho) - dep.r_exc ** 2, 0.0)
    return 0.5 * excess @ prof.weights


def area_enclosed(spec: ContourSpec):
    """Half-plane area outside the exclusion zone and inside the contour of spec.r_dom."""
    return float(_area_raw(spec.dep, spec.r_dom))


# ============================
# r_dom AND I_dom LAWS
# ============================
def rdom_cdf(dep: Deployment, r_dom):
    check_regime(dep, "rdom_cdf")
    value = -np.expm1(-dep.density * _area_raw(dep, r_dom))
    return float(value) if np.ndim(value) == 0 else value


def rdom_pdf(dep: Deployment, r_dom):
    check_regime(dep, "rdom_pdf")
    prof = _profile(dep)
    r = np.asarray(r_dom, dtype=float)
    inside = np.multiply.outer(r ** 2, prof.rho) >= dep.r_exc ** 2
    slope = (inside * prof.rho) @ prof.weights * r
    value = np.where(r < dep.r_exc, 0.0, dep.density * slope * np.exp(-dep.density * _area_raw(dep, r)))
    return float(value) if value.ndim == 0 else value


def i_exc(dep: Deployment):
    return float(kappa(dep).interference(dep.r_exc))


def _check_idom(dep: Deployment, i):
    i = np.asarray(i, dtype=float)
    if np.any(i > i_exc(dep) * (1.0 + 1e-12)):
        raise OutsideSupportError("dominant interference cannot exceed I_exc = kappa * r_exc^-alpha")
    return i


def idom_cdf(dep: Deployment, i):
    i = _check_idom(dep, i)
    positive = i > 0
    r = kappa(dep).distance(np.where(positive, i, 1.0))
    value = np.where(positive, 1.0 - rdom_cdf(dep, r), 0.0)
    return float(value) if value.ndim == 0 else value


def idom_pdf(dep: Deployment, i):
    i = _check_idom(dep, i)
    safe = np.where(i > 0, i, 1.0)
    r = kappa(dep).distance(safe)
    value = np.where(i > 0, rdom_pdf(dep, r) * r / (dep.alpha * safe), 0.0)
    return float(value) if value.ndim == 0 else value


# ============================
# DI TOTAL INTERFERENCE
# ============================
def itot_di(dep: Deployment, r_dom):
    """Dominant interferer at r_dom plus the conditional mean of all BSs outside its contour."""
    check_regime(dep, "itot_di")
    prof = _profile(dep)
    r = np.asarray(r_dom, dtype=float)
    contour = np.multiply.outer(r, prof.rho ** 0.5)
    outside = np.maximum(contour, dep.r_exc) ** (2.0 - dep.alpha)
    rest = dep.density / (dep.alpha - 2.0) * ((outside * prof.ratio_sq) @ prof.weights)
    value = kappa(dep).kappa * (r ** (-dep.alpha) + rest)
    return float(value) if value.ndim == 0 else value


def itot_support(dep: Deployment):
    return itot_di(dep, dep.r_exc)


def _invert_itot(dep: Deployment, i):
    hi = 2.0 * dep.r_exc
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if itot_di(dep, hi) < i:
            break
        hi *= 2.0
    else:
        raise ConvergenceError(f"could not bracket I_tot = {i:.3e} W")
    return brentq(lambda r: itot_di(dep, r) - i, dep.r_exc, hi, rtol=INVERSION_RTOL, xtol=1e-12 * dep.r_exc)


def itot_cdf_di(dep: Deployment, i):
    if i <= 0:
        return ClampedProbability(0.0, True)
    if i >= itot_support(dep):
        return ClampedProbability(1.0, True)
    r_star = _invert_itot(dep, i)
    return ClampedProbability(1.0 - rdom_cdf(dep, r_star), False)


def itot_cdf_values(dep: Deployment, values):
    return np.array([itot_cdf_di(dep, float(i)).value for i in np.ravel(values)]).reshape(np.shape(values))


# ============================
# MIXING OVER r_dom
# ============================
def rdom_upper(dep: Deployment, tail=TAIL_MASS):
    hi = 1.5 * dep.r_exc
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if 1.0 - rdom_cdf(dep, hi) < tail:
            return hi
        hi *= 1.5
    raise ConvergenceError("r_dom tail did not fall below the truncation mass")


def expect_over_rdom(dep: Deployment, g):
    """
    E[g(R_dom)] for array-valued g. Probability mass the quadrature misses is
    assigned to an atom at r_exc, where the law concentrates as r_exc grows.
    """
    check_regime(dep, "expect_over_rdom")
    hi = rdom_upper(dep)
    ladder = dep.r_exc * (1.0 + np.logspace(-8, -1, 8))
    points = [p for p in ladder if p < hi]
    shape = np.shape(g(dep.r_exc))

    def integrand(r):
        density = rdom_pdf(dep, r)
        return np.append(np.ravel(g(r)) * density, density)

    values, err, info = quad_vec(
        integrand, dep.r_exc, hi, epsrel=1e-8, epsabs=1e-13, norm="max",
        points=points, limit=4000, full_output=True,
    )
    if not info.success:
        raise ConvergenceError(f"r_dom mixing integral did not converge ({info.message})")
    mass = values[-1]
    atom = max(0.0, 1.0 - mass)
    logger.debug("r_dom mixing: mass=%.10f atom=%.2e err=%.2e", mass, atom, err)
    return (values[:-1] + atom * np.ravel(g(dep.r_exc))).reshape(shape)
