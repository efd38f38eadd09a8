"""
Average interference at the radar by Campbell's theorem.

Four summaries are provided: the worst-case mean under circumcircle-bounded
cells (CBC), the nominal mean and standard deviation under average-area
equivalent circular cells (AAECC), and the far-field closed forms of both.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from coexistApp.antenna import angular_quadrature, array_gain, bf_gain_max
from coexistApp.choices import SummaryModel
from coexistApp.exceptions import ConvergenceError
from coexistApp.stochgeom import (
    Deployment,
    check_regime,
    circumradius_rule,
    pathloss_gain,
    watts_to_dbm,
)

logger = logging.getLogger(__name__)

RADIAL_EPSREL = 1e-8
RADIAL_LIMIT = 2000


@dataclass(frozen=True)
class InterferenceSummary:
    mean_w: float
    std_w: float
    model: str
    quadrature_error: float = 0.0
    std_defined: bool = True

    def __post_init__(self):
        if self.mean_w < 0 or self.std_w < 0 or self.quadrature_error < 0:
            raise ValueError("interference summary values must be nonnegative")

    @property
    def mean_dbm(self):
        return watts_to_dbm(self.mean_w) if self.mean_w > 0 else None

    @property
    def std_dbm(self):
        if not self.std_defined or self.std_w <= 0:
            return None
        return watts_to_dbm(self.std_w)

    def __str__(self):
        return f"{self.model}: mean={self.mean_w:.4e} W std={self.std_w:.4e} W"


# ============================
# PER-BS KERNEL
# ============================
def _per_bs(dep: Deployment, r, theta, bs_gain, exact_geometry=True):
    r = np.asarray(r, dtype=float)
    if exact_geometry:
        phi_t = np.arctan2(dep.dh, r)
        d = np.hypot(r, dep.dh)
    else:
        phi_t = np.zeros_like(r)
        d = r
    steer = dep.rad_point
    # arrival elevation at the radar mirrors the departure elevation at the BS
    g_rad = array_gain(dep.rad_array, theta, -phi_t, steer.azimuth, steer.elevation)
    return pathloss_gain(d, dep) * g_rad * (dep.p_bs / dep.k_users) * bs_gain(phi_t)


def bs_interference(dep: Deployment, r, theta, phi_m, exact_geometry=True):
    """
    Worst-case interference power (W) from BSs at ground range r and azimuth
    theta whose beams reach down to elevation phi_m.
    """
    return _per_bs(
        dep, r, theta, lambda phi_t: bf_gain_max(dep.bs_array, phi_t, phi_m), exact_geometry
    )


def circumradius_gain(dep: Deployment, phi, pdf_kmax=3):
    """BS gain bound towards elevation phi averaged over the circumradius law."""
    nodes, weights = circumradius_rule(dep.density, pdf_kmax)
    phi = np.asarray(phi, dtype=float)
    gains = bf_gain_max(dep.bs_array, phi[..., None], dep.phi_m(nodes))
    value = gains @ weights
    return float(value) if np.ndim(value) == 0 else value


# ============================
# CAMPBELL INTEGRALS
# ============================
def _campbell(dep: Deployment, bs_gain, power=1):
    """
    lambda * integral over the half-plane outside r_exc of kernel**power,
    with r = r_exc/u mapping the radial tail onto (0, 1].
    """
    theta, weights = angular_quadrature(dep.rad_array.n_az, dep.rad_point)

    def integrand(u):
        r = dep.r_exc / u
        kernel = _per_bs(dep, r, theta, bs_gain)
        return kernel ** power * r * dep.r_exc / u ** 2

    with np.errstate(over="ignore", under="ignore"):
        values, err, info = quad_vec(
            integrand, 0.0, 1.0, epsrel=RADIAL_EPSREL, norm="max",
            limit=RADIAL_LIMIT, full_output=True,
        )
    if not info.success:
        raise ConvergenceError(f"radial Campbell integral did not converge ({info.message})")
    total = dep.density * float(weights @ values)
    error = dep.density * float(np.sum(weights)) * float(err)
    logger.debug("campbell power=%d total=%.6e err=%.2e intervals=%d", power, total, error, info.intervals.shape[0])
    return total, error


def _aaecc_gain(dep: Deployment):
    phi_m = float(dep.phi_m(dep.r_a))
    return lambda phi_t: bf_gain_max(dep.bs_array, phi_t, phi_m)


def avg_interference_cbc(dep: Deployment, pdf_kmax=3):
    mean, error = _campbell(dep, lambda phi_t: circumradius_gain(dep, phi_t, pdf_kmax))
    return InterferenceSummary(mean, 0.0, SummaryModel.CBC, error, std_defined=False)


def avg_interference_aaecc(dep: Deployment):
    bs_gain = _aaecc_gain(dep)
    mean, mean_err = _campbell(dep, bs_gain)
    second, second_err = _campbell(dep, bs_gain, power=2)
    return InterferenceSummary(mean, math.sqrt(second), SummaryModel.AAECC, mean_err)


# ============================
# FAR-FIELD CLOSED FORMS
# ============================
def _horizon_radar_integrals(dep: Deployment):
    theta, weights = angular_quadrature(dep.rad_array.n_az, dep.rad_point)
    steer = dep.rad_point
    g_rad = array_gain(dep.rad_array, theta, 0.0, steer.azimuth, steer.elevation)
    return float(weights @ g_rad), float(weights @ g_rad ** 2)


def _mean_scale(dep: Deployment):
    return dep.density * dep.p_bs * dep.beta0 / (dep.k_users * (dep.alpha - 2.0) * dep.r_exc ** (dep.alpha - 2.0))


def avg_interference_cbc_approx(dep: Deployment, pdf_kmax=3):
    check_regime(dep, "avg_interference_cbc_approx")
    g_rad, _ = _horizon_radar_integrals(dep)
    mean = _mean_scale(dep) * g_rad * circumradius_gain(dep, 0.0, pdf_kmax)
    return InterferenceSummary(mean, 0.0, SummaryModel.CBC_APPROX, std_defined=False)


def avg_interference_aaecc_approx(dep: Deployment):
    check_regime(dep, "avg_interference_aaecc_approx")
    g_rad, g_rad_sq = _horizon_radar_integrals(dep)
    g_bs = _horizon_gain(dep)
    mean = _mean_scale(dep) * g_rad * g_bs
    std = (
        math.sqrt(dep.density) * dep.p_bs * dep.beta0 * g_bs
        / (math.sqrt(2.0 * dep.alpha - 2.0) * dep.k_users * dep.r_exc ** (dep.alpha - 1.0))
        * math.sqrt(g_rad_sq)
    )
    return InterferenceSummary(mean, std, SummaryModel.AAECC_APPROX)


def _horizon_gain(dep: Deployment):
    return bf_gain_max(dep.bs_array, 0.0, float(dep.phi_m(dep.r_a)))


def eta_ca(dep: Deployment, pdf_kmax=3):
    """Worst-case to nominal gap: circumradius-averaged BS gain over the AAECC gain."""
    return circumradius_gain(dep, 0.0, pdf_kmax) / _horizon_gain(dep)


def eta_ca_draws(dep: Deployment, radii):
    """Per-cell gain ratios for sampled circumradii; their mean estimates eta_ca."""
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(radii <= 0):
        raise ValueError("need at least one positive circumradius")
    return np.atleast_1d(bf_gain_max(dep.bs_array, 0.0, dep.phi_m(radii))) / _horizon_gain(dep)


def eta_ca_ceiling(dep: Deployment):
    """Largest eta_ca any circumradius law allows: full array gain over the AAECC gain."""
    return dep.bs_array.m / _horizon_gain(dep)


def exclusion_radius_for_mean(dep: Deployment, i_th, model=SummaryModel.AAECC_APPROX, pdf_kmax=3):
    """
    Smallest exclusion radius keeping the far-field average interference at or
    below i_th (W). The mean scales as r_exc^-(alpha-2), so one evaluation at
    dep.r_exc fixes the constant.
    """
    if not i_th > 0:
        raise ValueError("interference threshold must be positive")
    if model in (SummaryModel.CBC, SummaryModel.CBC_APPROX):
        summary = avg_interference_cbc_approx(dep, pdf_kmax)
    else:
        summary = avg_interference_aaecc_approx(dep)
    constant = summary.mean_w * dep.r_exc ** (dep.alpha - 2.0)
    return (constant / i_th) ** (1.0 / (dep.alpha - 2.0))
