"""
Half-wavelength uniform rectangular arrays: steering vectors, beamforming
gains, the elevation-limited gain upper bound and the azimuth gain ratio that
shapes equi-interference contours.

Angles are radians. Elevation is negative above the horizon. Gains are linear.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

logger = logging.getLogger(__name__)

# |sin(pi*delta/2)| below this switches a kernel to its analytic limit
SINGULAR_TOL = 1e-9

HALF_PI = 0.5 * np.pi


# ============================
# TYPES
# ============================
@dataclass(frozen=True)
class ArrayConfig:
    n_az: int
    n_el: int

    def __post_init__(self):
        if int(self.n_az) != self.n_az or int(self.n_el) != self.n_el:
            raise ValueError(f"array dimensions must be integers, got {self.n_az}x{self.n_el}")
        if self.n_az < 1 or self.n_el < 1:
            raise ValueError(f"array dimensions must be >= 1, got {self.n_az}x{self.n_el}")

    @property
    def m(self):
        return self.n_az * self.n_el

    def __str__(self):
        return f"{self.n_az}x{self.n_el}"


@dataclass(frozen=True)
class Pointing:
    azimuth: float
    elevation: float

    def __post_init__(self):
        if not (np.isfinite(self.azimuth) and np.isfinite(self.elevation)):
            raise ValueError("pointing angles must be finite")
        if abs(self.elevation) > HALF_PI + 1e-12:
            raise ValueError(f"elevation {self.elevation} outside [-pi/2, pi/2]")
        if abs(self.azimuth) > HALF_PI + 1e-12:
            raise ValueError(f"azimuth {self.azimuth} outside [-pi/2, pi/2]")

    @classmethod
    def from_degrees(cls, azimuth, elevation):
        return cls(float(np.deg2rad(azimuth)), float(np.deg2rad(elevation)))

    def __str__(self):
        return f"({np.rad2deg(self.azimuth):.3f} deg, {np.rad2deg(self.elevation):.3f} deg)"


def _as_output(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


# ============================
# KERNELS
# ============================
def fejer_ratio(n, delta):
    """
    Signed ratio sin(n*x) / (n*sin(x)) with x = pi*delta/2.

    Where sin(x) vanishes (delta a multiple of 2) the limit
    cos(n*x)/cos(x) is returned, so the ratio is +-1 there.
    """
    x = HALF_PI * np.asarray(delta, dtype=float)
    s = np.sin(x)
    singular = np.abs(s) < SINGULAR_TOL
    safe = np.where(singular, 1.0, s)
    ratio = np.sin(n * x) / (n * safe)
    limit = np.cos(n * x) / np.cos(x)
    return np.where(singular, limit, ratio)


def array_gain(array: ArrayConfig, theta, phi, theta_k, phi_k):
    """Vectorized gain of `array` at (theta, phi) when steered to (theta_k, phi_k)."""
    theta, phi, theta_k, phi_k = (np.asarray(a, dtype=float) for a in (theta, phi, theta_k, phi_k))
    d_az = np.sin(theta) * np.cos(phi) - np.sin(theta_k) * np.cos(phi_k)
    d_el = np.sin(phi) - np.sin(phi_k)
    g_az = array.n_az * fejer_ratio(array.n_az, d_az) ** 2
    g_el = array.n_el * fejer_ratio(array.n_el, d_el) ** 2
    return g_az * g_el


# ============================
# OPERATIONS
# ============================
def steering_vector(array: ArrayConfig, p: Pointing):
    m = np.arange(array.n_az)
    n = np.arange(array.n_el)
    a_az = np.exp(-1j * np.pi * m * np.sin(p.azimuth) * np.cos(p.elevation))
    a_el = np.exp(-1j * np.pi * n * np.sin(p.elevation))
    # element m*n_el + n
    return np.kron(a_az, a_el)


def bf_gain(array: ArrayConfig, rx: Pointing, steer: Pointing):
    return float(array_gain(array, rx.azimuth, rx.elevation, steer.azimuth, steer.elevation))


def radar_gain(array: ArrayConfig, steer: Pointing, arrival):
    """
    Receive gain of the radar steered to `steer` for energy arriving from
    `arrival`. `arrival` is a Pointing or an (azimuth, elevation) pair of arrays.
    """
    if isinstance(arrival, Pointing):
        return bf_gain(array, arrival, steer)
    theta, phi = arrival
    return _as_output(array_gain(array, theta, phi, steer.azimuth, steer.elevation))


def bf_gain_max(array: ArrayConfig, phi, phi_m):
    """
    Largest gain a BS with `array` can direct towards elevation `phi` when its
    beams are confined to elevations at or below phi_m (phi_m in [0, pi/2]).

    Three regimes: phi_m <= phi gives the full array gain; phi_m within half a
    null-to-null beamwidth of phi gives the main-lobe value at phi_m; beyond
    that the sidelobe envelope bounds the gain.

    The beams reach elevation offsets sin(phi_m) - sin(phi) up to
    1 - sin(phi). Below the horizon that range nears the grating lobe at 2,
    so the envelope takes the smaller sin^2 of the two ends and never exceeds
    the full array gain.
    """
    phi, phi_m = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(phi_m, dtype=float))
    if np.any(phi_m < 0) or np.any(phi_m > HALF_PI + 1e-12):
        raise ValueError("phi_m must lie in [0, pi/2]")
    if np.any(np.abs(phi) > HALF_PI + 1e-12):
        raise ValueError("phi must lie in [-pi/2, pi/2]")

    s, s_m = np.sin(phi), np.sin(phi_m)
    main_lobe = array.n_az * array.n_el * fejer_ratio(array.n_el, s - s_m) ** 2
    near = np.sin(HALF_PI * (s_m - s)) ** 2
    far = np.sin(HALF_PI * (1.0 - s)) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        envelope = np.minimum(float(array.m), array.n_az / (array.n_el * np.minimum(near, far)))

    gain = np.where(
        phi_m <= phi,
        float(array.m),
        np.where(s_m <= (1.0 + array.n_el * s) / array.n_el, main_lobe, envelope),
    )
    return _as_output(gain)


def azimuth_gain_ratio(n_az, steer: Pointing, theta):
    delta = np.sin(steer.azimuth) * np.cos(steer.elevation) - np.sin(np.asarray(theta, dtype=float))
    return _as_output(fejer_ratio(n_az, delta))


def theta_max(steer: Pointing):
    """Azimuth of the radar main lobe on the horizon."""
    return float(np.arcsin(np.sin(steer.azimuth) * np.cos(steer.elevation)))


# ============================
# ANGULAR QUADRATURE
# ============================
@lru_cache(maxsize=64)
def angular_quadrature(n_az, steer: Pointing, n_nodes=4096, order=16):
    """
    Composite Gauss-Legendre rule on [-pi/2, pi/2] for integrands shaped by
    the radar azimuth kernel. Panels break at the kernel zeros and at the main
    lobe so every panel holds one lobe; each panel is split into sub-panels of
    `order` nodes in proportion to its width.
    """
    s0 = np.sin(steer.azimuth) * np.cos(steer.elevation)
    breaks = [-HALF_PI, HALF_PI, theta_max(steer)]
    if n_az > 1:
        k = np.arange(-2 * n_az, 2 * n_az + 1)
        k = k[k % n_az != 0]
        s = s0 - 2.0 * k / n_az
        breaks.extend(np.arcsin(s[np.abs(s) < 1.0]))
    breaks = np.unique(np.asarray(breaks))
    widths = np.diff(breaks)
    keep = widths > 1e-12
    lo, widths = breaks[:-1][keep], widths[keep]

    n_sub = np.maximum(1, np.round(widths / np.pi * (n_nodes // order))).astype(int)
    x, w = np.polynomial.legendre.leggauss(order)

    nodes, weights = [], []
    for a, width, count in zip(lo, widths, n_sub):
        h = width / count
        starts = a + h * np.arange(count)
        nodes.append((starts[:, None] + 0.5 * h * (x + 1.0)).ravel())
        weights.append(np.tile(0.5 * h * w, count))
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    logger.debug("angular rule: %d panels, %d nodes (n_az=%d)", len(lo), nodes.size, n_az)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights
