"""Phase-mismatch factors of the two-photon mode function and their linearization.

Coordinates are always ordered ``x = (q_s^x, q_s^y, Omega_s, q_i^x, q_i^y, Omega_i)``
with transverse momenta in rad/um and frequency detunings in rad/fs.

Geometry: signal and idler propagate at internal angles ``phi_s`` and ``phi_i``
on opposite sides of the pump, which is why the idler enters the transverse
mismatch with a minus sign. The pump is extraordinary at the cut angle, signal
and idler are ordinary (type I in a negative uniaxial crystal). Angles are
internal; refraction at the crystal faces is not modelled.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import dispersion
from .dispersion import C_UM_PER_FS, CrystalModel, ORDINARY
from .errors import DomainError, PhaseMatchingError, ValidationError

COORDS = ("q_s^x", "q_s^y", "Omega_s", "q_i^x", "q_i^y", "Omega_i")
QSX, QSY, WS, QIX, QIY, WI = range(6)
MOMENTUM_IDX = (QSX, QSY, QIX, QIY)
FREQUENCY_IDX = (WS, WI)

#: Natural scale of each coordinate, used to size finite-difference steps.
NATURAL_SCALE = np.array([0.1, 0.1, 0.01, 0.1, 0.1, 0.01])

ENERGY_TOL = 1e-9
CUT_ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class Config:
    """Physical description of one down-conversion setup.

    Lengths are in um, angles in radians, filter half-widths (at 1/e, in
    wavelength) in nm. ``w_s_um``/``w_i_um`` may be ``inf`` (single transverse
    mode collected) and ``dl_s_nm``/``dl_i_nm`` may be ``0`` (single frequency)
    or ``inf`` (no filter). A collection width of 0 means no spatial filter.

    The pump spectrum is given by at most one of ``pump_duration_fs`` and
    ``pump_bandwidth_nm``; leaving both unset selects a continuous-wave pump.
    A duration of 0 drops the pump's spectral envelope altogether.

    ``rho0=None`` computes the walk-off from the cut angle; ``theta=None``
    solves for the cut angle that phase-matches the central frequencies.
    """

    crystal: CrystalModel
    length_um: float
    lambda_p_um: float
    lambda_s_um: float
    lambda_i_um: float
    w_p_um: float
    w_s_um: float = 100.0
    w_i_um: float = 100.0
    dl_s_nm: float = math.inf
    dl_i_nm: float = math.inf
    phi_s: float = 0.0
    phi_i: float = 0.0
    pump_duration_fs: float | None = None
    pump_bandwidth_nm: float | None = None
    alpha: float = 0.0
    rho0: float | None = 0.0
    beta: float = 0.455
    theta: float | None = field(default=None)

    def __post_init__(self):
        inv = 1.0 / self.lambda_p_um - 1.0 / self.lambda_s_um - 1.0 / self.lambda_i_um
        if not abs(inv) <= ENERGY_TOL / self.lambda_p_um:
            raise ValidationError(
                "energy conservation violated: 1/lambda_p != 1/lambda_s + 1/lambda_i "
                f"({self.lambda_p_um}, {self.lambda_s_um}, {self.lambda_i_um} um)"
            )
        if not self.length_um > 0 or not math.isfinite(self.length_um):
            raise ValidationError(f"crystal length must be positive and finite, got {self.length_um}")
        if not self.w_p_um > 0 or not math.isfinite(self.w_p_um):
            raise ValidationError(f"pump waist must be positive and finite, got {self.w_p_um}")
        for name in ("w_s_um", "w_i_um", "dl_s_nm", "dl_i_nm"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValidationError(f"{name} must be >= 0, got {value}")
        if self.pump_duration_fs is not None and self.pump_bandwidth_nm is not None:
            raise ValidationError("give either pump_duration_fs or pump_bandwidth_nm, not both")
        for name in ("pump_duration_fs", "pump_bandwidth_nm"):
            value = getattr(self, name)
            if value is not None and not (value >= 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be finite and >= 0, got {value}")
        for name in ("phi_s", "phi_i"):
            if not abs(getattr(self, name)) < math.pi / 2:
                raise ValidationError(f"{name} must lie in (-pi/2, pi/2)")
        if self.rho0 is not None and not 0 <= self.rho0 < math.pi / 2:
            raise ValidationError(f"rho0 must lie in [0, pi/2), got {self.rho0}")
        if self.theta is not None and not 0 <= self.theta <= math.pi / 2:
            raise ValidationError(f"theta must lie in [0, pi/2], got {self.theta}")
        if not self.beta > 0:
            raise ValidationError("beta must be positive")

    @property
    def is_cw(self):
        return self.pump_duration_fs is None and self.pump_bandwidth_nm is None

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Linearization:
    """First-order expansion of both mismatch factors about ``x = 0``."""

    d0_const: float
    d0_grad: np.ndarray
    dk_const: float
    dk_grad: np.ndarray


def omega0(wavelength_um):
    return 2.0 * math.pi * C_UM_PER_FS / wavelength_um


@functools.lru_cache(maxsize=512)
def cut_angle(config: Config) -> float:
    """Cut angle used for ``config``: the stored one, else the solved one."""
    if config.theta is not None:
        return config.theta
    return solve_cut_angle(config)


def walkoff(config: Config) -> float:
    """Walk-off angle used for ``config``."""
    if config.rho0 is not None:
        return config.rho0
    return dispersion.walkoff_angle(config.crystal, cut_angle(config), config.lambda_p_um)


def _k_longitudinal(crystal, axis, omega, q2, label):
    wl = 2.0 * math.pi * C_UM_PER_FS / omega
    n = dispersion.refractive_index(crystal, axis, wl)
    k2 = (omega * n / C_UM_PER_FS) ** 2 - q2
    if np.any(k2 <= 0):
        raise DomainError(f"{label} wave is evanescent (|q|^2 exceeds (omega n / c)^2)")
    return np.sqrt(k2)


def _deltas(config, x, theta, rho0):
    """Exact mismatches at ``x`` of shape ``(6,)`` or ``(6, ...)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[:1] != (6,):
        raise ValidationError("x must have 6 coordinates along its first axis")
    qsx, qsy, ws, qix, qiy, wi = x
    cs, ss = math.cos(config.phi_s), math.sin(config.phi_s)
    ci, si = math.cos(config.phi_i), math.sin(config.phi_i)
    k_s = _k_longitudinal(config.crystal, ORDINARY, omega0(config.lambda_s_um) + ws, qsx**2 + qsy**2, "signal")
    k_i = _k_longitudinal(config.crystal, ORDINARY, omega0(config.lambda_i_um) + wi, qix**2 + qiy**2, "idler")
    d0 = qsy * cs + qiy * ci + k_s * ss - k_i * si
    # pump transverse momentum is (q_s^x + q_i^x, Delta_0)
    k_p = _k_longitudinal(
        config.crystal,
        dispersion.extraordinary(theta),
        omega0(config.lambda_p_um) + ws + wi,
        (qsx + qix) ** 2 + d0**2,
        "pump",
    )
    t = math.tan(rho0)
    dk = (
        k_p
        - k_s * cs
        - k_i * ci
        - qsy * ss
        + qiy * si
        + (qsx + qix) * t * math.cos(config.alpha)
        + d0 * t * math.sin(config.alpha)
    )
    if x.ndim == 1:
        return float(d0), float(dk)
    return d0, dk


def delta0_exact(config: Config, x) -> float:
    """Transverse mismatch Delta_0 (rad/um) at the point ``x``.

    ``x`` may also be an array of shape ``(6, ...)`` of points.
    """
    return _deltas(config, x, cut_angle(config), walkoff(config))[0]


def deltak_exact(config: Config, x) -> float:
    """Longitudinal mismatch Delta_k (rad/um) at the point ``x``."""
    return _deltas(config, x, cut_angle(config), walkoff(config))[1]


def linearize(config: Config) -> Linearization:
    """Expand Delta_0 and Delta_k to first order in all six coordinates.

    Uses dk_n/dOmega_n = N_g/c and dk_n/dq = 0 at q = 0. The pump term picks up
    a transverse contribution only when Delta_0 is nonzero at the center,
    which does not happen for symmetric degenerate geometries.
    """
    theta, rho0 = cut_angle(config), walkoff(config)
    c = C_UM_PER_FS
    ng_s = dispersion.group_index(config.crystal, ORDINARY, config.lambda_s_um)
    ng_i = dispersion.group_index(config.crystal, ORDINARY, config.lambda_i_um)
    ng_p = dispersion.group_index(config.crystal, dispersion.extraordinary(theta), config.lambda_p_um)
    cs, ss = math.cos(config.phi_s), math.sin(config.phi_s)
    ci, si = math.cos(config.phi_i), math.sin(config.phi_i)

    d0_const, dk_const = _deltas(config, np.zeros(6), theta, rho0)
    d0_grad = np.array([0.0, cs, ss * ng_s / c, 0.0, ci, -si * ng_i / c])

    k_p0 = float(
        _k_longitudinal(config.crystal, dispersion.extraordinary(theta), omega0(config.lambda_p_um), d0_const**2, "pump")
    )
    dkp = np.array([0.0, 0.0, ng_p / c, 0.0, 0.0, ng_p / c])
    # exact d k_p / d Omega includes the transverse correction through d0_const
    n_p = dispersion.refractive_index(config.crystal, dispersion.extraordinary(theta), config.lambda_p_um)
    kp_free = omega0(config.lambda_p_um) * n_p / c
    dkp *= kp_free / k_p0
    dkp -= (d0_const / k_p0) * d0_grad

    t = math.tan(rho0)
    dk_grad = dkp + np.array(
        [
            t * math.cos(config.alpha),
            -ss,
            -cs * ng_s / c,
            t * math.cos(config.alpha),
            si,
            -ci * ng_i / c,
        ]
    )
    dk_grad = dk_grad + t * math.sin(config.alpha) * d0_grad
    return Linearization(float(d0_const), d0_grad, float(dk_const), dk_grad)


def _dk_center(config, theta):
    rho0 = config.rho0
    if rho0 is None:
        rho0 = dispersion.walkoff_angle(config.crystal, theta, config.lambda_p_um)
    return _deltas(config, np.zeros(6), theta, rho0)[1]


def solve_cut_angle(config: Config) -> float:
    """Cut angle in [0, pi/2] that zeroes Delta_k at the central frequencies.

    Plain bisection on the full bracket, so the result is deterministic.
    """
    lo, hi = 0.0, math.pi / 2
    f_lo, f_hi = _dk_center(config, lo), _dk_center(config, hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise PhaseMatchingError(
            f"no phase matching for {config.crystal.name}: Delta_k at x=0 is {f_lo:.6g} rad/um "
            f"at theta=0 and {f_hi:.6g} rad/um at theta=pi/2"
        )
    theta = optimize.bisect(lambda th: _dk_center(config, th), lo, hi, xtol=1e-15, maxiter=200)
    residual = _dk_center(config, theta)
    if abs(residual) >= CUT_ANGLE_TOL:
        raise PhaseMatchingError(f"bisection stalled with |Delta_k| = {abs(residual):.3g} rad/um")
    return theta


def finite_difference_gradients(config: Config, rel_step=1e-4):
    """Central-difference gradients of the exact mismatch evaluators.

    Step for coordinate j is ``rel_step * NATURAL_SCALE[j]``.
    """
    theta, rho0 = cut_angle(config), walkoff(config)
    g0, gk = np.zeros(6), np.zeros(6)
    for j in range(6):
        h = rel_step * NATURAL_SCALE[j]
        e = np.zeros(6)
        e[j] = h
        p0, pk = _deltas(config, e, theta, rho0)
        m0, mk = _deltas(config, -e, theta, rho0)
        g0[j] = (p0 - m0) / (2 * h)
        gk[j] = (pk - mk) / (2 * h)
    return g0, gk
