"""Refractive indices, group indices and walk-off for uniaxial crystals.

Both crystals use a four-coefficient Sellmeier form with the wavelength in
microns::

    n^2 = A + B / (lambda^2 - C) - D * lambda^2

Coefficient sources (room temperature, no thermal correction):

* BBO: D. Eimerl et al., J. Appl. Phys. 62, 1968 (1987), valid 0.22-1.06 um.
* LiIO3: K. Kato, IEEE J. Quantum Electron. QE-21, 119 (1985), as tabulated
  in D. N. Nikogosyan, *Nonlinear Optical Crystals* (Springer, 2005). The
  range accepted here is 0.35-5.0 um, which covers the 351-405 nm pumps used
  by the presets.

Both crystals are negative uniaxial (n_e < n_o), so type I phase matching uses
an extraordinary pump and ordinary signal and idler.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import RangeError, ValidationError

#: Speed of light in um/fs.
C_UM_PER_FS = 0.299792458

#: Finite-difference step for the numerical group index, um.
FD_STEP_UM = 1e-4


class Polarization(enum.Enum):
    ORDINARY = "o"
    EXTRAORDINARY = "e"


@dataclass(frozen=True)
class CrystalModel:
    """Uniaxial crystal described by one Sellmeier set per principal axis."""

    name: str
    ordinary: tuple[float, float, float, float]
    extraordinary: tuple[float, float, float, float]
    range_um: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.range_um
        if not 0 < lo < hi:
            raise ValidationError(f"{self.name}: invalid wavelength range {self.range_um}")


@dataclass(frozen=True)
class OpticalAxis:
    """Polarization of a wave and, for extraordinary waves, its angle to the optic axis."""

    polarization: Polarization
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValidationError(f"theta must lie in [0, pi/2], got {self.theta}")


ORDINARY = OpticalAxis(Polarization.ORDINARY)


def extraordinary(theta):
    return OpticalAxis(Polarization.EXTRAORDINARY, theta)


BBO = CrystalModel(
    name="BBO",
    ordinary=(2.7405, 0.0184, 0.0179, 0.0155),
    extraordinary=(2.3730, 0.0128, 0.0156, 0.0044),
    range_um=(0.22, 1.06),
)

LIIO3 = CrystalModel(
    name="LiIO3",
    ordinary=(3.415716, 0.047031, 0.035306, 0.008801),
    extraordinary=(2.918692, 0.035145, 0.028224, 0.003641),
    range_um=(0.35, 5.0),
)

CRYSTALS = {"BBO": BBO, "LiIO3": LIIO3}


def crystal_by_name(name):
    for key, crystal in CRYSTALS.items():
        if key.lower() == str(name).lower():
            return crystal
    raise ValidationError(f"unknown crystal {name!r}; known: {', '.join(CRYSTALS)}")


def _check_range(crystal, wavelength, strict=False):
    lo, hi = crystal.range_um
    wl = np.asarray(wavelength, dtype=float)
    if strict:
        bad_lo, bad_hi = np.any(wl <= lo), np.any(wl >= hi)
    else:
        bad_lo, bad_hi = np.any(wl < lo), np.any(wl > hi)
    if bad_lo or not np.all(np.isfinite(wl)):
        raise RangeError(f"{crystal.name}: wavelength {wavelength} um below lower bound {lo} um")
    if bad_hi:
        raise RangeError(f"{crystal.name}: wavelength {wavelength} um above upper bound {hi} um")


def _sellmeier(coeffs, wl):
    a, b, c, d = coeffs
    l2 = wl * wl
    n2 = a + b / (l2 - c) - d * l2
    dn2 = -2.0 * b * wl / (l2 - c) ** 2 - 2.0 * d * wl
    n = np.sqrt(n2)
    return n, dn2 / (2.0 * n)


def _index_and_slope(crystal, axis, wl):
    no, dno = _sellmeier(crystal.ordinary, wl)
    if axis.polarization is Polarization.ORDINARY:
        return no, dno
    ne, dne = _sellmeier(crystal.extraordinary, wl)
    c2, s2 = math.cos(axis.theta) ** 2, math.sin(axis.theta) ** 2
    n = 1.0 / np.sqrt(c2 / no**2 + s2 / ne**2)
    dn = n**3 * (c2 * dno / no**3 + s2 * dne / ne**3)
    return n, dn


def principal_indices(crystal, wavelength):
    """Return ``(n_o, n_e)`` at ``wavelength`` (um)."""
    _check_range(crystal, wavelength)
    wl = np.asarray(wavelength, dtype=float)
    return _sellmeier(crystal.ordinary, wl)[0], _sellmeier(crystal.extraordinary, wl)[0]


def refractive_index(crystal: CrystalModel, axis: OpticalAxis, wavelength):
    """Phase index along ``axis`` at vacuum wavelength ``wavelength`` (um).

    For extraordinary waves the angle-dependent index
    ``1/n(theta)^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2`` is returned.
    """
    _check_range(crystal, wavelength)
    n, _ = _index_and_slope(crystal, axis, np.asarray(wavelength, dtype=float))
    return float(n) if np.ndim(n) == 0 else n


def group_index(crystal: CrystalModel, axis: OpticalAxis, wavelength, method="analytic"):
    """Group index ``N_g = n - lambda dn/dlambda``.

    ``method="analytic"`` differentiates the Sellmeier form in closed form;
    ``method="fd"`` uses a central difference with step ``FD_STEP_UM``. Both
    require the wavelength to lie strictly inside the tabulated range.
    """
    _check_range(crystal, wavelength, strict=True)
    wl = np.asarray(wavelength, dtype=float)
    if method == "analytic":
        n, dn = _index_and_slope(crystal, axis, wl)
    elif method == "fd":
        h = FD_STEP_UM
        _check_range(crystal, wl - h, strict=True)
        _check_range(crystal, wl + h, strict=True)
        n = _index_and_slope(crystal, axis, wl)[0]
        dn = (_index_and_slope(crystal, axis, wl + h)[0] - _index_and_slope(crystal, axis, wl - h)[0]) / (2 * h)
    else:
        raise ValidationError(f"unknown group-index method {method!r}")
    ng = n - wl * dn
    return float(ng) if np.ndim(ng) == 0 else ng


def wave_number(index, wavelength_vacuum):
    """``k = 2 pi n / lambda`` in rad/um."""
    if not index > 0 or not wavelength_vacuum > 0:
        raise ValidationError("index and wavelength must be positive")
    return 2.0 * math.pi * index / wavelength_vacuum


def walkoff_angle(crystal: CrystalModel, theta, wavelength):
    """Poynting-vector walk-off of an extraordinary wave at ``theta`` (radians).

    tan(rho) = (n(theta)^2 / 2) |1/n_e^2 - 1/n_o^2| sin(2 theta)
    """
    if not 0.0 <= theta <= math.pi / 2:
        raise ValidationError(f"theta must lie in [0, pi/2], got {theta}")
    no, ne = principal_indices(crystal, wavelength)
    n = refractive_index(crystal, extraordinary(theta), wavelength)
    tan_rho = 0.5 * n**2 * abs(1.0 / ne**2 - 1.0 / no**2) * math.sin(2.0 * theta)
    # sin(2 * pi/2) is ~1e-16 in floating point
    return math.atan(max(float(tan_rho), 0.0)) if theta < math.pi / 2 else 0.0
