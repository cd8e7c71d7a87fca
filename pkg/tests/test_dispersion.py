import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdcpurity import dispersion as d
from spdcpurity.errors import RangeError, ValidationError

import independent

# 20-digit values from an arbitrary-precision evaluation of the same Sellmeier sets
PINNED_INDEX = [
    (d.BBO, d.ORDINARY, 0.810, 1.66107240583708645739),
    (d.LIIO3, d.ORDINARY, 0.405, 1.94413212274841910750),
    (d.LIIO3, d.ORDINARY, 0.810, 1.86700323903430882492),
    (d.LIIO3, d.extraordinary(math.pi / 2), 0.405, 1.78238396107478804204),
]


@pytest.mark.parametrize("crystal, axis, wl, expected", PINNED_INDEX)
def test_refractive_index_pinned(crystal, axis, wl, expected):
    assert d.refractive_index(crystal, axis, wl) == pytest.approx(expected, rel=1e-13)


def test_index_brackets():
    assert 1.6 < d.refractive_index(d.BBO, d.ORDINARY, 0.810) < 1.7
    assert 1.8 < d.refractive_index(d.LIIO3, d.ORDINARY, 0.405) < 2.0


@pytest.mark.parametrize("crystal", [d.BBO, d.LIIO3])
@pytest.mark.parametrize("wl", [0.36, 0.405, 0.702, 0.81, 1.0])
def test_extraordinary_endpoints(crystal, wl):
    no, ne = d.principal_indices(crystal, wl)
    assert d.refractive_index(crystal, d.extraordinary(0.0), wl) == pytest.approx(no, rel=1e-15)
    assert d.refractive_index(crystal, d.extraordinary(math.pi / 2), wl) == pytest.approx(ne, rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(theta=st.floats(0, math.pi / 2), wl=st.floats(0.36, 1.05))
def test_extraordinary_matches_duplicate_and_lies_between(theta, wl):
    for crystal in (d.BBO, d.LIIO3):
        n = d.refractive_index(crystal, d.extraordinary(theta), wl)
        assert n == pytest.approx(independent.index(crystal.name, theta, wl), rel=1e-14)
        no, ne = d.principal_indices(crystal, wl)
        assert ne - 1e-15 <= n <= no + 1e-15


@pytest.mark.parametrize("crystal", [d.BBO, d.LIIO3])
def test_range_errors_name_crystal_and_bound(crystal):
    lo, hi = crystal.range_um
    with pytest.raises(RangeError, match=f"{crystal.name}.*lower bound {lo}"):
        d.refractive_index(crystal, d.ORDINARY, lo * 0.9)
    with pytest.raises(RangeError, match=f"{crystal.name}.*upper bound {hi}"):
        d.refractive_index(crystal, d.ORDINARY, hi * 1.1)
    with pytest.raises(RangeError):
        d.group_index(crystal, d.ORDINARY, hi)
    with pytest.raises(RangeError):
        d.group_index(crystal, d.ORDINARY, lo)


@pytest.mark.parametrize("crystal", [d.BBO, d.LIIO3])
def test_birefringent_and_above_one_across_range(crystal):
    lo, hi = crystal.range_um
    wl = np.linspace(lo, hi, 200)
    no, ne = d.principal_indices(crystal, wl)
    assert np.all(no > 1) and np.all(ne > 1)
    assert np.all(np.abs(no - ne) > 1e-3)


@pytest.mark.parametrize(
    "crystal, span", [(d.BBO, (0.30, 1.0)), (d.LIIO3, (0.35, 1.0))]
)
@pytest.mark.parametrize("axis", [d.ORDINARY, d.extraordinary(0.9)])
def test_normal_dispersion_monotone(crystal, span, axis):
    n = d.refractive_index(crystal, axis, np.linspace(*span, 100))
    assert np.all(np.diff(n) < 0)


@pytest.mark.parametrize(
    "axis, wl, expected",
    [(d.ORDINARY, 0.810, 1.68503841784283626898), (d.ORDINARY, 0.702, 1.69355220460398780644)],
)
def test_group_index_pinned(axis, wl, expected):
    assert d.group_index(d.BBO, axis, wl) == pytest.approx(expected, rel=1e-12)


def test_group_index_fd_agrees_at_702nm():
    for crystal in (d.BBO, d.LIIO3):
        for axis in (d.ORDINARY, d.extraordinary(0.6)):
            a = d.group_index(crystal, axis, 0.702)
            f = d.group_index(crystal, axis, 0.702, method="fd")
            assert abs(a - f) <= 1e-6 * a


@settings(max_examples=50, deadline=None)
@given(wl=st.floats(0.37, 1.04), theta=st.floats(0, math.pi / 2))
def test_group_index_paths_agree(wl, theta):
    for crystal in (d.BBO, d.LIIO3):
        for axis in (d.ORDINARY, d.extraordinary(theta)):
            a = d.group_index(crystal, axis, wl)
            assert a == pytest.approx(d.group_index(crystal, axis, wl, method="fd"), rel=1e-6)
            assert a > d.refractive_index(crystal, axis, wl)


def test_group_index_constant_index():
    flat = d.CrystalModel("flat", (2.25, 0.0, 0.0, 0.0), (2.0, 0.0, 0.0, 0.0), (0.2, 2.0))
    assert d.group_index(flat, d.ORDINARY, 0.8) == pytest.approx(1.5, rel=1e-15)
    assert d.group_index(flat, d.ORDINARY, 0.8, method="fd") == pytest.approx(1.5, rel=1e-12)


def test_group_index_unknown_method():
    with pytest.raises(ValidationError):
        d.group_index(d.BBO, d.ORDINARY, 0.8, method="spline")


def test_wave_number():
    assert d.wave_number(1.0, 1.0) == pytest.approx(2 * math.pi, rel=1e-15)
    assert d.wave_number(1.5, 0.810) == pytest.approx(2 * math.pi * 1.5 / 0.810, rel=1e-15)
    n = d.refractive_index(d.LIIO3, d.ORDINARY, 0.405)
    assert d.wave_number(n, 0.405) == pytest.approx(30.1613392317746351416, rel=1e-13)
    with pytest.raises(ValidationError):
        d.wave_number(0.0, 1.0)
    with pytest.raises(ValidationError):
        d.wave_number(1.0, -1.0)


def test_walkoff_pinned_and_edges():
    assert d.walkoff_angle(d.BBO, 0.5, 0.405) == pytest.approx(0.06673858147273000075, rel=1e-12)
    assert d.walkoff_angle(d.BBO, math.pi / 2, 0.405) == 0.0
    assert d.walkoff_angle(d.BBO, 0.0, 0.405) == 0.0
    iso = d.CrystalModel("iso", (2.7, 0.018, 0.018, 0.015), (2.7, 0.018, 0.018, 0.015), (0.2, 2.0))
    assert d.walkoff_angle(iso, 0.7, 0.5) == 0.0
    with pytest.raises(ValidationError):
        d.walkoff_angle(d.BBO, 2.0, 0.405)


@settings(max_examples=40, deadline=None)
@given(theta=st.floats(1e-3, math.pi / 2 - 1e-3))
def test_walkoff_positive_inside(theta):
    for crystal in (d.BBO, d.LIIO3):
        assert d.walkoff_angle(crystal, theta, 0.405) > 0


def test_optical_axis_validation_and_lookup():
    with pytest.raises(ValidationError):
        d.OpticalAxis(d.Polarization.EXTRAORDINARY, -0.1)
    assert d.crystal_by_name("liio3") is d.LIIO3
    with pytest.raises(ValidationError, match="BBO"):
        d.crystal_by_name("KDP")
