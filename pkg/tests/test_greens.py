"""Field propagator unit tests: frozen oracles and symmetries."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darklattice import greens
from darklattice.greens import CIRCULAR, K0, Polarization

# Independently derived value of the circular-polarization propagator one
# wavelength away on the z axis (kr = 2*pi).
ORACLE_Z1 = 0.0379954438659 - 0.232685251932j


def coords(lo=-3.0, hi=3.0):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


def separated(r):
    return float(np.linalg.norm(r)) > 1e-2


def test_scalar_oracle_on_axis():
    assert greens.scalar_green((0.0, 0.0, 1.0)) == pytest.approx(ORACLE_Z1, abs=1e-10)


def test_self_terms_are_identity():
    assert np.allclose(greens.dyadic_green((0.0, 0.0, 0.0)), np.eye(3))
    assert greens.scalar_green((0.0, 0.0, 0.0)) == pytest.approx(1.0, abs=1e-12)


def test_circular_polarization_is_unit():
    assert np.vdot(CIRCULAR.vector, CIRCULAR.vector).real == pytest.approx(1.0)


def test_polarization_rejects_non_unit():
    with pytest.raises(ValueError):
        Polarization((1.0, 1.0, 0.0))


@settings(max_examples=30, deadline=None)
@given(st.tuples(coords(), coords(), coords()).filter(separated))
def test_dyadic_even_and_symmetric(r):
    g = greens.dyadic_green(r)
    assert np.allclose(g, greens.dyadic_green(tuple(-x for x in r)), atol=1e-12)
    assert np.allclose(g, g.T, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.tuples(coords(), coords(), coords()).filter(separated))
def test_scalar_is_polarization_contraction(r):
    g = greens.dyadic_green(r)
    p = CIRCULAR.vector
    expected = np.conj(p) @ g @ p
    assert greens.scalar_green(r) == pytest.approx(expected, rel=1e-12)


def test_scalar_matrix_matches_pairwise():
    rng = np.random.default_rng(7)
    pos = rng.uniform(-2, 2, size=(5, 3))
    m = greens.scalar_green_matrix(pos)
    for i in range(5):
        for j in range(5):
            expected = 1.0 if i == j else greens.scalar_green(pos[i] - pos[j])
            assert m[i, j] == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert np.allclose(m, m.T)


def test_dyadic_matrix_matches_pairwise():
    rng = np.random.default_rng(11)
    pos = rng.uniform(-2, 2, size=(4, 3))
    g4 = greens.dyadic_green_matrix(pos)
    assert g4.shape == (4, 4, 3, 3)
    for i in range(4):
        for j in range(4):
            expected = np.eye(3) if i == j else greens.dyadic_green(pos[i] - pos[j])
            assert np.allclose(g4[i, j], expected, atol=1e-12)


def test_far_field_decay():
    # |G| falls off as 1/(k r) on axis at large distance
    g10 = abs(greens.scalar_green((0.0, 0.0, 10.0)))
    g20 = abs(greens.scalar_green((0.0, 0.0, 20.0)))
    assert g10 / g20 == pytest.approx(2.0, rel=1e-2)


def test_paraxial_amplitude():
    assert abs(greens.paraxial_green((0.0, 0.0, 5.0))) == pytest.approx(0.2, rel=1e-12)


def test_paraxial_diverges_in_focal_plane():
    with pytest.raises(ValueError):
        greens.paraxial_green((0.3, 0.0, 0.0))


def test_paraxial_transverse_phase_curvature():
    # the off-axis phase advances by k0 * rho^2 / (2 z)
    z = 7.0
    on = greens.paraxial_green((0.0, 0.0, z))
    off = greens.paraxial_green((1.0, 0.0, z))
    phase = np.angle(off / on)
    expected = (K0 / (2 * z)) % (2 * np.pi)
    assert phase % (2 * np.pi) == pytest.approx(expected, abs=1e-9)
