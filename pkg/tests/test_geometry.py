"""Geometry unit tests: array construction, Gaussian modes, curvature."""

import math

import numpy as np
import pytest
from numpy.polynomial import hermite as np_hermite

from darklattice import geometry
from darklattice.geometry import GaussianMode, LatticeSpec
from darklattice.greens import K0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_perp=1, spacing=0.5, separation=2.0),
        dict(n_perp=4, spacing=0.0, separation=2.0),
        dict(n_perp=4, spacing=0.5, separation=0.0),
        dict(n_perp=4, spacing=0.5, separation=2.0, waist=-1.0),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        LatticeSpec(**kwargs)


def test_spec_properties():
    spec = LatticeSpec(4, 0.5, 2.0)
    assert not spec.curved
    assert spec.transverse_size == 2.0
    assert spec.n_atoms == 32
    curved = spec.with_waist(1.2)
    assert curved.curved and curved.waist == 1.2


def test_flat_arrays():
    spec = LatticeSpec(3, 0.6, 2.0)
    sites = geometry.build_arrays(spec)
    assert len(sites) == 18
    pos = geometry.positions(sites)
    # first half at z = -L/2, second half at z = +L/2
    assert np.allclose(pos[:9, 2], -1.0)
    assert np.allclose(pos[9:, 2], +1.0)
    # centered square grid with the requested spacing
    xs = np.unique(np.round(pos[:, 0], 12))
    assert np.allclose(np.diff(xs), 0.6)
    assert abs(xs.mean()) < 1e-12
    assert geometry.is_mirror_symmetric(sites)


def test_mirror_symmetry_detects_perturbation():
    sites = geometry.build_arrays(LatticeSpec(2, 0.5, 2.0))
    bad = list(sites)
    bad[-1] = geometry.AtomSite(bad[-1].index, bad[-1].position + np.array([0, 0, 1e-3]))
    assert not geometry.is_mirror_symmetric(bad)


def test_curved_arrays_satisfy_phase_condition():
    spec = LatticeSpec(4, 0.75, 6.0, waist=1.5)
    sites = geometry.build_arrays(spec)
    mode = GaussianMode(1.5)
    assert geometry.is_mirror_symmetric(sites)
    for s in sites:
        x, y, z = s.position
        sign = -1.0 if s.index[2] == 1 else +1.0
        phase = K0 * z + K0 * (x * x + y * y) * 0.5 * mode.inv_radius(z) - mode.gouy(z)
        assert phase == pytest.approx(sign * K0 * 3.0, abs=1e-9)


def test_gaussian_mode_properties():
    mode = GaussianMode(1.3)
    assert mode.rayleigh == pytest.approx(math.pi * 1.3**2)
    assert mode.width(mode.rayleigh) == pytest.approx(1.3 * math.sqrt(2.0))
    assert mode.inv_radius(0.0) == 0.0
    assert mode.gouy(mode.rayleigh) == pytest.approx(math.pi / 4.0)
    with pytest.raises(ValueError):
        GaussianMode(0.0)


def test_hermite_matches_numpy():
    x = np.linspace(-2.0, 2.0, 7)
    for n in range(5):
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        assert np.allclose(geometry._hermite(n, x), np_hermite.hermval(x, coeffs))


def test_tem_modes_orthonormal_in_focal_plane():
    mode = GaussianMode(0.9)
    # fine transverse quadrature grid at z = 0
    n = 301
    span = 5.0
    xs = np.linspace(-span, span, n)
    dx = xs[1] - xs[0]
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([xx, yy, np.zeros_like(xx)], axis=-1)
    fields = {jk: geometry.tem_mode(*jk, mode, pts) for jk in [(0, 0), (1, 0), (0, 1), (1, 1)]}
    for a, fa in fields.items():
        for b, fb in fields.items():
            ip = np.sum(np.conj(fa) * fb) * dx * dx
            expected = 1.0 if a == b else 0.0
            assert abs(ip - expected) < 1e-6


def test_tem_mode_rejects_negative_order():
    with pytest.raises(ValueError):
        geometry.tem_mode(-1, 0, GaussianMode(1.0), (0.0, 0.0, 0.0))


def test_gouy_mismatch():
    zr = math.pi * 1.5**2
    assert geometry.gouy_mismatch(0, 0, 10.0, zr) == 0.0
    expected = 2.0 * math.atan(10.0 / (2.0 * zr))
    assert geometry.gouy_mismatch(1, 0, 10.0, zr) == pytest.approx(expected)
    assert geometry.gouy_mismatch(2, 3, 10.0, zr) == pytest.approx(5.0 * expected)
    with pytest.raises(ValueError):
        geometry.gouy_mismatch(0, 0, -1.0, zr)
