"""Eigenmode analysis tests: classification, pair finding, pair sector."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darklattice import geometry, hamiltonian, spectrum
from darklattice.geometry import GaussianMode, LatticeSpec
from darklattice.hamiltonian import EffectiveHamiltonian, Variant


@pytest.fixture(scope="module")
def flat_modes():
    spec = LatticeSpec(4, 0.6, 2.0)
    sites = geometry.build_arrays(spec)
    ham = hamiltonian.build_scalar(sites)
    return spec, sites, ham, spectrum.diagonalize(ham)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 9), st.integers(0, 8), st.integers(0, 8))
def test_quasi_momentum_plane_wave(n, nx, ny):
    nx, ny = nx % n, ny % n
    spacing = 0.7
    q = -np.pi / spacing + 2.0 * np.pi * np.array([nx, ny]) / (n * spacing)
    j = np.arange(n) * spacing
    v = np.exp(1j * q[0] * j)[:, None] * np.exp(1j * q[1] * j)[None, :]
    qbar = spectrum.quasi_momentum(v.ravel(), n, spacing)
    assert qbar == pytest.approx(float(np.hypot(*q)), abs=1e-9)


def test_quasi_momentum_rejects_zero():
    with pytest.raises(ValueError):
        spectrum.quasi_momentum(np.zeros(9), 3, 0.5)


def test_eigenmode_sum_rules(flat_modes):
    spec, _, ham, modes = flat_modes
    n = ham.dim
    # trace preservation: rates sum to the atom count, shifts cancel
    assert sum(m.rate for m in modes) == pytest.approx(n, rel=1e-10)
    assert sum(m.shift for m in modes) == pytest.approx(0.0, abs=1e-9)
    assert all(m.rate >= -1e-9 for m in modes)
    rates = [m.rate for m in modes]
    assert rates == sorted(rates)


def test_parity_sector_solve_matches_dense(flat_modes):
    _, _, ham, modes = flat_modes
    dense = np.sort_complex(np.linalg.eigvals(ham.matrix))
    split = np.sort_complex(np.array([m.eps for m in modes]))
    assert np.allclose(dense, split, atol=1e-10)
    # parity labels are exact and eigen residuals vanish
    for m in modes[:6]:
        assert m.parity in (+1, -1)
        res = ham.matrix @ m.vector - m.eps * m.vector
        assert np.max(np.abs(res)) < 1e-10
        n = ham.dim // 2
        assert np.allclose(m.vector[:n], m.parity * m.vector[n:], atol=1e-10)


def test_find_dark_bright(small_curved_system):
    pair = small_curved_system.pair
    assert pair.dark.rate < pair.bright.rate
    assert pair.ratio < 1.0
    assert pair.dark.qbar is not None and pair.bright.qbar is not None
    assert {pair.dark.parity, pair.bright.parity} == {+1, -1}


def test_find_dark_bright_needs_labels():
    with pytest.raises(ValueError):
        spectrum.find_dark_bright([])


def test_curvature_optimization_beats_flat(small_curved_system):
    opt = small_curved_system.opt
    _, _, _, flat_pair = spectrum.analyze(LatticeSpec(4, 0.5, 2.0))
    assert opt.pair.ratio < flat_pair.ratio
    assert not opt.bound_hit
    assert 0.5 <= opt.waist <= 2.0


def test_gaussian_overlap_of_sampled_mode(small_curved_system):
    sites = small_curved_system.sites
    mode = GaussianMode(small_curved_system.spec.waist)
    array1 = [s for s in sites if s.index[2] == 1]
    e = spectrum.mode_amplitude(mode, array1)
    assert spectrum.gaussian_overlap(e, mode, sites) == pytest.approx(1.0, abs=1e-12)
    # dark/bright overlaps were filled by analyze() for the curved geometry
    assert small_curved_system.pair.dark.overlap > 0.5


def test_four_level_pairs():
    sites = geometry.build_arrays(LatticeSpec(3, 0.7, 2.0))
    ham = hamiltonian.build_vector(sites)
    modes = spectrum.diagonalize(ham)
    dark2, bright2 = spectrum.four_level_pairs(modes)
    assert len(dark2) == 2 and len(bright2) == 2
    assert max(m.rate for m in dark2) <= min(m.rate for m in bright2)
    # the four selected modes are the four lowest in quasi-momentum
    labeled = sorted(
        (m for m in modes if m.parity is not None and m.qbar is not None),
        key=lambda m: m.qbar,
    )
    picked = {id(m) for m in dark2 + bright2}
    assert picked == {id(m) for m in labeled[:4]}
    with pytest.raises(ValueError):
        spectrum.four_level_pairs(modes[:2])


def _toy_symmetric(n: int, seed: int) -> EffectiveHamiltonian:
    rng = np.random.default_rng(seed)
    a = 0.1 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    h = 0.5 * (a + a.T)
    np.fill_diagonal(h, -0.5j)
    return EffectiveHamiltonian(h, tuple(range(n)), Variant.SCALAR, None)


def test_pair_quotient_closed_form_matches_bilinear():
    ham = _toy_symmetric(6, seed=5)
    vals, vecs = np.linalg.eig(ham.matrix)
    mat2, pairs = hamiltonian.build_two_excitation_sparse(ham)
    for k in range(6):
        eps, v = complex(vals[k]), vecs[:, k]
        psi = spectrum.pair_product_state(v, pairs)
        direct = spectrum.pair_rayleigh_quotient(mat2.toarray(), psi)
        closed = spectrum.pair_quotient_closed_form(eps, v)
        assert direct == pytest.approx(closed, rel=1e-9)


def test_pair_quotient_rejects_self_orthogonal():
    with pytest.raises(ValueError):
        spectrum.pair_rayleigh_quotient(np.eye(2, dtype=complex), np.array([1.0, 1j]))


def test_two_excitation_rate_runs(small_curved_system):
    res = spectrum.two_excitation_rate(small_curved_system.spec)
    assert res.exact_rate > 0
    assert 0 < res.ipr <= 1
    assert res.single_rate == pytest.approx(small_curved_system.pair.dark.rate)
    # perturbative estimate: per-excitation rate gains ipr/2 of free decay
    expected = res.single_rate * (1.0 - res.ipr / 2.0) + res.ipr / 2.0
    assert res.perturbative_rate == pytest.approx(expected, rel=1e-12)


def test_defect_monte_carlo_deterministic():
    spec = LatticeSpec(3, 0.6, 2.0)
    a = spectrum.defect_monte_carlo(spec, 0.1, realizations=8, seed=7)
    b = spectrum.defect_monte_carlo(spec, 0.1, realizations=8, seed=7)
    assert np.array_equal(a.dark_rates, b.dark_rates)
    assert a.mean_dark > 0 and a.mean_bright > 0
    c = spectrum.defect_monte_carlo(spec, 0.1, realizations=8, seed=8)
    assert not np.array_equal(a.dark_rates, c.dark_rates)
    with pytest.raises(ValueError):
        spectrum.defect_monte_carlo(spec, 0.9, realizations=1, seed=0)


def test_defect_free_draws_reproduce_ideal_rates():
    spec = LatticeSpec(3, 0.6, 2.0)
    _, _, _, pair = spectrum.analyze(spec)
    stats = spectrum.defect_monte_carlo(spec, 0.0, realizations=3, seed=0)
    assert np.allclose(stats.dark_rates, pair.dark.rate)
    assert np.allclose(stats.bright_rates, pair.bright.rate)


def test_field_profile_single_source():
    from darklattice import greens

    site = geometry.AtomSite((1, 1, 1), np.zeros(3))
    pts = np.array([[0.0, 0.0, 1.0], [0.3, -0.2, 0.8]])
    psi = spectrum.field_profile(np.array([1.0 + 0j]), [site], pts)
    for k, r in enumerate(pts):
        assert psi[k] == pytest.approx(greens.scalar_green(r), rel=1e-12)
    with pytest.raises(ValueError):
        spectrum.field_profile(np.array([1.0 + 0j]), [site], np.array([[0.0, 0.0, 1e-6]]))
