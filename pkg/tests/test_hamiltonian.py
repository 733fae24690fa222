"""Hamiltonian assembly tests: parity split, defects, pair sector."""

import numpy as np
import pytest

from darklattice import geometry, hamiltonian
from darklattice.geometry import LatticeSpec
from darklattice.hamiltonian import DefectMask, EffectiveHamiltonian, Variant


@pytest.fixture(scope="module")
def flat_sites():
    return geometry.build_arrays(LatticeSpec(3, 0.6, 2.0))


@pytest.fixture(scope="module")
def flat_ham(flat_sites):
    return hamiltonian.build_scalar(flat_sites)


def test_scalar_diagonal_and_symmetry(flat_ham):
    h = flat_ham.matrix
    assert np.allclose(np.diag(h), -0.5j)
    assert np.allclose(h, h.T)
    assert flat_ham.variant is Variant.SCALAR
    assert flat_ham.dim == 18


def test_scalar_needs_two_sites(flat_sites):
    with pytest.raises(ValueError):
        hamiltonian.build_scalar(flat_sites[:1])


def test_parity_blocks_reproduce_spectrum(flat_ham):
    h0, h1 = hamiltonian.parity_blocks(flat_ham)
    full = np.sort_complex(np.linalg.eigvals(flat_ham.matrix))
    split = np.sort_complex(
        np.concatenate([np.linalg.eigvals(h0 + h1), np.linalg.eigvals(h0 - h1)])
    )
    assert np.allclose(full, split, atol=1e-10)


def test_parity_blocks_reject_asymmetric(flat_sites):
    bad = list(flat_sites)
    bad[0] = geometry.AtomSite(bad[0].index, bad[0].position + np.array([0, 0, 0.1]))
    ham = hamiltonian.build_scalar(bad)
    with pytest.raises(ValueError):
        hamiltonian.parity_blocks(ham)


def test_add_detuning(flat_ham):
    shifted = hamiltonian.add_detuning(flat_ham, 0.25, -0.5)
    delta = np.diag(shifted.matrix - flat_ham.matrix)
    expected = np.array([0.25 if idx[2] == 1 else -0.5 for idx in flat_ham.basis])
    assert np.allclose(delta, expected)


def test_defect_mask_sampling(flat_sites):
    m1 = DefectMask.sample(flat_sites, 0.3, seed=42)
    m2 = DefectMask.sample(flat_sites, 0.3, seed=42)
    assert m1.missing == m2.missing
    assert DefectMask.sample(flat_sites, 0.0, seed=1).missing == frozenset()
    assert len(DefectMask.sample(flat_sites, 1.0, seed=1).missing) == len(flat_sites)
    with pytest.raises(ValueError):
        DefectMask.sample(flat_sites, 1.5, seed=0)


def test_apply_defects_equals_rebuild(flat_sites, flat_ham):
    missing = frozenset([flat_sites[2].index, flat_sites[11].index])
    sub = hamiltonian.apply_defects(flat_ham, DefectMask(missing))
    kept = [s for s in flat_sites if s.index not in missing]
    rebuilt = hamiltonian.build_scalar(kept)
    assert np.allclose(sub.matrix, rebuilt.matrix)
    assert sub.basis == rebuilt.basis
    # empty mask is a no-op, full mask is rejected
    assert hamiltonian.apply_defects(flat_ham, DefectMask(frozenset())) is flat_ham
    with pytest.raises(ValueError):
        hamiltonian.apply_defects(
            flat_ham, DefectMask(frozenset(s.index for s in flat_sites))
        )


def test_vector_variant(flat_sites):
    ham = hamiltonian.build_vector(flat_sites)
    assert ham.variant is Variant.VECTOR
    assert ham.dim == 3 * len(flat_sites)
    assert np.allclose(np.diag(ham.matrix), -0.5j)
    assert np.allclose(ham.matrix, ham.matrix.T)
    assert ham.basis[0] == (flat_sites[0].index, "x")
    assert ham.basis[2] == (flat_sites[0].index, "z")


def _toy_ham(n: int, seed: int) -> EffectiveHamiltonian:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (a + a.T)
    np.fill_diagonal(h, -0.5j)
    return EffectiveHamiltonian(h, tuple(range(n)), Variant.SCALAR, None)


def test_two_excitation_elements():
    ham = _toy_ham(4, seed=3)
    h = ham.matrix
    ham2 = hamiltonian.build_two_excitation(ham)
    pairs = hamiltonian.two_excitation_basis(4)
    assert ham2.dim == 6
    idx = {p: i for i, p in enumerate(pairs)}
    # diagonal: sum of the two single-excitation diagonals
    for (j, k), a in idx.items():
        assert ham2.matrix[a, a] == pytest.approx(h[j, j] + h[k, k])
    # hop with one shared site carries the single-excitation element
    assert ham2.matrix[idx[(0, 1)], idx[(0, 2)]] == pytest.approx(h[1, 2])
    assert ham2.matrix[idx[(0, 1)], idx[(1, 2)]] == pytest.approx(h[0, 2])
    # no coupling between disjoint pairs
    assert ham2.matrix[idx[(0, 1)], idx[(2, 3)]] == 0.0
    # pair sector stays complex symmetric
    assert np.allclose(ham2.matrix, ham2.matrix.T)


def test_two_excitation_sparse_matches_dense():
    ham = _toy_ham(5, seed=9)
    dense = hamiltonian.build_two_excitation(ham).matrix
    sparse, pairs = hamiltonian.build_two_excitation_sparse(ham)
    assert pairs == hamiltonian.two_excitation_basis(5)
    assert np.allclose(sparse.toarray(), dense)


def test_two_excitation_dense_cap():
    n = hamiltonian.TWO_EXCITATION_CAP + 1
    fake = EffectiveHamiltonian(
        np.zeros((n, n), dtype=complex), tuple(range(n)), Variant.SCALAR, None
    )
    with pytest.raises(ValueError):
        hamiltonian.build_two_excitation(fake)


def test_dump_matrix_roundtrip(tmp_path):
    ham = _toy_ham(3, seed=1)
    csv_path = tmp_path / "h.csv"
    hamiltonian.dump_matrix(ham, csv_path, fmt="csv")
    data = np.genfromtxt(csv_path, delimiter=",", skip_header=1)
    rebuilt = np.zeros((3, 3), dtype=complex)
    for row, col, re, im in data:
        rebuilt[int(row), int(col)] = re + 1j * im
    assert np.allclose(rebuilt, ham.matrix)

    npy_path = tmp_path / "h.npy"
    hamiltonian.dump_matrix(ham, npy_path, fmt="npy")
    assert np.allclose(np.load(npy_path), ham.matrix)
    with pytest.raises(ValueError):
        hamiltonian.dump_matrix(ham, tmp_path / "h.bin", fmt="bin")
