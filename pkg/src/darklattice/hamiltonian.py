"""Assembly of the non-hermitian effective Hamiltonians.

The single-excitation Hamiltonian has entries H_jj' = -(i/2) G(r_j - r_j')
in units of the single-atom decay rate; its anti-hermitian part encodes
collective photon emission. Variants: scalar two-level atoms, vector
(four-level) atoms with one dipole per axis, and the hard-core-restricted
two-excitation sector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from . import geometry
from .geometry import AtomSite
from .greens import CIRCULAR, Polarization, dyadic_green_matrix, scalar_green_matrix


class Variant(enum.Enum):
    SCALAR = "scalar"
    VECTOR = "vector"
    TWO_EXCITATION = "two_excitation"


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Dense complex matrix with its basis labels.

    basis entries are site indices (scalar), (site index, axis) pairs
    (vector), or ordered site-index pairs (two-excitation). sites is kept for
    downstream geometry-aware analysis and is None for derived matrices whose
    basis no longer maps 1:1 onto atoms.
    """

    matrix: np.ndarray
    basis: tuple
    variant: Variant
    sites: tuple[AtomSite, ...] | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DefectMask:
    """Set of missing sites, possibly sampled with per-site probability p."""

    missing: frozenset
    probability: float = 0.0
    seed: int = 0

    @staticmethod
    def sample(sites, probability: float, seed: int) -> "DefectMask":
        """Bernoulli(p) per site with a deterministic generator."""
        if not 0.0 <= probability <= 1.0:
            raise ValueError("probability must be in [0, 1]")
        rng = np.random.Generator(np.random.PCG64(seed))
        draws = rng.random(len(sites)) < probability
        missing = frozenset(s.index for s, hit in zip(sites, draws) if hit)
        return DefectMask(missing, probability, seed)


def build_scalar(sites: list[AtomSite], p: Polarization = CIRCULAR) -> EffectiveHamiltonian:
    """Single-excitation scalar Hamiltonian over the given sites.

    Diagonal entries are -i/2 (independent decay); the matrix is complex
    symmetric because G is even in r.
    """
    if len(sites) < 2:
        raise ValueError("need at least 2 sites")
    pos = geometry.positions(sites)
    g = scalar_green_matrix(pos, p)
    h = -0.5j * g
    return EffectiveHamiltonian(h, tuple(s.index for s in sites), Variant.SCALAR, tuple(sites))


def parity_blocks(ham: EffectiveHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Split a mirror-symmetric scalar Hamiltonian into intra- and
    cross-array blocks (H0, H1).

    eig(H) = eig(H0 + H1) union eig(H0 - H1): parity +-1 eigenvectors are
    (v, +-v)/sqrt(2) with v an eigenvector of H0 +- H1.
    """
    if ham.variant is not Variant.SCALAR:
        raise ValueError("parity blocks are defined for the scalar variant")
    if ham.sites is None or not geometry.is_mirror_symmetric(list(ham.sites)):
        raise ValueError("site geometry is not mirror-symmetric in z")
    n = ham.dim // 2
    h = ham.matrix
    h0a, h0b = h[:n, :n], h[n:, n:]
    h1a, h1b = h[:n, n:], h[n:, :n]
    if np.max(np.abs(h0a - h0b)) > 1e-12 or np.max(np.abs(h1a - h1b)) > 1e-12:
        raise ValueError("matrix is not invariant under array exchange")
    return h0a.copy(), h1a.copy()


def add_detuning(ham: EffectiveHamiltonian, delta1: float, delta2: float) -> EffectiveHamiltonian:
    """Add per-array detunings to the diagonal of a scalar Hamiltonian."""
    if ham.variant is not Variant.SCALAR:
        raise ValueError("detuning applies to the scalar variant")
    shifts = np.array([delta1 if idx[2] == 1 else delta2 for idx in ham.basis])
    return replace(ham, matrix=ham.matrix + np.diag(shifts.astype(complex)))


def apply_defects(ham: EffectiveHamiltonian, mask: DefectMask) -> EffectiveHamiltonian:
    """Delete the rows/columns of missing sites.

    Physically identical to subtracting the couplings of the missing atoms;
    the surviving matrix acts on the occupied subspace only.
    """
    keep = [i for i, idx in enumerate(ham.basis) if idx not in mask.missing]
    if not keep:
        raise ValueError("all sites are missing")
    if len(keep) == ham.dim:
        return ham
    sel = np.array(keep)
    matrix = ham.matrix[np.ix_(sel, sel)]
    basis = tuple(ham.basis[i] for i in keep)
    sites = tuple(ham.sites[i] for i in keep) if ham.sites is not None else None
    return EffectiveHamiltonian(matrix, basis, ham.variant, sites)


def build_vector(sites: list[AtomSite]) -> EffectiveHamiltonian:
    """Four-level (J=0 -> J=1) Hamiltonian with dipole axes x, y, z per atom.

    Entry between (site j, axis a) and (site j', axis a') is
    -(i/2) G_{a,a'}(r_j - r_j'); self blocks are -(i/2) * identity.
    """
    if len(sites) < 2:
        raise ValueError("need at least 2 sites")
    pos = geometry.positions(sites)
    gt = dyadic_green_matrix(pos)  # (n, n, 3, 3)
    n = len(sites)
    h = -0.5j * gt.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n)
    basis = tuple((s.index, ax) for s in sites for ax in ("x", "y", "z"))
    return EffectiveHamiltonian(h, basis, Variant.VECTOR, tuple(sites))


# Full diagonalization of the pair sector is capped; beyond this only the
# sparse Rayleigh-quotient refinement path is offered (memory is O(pairs^2)).
TWO_EXCITATION_CAP = 80


def two_excitation_basis(n: int) -> list[tuple[int, int]]:
    """Ordered pairs (j < k) of single-excitation basis indices."""
    return [(j, k) for j in range(n) for k in range(j + 1, n)]


def build_two_excitation_sparse(ham: EffectiveHamiltonian) -> tuple[sp.csr_matrix, list]:
    """Two-excitation Hamiltonian on hard-core pair states, sparse CSR.

    Matrix element between pairs (j,k) and (l,m): the single-excitation
    element of the hopping leg when the pairs share one site, and
    H_jj + H_kk on the diagonal.
    """
    h = ham.matrix
    n = ham.dim
    if n < 2:
        raise ValueError("need at least 2 single-excitation states")
    pairs = two_excitation_basis(n)
    pair_index = {p: i for i, p in enumerate(pairs)}
    rows, cols, vals = [], [], []
    for a, (j, k) in enumerate(pairs):
        rows.append(a)
        cols.append(a)
        vals.append(h[j, j] + h[k, k])
        # hop k -> m with spectator j, and j -> l with spectator k
        for spectator, mover in ((j, k), (k, j)):
            for target in range(n):
                if target == mover or target == spectator:
                    continue
                b = pair_index[(min(spectator, target), max(spectator, target))]
                rows.append(a)
                cols.append(b)
                vals.append(h[mover, target])
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(len(pairs), len(pairs)))
    return mat, pairs


def build_two_excitation(ham: EffectiveHamiltonian) -> EffectiveHamiltonian:
    """Dense two-excitation Hamiltonian (capped, see TWO_EXCITATION_CAP)."""
    if ham.dim > TWO_EXCITATION_CAP:
        raise ValueError(
            f"two-excitation dense build capped at {TWO_EXCITATION_CAP} atoms; "
            "use build_two_excitation_sparse with iterative refinement"
        )
    mat, pairs = build_two_excitation_sparse(ham)
    basis = tuple((ham.basis[j], ham.basis[k]) for j, k in pairs)
    return EffectiveHamiltonian(mat.toarray(), basis, Variant.TWO_EXCITATION, None)


def dump_matrix(ham: EffectiveHamiltonian, path, fmt: str = "csv") -> None:
    """Debug dump: CSV rows (row, col, re, im) or a raw .npy array."""
    if fmt == "npy":
        np.save(path, ham.matrix)
        return
    if fmt != "csv":
        raise ValueError("fmt must be 'csv' or 'npy'")
    with open(path, "w") as f:
        f.write("row,col,re,im\n")
        for i in range(ham.dim):
            for j in range(ham.dim):
                v = ham.matrix[i, j]
                f.write(f"{i},{j},{v.real:.17g},{v.imag:.17g}\n")
