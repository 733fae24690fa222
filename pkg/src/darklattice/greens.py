"""Free-space dyadic Green's tensor and its projections.

All lengths are in units of the transition wavelength, so k0 = 2*pi, and
all rates are in units of the single-atom decay rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

K0 = 2.0 * np.pi


@dataclass(frozen=True)
class Polarization:
    """Unit-norm complex transition dipole direction."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex)
        if v.shape != (3,):
            raise ValueError("polarization must be a 3-vector")
        n = np.sqrt(np.real(np.vdot(v, v)))
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"polarization must be unit norm, got |p| = {n}")
        object.__setattr__(self, "vector", v)


#: Circular polarization with z as quantization axis (the default throughout).
CIRCULAR = Polarization(np.array([1.0, 1.0j, 0.0]) / np.sqrt(2.0))


def dyadic_green(r) -> np.ndarray:
    """Dyadic Green's tensor G(r) of a point dipole at the origin.

    Returns the 3x3 complex tensor. The value at r = 0 is the identity by
    convention (it encodes independent single-atom decay); the closed form
    itself diverges there.
    """
    r = np.asarray(r, dtype=float)
    rn = float(np.linalg.norm(r))
    if rn == 0.0:
        return np.eye(3, dtype=complex)
    kr = K0 * rn
    pref = 3.0 * np.exp(1j * kr) / (2j * kr**3)
    rr = np.outer(r, r) / rn**2
    return pref * ((kr**2 + 1j * kr - 1.0) * np.eye(3) + (-(kr**2) - 3j * kr + 3.0) * rr)


def scalar_green(r, p: Polarization = CIRCULAR) -> complex:
    """Polarization-projected Green's function G(r) = p* . G(r) . p."""
    pv = p.vector
    return complex(pv.conj() @ dyadic_green(r) @ pv)


def scalar_green_matrix(positions: np.ndarray, p: Polarization = CIRCULAR) -> np.ndarray:
    """All-pairs projected Green's function, vectorized.

    positions: (n, 3) real array. Returns the (n, n) complex matrix with
    G(r_i - r_j) off the diagonal and 1 on the diagonal (r = 0 convention).
    Raises on coincident distinct positions.
    """
    pos = np.asarray(positions, dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    rn = np.linalg.norm(diff, axis=-1)
    n = pos.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.any(rn[off] == 0.0):
        raise ValueError("duplicate atom positions")

    rn_safe = np.where(rn == 0.0, 1.0, rn)
    kr = K0 * rn_safe
    pv = p.vector
    # p* . (rhat x rhat) . p = |rhat . p|^2 because rhat is real
    rp = np.abs(diff @ pv) ** 2 / rn_safe**2
    pref = 3.0 * np.exp(1j * kr) / (2j * kr**3)
    g = pref * ((kr**2 + 1j * kr - 1.0) + (-(kr**2) - 3j * kr + 3.0) * rp)
    g[np.eye(n, dtype=bool)] = 1.0
    return g


def dyadic_green_matrix(positions: np.ndarray) -> np.ndarray:
    """All-pairs dyadic Green's tensor, shape (n, n, 3, 3).

    Diagonal (i == i) blocks are the identity per the r = 0 convention.
    """
    pos = np.asarray(positions, dtype=float)
    n = pos.shape[0]
    diff = pos[:, None, :] - pos[None, :, :]
    rn = np.linalg.norm(diff, axis=-1)
    off = ~np.eye(n, dtype=bool)
    if np.any(rn[off] == 0.0):
        raise ValueError("duplicate atom positions")
    rn_safe = np.where(rn == 0.0, 1.0, rn)
    kr = K0 * rn_safe
    rhat = diff / rn_safe[..., None]
    rr = rhat[..., :, None] * rhat[..., None, :]
    pref = 3.0 * np.exp(1j * kr) / (2j * kr**3)
    a = pref * (kr**2 + 1j * kr - 1.0)
    b = pref * (-(kr**2) - 3j * kr + 3.0)
    out = a[..., None, None] * np.eye(3) + b[..., None, None] * rr
    out[np.eye(n, dtype=bool)] = np.eye(3)
    return out


def paraxial_green(r) -> complex:
    """Paraxial Green's function for modes propagating along z.

    G_par(r) = k0/(2*pi*i*|z|) * exp(i*k0*(|z| + |r_perp|^2/(2|z|))).
    Divergent at z = 0, which is rejected.
    """
    r = np.asarray(r, dtype=float)
    x, y, z = r
    if z == 0.0:
        raise ValueError("paraxial Green's function diverges at z = 0")
    az = abs(z)
    return complex(K0 / (2j * np.pi * az) * np.exp(1j * K0 * (az + (x * x + y * y) / (2.0 * az))))
