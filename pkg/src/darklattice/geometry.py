"""Geometry of the paired 2D arrays and Hermite-Gauss optical modes.

Two square N x N arrays sit a distance L apart along z. Arrays are either
flat (z = +-L/2) or curved along the constant-phase surface of a Gaussian
mode focused midway between them, which is what makes the photon exchanged
between the arrays refocus instead of diffracting away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .greens import K0


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of the two paired arrays.

    n_perp      atoms per side of each square array
    spacing     lattice constant (wavelength units)
    separation  distance L between the arrays along z
    waist       Gaussian-mode waist for curved arrays; None means flat
    """

    n_perp: int
    spacing: float
    separation: float
    waist: float | None = None

    def __post_init__(self):
        if self.n_perp < 2:
            raise ValueError("n_perp must be >= 2")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.separation <= 0:
            raise ValueError("separation must be positive")
        if self.waist is not None and self.waist <= 0:
            raise ValueError("waist must be positive when given")

    @property
    def curved(self) -> bool:
        return self.waist is not None

    @property
    def transverse_size(self) -> float:
        """L_perp = n_perp * spacing."""
        return self.n_perp * self.spacing

    @property
    def n_atoms(self) -> int:
        return 2 * self.n_perp**2

    def with_waist(self, waist: float | None) -> "LatticeSpec":
        return LatticeSpec(self.n_perp, self.spacing, self.separation, waist)


@dataclass(frozen=True)
class AtomSite:
    """One atom: index = (j_x, j_y, j_z) with j_z in {1, 2}, plus position."""

    index: tuple[int, int, int]
    position: np.ndarray


@dataclass(frozen=True)
class GaussianMode:
    """TEM mode family defined by its waist, focused at the origin."""

    waist: float

    def __post_init__(self):
        if self.waist <= 0:
            raise ValueError("waist must be positive")

    @property
    def rayleigh(self) -> float:
        return math.pi * self.waist**2

    def width(self, z):
        return self.waist * np.sqrt(1.0 + (z / self.rayleigh) ** 2)

    def inv_radius(self, z):
        """1/R(z); finite everywhere (0 at the focus)."""
        return z / (z * z + self.rayleigh**2)

    def gouy(self, z):
        """Fundamental-order axial phase arctan(z / z_R)."""
        return np.arctan(z / self.rayleigh)


def _hermite(n: int, x):
    """Physicists' Hermite polynomial by three-term recurrence."""
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev
    h = 2.0 * x
    for k in range(1, n):
        h, h_prev = 2.0 * x * h - 2.0 * k * h_prev, h
    return h


def tem_mode(j: int, k: int, mode: GaussianMode, r) -> complex | np.ndarray:
    """Hermite-Gauss amplitude TEM_{j,k}(r), transversally orthonormal.

    Includes the Hermite polynomials, Gaussian envelope, wavefront-curvature
    phase and Gouy phase, but not the carrier exp(i*k0*z). Accepts a single
    3-vector or an (..., 3) array of points.
    """
    if j < 0 or k < 0:
        raise ValueError("mode indices must be nonnegative")
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    w = mode.width(z)
    norm = math.sqrt(1.0 / (2.0 ** (j + k) * math.factorial(j) * math.factorial(k)))
    envelope = (
        np.sqrt(2.0 / (np.pi * w**2))
        * norm
        * _hermite(j, np.sqrt(2.0) * x / w)
        * _hermite(k, np.sqrt(2.0) * y / w)
        * np.exp(-(x**2 + y**2) / w**2)
    )
    gouy = (j + k + 1) * mode.gouy(z)
    phase = K0 * (x**2 + y**2) * 0.5 * mode.inv_radius(z) - gouy
    out = envelope * np.exp(1j * phase)
    return complex(out) if out.ndim == 0 else out


def gouy_mismatch(j: int, k: int, separation: float, rayleigh: float) -> float:
    """Round-trip Gouy phase offset of TEM_{j,k} relative to TEM_{0,0}.

    phi_{j,k} = 2 (j + k) arctan(L / (2 z_R)). Modes with phi != 0 cannot
    share the subradiant interference condition of the fundamental.
    """
    if separation <= 0 or rayleigh <= 0:
        raise ValueError("separation and rayleigh must be positive")
    return 2.0 * (j + k) * math.atan(separation / (2.0 * rayleigh))


def _transverse_grid(spec: LatticeSpec) -> np.ndarray:
    """Centered transverse coordinates, shape (n_perp,) in lattice order."""
    n = spec.n_perp
    return spec.spacing * (np.arange(n) - (n - 1) / 2.0)


def _solve_curved_z(rho2: float, mode: GaussianMode, target: float) -> float:
    """Solve k0*z + k0*rho^2/(2R(z)) - gouy(z) = target for z.

    Bracketing bisection around the flat-array position followed by Newton
    polish; the equation is monotone near z = +-L/2.
    """
    z0 = target / K0  # flat-limit guess (+-L/2 up to the Gouy term)

    def f(z):
        return K0 * z + K0 * rho2 * 0.5 * mode.inv_radius(z) - mode.gouy(z) - target

    def fp(z):
        zr2 = mode.rayleigh**2
        dinv_r = (zr2 - z * z) / (z * z + zr2) ** 2
        return K0 + K0 * rho2 * 0.5 * dinv_r - mode.rayleigh / (z * z + zr2)

    # expand the bracket until a sign change is found
    half = max(rho2 / max(abs(2 * z0), 1e-6), 1.0)
    lo, hi = z0 - half, z0 + half
    for _ in range(60):
        if f(lo) * f(hi) <= 0:
            break
        half *= 2.0
        lo, hi = z0 - half, z0 + half
    else:
        raise RuntimeError("curved-array phase equation: no sign change found")

    flo = f(lo)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    z = 0.5 * (lo + hi)
    for _ in range(8):
        step = f(z) / fp(z)
        z -= step
        if abs(step) < 1e-14:
            break
    if abs(f(z)) > 1e-10:
        raise RuntimeError(
            f"curved-array phase equation did not converge (residual {abs(f(z)):.2e}); "
            "the waist is likely pathological for this separation"
        )
    return z


def build_arrays(spec: LatticeSpec) -> list[AtomSite]:
    """Atomic positions for both arrays, row-major in (j_x, j_y), j_z = 1 first.

    Flat arrays sit at z = -L/2 (j_z = 1) and z = +L/2 (j_z = 2). Curved
    arrays solve the Gaussian-mode constant-phase condition per site, so the
    mode phase sampled on an array depends only on j_z.
    """
    coords = _transverse_grid(spec)
    sites: list[AtomSite] = []
    mode = GaussianMode(spec.waist) if spec.curved else None
    for j_z, sign in ((1, -1.0), (2, +1.0)):
        target = sign * K0 * spec.separation / 2.0
        for j_x in range(1, spec.n_perp + 1):
            x = coords[j_x - 1]
            for j_y in range(1, spec.n_perp + 1):
                y = coords[j_y - 1]
                if mode is None:
                    z = sign * spec.separation / 2.0
                else:
                    z = _solve_curved_z(x * x + y * y, mode, target)
                sites.append(AtomSite((j_x, j_y, j_z), np.array([x, y, z])))
    return sites


def positions(sites: list[AtomSite]) -> np.ndarray:
    return np.array([s.position for s in sites])


def is_mirror_symmetric(sites: list[AtomSite], tol: float = 1e-9) -> bool:
    """True if site k + N is the z-mirror image of site k for all k."""
    n = len(sites)
    if n % 2:
        return False
    half = n // 2
    for a, b in zip(sites[:half], sites[half:]):
        if a.index[:2] != b.index[:2] or a.index[2] != 1 or b.index[2] != 2:
            return False
        mirrored = a.position * np.array([1.0, 1.0, -1.0])
        if np.max(np.abs(mirrored - b.position)) > tol:
            return False
    return True
