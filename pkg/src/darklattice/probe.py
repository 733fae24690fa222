"""Steady-state reflectivity of a weak Gaussian probe on the paired arrays.

The probe drives the atoms through the fundamental Gaussian mode; the
reflected amplitude is the mode-projected response of the driven steady
state, obtained from one linear solve per probe detuning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry, hamiltonian
from .analytics import DetuningScheme
from .geometry import GaussianMode, LatticeSpec
from .greens import K0
from .spectrum import mode_amplitude

#: Prefactor of the quadratic form: 9 pi^2 / (4 k0^4) with k0 = 2 pi.
REFLECTIVITY_PREFACTOR = 9.0 * np.pi**2 / (4.0 * K0**4)


@dataclass(frozen=True)
class ProbeConfig:
    spec: LatticeSpec
    mode: GaussianMode
    delta_d: float
    scheme: DetuningScheme
    deltas: tuple[float, ...]

    def __post_init__(self):
        if not self.deltas:
            raise ValueError("detuning grid must be nonempty")
        if self.mode.waist <= 1.0:
            raise ValueError("probe waist must exceed one wavelength (paraxial regime)")


@dataclass
class ReflectivityCurve:
    deltas: np.ndarray
    values: np.ndarray
    scheme: DetuningScheme
    skipped: list[float] = field(default_factory=list)


def reflectivity_numeric(
    config: ProbeConfig,
    ham: hamiltonian.EffectiveHamiltonian | None = None,
) -> ReflectivityCurve:
    """Reflection probability R(delta) by direct linear solves.

    For each probe detuning delta the atoms of the two arrays are detuned by
    (+delta, +delta) (symmetric) or (+delta, -delta) (opposite); the response
    matrix is H + diag(detunings) - delta_d, the source is the mode sampled
    at the atoms, and R is the squared mode-projected response with the
    free-space prefactor. Singular solves (probe exactly on a pole) are
    skipped and reported.
    """
    if ham is None:
        sites = geometry.build_arrays(config.spec)
        ham = hamiltonian.build_scalar(sites)
    sites = list(ham.sites)
    e = mode_amplitude(config.mode, sites)
    array2 = np.array([s.index[2] == 2 for s in sites])
    n = ham.dim
    values = np.empty(len(config.deltas))
    skipped: list[float] = []
    base = ham.matrix - config.delta_d * np.eye(n)
    for i, delta in enumerate(config.deltas):
        shift = np.where(
            array2, -delta if config.scheme is DetuningScheme.OPPOSITE else delta, delta
        )
        m = base + np.diag(shift.astype(complex))
        try:
            x = np.linalg.solve(m, e)
        except np.linalg.LinAlgError:
            values[i] = np.nan
            skipped.append(float(delta))
            continue
        values[i] = REFLECTIVITY_PREFACTOR * abs(e @ x) ** 2
    return ReflectivityCurve(np.asarray(config.deltas, dtype=float), values, config.scheme, skipped)
