"""Collective emission and quantum state transfer between paired 2D atomic arrays."""

__version__ = "0.1.0"

__all__ = [
    "analytics",
    "cli",
    "dynamics",
    "geometry",
    "greens",
    "hamiltonian",
    "probe",
    "seeding",
    "spectrum",
]
