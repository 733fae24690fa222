"""Shared fixtures: expensive reference systems built once per session."""

from types import SimpleNamespace

import pytest

from darklattice import geometry, spectrum


def _optimized_system(n_perp: int, spacing: float, separation: float):
    base = geometry.LatticeSpec(n_perp, spacing, separation)
    opt = spectrum.optimize_waist(base)
    spec = base.with_waist(opt.waist)
    sites, ham, modes, pair = spectrum.analyze(spec)
    return SimpleNamespace(
        spec=spec, opt=opt, sites=sites, ham=ham, modes=modes, pair=pair
    )


@pytest.fixture(scope="session")
def small_curved_system():
    """Cheap curved reference: 4x4 arrays at half-wavelength spacing."""
    return _optimized_system(4, 0.5, 2.0)


@pytest.fixture(scope="session")
def fig1d_system():
    """10x10 arrays, spacing 0.75, separation 20, optimized waist."""
    return _optimized_system(10, 0.75, 20.0)


@pytest.fixture(scope="session")
def fig3b_system():
    """12x12 arrays, spacing 0.8, separation 30, optimized waist."""
    return _optimized_system(12, 0.8, 30.0)


@pytest.fixture(scope="session")
def probe_system():
    """10x10 arrays, spacing 0.8, separation 30, optimized waist."""
    return _optimized_system(10, 0.8, 30.0)
