"""Time-domain solver tests: four-mode, full-array, and retarded dynamics."""

import math

import numpy as np
import pytest

from darklattice import analytics, dynamics
from darklattice.analytics import TransferParams


def test_parabolic_peak_recovers_vertex():
    t = np.linspace(0.0, 2.0, 21)
    y = 3.0 - (t - 0.8333) ** 2
    value, loc = dynamics._parabolic_peak(t, y)
    assert value == pytest.approx(3.0, abs=1e-12)
    assert loc == pytest.approx(0.8333, abs=1e-12)


def test_four_mode_rejects_retardation():
    with pytest.raises(ValueError):
        dynamics.integrate_four_mode(TransferParams(0.01, 1.0, 0.05, gamma_tau=0.1))


def test_zero_drive_requires_horizon():
    params = TransferParams(0.01, 1.0, 0.0)
    with pytest.raises(ValueError):
        dynamics.integrate_four_mode(params)
    with pytest.raises(ValueError):
        dynamics.delayed_transfer(params)


def test_zero_drive_is_flat():
    traj = dynamics.integrate_four_mode(TransferParams(0.01, 1.0, 0.0), t_end=10.0)
    assert np.allclose(traj.pop_s1, 1.0, atol=1e-9)
    assert np.allclose(traj.pop_s2, 0.0, atol=1e-12)


def test_four_mode_fidelity_matches_closed_form():
    gd, gb = 1e-3, 1.0
    summary = analytics.transfer_fidelity(gd, gb)
    traj = dynamics.integrate_four_mode(TransferParams(gd, gb, summary.omega_opt))
    assert abs(traj.fidelity - summary.fidelity) < 0.01
    assert traj.t_at_max == pytest.approx(math.pi / summary.omega_opt, rel=0.05)
    # population never exceeds the initial excitation
    total = traj.pop_s1 + traj.pop_s2 + traj.pop_e
    assert np.all(total <= 1.0 + 1e-9)


def test_delayed_transfer_markov_limit():
    gd, gb = 4e-3, 1.0
    om = analytics.transfer_fidelity(gd, gb).omega_opt
    ode = dynamics.integrate_four_mode(TransferParams(gd, gb, om))
    dde = dynamics.delayed_transfer(TransferParams(gd, gb, om, gamma_tau=0.0))
    inside = dde.times <= ode.times[-1]
    ref = np.interp(dde.times[inside], ode.times, ode.pop_s2)
    assert np.max(np.abs(dde.pop_s2[inside] - ref)) < 1e-5
    assert abs(dde.fidelity - ode.fidelity) < 1e-6


def test_delay_step_must_resolve_delay():
    params = TransferParams(0.01, 1.0, 0.05, gamma_tau=0.2)
    tau = params.tau
    with pytest.raises(ValueError):
        dynamics.delayed_transfer(params, dt=tau / 5.0)
    with pytest.raises(ValueError):
        dynamics.integrate_delay(0.5, 0.01, 0.2, 0.0, "dark", t_end=1.0, dt=tau / 5.0)


def test_integrate_delay_markov_limit():
    t, y = dynamics.integrate_delay(0.5, 0.01, 0.0, 0.0, "dark", t_end=5.0)
    assert np.allclose(y, np.exp(-0.5 * 0.01 * t), atol=1e-9)
    t, y = dynamics.integrate_delay(0.5, 0.01, 0.0, 0.0, "bright", t_end=5.0)
    assert np.allclose(y, np.exp(-0.5 * 1.01 * t), atol=1e-9)
    with pytest.raises(ValueError):
        dynamics.integrate_delay(0.5, 0.01, 0.0, 0.0, "sideways", t_end=1.0)


def test_retardation_slows_dark_speeds_bright():
    g, gd, gt = 0.5, 0.0, 0.3
    t_end = 6.0
    td, yd = dynamics.integrate_delay(g, gd, gt, 0.0, "dark", t_end=t_end)
    tb, yb = dynamics.integrate_delay(g, gd, gt, 0.0, "bright", t_end=t_end)
    # dark branch keeps its population (photons in flight return), bright
    # decays faster than the Markovian rate 2 G
    assert yd[-1] > math.exp(-0.5 * gd * t_end) - 1e-9
    assert yb[-1] < math.exp(-g * t_end)


def test_first_order_delay_amplitudes_track_integration():
    g, gd, gt = 0.5, 0.005, 0.02
    for branch in ("dark", "bright"):
        t, y = dynamics.integrate_delay(g, gd, gt, 0.0, branch, t_end=4.0)
        approx = analytics.nonmarkov_amplitudes(t, g, gd, gt, 0.0, branch)
        assert np.max(np.abs(y - approx)) < 0.02


def test_full_transfer_small_system(small_curved_system):
    sys = small_curved_system
    pair = sys.pair
    om = analytics.transfer_fidelity(pair.dark.rate, pair.bright.rate).omega_opt
    traj = dynamics.simulate_transfer_full(sys.ham, pair, om)
    assert traj.pop_s1[0] == pytest.approx(1.0, abs=1e-9)
    assert traj.pop_s2[0] == pytest.approx(0.0, abs=1e-12)
    assert 0.0 < traj.fidelity <= 1.0
    assert traj.t_at_max > 0
    total = traj.pop_s1 + traj.pop_s2 + traj.pop_e
    assert np.all(total <= 1.0 + 1e-6)
    with pytest.raises(ValueError):
        dynamics.simulate_transfer_full(sys.ham, pair, -0.1)
    with pytest.raises(ValueError):
        dynamics.simulate_transfer_full(sys.ham, pair, 0.0)


def test_memory_release_fits_positive_rate(small_curved_system):
    sys = small_curved_system
    release = dynamics.simulate_memory_release(
        sys.ham, sys.pair, omega=5e-3, t_end=2000.0
    )
    assert release.gamma_fit > 0
    lo, hi = release.fit_window
    assert 0 < lo < hi
    # the stored population decays monotonically over the fit window
    traj = release.trajectory
    sel = (traj.times >= lo) & (traj.times <= hi)
    assert np.all(np.diff(traj.pop_s1[sel]) <= 1e-12)


def test_memory_release_requires_adiabatic_window(small_curved_system):
    sys = small_curved_system
    with pytest.raises(RuntimeError):
        dynamics.simulate_memory_release(
            sys.ham, sys.pair, omega=5e-3, t_end=2000.0, e_threshold=0.0
        )
