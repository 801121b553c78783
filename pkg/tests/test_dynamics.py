import numpy as np
import pytest

from momtraj import (
    BoundaryMassError,
    ComplexField,
    ConfigurationError,
    Free,
    Harmonic,
    Linear,
    NormalizationError,
    Representation,
    to_momentum,
    total_energy,
)
from momtraj.dynamics import PropagatorConfig, collect_frames, propagate
from momtraj.grid import grid_1d
from momtraj.states import coherent_state, gaussian_state


def free_gaussian_exact(x, t, sigma=1.0, mass=1.0, hbar=1.0):
    """Closed-form spreading Gaussian under free evolution."""
    s = sigma**2 + 1j * hbar * t / mass
    return (np.pi * sigma**2) ** -0.25 * np.sqrt(sigma**2 / s) * np.exp(-(x**2) / (2 * s))


def coherent_exact(x, t, x0, mass=1.0, omega=1.0, hbar=1.0):
    """Closed-form coherent-state evolution for the displaced ground state."""
    xc = x0 * np.cos(omega * t)
    pc = -mass * omega * x0 * np.sin(omega * t)
    mw = mass * omega / hbar
    return (mw / np.pi) ** 0.25 * np.exp(
        -mw * (x - xc) ** 2 / 2
        + 1j * (pc * x - xc * pc / 2.0 - hbar * omega * t / 2.0) / hbar
    )


def test_free_gaussian_matches_analytic(grid_wide):
    psi = gaussian_state(grid_wide, sigma=1.0)
    cfg = PropagatorConfig(dt=1e-3, steps_per_frame=1000)
    final = propagate(psi, Free(), cfg, 5000)
    exact = free_gaussian_exact(grid_wide.positions(0), 5.0)
    assert np.abs(final.psi_x.values - exact).max() <= 1e-9


def test_coherent_state_oracle_is_consistent(grid512):
    # sanity for the test's own oracle: it must satisfy the dynamics too
    psi = coherent_state(grid512, 2.0)
    cfg = PropagatorConfig(dt=1e-3, steps_per_frame=100)
    final = propagate(psi, Harmonic(1.0, 1.0), cfg, 700)
    exact = coherent_exact(grid512.positions(0), 0.7, 2.0)
    assert np.abs(final.psi_x.values - exact).max() <= 1e-5


def test_coherent_period_fidelity(grid512):
    x0 = 2.0
    psi = coherent_state(grid512, x0)
    steps = int(round(2 * np.pi / 1e-3))
    cfg = PropagatorConfig(dt=1e-3, steps_per_frame=steps)
    final = propagate(psi, Harmonic(1.0, 1.0), cfg, steps)
    exact = coherent_exact(grid512.positions(0), steps * 1e-3, x0)
    dx = grid512.spacing(0)
    fidelity = abs(np.sum(np.conj(final.psi_x.values) * exact) * dx)
    assert fidelity >= 1.0 - 1e-6


def test_strang_order_is_two(grid512):
    x0, T = 2.0, 1.6
    psi = coherent_state(grid512, x0)
    errs = []
    for dt in (2e-3, 1e-3, 5e-4):
        steps = int(round(T / dt))
        cfg = PropagatorConfig(dt=dt, steps_per_frame=steps)
        final = propagate(psi, Harmonic(1.0, 1.0), cfg, steps)
        exact = coherent_exact(grid512.positions(0), T, x0)
        errs.append(np.sqrt(np.sum(np.abs(final.psi_x.values - exact) ** 2)
                            * grid512.spacing(0)))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    for order in orders:
        assert 1.8 <= order <= 2.2


def test_norm_conservation_long_run(grid512):
    psi = coherent_state(grid512, 2.0)
    cfg = PropagatorConfig(dt=1e-3, steps_per_frame=10_000)
    final = propagate(psi, Harmonic(1.0, 1.0), cfg, 10_000)
    assert abs(final.psi_p.norm() - 1.0) <= 1e-10


def test_energy_drift_small_step(grid512):
    # symmetric splitting: energy error is a bounded O(dt^2) oscillation
    pot = Harmonic(1.0, 1.0)
    psi = coherent_state(grid512, 2.0)
    frames = collect_frames(psi, pot, PropagatorConfig(dt=1e-4, steps_per_frame=1500), 15_000)
    energies = [total_energy(fr, pot) for fr in frames]
    e0 = energies[0]
    assert max(abs(e - e0) for e in energies) <= 1e-8 * abs(e0)


def test_energy_bounded_not_secular_default_step(grid512):
    pot = Harmonic(1.0, 1.0)
    psi = coherent_state(grid512, 2.0)
    frames = collect_frames(psi, pot, PropagatorConfig(dt=1e-3, steps_per_frame=200), 12_000)
    energies = np.array([total_energy(fr, pot) for fr in frames])
    err = np.abs(energies - energies[0]) / abs(energies[0])
    assert err.max() <= 1e-6
    half = len(err) // 2
    assert err[half:].max() <= 1.05 * err[:half].max()  # no secular growth


def test_energy_drift_linear(grid512):
    pot = Linear(2.0)
    psi = gaussian_state(grid512, sigma=1.0)
    frames = collect_frames(psi, pot, PropagatorConfig(dt=1e-3, steps_per_frame=250), 1000)
    energies = [total_energy(fr, pot) for fr in frames]
    assert max(abs(e - energies[0]) for e in energies) <= 1e-8 * max(abs(energies[0]), 1.0)


def test_free_modulus_is_static(grid_wide):
    # free evolution applies one exact phase per frame: modulus at roundoff
    psi = to_momentum(gaussian_state(grid_wide))
    rho0 = psi.density()
    cfg = PropagatorConfig(dt=1e-3, steps_per_frame=500)
    final = propagate(psi, Free(), cfg, 5000)
    drift = np.abs(final.psi_p.density() - rho0).max() / rho0.max()
    assert drift <= 1e-14


def test_frame_cadence_and_reps():
    grid = grid_1d(128, 40.0)
    psi = gaussian_state(grid)
    frames = collect_frames(psi, Free(), PropagatorConfig(dt=1e-3, steps_per_frame=10), 25)
    times = [fr.time for fr in frames]
    assert times == pytest.approx([0.0, 0.01, 0.02, 0.025])
    for fr in frames:
        assert fr.psi_x.rep is Representation.POSITION
        assert fr.psi_p.rep is Representation.MOMENTUM
        assert fr.psi_x.time == fr.psi_p.time == fr.time


def test_propagate_accepts_momentum_input(grid512):
    phi = to_momentum(gaussian_state(grid512))
    final = propagate(phi, Free(), PropagatorConfig(dt=1e-3, steps_per_frame=10), 10)
    assert final.time == pytest.approx(0.01)


def test_boundary_violation_aborts():
    grid = grid_1d(128, 16.0)
    psi = gaussian_state(grid, sigma=1.0, boost=3.0)  # drifts into the wall
    cfg = PropagatorConfig(dt=1e-3, steps_per_frame=100)
    with pytest.raises(BoundaryMassError):
        propagate(psi, Free(), cfg, 3000)


def test_kinetic_phase_wrap_rejected(grid512):
    psi = gaussian_state(grid512)
    with pytest.raises(ConfigurationError):
        propagate(psi, Free(), PropagatorConfig(dt=1.0, steps_per_frame=1), 1)


def test_unnormalized_state_rejected(grid512):
    vals = 2.0 * gaussian_state(grid512).values
    psi = ComplexField(grid512, Representation.POSITION, vals)
    with pytest.raises(NormalizationError):
        propagate(psi, Free(), PropagatorConfig(dt=1e-3, steps_per_frame=1), 1)


def test_masses_validation(grid2d):
    psi = gaussian_state(grid2d)
    with pytest.raises(ConfigurationError):
        propagate(psi, Free(), PropagatorConfig(dt=1e-3, steps_per_frame=1), 1,
                  masses=(1.0, 1.0, 1.0))
