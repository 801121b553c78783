import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momtraj import (
    ComplexField,
    ConfigurationError,
    Free,
    Linear,
    NormalizationError,
    Region,
    Representation,
    equivariance_check,
    ks_band,
    macrostate_frequencies,
    moment_checks,
    region_1d,
    rho_histogram,
    sample_momenta,
    sample_positions,
    to_momentum,
)
from momtraj.dynamics import PropagatorConfig, collect_frames
from momtraj.ensemble import grid_position_moments, ks_statistic, _cell_edges
from momtraj.grid import grid_1d
from momtraj.states import gaussian_state, superposition_state
from momtraj.trajectories import integrate_epstein


# -- sampling ----------------------------------------------------------------------


def test_sampling_reproducible_bit_for_bit(grid512):
    phi = to_momentum(gaussian_state(grid512))
    a = sample_momenta(phi, 5000, seed=42)
    b = sample_momenta(phi, 5000, seed=42)
    assert np.array_equal(a, b)
    c = sample_momenta(phi, 5000, seed=43)
    assert not np.array_equal(a, c)


def test_sampling_rejects_unnormalized(grid512):
    phi = to_momentum(gaussian_state(grid512))
    bad = ComplexField(grid512, Representation.MOMENTUM, 1.5 * phi.values)
    with pytest.raises(NormalizationError):
        sample_momenta(bad, 100, 0)


def test_point_mass_density_sampling(grid512):
    vals = np.zeros(512, dtype=complex)
    vals[300] = 1.0
    field = ComplexField(grid512, Representation.MOMENTUM, vals).normalized()
    samples = sample_momenta(field, 1000, 5)
    p = grid512.momenta(0)
    dp = grid512.dual_spacing(0)
    assert np.all(samples[:, 0] >= p[300] - dp / 2)
    assert np.all(samples[:, 0] <= p[300] + dp / 2)


def test_point_mass_density_sampling_2d(grid2d):
    vals = np.zeros(grid2d.shape, dtype=complex)
    vals[40, 90] = 1.0
    field = ComplexField(grid2d, Representation.MOMENTUM, vals).normalized()
    samples = sample_momenta(field, 500, 5)
    for a, idx in ((0, 40), (1, 90)):
        lo = grid2d.momenta(a)[idx] - grid2d.dual_spacing(a) / 2
        hi = grid2d.momenta(a)[idx] + grid2d.dual_spacing(a) / 2
        assert np.all(samples[:, a] >= lo) and np.all(samples[:, a] <= hi)


def test_gaussian_sample_mean_within_band(grid512):
    phi = to_momentum(gaussian_state(grid512, sigma=1.0))
    n = 10_000
    samples = sample_momenta(phi, n, seed=42)
    sigma_p = grid512.hbar / (1.0 * np.sqrt(2))
    assert abs(samples[:, 0].mean()) <= 4 * sigma_p / np.sqrt(n)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_ks_self_consistency(grid512, seed):
    phi = to_momentum(gaussian_state(grid512, sigma=1.1, boost=0.4))
    n = 10_000
    samples = sample_momenta(phi, n, seed=seed)
    edges = _cell_edges(grid512, Representation.MOMENTUM, 0)
    d = ks_statistic(samples[:, 0], phi.density(), edges)
    assert d <= ks_band(n)


def test_ks_detects_wrong_density(grid512):
    phi = to_momentum(gaussian_state(grid512, sigma=1.0))
    shifted = to_momentum(gaussian_state(grid512, sigma=1.0, boost=0.5))
    samples = sample_momenta(phi, 10_000, seed=0)
    edges = _cell_edges(grid512, Representation.MOMENTUM, 0)
    d = ks_statistic(samples[:, 0], shifted.density(), edges)
    assert d > 5 * ks_band(10_000)


def test_equivariance_2d_self_consistency(grid2d):
    phi = to_momentum(gaussian_state(grid2d, sigma=1.0, boost=(1.0, -0.5)))
    samples = sample_momenta(phi, 10_000, seed=3)
    results = equivariance_check(samples, phi)
    assert len(results) == 3  # two marginals plus the radial CDF
    for r in results:
        assert r.passed, (r.label, r.statistic, r.band)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_sampling_stays_in_support_property(seed):
    grid = grid_1d(256, 40.0)
    phi = to_momentum(gaussian_state(grid, sigma=0.7, boost=1.0))
    samples = sample_momenta(phi, 200, seed=seed)
    p = grid.momenta(0)
    assert samples.min() >= p[0] - grid.dual_spacing(0)
    assert samples.max() <= p[-1] + grid.dual_spacing(0)
    # all samples land where the density is non-negligible
    rho = phi.density()
    cell = np.clip(((samples[:, 0] - p[0]) / grid.dual_spacing(0)).round().astype(int),
                   0, 255)
    assert rho[cell].min() > 1e-14 * rho.max()


# -- histograms and regions ---------------------------------------------------------


def test_rho_histogram_free_t0_all_mass_at_origin(grid_wide):
    psi = gaussian_state(grid_wide)
    frames = collect_frames(psi, Free(), PropagatorConfig(dt=1e-3, steps_per_frame=1), 1)
    p0 = sample_momenta(frames[0].psi_p, 2000, 0)
    hist = integrate_epstein(frames, Free(), p0, substeps_per_frame=1)
    centers, density = rho_histogram(hist.x[0], bins=200, bounds=(-40.0, 40.0))
    width = centers[1] - centers[0]
    occupied = density > 0
    assert np.abs(centers[occupied]).max() <= width  # only the origin bin(s)


def test_rho_histogram_change_of_variables(grid_wide):
    # at time t the position histogram is the momentum density mapped by x = p t / m
    psi = gaussian_state(grid_wide)
    t = 5.0
    frames = collect_frames(psi, Free(),
                            PropagatorConfig(dt=1e-3, steps_per_frame=1000), 5000)
    n = 20_000
    p0 = sample_momenta(frames[0].psi_p, n, 1)
    hist = integrate_epstein(frames, Free(), p0, substeps_per_frame=10)
    bins = 100
    centers, density = rho_histogram(hist.x[-1], bins=bins, bounds=(-40.0, 40.0))
    rho_p = frames[-1].psi_p.density()
    p = grid_wide.momenta(0)
    mapped = np.interp(centers / t, p, rho_p) / t
    width = centers[1] - centers[0]
    l1 = np.sum(np.abs(density - mapped)) * width
    assert l1 <= 2 * np.sqrt(bins / n)


def test_macrostate_frequencies_single_packet():
    xs = np.full((500, 1), 3.2)
    freqs = macrostate_frequencies(xs, [region_1d("here", 3.0, 3.5)])
    assert freqs["here"][0] == 1.0
    assert freqs["other"][0] == 0.0


def test_macrostate_frequencies_binomial_se():
    xs = np.concatenate([np.full((640, 1), 1.0), np.full((360, 1), -1.0)])
    freqs = macrostate_frequencies(
        xs, [region_1d("plus", 0.5, 1.5), region_1d("minus", -1.5, -0.5)]
    )
    assert freqs["plus"][0] == pytest.approx(0.64)
    assert freqs["plus"][1] == pytest.approx(np.sqrt(0.64 * 0.36 / 1000))
    total = freqs["plus"][0] + freqs["minus"][0] + freqs["other"][0]
    assert total == pytest.approx(1.0, abs=1e-12)


def test_macrostate_overlapping_regions_rejected():
    xs = np.zeros((10, 1))
    with pytest.raises(ConfigurationError):
        macrostate_frequencies(
            xs, [region_1d("a", -1.0, 1.0), region_1d("b", 0.5, 2.0)]
        )


def test_region_2d_contains():
    reg = Region("box", ((0.0, 1.0), None))
    xs = np.array([[0.5, 99.0], [1.5, 0.0]])
    assert reg.contains(xs).tolist() == [True, False]


# -- moment checks ------------------------------------------------------------------


def test_grid_moments_match_analytic(grid512):
    x0, sigma = 1.5, 0.8
    psi = gaussian_state(grid512, sigma=sigma, center=x0)
    mean, std, mean2 = grid_position_moments(psi)
    assert mean[0] == pytest.approx(x0, abs=1e-9)
    assert std[0] == pytest.approx(sigma / np.sqrt(2), rel=1e-9)
    assert mean2[0] == pytest.approx(x0**2 + sigma**2 / 2, rel=1e-9)


def test_moment_checks_boosted_packet(grid512):
    x0 = 3.0
    psi = gaussian_state(grid512, sigma=1.0, center=x0)
    phi = to_momentum(psi)
    samples = sample_momenta(phi, 5000, seed=2)
    # positions of the flow at t=0 all equal the packet center
    xs = np.full((5000, 1), x0)
    rep = moment_checks(xs, psi, phi)
    assert rep.mean_ok and rep.std_ok and rep.identity_ok
    assert rep.mean_grid[0] == pytest.approx(x0, abs=1e-9)
    assert rep.identity_rel_err <= 1e-6
    del samples


@pytest.mark.parametrize("a", [0.0, 5.0])
def test_second_moment_identity_superposition(a):
    # identity must hold for fringed states too, at every valid-node handling
    grid = grid_1d(512, 45.0)
    sup = superposition_state(grid, a) if a else None
    psi = sup.field if sup else gaussian_state(grid)
    phi = to_momentum(psi)
    xs = np.zeros((1000, 1))
    rep = moment_checks(xs, psi, phi)
    assert rep.identity_ok, rep.identity_rel_err


def test_moment_checks_detect_displaced_ensemble(grid512):
    psi = gaussian_state(grid512, sigma=1.0)
    phi = to_momentum(psi)
    xs = np.full((5000, 1), 2.0)  # grossly displaced ensemble
    rep = moment_checks(xs, psi, phi)
    assert not rep.mean_ok


# -- equivariance through dynamics -----------------------------------------------------


def test_equivariance_linear_translation(grid512):
    pot = Linear(2.0)
    psi = gaussian_state(grid512, sigma=1.0)
    frames = collect_frames(psi, pot, PropagatorConfig(dt=1e-3, steps_per_frame=100), 1000)
    n = 10_000
    p0 = sample_momenta(frames[0].psi_p, n, seed=11)
    hist = integrate_epstein(frames, pot, p0, substeps_per_frame=100)
    for f in (0, 5, 10):
        res = equivariance_check(hist.p[f], frames[f].psi_p)
        assert res[0].passed, (f, res[0].statistic, res[0].band)
    # and the samples really did translate by -c t
    assert np.abs(hist.p[-1] - (p0 - 2.0 * 1.0)).max() <= 1e-8
