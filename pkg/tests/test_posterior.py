import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infermpc.distributions import SeedSpec
from infermpc.errors import ConfigError, DegenerateDensityError, ParameterError
from infermpc.posterior import (
    Grid1D,
    GridDensity,
    constant_cost,
    count_modes,
    expected_cost,
    gaussian_pdf,
    grid_posterior,
    kl_forward,
    posterior_moments,
    sinusoid_cost,
    static_problem,
)
from infermpc.solvers import SolverConfig, mppi_step

GOLDEN = Path(__file__).parent / "golden"
FIG_GRID = Grid1D(-3.0, 3.0, 4801)


def density_from_values(grid: Grid1D, values) -> GridDensity:
    values = np.asarray(values, dtype=float)
    values = values / np.trapezoid(values, grid.points)
    z = np.zeros_like(values)
    return GridDensity(grid, values, 1.0, 0.0, z, z, z)


def test_grid_spacing():
    g = Grid1D(-6.0, 6.0, 4801)
    assert g.spacing == pytest.approx(0.0025)
    assert np.all(np.diff(g.points) > 0)
    with pytest.raises(ConfigError):
        Grid1D(1.0, 1.0, 10)
    with pytest.raises(ConfigError):
        Grid1D(0.0, 1.0, 1)


def test_constant_cost_reproduces_prior():
    g = Grid1D(-8.0, 8.0, 6401)
    d = grid_posterior(lambda u: constant_cost(u, 3.7), 0.0, 1.0, 0.3, g)
    np.testing.assert_allclose(d.values, gaussian_pdf(g.points, 0.0, 1.0), rtol=0, atol=1e-9)


def test_infinite_temperature_reproduces_prior():
    g = Grid1D(-7.0, 7.0, 5601)
    d = grid_posterior(sinusoid_cost, 0.5, 1.0, 1e9, g)
    np.testing.assert_allclose(d.values, gaussian_pdf(g.points, 0.5, 1.0), rtol=0, atol=1e-6)


def test_narrow_grid_is_rejected_unless_truncated():
    with pytest.raises(ConfigError):
        grid_posterior(sinusoid_cost, -2.0, 1.0, 0.5, FIG_GRID)
    grid_posterior(sinusoid_cost, -2.0, 1.0, 0.5, FIG_GRID, truncate=True)


def test_degenerate_density_is_reported():
    with pytest.raises(DegenerateDensityError, match="increase lambda"):
        grid_posterior(lambda u: 1e6 * (u - 0.3) ** 2, 0.0, 1.0, 1e-6, Grid1D(-6, 6, 101))


def test_bad_parameters():
    with pytest.raises(ParameterError):
        grid_posterior(sinusoid_cost, 0.0, 0.0, 1.0, FIG_GRID, truncate=True)
    with pytest.raises(ParameterError):
        grid_posterior(sinusoid_cost, 0.0, 1.0, -1.0, FIG_GRID, truncate=True)


@pytest.mark.parametrize("lam", [0.05, 0.5, 5.0])
def test_figure_temperatures_normalized(lam):
    d = grid_posterior(sinusoid_cost, -2.0, 1.0, lam, FIG_GRID, truncate=True)
    assert np.trapezoid(d.values, d.u) == pytest.approx(1.0, abs=1e-6)
    assert np.all(d.values >= 0)


def test_smaller_temperature_is_sharper():
    ents = [posterior_moments(grid_posterior(sinusoid_cost, -2.0, 1.0, lam, FIG_GRID, truncate=True)).entropy
            for lam in (0.05, 0.5, 5.0)]
    assert ents[0] < ents[1] < ents[2]


def test_mean_matches_adaptive_quadrature():
    integrate = pytest.importorskip("scipy.integrate")
    lam, mu, s = 0.5, -2.0, 1.0
    d = grid_posterior(sinusoid_cost, mu, s, lam, FIG_GRID, truncate=True)
    shift = d.costs.min()

    def unnorm(u):
        return math.exp(-(float(sinusoid_cost(u)) - shift) / lam) * float(gaussian_pdf(u, mu, s))

    pts = np.arange(-3.0, 3.0, 0.2)
    z = integrate.quad(unnorm, -3, 3, points=pts, limit=500, epsabs=0, epsrel=1e-12)[0]
    m1 = integrate.quad(lambda u: u * unnorm(u), -3, 3, points=pts, limit=500, epsabs=0, epsrel=1e-12)[0]
    # trapezoid error is O(h^2) from the endpoints, h = 1.25e-3
    assert posterior_moments(d).mean == pytest.approx(m1 / z, abs=1e-7)
    assert d.normalizer == pytest.approx(z, rel=1e-7)


def test_prior_moments_for_constant_cost():
    d = grid_posterior(constant_cost, 1.5, 0.7, 1.0, Grid1D(-6.0, 9.0, 6001))
    m = posterior_moments(d)
    assert m.mean == pytest.approx(1.5, abs=1e-6)
    assert m.variance == pytest.approx(0.49, abs=1e-4)
    assert m.entropy == pytest.approx(0.5 * math.log(2 * math.pi * math.e * 0.49), abs=1e-6)


def test_symmetric_bimodal_mean_is_zero():
    d = grid_posterior(lambda u: (u**2 - 1.0) ** 2, 0.0, 1.5, 0.2, Grid1D(-10.0, 10.0, 8001))
    assert abs(posterior_moments(d).mean) < 1e-9
    assert count_modes(d) == 2


def test_fig5_moments_golden():
    golden = json.loads((GOLDEN / "fig5_lambda0.5_moments.json").read_text())
    d = grid_posterior(sinusoid_cost, -2.0, 1.0, 0.5, FIG_GRID, truncate=True)
    m = posterior_moments(d)
    assert m.mean == pytest.approx(golden["mean"], rel=1e-12)
    assert m.variance == pytest.approx(golden["variance"], rel=1e-10)
    assert m.entropy == pytest.approx(golden["entropy"], rel=1e-10)
    assert expected_cost(d) == pytest.approx(golden["expected_cost"], rel=1e-10)


def test_count_modes_gaussian_and_mixture():
    g = Grid1D(-10, 10, 4001)
    assert count_modes(density_from_values(g, gaussian_pdf(g.points, 0.3, 1.0))) == 1
    mix = gaussian_pdf(g.points, -4, 0.7) + gaussian_pdf(g.points, 4, 0.7)
    assert count_modes(density_from_values(g, mix)) == 2
    with pytest.raises(ParameterError):
        count_modes(density_from_values(g, mix), 1.5)


def test_count_modes_threshold_drops_small_bumps():
    g = Grid1D(-10, 10, 4001)
    mix = gaussian_pdf(g.points, -4, 0.7) + 0.01 * gaussian_pdf(g.points, 4, 0.7)
    assert count_modes(density_from_values(g, mix), 0.05) == 1
    assert count_modes(density_from_values(g, mix), 0.005) == 2


def test_sinusoid_cost_diffuse_prior_is_multimodal():
    d = grid_posterior(sinusoid_cost, 0.0, 2.0, 1.0, FIG_GRID, truncate=True)
    assert count_modes(d) >= 2


def test_kl_zero_for_identical_gaussian():
    g = Grid1D(-10, 10, 8001)
    d = density_from_values(g, gaussian_pdf(g.points, 0.4, 1.3))
    assert kl_forward(d, 0.4, 1.3) == pytest.approx(0.0, abs=1e-6)


def test_kl_closed_form_between_gaussians():
    g = Grid1D(-15, 15, 12001)
    d = density_from_values(g, gaussian_pdf(g.points, 0.0, 1.0))
    expected = math.log(2.0) + (1.0 + 0.5**2) / (2 * 4.0) - 0.5
    assert kl_forward(d, 0.5, 2.0) == pytest.approx(expected, abs=1e-8)


def test_kl_scan_finds_posterior_mean():
    d = grid_posterior(sinusoid_cost, 0.0, 1.0, 2.0, Grid1D(-6, 6, 4801))
    means = d.u
    kls = [kl_forward(d, m, 0.7) for m in means]
    best = means[int(np.argmin(kls))]
    assert abs(best - posterior_moments(d).mean) <= d.grid.spacing


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-2, 2), st.floats(0.3, 1.5), st.floats(-2, 2), st.floats(0.2, 3.0))
def test_kl_nonnegative(amp, prior_mean, prior_std, g_mean, g_std):
    d = grid_posterior(lambda u: amp * np.sin(3 * u) + 0.1 * u**2, prior_mean, prior_std, 1.0, Grid1D(-12, 12, 2401))
    assert kl_forward(d, g_mean, g_std) >= 0.0


@pytest.mark.parametrize("k", [20_000])
def test_mppi_static_with_penalty_targets_truncated_posterior(k):
    # at high temperature the restricted posterior is a truncated prior, which clamping would not reproduce
    d = grid_posterior(sinusoid_cost, -2.0, 1.0, 100.0, FIG_GRID, truncate=True)
    target = posterior_moments(d)
    rep = mppi_step(static_problem(sinusoid_cost, -3.0, 3.0), [0.0], [[-2.0]],
                    SolverConfig(K=k, lam=100.0, std=(1.0,), seed=SeedSpec(3, 0)))
    assert abs(rep.solution[0, 0] - target.mean) < 4 * math.sqrt(target.variance / rep.ess)
