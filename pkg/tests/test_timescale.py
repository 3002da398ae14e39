import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdelta.errors import DomainError, GridMismatchError, TerminalPointError
from fracdelta.timescale import (
    GridFunction,
    ScaleKind,
    TimeScaleGrid,
    WeightedNormContext,
    delta_derivative,
    delta_integral,
    exp_eta,
    graininess,
    sigma,
    weighted_metric,
    weighted_norm,
)

Z5 = TimeScaleGrid.lattice(0, 5, 1)
IRREG = TimeScaleGrid.from_points([0.0, 0.5, 2.0])


def test_sigma_examples():
    assert sigma(Z5, 2) == 3
    assert sigma(IRREG, 1) == 2 and IRREG.points[sigma(IRREG, 1)] == 2.0
    assert sigma(Z5, Z5.N) == Z5.N
    assert sigma(IRREG, IRREG.N) == IRREG.N


@pytest.mark.parametrize("i", [0, 1, 2, 3, 4])
def test_graininess_lattice(i):
    assert graininess(Z5, i) == 1.0


def test_graininess_examples():
    assert graininess(IRREG, 1) == 1.5
    assert graininess(Z5, Z5.N) == 0.0
    assert graininess(IRREG, IRREG.N) == 0.0


@pytest.mark.parametrize("i", range(5))
def test_delta_derivative_of_square(i):
    f = GridFunction(Z5, Z5.points**2)
    t = Z5.points[i]
    assert delta_derivative(f, i) == 2 * t + 1


def test_delta_derivative_constant_and_linear():
    assert delta_derivative(GridFunction.constant(Z5, 3.0), 2) == 0.0
    assert delta_derivative(GridFunction(IRREG, IRREG.points), 0) == 1.0


def test_delta_derivative_terminal_point():
    with pytest.raises(TerminalPointError):
        delta_derivative(GridFunction.constant(Z5, 1.0), Z5.N)


def test_delta_integral_examples():
    f = GridFunction(Z5, Z5.points)
    assert delta_integral(f, 0, 3) == 3.0
    assert delta_integral(f, 2, 2) == 0.0
    grid = TimeScaleGrid.uniform(0, 1, 1000)
    val = delta_integral(GridFunction(grid, grid.points), 0, grid.N)
    assert val == pytest.approx(0.4995, abs=1e-12)
    assert abs(val - 0.5) <= 1e-3


def test_delta_integral_reversed():
    with pytest.raises(DomainError):
        delta_integral(GridFunction.constant(Z5, 1.0), 3, 1)


def test_exp_eta_examples():
    ctx = WeightedNormContext(Z5, 1.0)
    assert exp_eta(ctx, Z5, 3) == 8.0
    assert exp_eta(ctx, Z5, 0) == 1.0
    grid = TimeScaleGrid.uniform(0, 1, 1000)
    val = exp_eta(WeightedNormContext(grid, 1.0), grid, grid.N)
    assert abs(val / math.e - 1) <= 2e-3


def test_exp_eta_before_base_point():
    ctx = WeightedNormContext(Z5, 1.0, t0_index=2)
    assert exp_eta(ctx, Z5, 2) == 1.0
    with pytest.raises(DomainError):
        exp_eta(ctx, Z5, 1)


def test_weighted_norm_examples():
    grid = TimeScaleGrid.lattice(0, 3, 1)
    ctx = WeightedNormContext(grid, 1.0)
    assert weighted_norm(GridFunction.constant(grid, 0.0), ctx) == 0.0
    assert weighted_norm(GridFunction(grid, 2.0**grid.points), ctx) == 1.0
    assert weighted_norm(GridFunction.constant(grid, 1.0), ctx) == 1.0


def test_weighted_metric_examples():
    grid = TimeScaleGrid.lattice(0, 2, 1)
    ctx = WeightedNormContext(grid, 1.0)
    f = GridFunction(grid, [0.0, 0.0, 0.0])
    g = GridFunction(grid, [1.0, 2.0, 4.0])
    assert weighted_metric(f, g, ctx) == 1.0
    assert weighted_metric(g, g, ctx) == 0.0


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-1e6, 1e6), min_size=6, max_size=6),
    st.lists(st.floats(-1e6, 1e6), min_size=6, max_size=6),
    st.floats(0.01, 5.0),
)
def test_weighted_metric_symmetric(a, b, eta):
    ctx = WeightedNormContext(Z5, eta)
    f, g = GridFunction(Z5, a), GridFunction(Z5, b)
    assert weighted_metric(f, g, ctx) == weighted_metric(g, f, ctx)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=2, max_size=30), st.floats(0.01, 3.0))
def test_exp_eta_is_product(steps, eta):
    grid = TimeScaleGrid.from_points(np.concatenate([[0.0], np.cumsum(steps)]))
    ctx = WeightedNormContext(grid, eta)
    i = grid.N
    assert exp_eta(ctx, grid, i) == pytest.approx(math.prod(1 + eta * s for s in steps), rel=1e-12)


def test_grid_validation():
    with pytest.raises(DomainError):
        TimeScaleGrid.from_points([0.0, 1.0, 1.0])
    with pytest.raises(DomainError):
        TimeScaleGrid.from_points([0.0])
    with pytest.raises(DomainError):
        TimeScaleGrid.from_points([0.0, 1.0, 3.0], ScaleKind.UniformLattice)
    with pytest.raises(DomainError):
        TimeScaleGrid.lattice(0, 1, 0.3)
    with pytest.raises(DomainError):
        Z5.check_index(6)


def test_uniform_counts_subintervals():
    grid = TimeScaleGrid.uniform(0, 1, 1000)
    assert len(grid) == 1001
    assert grid.step == pytest.approx(1e-3)
    assert grid.kind is ScaleKind.ContinuousApprox


def test_grid_text_round_trip(tmp_path):
    grid = TimeScaleGrid.from_points([0.0, 0.1, 0.30000000000000004, 2.5])
    path = tmp_path / "g.txt"
    grid.save(path)
    back = TimeScaleGrid.load(path)
    assert back.same_as(grid)
    assert path.read_text().startswith("kind=Arbitrary\n")


@pytest.mark.parametrize("text", ["", "0.0\n1.0\n", "kind=Bogus\n0\n1\n", "kind=Arbitrary\n0\nx\n", "kind=Arbitrary\n1\n0\n"])
def test_grid_text_rejects_corrupt(text):
    with pytest.raises(DomainError):
        TimeScaleGrid.from_text(text)


def test_grid_function_csv_round_trip():
    grid = TimeScaleGrid.lattice(0, 3, 0.5)
    f = GridFunction(grid, np.sin(grid.points) / 3, mask=[True, True, False, True, True, True, True])
    back = GridFunction.from_csv(f.to_csv(), grid)
    assert np.array_equal(back.mask, f.mask)
    assert np.array_equal(back.values[back.mask], f.values[f.mask])
    free = GridFunction.from_csv(f.to_csv())
    assert np.array_equal(free.grid.points, grid.points)


def test_grid_function_checks():
    with pytest.raises(GridMismatchError):
        GridFunction(Z5, [1.0, 2.0])
    with pytest.raises(DomainError):
        GridFunction(Z5, [1.0, np.nan, 1, 1, 1, 1])
    other = TimeScaleGrid.lattice(0, 5, 1)
    assert (GridFunction.constant(Z5, 1.0) + GridFunction.constant(other, 1.0)).values[0] == 2.0
    with pytest.raises(GridMismatchError):
        GridFunction.constant(Z5, 1.0) + GridFunction.constant(TimeScaleGrid.lattice(0, 10, 2), 1.0)


def test_grid_function_values_read_only():
    f = GridFunction.constant(Z5, 1.0)
    with pytest.raises(ValueError):
        f.values[0] = 2.0
