import io
import math
import warnings

import numpy as np
import pytest

from pdmho.grid import GridFunction, grid_inner, grid_norm, make_grid
from pdmho.ladder import (
    LadderAccuracyWarning,
    TowerFilter,
    build_tower,
    ground_state_ode,
    ground_state_slope,
    norm_recursion,
    raise_state,
    raising_consistency,
    write_tower_csv,
)
from pdmho.model import DomainError, Line, ModelParams, Radial
from pdmho.spectrum import energy, normalization_table, psi_many


@pytest.fixture(scope="module")
def ref_tower(ref):
    return build_tower(ref, 8)


def test_slope_limits(ref):
    assert ground_state_slope(ref, 1e-9) == pytest.approx(ref.L + 1.0, abs=1e-12)
    assert ground_state_slope(ref, 1e9) == pytest.approx(-(ref.k + 1.0), abs=1e-12)


@pytest.mark.parametrize(
    "sector", [Radial(3, 0), Radial(2, 0), Radial(3, 2), Line("even"), Line("odd")], ids=lambda s: s.label
)
def test_ground_state_ode(sector):
    dp = ModelParams(3.0, 4.0, sector).derived
    grid = make_grid(dp)
    psi0 = ground_state_ode(dp, grid)
    exact = GridFunction(psi_many(dp, 0, grid.r)[0], grid)
    assert grid_norm(psi0 - exact) <= 1e-8
    assert psi0.norm() == pytest.approx(1.0, abs=1e-12)


def test_raise_once(ref):
    grid = make_grid(ref)
    states = psi_many(ref, 1, grid.r)
    psi0 = GridFunction(states[0], grid)
    psi1, err = raise_state(ref, 0, psi0)
    assert grid_norm(psi1 - GridFunction(states[1], grid)) <= 1e-7
    assert abs(err) <= 1e-6
    assert abs(grid_inner(psi1, psi0)) <= 1e-8


def test_raise_warns_on_bad_input(ref):
    grid = make_grid(ref)
    wrong = GridFunction(psi_many(ref, 1, grid.r)[1], grid)
    with pytest.warns(LadderAccuracyWarning, match="grid h="):
        raise_state(ref, 0, wrong)
    with pytest.raises(DomainError):
        raise_state(ref, -1, wrong)


def test_tower_reference(ref_tower, ref):
    assert ref_tower.n_max == 8
    assert np.max(ref_tower.deviation) <= 1e-5
    for s in ref_tower.states:
        assert s.norm() == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(ref_tower.rayleigh, [energy(ref, n) for n in range(9)], rtol=1e-6)
    assert np.max(ref_tower.norm_ratio_error) <= 1e-12


@pytest.mark.parametrize("sector", [Line("even"), Line("odd"), Radial(2, 1)], ids=lambda s: s.label())
def test_tower_other_sectors(sector):
    tower = build_tower(ModelParams(1.0, math.sqrt(8.0), sector).derived, 8)
    assert np.max(tower.deviation) <= 1e-5


def test_tower_filter_modes(ref):
    assert TowerFilter(mode="direct").resolve_mode(ref, make_grid(ref)) == "direct"
    with pytest.raises(DomainError):
        TowerFilter(mode="fancy").resolve_mode(ref, make_grid(ref))
    tower = build_tower(ref, 4, noise_filter=TowerFilter(mode="weighted"))
    assert np.max(tower.deviation) <= 1e-5


def test_unfiltered_tower_degrades(ref):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LadderAccuracyWarning)
        raw = build_tower(ref, 8, noise_filter=None)
    assert raw.deviation[1] <= 1e-6
    assert raw.deviation[8] > raw.deviation[1]


def test_norm_recursion_products(ref):
    table = normalization_table(ref, 12)
    prod = 1.0
    for n in range(12):
        prod *= norm_recursion(ref, n)
        assert prod == pytest.approx(table.ratio[n + 1], rel=1e-12)
    assert math.prod(norm_recursion(ref, j) for j in range(4)) == pytest.approx(table.ratio[4], rel=1e-12)
    with pytest.raises(DomainError):
        norm_recursion(ref, -1)


def test_norm_recursion_small_alpha():
    dp = ModelParams(1e-6, 1.0, Radial(3, 0)).derived
    ratios = [norm_recursion(dp, n) for n in range(6)]
    assert all(math.isfinite(x) and x > 0 for x in ratios)
    # k -> infinity: ratio -> sqrt((n+1)/(n+L+3/2))
    for n, x in enumerate(ratios):
        assert x == pytest.approx(math.sqrt((n + 1) / (n + 1.5)), rel=1e-5)


@pytest.mark.parametrize("sector", [Radial(3, 0), Radial(3, 1), Line("even"), Line("odd")], ids=lambda s: s.label())
def test_raising_consistency(sector):
    dp = ModelParams(3.0, 4.0, sector).derived
    grid = make_grid(dp)
    for n in range(7):
        assert raising_consistency(dp, n, grid) <= 1e-8


def test_tower_csv(ref_tower):
    buf = io.StringIO()
    write_tower_csv(buf, ref_tower)
    lines = buf.getvalue().splitlines()
    assert lines[1] == "n,E_n,L2_deviation,rayleigh_quotient,norm_error"
    assert len(lines) == 11
    assert float(lines[2].split(",")[1]) == 15.0
