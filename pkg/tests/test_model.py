import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdmho.model import (
    DomainError,
    Line,
    ModelParams,
    Radial,
    effective_potentials,
    mass_and_profiles,
    params_from_dict,
    parse_sector,
    r_of_t,
    t_of_r,
)


def test_reference_derived(ref):
    assert ref.Delta == 5.0
    assert ref.lam == 4.0
    assert ref.k == pytest.approx(4.0 / 3.0, rel=1e-15)
    assert ref.L == 0.0


def test_line_even_derived(line_even):
    assert line_even.Delta == pytest.approx(3.0, rel=1e-15)
    assert line_even.lam == pytest.approx(2.0, rel=1e-15)
    assert line_even.k == pytest.approx(2.0, rel=1e-15)
    assert line_even.L == -1.0


def test_small_alpha_lambda():
    dp = ModelParams(1e-6, 1.0, Radial(3, 0)).derived
    assert dp.lam == pytest.approx(0.5 + 5e-7, rel=1e-12)
    assert abs(dp.lam - 0.5) <= dp.alpha


@pytest.mark.parametrize("alpha,omega", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (math.inf, 1.0), (math.nan, 1.0)])
def test_rejects_bad_params(alpha, omega):
    with pytest.raises(DomainError):
        ModelParams(alpha, omega, Radial(3, 0))


def test_sector_validation():
    with pytest.raises(DomainError):
        Radial(1, 0)
    with pytest.raises(DomainError):
        Radial(3, -1)
    with pytest.raises(DomainError):
        Line("both")
    assert Radial(2, 0).flagged
    assert not Radial(3, 0).flagged
    assert Radial(2, 1).L_exact == 0.5


def test_parse_sector_roundtrip():
    assert parse_sector("radial:4,2") == Radial(4, 2)
    assert parse_sector("line:odd") == Line("odd")
    assert parse_sector({"type": "radial", "d": 3, "l": 1}) == Radial(3, 1)
    with pytest.raises(DomainError):
        parse_sector("radial:3")
    with pytest.raises(DomainError):
        parse_sector({"type": "line", "parity": "even", "extra": 1})


def test_params_from_dict_rejects_unknown_keys():
    p = params_from_dict({"alpha": 3, "omega": 4, "sector": {"type": "radial", "d": 3, "l": 0}})
    assert p.derived.lam == 4.0
    with pytest.raises(DomainError):
        params_from_dict({"alpha": 3, "omega": 4, "sector": "line:even", "beta": 1})
    with pytest.raises(DomainError):
        params_from_dict({"alpha": 3, "sector": "line:even"})


def test_mass_profiles(ref):
    f, M, fp = mass_and_profiles(ModelParams(1.0, 1.0, Radial(3, 0)), 0.0)
    assert (f, M) == (1.0, 1.0)
    f, M, fp = mass_and_profiles(ref, 1.0)
    assert (f, M, fp) == (4.0, 1.0 / 16.0, 6.0)
    _, M, _ = mass_and_profiles(ref, 10.0)
    assert M == pytest.approx(1.0 / 301.0**2, rel=1e-15)
    assert M == pytest.approx(1.104e-5, rel=1e-3)


def test_effective_potentials(ref, line_even):
    vt, _ = effective_potentials(ref, 1.0)
    assert vt == pytest.approx(-17.0, rel=1e-15)
    _, v = effective_potentials(line_even, 0.0)
    assert v == pytest.approx(-1.0, rel=1e-15)


def test_effective_potential_constant_mass_limit():
    dp = ModelParams(1e-9, 4.0, Radial(3, 1)).derived
    r = np.linspace(0.5, 3.0, 7)
    vt, _ = effective_potentials(dp, r)
    np.testing.assert_allclose(vt, 2.0 / r**2 + 4.0 * r**2, rtol=1e-7)


def test_effective_potential_origin_singular(ref):
    dp = ModelParams(3.0, 4.0, Radial(3, 1)).derived
    with pytest.raises(DomainError):
        effective_potentials(dp, 0.0)


def test_t_of_r_examples(ref):
    assert t_of_r(ref, 1.0 / math.sqrt(3.0)) == pytest.approx(0.0, abs=1e-15)
    assert t_of_r(ref, 1.0) == 0.5
    assert r_of_t(ref, 0.5) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        r_of_t(ref, 1.0)


@given(st.floats(min_value=-1.0, max_value=1.0 - 1e-6))
def test_t_roundtrip(t):
    dp = ModelParams(3.0, 4.0, Radial(3, 0)).derived
    assert t_of_r(dp, r_of_t(dp, t)) == pytest.approx(t, rel=1e-12, abs=1e-12)


@given(
    st.floats(min_value=1e-6, max_value=1e3),
    st.floats(min_value=1e-6, max_value=1e3),
    st.floats(min_value=0.0, max_value=1e3),
)
def test_derived_invariants(alpha, omega, r):
    dp = ModelParams(alpha, omega, Radial(3, 0)).derived
    assert dp.Delta**2 == pytest.approx(omega**2 + alpha**2, rel=1e-14)
    # k - 1 ~ (omega/alpha)^2 / 4 drops below rounding for tiny omega/alpha
    assert dp.k > 1.0 or omega / alpha < 1e-7
    assert dp.kk == pytest.approx(omega**2 / (4 * alpha**2), rel=1e-14)
    f, M, _ = mass_and_profiles(dp, r)
    assert M * f * f == pytest.approx(1.0, rel=1e-14)
    assert abs(dp.lam - omega / 2.0) <= alpha * (1 + 1e-12)
