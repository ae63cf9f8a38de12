import math

import numpy as np
import pytest

from pdmho.grid import EDGE_BAND, GridFunction, grid_inner, make_grid
from pdmho.gridops import (
    apply_generator,
    apply_ladder,
    casimir_residuals,
    casimir_value,
    cbar_of_r,
    commutator_residuals,
    convergence_study,
    default_test_functions,
    deformed_relation_reports,
    eigen_residuals,
    energy_form,
    hermiticity_report,
    ladder_factor,
    ladder_matrices,
    limit_residual,
    observed_order,
)
from pdmho.model import DomainError, Line, ModelParams, Radial
from pdmho.repalg import matrix_elements
from pdmho.spectrum import energy, psi_many


@pytest.fixture(scope="module")
def ref_grid(ref):
    return make_grid(ref)


@pytest.fixture(scope="module")
def ref_states(ref, ref_grid):
    return [GridFunction(v, ref_grid) for v in psi_many(ref, 6, ref_grid.r)]


def test_casimir_value(ref):
    assert casimir_value(ref) == pytest.approx(-224.0, rel=1e-14)


def test_cbar_origin(ref):
    assert cbar_of_r(ref, 0.0) == pytest.approx(-3.0 / 16.0, rel=1e-15)


SECTORS = [Radial(3, 0), Radial(2, 1), Radial(3, 2), Line("even"), Line("odd")]


@pytest.mark.parametrize("sector", SECTORS, ids=lambda s: s.label())
def test_commutators(sector):
    dp = ModelParams(3.0, 4.0, sector).derived
    for rep in commutator_residuals(dp):
        assert rep.passed, rep.to_dict()


@pytest.mark.parametrize("sector", SECTORS, ids=lambda s: s.label())
def test_eigen_and_casimir(sector):
    dp = ModelParams(1.0, 2.5, sector).derived
    for rep in eigen_residuals(dp) + casimir_residuals(dp):
        assert rep.passed, rep.to_dict()


def test_energy_form(ref, ref_states):
    for n in range(3):
        assert energy_form(ref, ref_states[n]) == pytest.approx(energy(ref, n), rel=1e-8)


def test_k0_on_ground_state(ref, ref_states):
    out = apply_ladder(ref, 0, "K0", ref_states[0])
    i = slice(EDGE_BAND, -EDGE_BAND)
    np.testing.assert_allclose(out.values[i], 15.0 / 16.0 * ref_states[0].values[i], atol=1e-7)


def test_kplus_ground_element(ref, ref_states):
    image = apply_ladder(ref, 0, "K+", ref_states[0])
    assert grid_inner(ref_states[1], image) == pytest.approx(0.75 * math.sqrt(77.0 / 12.0), rel=1e-8)


def test_kminus_annihilates_ground(ref, ref_states):
    image = apply_ladder(ref, 0, "K-", ref_states[0])
    up = apply_ladder(ref, 0, "K+", ref_states[0])
    assert image.norm(EDGE_BAND) <= 1e-8 * up.norm(EDGE_BAND)


def test_orderings_agree(ref):
    for n in range(12):
        for which in ("K+", "K-"):
            if which == "K-" and n == 0:
                continue
            assert ladder_factor(ref, n, which, "right") == pytest.approx(
                ladder_factor(ref, n, which, "left"), rel=1e-12
            )
    with pytest.raises(DomainError):
        ladder_factor(ref, 0, "K+", "middle")


def test_kt3_forms_agree(ref, ref_states):
    a = apply_generator("Kt3", ref, ref_states[2]).values
    b = apply_generator("Kt3", ref, ref_states[2], unsimplified=True).values
    i = slice(EDGE_BAND, -EDGE_BAND)
    assert np.max(np.abs(a - b)[i]) <= 1e-10 * np.max(np.abs(a))


def test_unknown_generator(ref, ref_states):
    with pytest.raises(DomainError):
        apply_generator("Kt4", ref, ref_states[0])
    with pytest.raises(DomainError):
        apply_ladder(ref, 0, "K9", ref_states[0])


@pytest.mark.parametrize("sector", [Radial(3, 0), Line("even"), Line("odd")], ids=lambda s: s.label())
def test_ladder_matrices_match_closed_form(sector):
    dp = ModelParams(3.0, 4.0, sector).derived
    mats = ladder_matrices(dp, 5)
    closed = matrix_elements(dp, 5, "deformed").matrices
    for name in ("K0", "K+", "K-"):
        scale = np.max(np.abs(closed[name]))
        assert np.max(np.abs(mats[name] - closed[name])) <= 1e-8 * scale, name
    tilde = matrix_elements(dp, 5, "tilde").matrices
    for name in ("Kt2", "Kt3"):
        scale = np.max(np.abs(tilde[name]))
        assert np.max(np.abs(mats[name] - tilde[name])) <= 1e-8 * scale, name
    assert hermiticity_report(dp, mats).passed
    assert all(rep.passed for rep in deformed_relation_reports(dp, mats))


def test_limit_residual_small_alpha():
    dp = ModelParams(1e-6, 1.0, Radial(3, 0)).derived
    rep = limit_residual(dp)
    assert rep.relative <= 1e-5


def test_limit_residual_linear_in_alpha():
    vals = [limit_residual(ModelParams(a, 1.0, Radial(3, 0)).derived).relative for a in (1e-4, 1e-5, 1e-6)]
    assert vals[0] / vals[1] == pytest.approx(10.0, rel=1e-3)
    assert vals[1] / vals[2] == pytest.approx(10.0, rel=1e-3)


def test_limit_residual_large_alpha(ref):
    # away from the limit the undeformed relation visibly fails
    assert limit_residual(ref).relative > 1e-2


def test_default_test_functions_cover_core(ref_grid):
    tfs = default_test_functions(ref_grid)
    assert len(tfs) == 3
    for tf in tfs:
        assert tf.values[:EDGE_BAND].max() == 0.0 and tf.values[-EDGE_BAND:].max() == 0.0


def test_observed_order():
    assert observed_order([1.0, 1.0 / 64.0], [0.2, 0.1]) == pytest.approx([6.0])
    assert observed_order([0.0, 0.0], [0.2, 0.1]) == [math.inf]


def test_convergence_order(ref):
    for study in convergence_study(ref, (1001, 2001, 4001)):
        assert max(study.orders) >= 5.0 or study.relative[0] < 1e-9, study.to_dict()
