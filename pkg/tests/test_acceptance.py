"""Acceptance suite: one PASS/FAIL line per criterion, at the documented tolerances."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from pdmho.cli import STENCIL_ORDER, limit_slopes
from pdmho.grid import EDGE_BAND, GridFunction, make_grid
from pdmho.gridops import (
    apply_ladder,
    casimir_residuals,
    casimir_value,
    commutator_residuals,
    convergence_study,
    ladder_factor,
    ladder_matrices,
)
from pdmho.ladder import build_tower, norm_recursion
from pdmho.model import Line, ModelParams, Radial
from pdmho.oracle import spectrum_study
from pdmho.repalg import (
    a_p_sq,
    admissible_lowest_weights,
    constant_mass_limit,
    deformed_casimir_value,
    deformed_commutator_matrices,
    lambda_p,
    matrix_elements,
)
from pdmho.specfun import jacobi_p, jacobi_raise_rhs
from pdmho.spectrum import energy_formula, gj_gram, jacobi_params, normalization_table, psi_many

REF = ModelParams(3.0, 4.0, Radial(3, 0))
LINE_EVEN = ModelParams(1.0, math.sqrt(8.0), Line("even"))
LINE_ODD = ModelParams(1.0, math.sqrt(8.0), Line("odd"))


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
        assert ok, detail

    return emit


def test_criterion_1_spectrum_vs_oracle(verdict):
    start = time.perf_counter()
    worst = 0.0
    cases = [(REF, (0, 1, 2), (15.0, 55.0, 119.0)), (LINE_EVEN, (0, 1), (2.0, 14.0)), (LINE_ODD, (0, 1), (7.0, 23.0))]
    for params, ns, expected in cases:
        study = spectrum_study(params.derived, ns)
        for row, E in zip(study.rows, expected):
            worst = max(worst, abs(row.E_extrap / E - 1.0))
    elapsed = time.perf_counter() - start
    verdict(1, "spectrum vs oracle", worst <= 1e-6 and elapsed <= 20.0, f"max rel err {worst:.2e}, {elapsed:.1f} s")


def test_criterion_2_orthonormality(verdict):
    combos = [
        ModelParams(3.0, 4.0, Radial(3, 0)),
        ModelParams(0.5, 1.0, Radial(3, 1)),
        ModelParams(2.0, 7.0, Radial(5, 2)),
        ModelParams(1.0, math.sqrt(8.0), Line("even")),
        ModelParams(1.0, math.sqrt(8.0), Line("odd")),
        ModelParams(0.1, 3.0, Line("odd")),
    ]
    worst = max(float(np.max(np.abs(gj_gram(p.derived, 8) - np.eye(9)))) for p in combos)
    verdict(2, "orthonormality, m,n <= 8, 6 combos", worst <= 1e-9, f"max dev {worst:.2e}")


def test_criterion_3_algebra_identities(verdict):
    worst_res, worst_order = 0.0, math.inf
    for params in (REF, LINE_EVEN, LINE_ODD):
        dp = params.derived
        reps = commutator_residuals(dp, grid=make_grid(dp, n_points=4001), tolerance=1e-5)
        worst_res = max(worst_res, max(r.relative for r in reps))
        for study in convergence_study(dp, (1001, 2001, 4001)):
            worst_order = min(worst_order, max(study.orders))
    ok = worst_res <= 1e-5 and worst_order >= STENCIL_ORDER - 1.5
    verdict(3, "commutators at N=4001 and observed order", ok, f"max rel {worst_res:.2e}, min best-pair order {worst_order:.2f}")


def test_criterion_4_casimir(verdict):
    dp = REF.derived
    reps = casimir_residuals(dp)
    eig = max(r.relative for r in reps[:-2])
    bracket, cbar = reps[-2].relative, reps[-1].relative
    q = casimir_value(dp)
    ok = eig <= 1e-6 and bracket <= 1e-5 and cbar <= 1e-5 and abs(q + 224.0) <= 1e-12
    verdict(4, "Casimir suite", ok, f"Q={q:.6g}, eigen {eig:.2e}, bracket {bracket:.2e}, Cbar {cbar:.2e}")


def test_criterion_5_ladder_irrep(verdict):
    dp = REF.derived
    grid = make_grid(dp)
    mats = ladder_matrices(dp, 6, grid)
    closed = dict(matrix_elements(dp, 6, "deformed").matrices)
    closed.update(matrix_elements(dp, 6, "tilde").matrices)
    elem = max(
        float(np.max(np.abs(mats[k] - closed[k])) / np.max(np.abs(closed[k]))) for k in ("K0", "K+", "K-", "Kt2", "Kt3")
    )
    psi0 = GridFunction(psi_many(dp, 0, grid.r)[0], grid)
    annih = apply_ladder(dp, 0, "K-", psi0).norm(EDGE_BAND) / apply_ladder(dp, 0, "K+", psi0).norm(EDGE_BAND)
    order = max(
        abs(ladder_factor(dp, n, w, "right") / ladder_factor(dp, n, w, "left") - 1.0)
        for n in range(13)
        for w in ("K+", "K-")
        if not (w == "K-" and n == 0)
    )
    k, L, alpha = Fraction(4, 3), Fraction(0), Fraction(3)
    exact = all(lambda_p(alpha, k, L, (k + L) / 2 + n) == energy_formula(alpha, k, L, n) for n in range(20))
    exact = exact and a_p_sq(k, L, (k + L) / 2) == 0
    n_line = len(admissible_lowest_weights(Fraction(2), Fraction(0)))
    ok = elem <= 1e-8 and annih <= 1e-8 and order <= 1e-12 and exact and n_line == 2
    verdict(
        5,
        "ladder/irrep equivalence",
        ok,
        f"elements {elem:.2e}, K-psi0 {annih:.2e}, orderings {order:.2e}, exact={exact}, line p0 count {n_line}",
    )


def test_criterion_6_raising_tower(verdict):
    dev = 0.0
    for params in (REF, LINE_EVEN, LINE_ODD):
        dev = max(dev, float(np.max(build_tower(params.derived, 8).deviation)))
    dp = REF.derived
    table = normalization_table(dp, 12)
    prod, norm_err = 1.0, 0.0
    for n in range(12):
        prod *= norm_recursion(dp, n)
        norm_err = max(norm_err, abs(prod / table.ratio[n + 1] - 1.0))
    jp = jacobi_params(dp)
    t = np.linspace(-1.0, 1.0, 401)
    jac = 0.0
    for n in range(13):
        rhs = -2.0 * (n + 1) * (n + jp.beta + jp.gamma_ + 1.0) * jacobi_p(n + 1, jp, t)
        jac = max(jac, float(np.max(np.abs(jacobi_raise_rhs(n, jp, t) - rhs)) / np.max(np.abs(rhs))))
    ok = dev <= 1e-5 and norm_err <= 1e-12 and jac <= 1e-10
    verdict(6, "A+ tower", ok, f"L2 dev {dev:.2e}, norm products {norm_err:.2e}, Jacobi identity {jac:.2e}")


def test_criterion_7_deformed_matrices(verdict):
    worst = 0.0
    for params in (REF, LINE_EVEN, LINE_ODD):
        worst = max(worst, max(r.relative for r in deformed_commutator_matrices(params.derived, 12, 10)))
    c0 = deformed_casimir_value(REF.derived)
    ok = worst <= 1e-12 and abs(c0 + 3.0 / 64.0) <= 1e-15
    verdict(7, "deformed su(1,1) matrices, n <= 10 of 12", ok, f"max elementwise {worst:.2e}, C0={c0:.6g}")


def test_criterion_8_constant_mass_limit(verdict):
    alphas = [10.0 ** (-j / 2) for j in range(2, 11)]
    worst = 0.0
    for sector in (Radial(3, 0), Radial(3, 1), Line("even"), Line("odd")):
        slopes = limit_slopes(constant_mass_limit(1.0, sector, alphas, 4))
        worst = max(worst, max(abs(s - 1.0) for s in slopes["E"] + slopes["K+"]))
    verdict(8, "constant-mass limit slopes", worst <= 0.05, f"max |slope - 1| {worst:.3f}")
