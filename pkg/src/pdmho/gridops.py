"""Finite-difference realizations of the algebra generators and identity checks.

Every generator is applied in a manifestly real expanded form.  With the
deformed momentum pi_r psi = -i (f psi' + alpha r psi) the factors of i
cancel in all three bases:

    Kt1 psi = -[f^2 psi'' + 4 alpha r f psi' + (alpha f + alpha^2 r^2) psi]
              + L(L+1) psi / r^2 + omega^2 r^2 psi / 4
    Kt2 psi = t psi
    Kt3 psi = -8 alpha r psi' - 4 alpha psi
            = -8 alpha (r psi' + alpha r^2 psi / f) + 4 alpha t psi   (unsimplified)
    Kb1 = Kt1,  Kb2 psi = r^2 psi,  Kb3 psi = -4 r f psi' - (4 alpha r^2 + 2 f) psi

Kt3 is kept as the real antisymmetric operator, so that
<psi_{n+1}|Kt3|psi_n> = g_{n+1} a_{n+1} and <psi_{n-1}|Kt3|psi_n> = -g_n a_n.
On the line the same formulas hold with r replaced by x and L(L+1) = 0.

Ladder operators need the scalar delta_n = k + L + 1 + 2n of the state they
act on, so they take an eigenstate together with its index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Sequence

import numpy as np

from .grid import (
    EDGE_BAND,
    GridFunction,
    RadialGrid,
    ResidualReport,
    differentiate,
    even_origin_value,
    grid_inner,
    make_grid,
    residual_report,
)
from .model import DerivedParams, DomainError, effective_potentials
from .repalg import deformed_relations
from .spectrum import delta_of_n, energy, psi_many

__all__ = [
    "GENERATORS",
    "LADDERS",
    "apply_generator",
    "apply_momentum",
    "apply_ladder",
    "ladder_factor",
    "project",
    "apply_ladder_projected",
    "bump",
    "default_test_functions",
    "commutator_residuals",
    "limit_residual",
    "casimir_residuals",
    "eigen_residuals",
    "energy_form",
    "grid_matrix",
    "ladder_matrices",
    "deformed_relation_reports",
    "hermiticity_report",
    "observed_order",
    "ConvergenceStudy",
    "convergence_study",
    "casimir_value",
    "cbar_of_r",
    "apply_casimir",
]

Generator = Literal["Kt1", "Kt2", "Kt3", "Kb1", "Kb2", "Kb3"]
Ladder = Literal["A+", "A-", "K+", "K-", "K0"]
GENERATORS: tuple[str, ...] = ("Kt1", "Kt2", "Kt3", "Kb1", "Kb2", "Kb3")
LADDERS: tuple[str, ...] = ("A+", "A-", "K+", "K-", "K0")


def _profiles(dp: DerivedParams, grid: RadialGrid):
    r = grid.r
    f = 1.0 + dp.alpha * r * r
    t = (dp.alpha * r * r - 1.0) / f
    return r, f, t


def apply_momentum(dp: DerivedParams, gf: GridFunction) -> GridFunction:
    """i pi_r psi = f psi' + alpha r psi (real for real psi)."""
    r, f, _ = _profiles(dp, gf.grid)
    d1 = differentiate(gf, 1).values
    return GridFunction(f * d1 + dp.alpha * r * gf.values, gf.grid)


def _kt1(dp: DerivedParams, gf: GridFunction) -> np.ndarray:
    a = dp.alpha
    r, f, _ = _profiles(dp, gf.grid)
    v = gf.values
    d1 = differentiate(gf, 1).values
    d2 = differentiate(gf, 2).values
    out = -(f * f * d2 + 4.0 * a * r * f * d1 + (a * f + a * a * r * r) * v)
    out += 0.25 * dp.omega**2 * r * r * v
    if dp.LL != 0.0:
        out += dp.LL * v / (r * r)
    return out


def apply_generator(
    which: Generator,
    dp: DerivedParams,
    gf: GridFunction,
    unsimplified: bool = False,
) -> GridFunction:
    """Apply one generator of the tilde or bar basis to a grid function.

    ``unsimplified=True`` selects the longer form of Kt3 before the
    alpha r^2/f = (1+t)/2 simplification; it exists for cross-checks.
    """
    a = dp.alpha
    g = gf.grid
    r, f, t = _profiles(dp, g)
    v = gf.values
    if which in ("Kt1", "Kb1"):
        return GridFunction(_kt1(dp, gf), g)
    if which == "Kt2":
        return GridFunction(t * v, g)
    if which == "Kb2":
        return GridFunction(r * r * v, g)
    d1 = differentiate(gf, 1).values
    if which == "Kt3":
        if unsimplified:
            out = -8.0 * a * (r * d1 + a * r * r / f * v) + 4.0 * a * t * v
        else:
            out = -8.0 * a * r * d1 - 4.0 * a * v
        return GridFunction(out, g)
    if which == "Kb3":
        return GridFunction(-4.0 * r * f * d1 - (4.0 * a * r * r + 2.0 * f) * v, g)
    raise DomainError(f"unknown generator {which!r}")


def _op(which: str, dp: DerivedParams) -> Callable[[GridFunction], GridFunction]:
    return lambda gf: apply_generator(which, dp, gf)


# ---------------------------------------------------------------- ladders


def ladder_factor(dp: DerivedParams, n: int, which: Literal["K+", "K-"], ordering: str = "right") -> float:
    """Scalar that turns A_+- psi_n into K_+- psi_n.

    ``right``: +-(delta+-1) sqrt((delta+-2)/delta) evaluated at delta_n.
    ``left``:  +-(delta-+1) sqrt(delta/(delta-+2)) evaluated at delta_{n+-1}.
    Both are divided by 16 lambda.  For K_- on n = 0 the radicand can be
    negative; there A_- psi_0 vanishes and its magnitude is used.
    """
    dn = delta_of_n(dp, n)
    sign = 1.0 if which == "K+" else -1.0
    if ordering == "right":
        rad = (dn + 2.0 * sign) / dn
        val = (dn + sign) * math.sqrt(abs(rad))
    elif ordering == "left":
        dm = dn + 2.0 * sign
        rad = dm / (dm - 2.0 * sign)
        val = (dm - sign) * math.sqrt(abs(rad))
    else:
        raise DomainError(f"unknown ordering {ordering!r}")
    return sign * val / (16.0 * dp.lam)


def apply_ladder(
    dp: DerivedParams,
    n: int,
    which: Ladder,
    gf: GridFunction,
    ordering: str = "right",
) -> GridFunction:
    """Apply A_+, A_-, K_+, K_- or K_0 to the ``n``-th eigenstate ``gf``.

    delta is replaced by its value delta_n on the input state.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    a, k, L = dp.alpha, dp.k, dp.L
    if which == "K0":
        return GridFunction(_kt1(dp, gf) / (4.0 * dp.lam), gf.grid)
    if which not in ("A+", "A-", "K+", "K-"):
        raise DomainError(f"unknown ladder operator {which!r}")
    up = which in ("A+", "K+")
    s = 1.0 if up else -1.0
    dn = delta_of_n(dp, n)
    _, _, t = _profiles(dp, gf.grid)
    kt3 = apply_generator("Kt3", dp, gf).values
    const = 4.0 * a * (k - L - 1.0) * (k + L) / (1.0 + s * dn)
    out = kt3 - 4.0 * a * t * (1.0 - s * dn) * gf.values + const * gf.values
    if which.startswith("K"):
        out = out * ladder_factor(dp, n, which, ordering)
    return GridFunction(out, gf.grid)


def project(dp: DerivedParams, gf: GridFunction, n_max: int) -> np.ndarray:
    """Coefficients <psi_n, gf> for n <= n_max on the grid."""
    basis = psi_many(dp, n_max, gf.grid.r)
    return np.array([grid_inner(GridFunction(b, gf.grid), gf) for b in basis])


def apply_ladder_projected(
    dp: DerivedParams, which: Ladder, gf: GridFunction, n_max: int
) -> GridFunction:
    """Ladder action on an arbitrary function via its eigen-expansion."""
    coeff = project(dp, gf, n_max)
    basis = psi_many(dp, n_max, gf.grid.r)
    out = np.zeros_like(gf.values)
    for n, c in enumerate(coeff):
        out += c * apply_ladder(dp, n, which, GridFunction(basis[n], gf.grid)).values
    return GridFunction(out, gf.grid)


# ---------------------------------------------------------------- test functions


def bump(grid: RadialGrid, center: float, width: float) -> GridFunction:
    """C-infinity bump exp(1 - 1/(1-u^2)), u = (s - center)/width, in grid coordinates."""
    u = (grid.s - center) / width
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return GridFunction(out, grid)


# (center, half-width) in grid coordinates, per mapping
BUMPS = {
    "sinh": ((2.0, 1.8), (2.5, 2.4), (3.5, 2.0)),
    "sinh2": ((1.6, 1.5), (2.0, 1.8), (1.5, 1.0)),
    "line": ((0.0, 2.5), (2.5, 2.0), (-3.0, 2.5)),
}


def default_test_functions(grid: RadialGrid) -> list[GridFunction]:
    """Three bumps in grid coordinates, from the core out to r ~ 100 c.

    Further out every identity involving Kt1 turns into a cancellation
    between terms ~ alpha r^2 larger than their sum, so bumps stay where the
    bound states live.
    """
    s_max = float(grid.s[-1])
    if grid.mapping == "uniform":
        # fractions of the domain on an identity map
        base = ((0.0, 0.3), (0.3, 0.25), (-0.4, 0.3)) if grid.line else ((0.3, 0.25), (0.45, 0.3), (0.25, 0.2))
        placements = [(c * s_max, w * s_max) for c, w in base]
    else:
        placements = BUMPS["line" if grid.line else grid.mapping]
        # short grids (Gaussian regime): shrink the whole layout to fit
        shrink = min(1.0, 0.9 * s_max / max(abs(c) + w for c, w in placements))
        placements = [(c * shrink, w * shrink) for c, w in placements]
    return [bump(grid, c, w) for c, w in placements]


# ---------------------------------------------------------------- identities


def _anti(A, B, gf):
    return A(B(gf)) + B(A(gf))


def _comm(A, B, gf):
    return A(B(gf)) - B(A(gf))


def _identities(dp: DerivedParams) -> dict[str, Callable[[GridFunction], tuple[GridFunction, GridFunction]]]:
    a, kk, LL = dp.alpha, dp.kk, dp.LL
    K1, K2, K3 = _op("Kt1", dp), _op("Kt2", dp), _op("Kt3", dp)
    B1, B2, B3 = _op("Kb1", dp), _op("Kb2", dp), _op("Kb3", dp)

    def onep(gf):  # 1 + alpha Kb2
        return gf + a * B2(gf)

    def t12(gf):
        return _comm(K1, K2, gf), K3(gf)

    def t23(gf):
        return _comm(K2, K3, gf), 8.0 * a * (gf - K2(K2(gf)))

    def t31(gf):
        rhs = (
            -8.0 * a * _anti(K1, K2, gf)
            - 16.0 * a * a * (kk + LL - 1.0) * K2(gf)
            - 16.0 * a * a * (kk - LL) * gf
        )
        return _comm(K3, K1, gf), rhs

    def b12(gf):
        return _comm(B1, B2, gf), 0.5 * _anti(onep, B3, gf)

    def b23(gf):
        return _comm(B2, B3, gf), 8.0 * B2(onep(gf))

    def b31(gf):
        rhs = (
            4.0 * _anti(onep, B1, gf)
            - 16.0 * a * a * kk * B2(onep(gf))
            + 4.0 * a * onep(gf + 3.0 * a * B2(gf))
        )
        return _comm(B3, B1, gf), rhs

    def change(gf):
        inv = 1.0 / (1.0 + a * gf.grid.r**2)
        lhs = K3(gf)
        rhs = a * (inv * B3(gf) + B3(inv * gf))
        return lhs, rhs

    return {
        "[Kt1,Kt2]=Kt3": t12,
        "[Kt2,Kt3]=8a(1-Kt2^2)": t23,
        "[Kt3,Kt1]=-8a{Kt1,Kt2}+...": t31,
        "[Kb1,Kb2]=1/2{1+aKb2,Kb3}": b12,
        "[Kb2,Kb3]=8Kb2(1+aKb2)": b23,
        "[Kb3,Kb1]=4{1+aKb2,Kb1}+...": b31,
        "Kt3=a{(1+aKb2)^-1,Kb3}": change,
    }


def commutator_residuals(
    dp: DerivedParams,
    test_functions: Sequence[GridFunction] | None = None,
    grid: RadialGrid | None = None,
    tolerance: float | None = 1e-5,
    band: int = EDGE_BAND,
) -> list[ResidualReport]:
    """One report per relation, taking the worst test function."""
    if test_functions is None:
        test_functions = default_test_functions(grid or make_grid(dp))
    reports = []
    for name, fn in _identities(dp).items():
        worst = None
        for tf in test_functions:
            lhs, rhs = fn(tf)
            rep = residual_report(name, lhs, rhs, band=band, tolerance=tolerance)
            if worst is None or rep.relative > worst.relative:
                worst = rep
        reports.append(worst)
    return reports


def limit_residual(
    dp: DerivedParams,
    test_functions: Sequence[GridFunction] | None = None,
    tolerance: float | None = 1e-5,
) -> ResidualReport:
    """Distance of [Kb2,Kb3] from the undeformed value 8 Kb2.

    The exact difference is 8 alpha r^4 psi, so the relative residual is
    about alpha <r^2> and depends on how far out the test function reaches.
    The default is the ground state.
    """
    if test_functions is None:
        grid = make_grid(dp)
        test_functions = [GridFunction(psi_many(dp, 0, grid.r)[0], grid)]
    B2, B3 = _op("Kb2", dp), _op("Kb3", dp)
    worst = None
    for tf in test_functions:
        rep = residual_report("[Kb2,Kb3]-8Kb2", _comm(B2, B3, tf), 8.0 * B2(tf), tolerance=tolerance)
        if worst is None or rep.relative > worst.relative:
            worst = rep
    return worst


def casimir_value(dp: DerivedParams) -> float:
    return 16.0 * dp.alpha**2 * (dp.kk + dp.LL - 2.0)


def cbar_of_r(dp: DerivedParams, r) -> np.ndarray:
    """Multiplication function that the bar-basis Casimir combination reduces to."""
    a, L = dp.alpha, dp.L
    r2 = np.asarray(r, dtype=float) ** 2
    return ((2.0 * L + 3.0) * (2.0 * L - 1.0) - 10.0 * a * r2 - 7.0 * a * a * r2 * r2) / 16.0


def apply_casimir(dp: DerivedParams, gf: GridFunction) -> GridFunction:
    a, kk, LL = dp.alpha, dp.kk, dp.LL
    K1, K2, K3 = _op("Kt1", dp), _op("Kt2", dp), _op("Kt3", dp)
    return (
        -16.0 * a * K2(K1(K2(gf)))
        + K3(K3(gf))
        - 16.0 * a * a * (kk + LL - 1.0) * K2(K2(gf))
        + 16.0 * a * K1(gf)
        - 32.0 * a * a * (kk - LL) * K2(gf)
    )


def _bar_terms(dp: DerivedParams, gf: GridFunction) -> list[GridFunction]:
    a, kk = dp.alpha, dp.kk
    B1, B2, B3 = _op("Kb1", dp), _op("Kb2", dp), _op("Kb3", dp)
    return [B3(B3(gf)), -16.0 * a * a * kk * B2(B2(gf)), 8.0 * _anti(B1, B2, gf)]


def casimir_residuals(
    dp: DerivedParams,
    test_functions: Sequence[GridFunction] | None = None,
    n_max: int = 5,
    grid: RadialGrid | None = None,
    tol_eigen: float = 1e-6,
    tol_bracket: float = 1e-5,
    tol_cbar: float = 1e-5,
) -> list[ResidualReport]:
    """Casimir checks: eigenvalue on psi_n, vanishing bracket, C-bar(r) identity.

    The eigenvalue check is scaled by ||psi_n|| max(|Q0|, 16 alpha^2); the
    second factor is the natural unit of Q and keeps the scale finite where
    Q0 vanishes.  The vanishing bracket has no natural scale, so its
    residual is divided by the largest norm among its individual terms.
    """
    if grid is None:
        grid = test_functions[0].grid if test_functions else make_grid(dp)
    if test_functions is None:
        test_functions = default_test_functions(grid)
    a, LL = dp.alpha, dp.LL
    q = casimir_value(dp)
    reports = []
    states = psi_many(dp, n_max, grid.r)
    for n in range(n_max + 1):
        gf = GridFunction(states[n], grid)
        scale = gf.norm(EDGE_BAND) * max(abs(q), 16.0 * a * a)
        reports.append(
            residual_report(
                f"Q psi_{n} = Q0 psi_{n}", apply_casimir(dp, gf), q * gf, tolerance=tol_eigen, scale=scale
            )
        )
    worst_b = worst_c = None
    for tf in test_functions:
        terms = _bar_terms(dp, tf)
        r2 = grid.r**2
        extra = [
            (4.0 * a * a * (12.0 - 16.0 * LL)) * tf,
            (160.0 * a**3) * (r2 * tf),
            (112.0 * a**4) * (r2 * r2 * tf),
        ]
        parts = [4.0 * a * a * t for t in terms] + extra
        total = sum(parts[1:], parts[0])
        scale = max(p.norm(EDGE_BAND) for p in parts)
        rep = residual_report("bracket operator = 0", total, 0.0 * tf, tolerance=tol_bracket, scale=scale)
        if worst_b is None or rep.relative > worst_b.relative:
            worst_b = rep
        lhs = sum(terms[1:], terms[0]) / 64.0
        rep = residual_report("Cbar combination = Cbar(r)", lhs, cbar_of_r(dp, grid.r) * tf, tolerance=tol_cbar)
        if worst_c is None or rep.relative > worst_c.relative:
            worst_c = rep
    return reports + [worst_b, worst_c]


def eigen_residuals(
    dp: DerivedParams, n_max: int = 5, grid: RadialGrid | None = None, tolerance: float | None = 1e-6
) -> list[ResidualReport]:
    """||Kt1 psi_n - E_n psi_n|| / ||psi_n|| on the interior window."""
    grid = grid or make_grid(dp)
    states = psi_many(dp, n_max, grid.r)
    out = []
    for n in range(n_max + 1):
        gf = GridFunction(states[n], grid)
        lhs = apply_generator("Kt1", dp, gf)
        rhs = energy(dp, n) * gf
        out.append(residual_report(f"Kt1 psi_{n} = E_{n} psi_{n}", lhs, rhs, tolerance=tolerance, scale=rhs.norm(EDGE_BAND)))
    return out


def energy_form(dp: DerivedParams, gf: GridFunction) -> float:
    """<psi, Kt1 psi> / <psi, psi> from the weak form: integral of f^2 psi'^2 + V psi^2.

    Kt1 = -(d/dr) f^2 (d/dr) + V with V = L(L+1)/r^2 + (omega^2 - 8 alpha^2) r^2/4 - alpha.
    Only one derivative is taken, so grid-scale noise in the far tail is
    not magnified by f^2 the way it is in Kt1 psi.  For L = -1/2 the states
    go like r^(1/2) and the boundary term f^2 psi psi' at r = 0 is kept.
    """
    g = gf.grid
    _, f, _ = _profiles(dp, g)
    d1 = differentiate(gf, 1)
    v, _ = effective_potentials(dp, g.r)
    num = grid_inner(GridFunction(f * f * d1.values, g), d1) + grid_inner(GridFunction(v * gf.values, g), gf)
    if not g.line and 2.0 * dp.L + 1.0 == 0.0:
        num += even_origin_value(f * f * gf.values * d1.values, g)
    return num / grid_inner(gf, gf)


# ---------------------------------------------------------------- matrices


def grid_matrix(
    dp: DerivedParams,
    n_max: int,
    op: Callable[[int, GridFunction], GridFunction],
    grid: RadialGrid | None = None,
) -> np.ndarray:
    """Matrix <psi_m, op(n, psi_n)> by grid quadrature."""
    grid = grid or make_grid(dp)
    states = [GridFunction(v, grid) for v in psi_many(dp, n_max, grid.r)]
    mat = np.empty((n_max + 1, n_max + 1))
    for n, s in enumerate(states):
        image = op(n, s)
        for m, sm in enumerate(states):
            mat[m, n] = grid_inner(sm, image)
    return mat


def ladder_matrices(dp: DerivedParams, n_max: int, grid: RadialGrid | None = None) -> dict[str, np.ndarray]:
    """Quadrature matrices of K0, K+, K-, Kt2 and Kt3 on psi_0..psi_n_max."""
    grid = grid or make_grid(dp)
    out = {}
    for which in ("K0", "K+", "K-"):
        out[which] = grid_matrix(dp, n_max, lambda n, gf, w=which: apply_ladder(dp, n, w, gf), grid)
    out["Kt2"] = grid_matrix(dp, n_max, lambda n, gf: apply_generator("Kt2", dp, gf), grid)
    out["Kt3"] = grid_matrix(dp, n_max, lambda n, gf: apply_generator("Kt3", dp, gf), grid)
    return out


def _matrix_report(name: str, lhs: np.ndarray, rhs: np.ndarray, tol: float | None, meta: dict) -> ResidualReport:
    # elementwise check: the residual is the worst absolute entry, scale 1
    diff = float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0
    return ResidualReport(name, diff, 1.0, meta, tol)


def deformed_relation_reports(
    dp: DerivedParams,
    mats: dict[str, np.ndarray],
    tolerance: float | None = 1e-8,
    meta: dict | None = None,
) -> list[ResidualReport]:
    """Check the deformed su(1,1) relations on quadrature matrices of K0, K+, K-.

    Products are truncated at the matrix size, so the last row and column
    are excluded.  Quadrature leaves noise of fixed absolute size in entries
    that vanish exactly, so the worst entry error is measured against the
    largest entry of the block.
    """
    N = mats["K0"].shape[0]
    return deformed_relations(
        dp, mats["K0"], mats["K+"], mats["K-"], N - 2, "scaled", tolerance, meta
    )


def hermiticity_report(dp: DerivedParams, mats: dict[str, np.ndarray], tolerance: float | None = 1e-8) -> ResidualReport:
    """<psi_m, K+ psi_n> against <K- psi_m, psi_n>."""
    return _matrix_report("K+ = (K-)^T", mats["K+"], mats["K-"].T, tolerance, {})


# ---------------------------------------------------------------- convergence


def observed_order(errors: Sequence[float], spacings: Sequence[float]) -> list[float]:
    """log(e0/e1) / log(h0/h1) for successive refinements."""
    out = []
    for e0, e1, h0, h1 in zip(errors, errors[1:], spacings, spacings[1:]):
        out.append(math.log(e0 / e1) / math.log(h0 / h1) if e0 > 0 and e1 > 0 else math.inf)
    return out


@dataclass
class ConvergenceStudy:
    identity: str
    n_points: list[int]
    spacing: list[float]
    relative: list[float]
    orders: list[float]

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "n_points": self.n_points,
            "h": self.spacing,
            "relative": self.relative,
            "orders": self.orders,
        }


def convergence_study(
    dp: DerivedParams,
    n_points: Iterable[int] = (501, 1001, 2001),
    r_max: float | None = None,
) -> list[ConvergenceStudy]:
    """Commutator residuals on successively halved spacings.

    The outer radius and the bumps (defined in the grid coordinate) are held
    fixed, so only the spacing changes.
    """
    n_points = list(n_points)
    if r_max is None:
        r_max = make_grid(dp).r_max
    rows: dict[str, list[float]] = {}
    spacing = []
    for npts in n_points:
        grid = make_grid(dp, n_points=npts, r_max=r_max)
        spacing.append(grid.h)
        for rep in commutator_residuals(dp, grid=grid, tolerance=None):
            rows.setdefault(rep.identity, []).append(rep.relative)
    return [
        ConvergenceStudy(name, n_points, spacing, vals, observed_order(vals, spacing))
        for name, vals in rows.items()
    ]
