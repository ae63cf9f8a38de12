"""Quadratic Jacobi algebra data, irreducible representations and matrix elements.

Everything here is closed-form arithmetic on (alpha, lambda/alpha, L).  The
representation data depend on L only through L(L+1), so the two line
towers (L = -1 and L = 0) share one set of structure constants and differ
only in their lowest weight.

Functions that build coefficients accept ``fractions.Fraction`` inputs for
``k`` and ``L`` so that identities such as lambda_{p0+n} = E_n can be checked
in exact arithmetic.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .grid import ResidualReport
from .model import DerivedParams, DomainError
from .spectrum import delta_of_n, energy

__all__ = [
    "QJ3Params",
    "qj3_params",
    "lambda_p",
    "a_p_sq",
    "a_p_sq_factors",
    "b_p",
    "g_p",
    "shifted_a",
    "shifted_b",
    "shifted_g",
    "admissible_lowest_weights",
    "RepCoefficients",
    "rep_coefficients",
    "kplus_element",
    "kminus_element",
    "line_kplus_element",
    "line_kminus_element",
    "MatrixTables",
    "matrix_elements",
    "deformed_casimir_value",
    "deformed_relations",
    "deformed_commutator_matrices",
    "LimitRow",
    "constant_mass_limit",
    "loglog_slope",
    "rep_to_json",
    "write_matrix_element_csv",
    "DEGENERACY_TOL",
]

DEGENERACY_TOL = 1e-8


# ---------------------------------------------------------------- QJ(3)


@dataclass(frozen=True)
class QJ3Params:
    """Structure constants of the quadratic Jacobi algebra (R = A1 = C1 = 0)."""

    A2: float
    C2: float
    D: float
    G1: float
    G2: float
    R: float = 0.0
    A1: float = 0.0
    C1: float = 0.0

    @property
    def discriminant(self) -> float:
        return self.D * self.D - 4.0 * self.A2 * self.G1

    @property
    def nondegenerate(self) -> bool:
        return self.discriminant != 0.0

    def to_dict(self) -> dict[str, float]:
        return {
            "A1": self.A1,
            "A2": self.A2,
            "C1": self.C1,
            "C2": self.C2,
            "D": self.D,
            "G1": self.G1,
            "G2": self.G2,
            "R": self.R,
        }


def qj3_params(dp: DerivedParams) -> QJ3Params:
    a, kk, LL = dp.alpha, dp.kk, dp.LL
    return QJ3Params(
        A2=-8.0 * a,
        C2=-16.0 * a * a * (kk + LL - 1.0),
        D=0.0,
        G1=8.0 * a,
        G2=-16.0 * a * a * (kk - LL),
    )


# ---------------------------------------------------------------- irreps


def lambda_p(alpha, k, L, p):
    return alpha * (4 * p * (p + 1) - k * (k - 1) - L * (L + 1) + 1)


def a_p_sq_factors(k, L, p) -> tuple:
    """The four linear factors in the numerator of a_p^2."""
    return (2 * p - k + L + 1, 2 * p - k - L, 2 * p + k - L - 1, 2 * p + k + L)


def _a_p_sq_prefactor(p):
    return 16 * p * p * (2 * p - 1) * (2 * p + 1)


def a_p_sq(k, L, p):
    """a_p^2 as a product of linear factors over the prefactor.

    The factored form keeps the zero at the lowest weight exact.  Where a
    factor vanishes the result is 0 even if the prefactor vanishes too.
    """
    f1, f2, f3, f4 = a_p_sq_factors(k, L, p)
    num = f1 * f2 * f3 * f4
    if num == 0:
        return num * 0
    den = _a_p_sq_prefactor(p)
    if den == 0:
        raise DomainError(f"a_p^2 has a pole at p = {p}")
    return num / den


def b_p(k, L, p):
    return -((k - L - 1) * (k + L)) / (4 * p * (p + 1))


def g_p(alpha, p):
    return 8 * alpha * p


def shifted_a(k, L, n) -> float:
    """a_n with tau_n = +1; a_0 = 0."""
    if n == 0:
        return 0.0
    s = k + 2 * n + L
    rad = n * (2 * n + 2 * L + 1) * (k + n + L) * (2 * k + 2 * n - 1) / ((s - 1) * (s + 1))
    return math.sqrt(rad) / s


def shifted_b(k, L, n):
    return -((k - L - 1) * (k + L)) / ((k + 2 * n + L) * (k + 2 * n + L + 2))


def shifted_g(alpha, k, L, n):
    return 4 * alpha * (k + 2 * n + L)


def _roots(k, L) -> list:
    """Zeros of the four numerator factors of a_p^2."""
    return [(k - L - 1) / 2, (k + L) / 2, (-k + L + 1) / 2, -(k + L) / 2]


def admissible_lowest_weights(
    k, L, n_check: int = 50, scan: Sequence[float] | None = None, tol: float = 1e-12
) -> list:
    """Positive lowest weights p0 with a_{p0}^2 = 0 and a_{p0+n}^2 > 0.

    Candidates are the zeros of the numerator factors (plus any point of
    ``scan`` where |a_p^2| < tol); each is kept if p0 > 0 and
    a_{p0+n}^2 > 0 for n = 1 .. n_check.  Duplicates are merged.
    """
    cands = list(_roots(k, L))
    if scan is not None:
        for p in scan:
            try:
                if abs(float(a_p_sq(k, L, p))) < tol:
                    cands.append(p)
            except DomainError:
                continue
    out: list = []
    for p0 in cands:
        if not p0 > 0:
            continue
        if any(abs(float(p0) - float(q)) < DEGENERACY_TOL for q in out):
            continue
        if abs(float(a_p_sq_num(k, L, p0))) < tol:
            ok = True
            for n in range(1, n_check + 1):
                try:
                    if not float(a_p_sq(k, L, p0 + n)) > 0:
                        ok = False
                        break
                except DomainError:
                    ok = False
                    break
            if ok:
                out.append(p0)
    return sorted(out, key=float)


def a_p_sq_num(k, L, p):
    f1, f2, f3, f4 = a_p_sq_factors(k, L, p)
    return f1 * f2 * f3 * f4


@dataclass
class RepCoefficients:
    """Coefficient sequences of one positive-discrete-series irrep.

    Sequences are indexed by n = p - p0 = 0 .. n_max.  ``flags`` lists
    non-generic coincidences found while building the tables.
    """

    p0: float
    parity: str | None
    p: np.ndarray
    lambda_p: np.ndarray
    a_p_sq: np.ndarray
    b_p: np.ndarray
    g_p: np.ndarray
    a_n: np.ndarray
    b_n: np.ndarray
    g_n: np.ndarray
    tau: np.ndarray
    flags: list[str] = field(default_factory=list)

    @property
    def n_max(self) -> int:
        return len(self.p) - 1

    @property
    def near_degenerate(self) -> bool:
        return bool(self.flags)

    def to_dict(self) -> dict[str, Any]:
        return {
            "p0": self.p0,
            "parity": self.parity,
            "p": self.p.tolist(),
            "lambda_p": self.lambda_p.tolist(),
            "a_p_sq": self.a_p_sq.tolist(),
            "b_p": self.b_p.tolist(),
            "g_p": self.g_p.tolist(),
            "a_n": self.a_n.tolist(),
            "b_n": self.b_n.tolist(),
            "g_n": self.g_n.tolist(),
            "tau": self.tau.tolist(),
            "flags": list(self.flags),
        }


def _degeneracy_flags(k: float, L: float, p0: float, n_max: int) -> list[str]:
    flags = []
    # another numerator zero on the weight lattice p0 + Z
    for q in _roots(k, L):
        d = q - p0
        if abs(d) > DEGENERACY_TOL and abs(d - round(d)) < DEGENERACY_TOL:
            flags.append(f"a_p^2 has a second zero at p = {q:.12g}, an integer step from p0")
    roots = sorted(_roots(k, L))
    for r0, r1 in zip(roots, roots[1:]):
        if abs(r1 - r0) < DEGENERACY_TOL and abs(r0 - p0) < DEGENERACY_TOL:
            flags.append("lowest weight is a double zero of a_p^2")
    # zeros of the prefactor on the tabulated range
    for n in range(n_max + 1):
        p = p0 + n
        for pole in (0.0, 0.5, -0.5):
            if abs(p - pole) < DEGENERACY_TOL:
                flags.append(f"p = {p:.12g} is a pole of the a_p^2 prefactor")
    # vanishing factors above the lowest weight
    for n in range(1, n_max + 1):
        if min(abs(f) for f in a_p_sq_factors(k, L, p0 + n)) < DEGENERACY_TOL:
            flags.append(f"a factor of a_p^2 vanishes at n = {n}")
    return flags


def _build(dp: DerivedParams, p0: float, L: float, parity: str | None, n_max: int) -> RepCoefficients:
    a, k = dp.alpha, dp.k
    ns = np.arange(n_max + 1)
    ps = p0 + ns
    lam = np.array([lambda_p(a, k, L, p) for p in ps])
    asq = np.empty(n_max + 1)
    asq[0] = 0.0
    for n in range(1, n_max + 1):
        asq[n] = a_p_sq(k, L, ps[n])
    bp = np.array([b_p(k, L, p) for p in ps])
    gp = np.array([g_p(a, p) for p in ps])
    a_n = np.array([shifted_a(k, L, n) for n in ns])
    b_n = np.array([shifted_b(k, L, n) for n in ns])
    g_n = np.array([shifted_g(a, k, L, n) for n in ns])
    return RepCoefficients(
        p0=float(p0),
        parity=parity,
        p=ps,
        lambda_p=lam,
        a_p_sq=asq,
        b_p=bp,
        g_p=gp,
        a_n=a_n,
        b_n=b_n,
        g_n=g_n,
        tau=np.ones(n_max + 1),
        flags=_degeneracy_flags(k, L, p0, n_max),
    )


def rep_coefficients(dp: DerivedParams, n_max: int = 20) -> dict[str, RepCoefficients]:
    """Irrep tables keyed by "radial", or by "even"/"odd" for both line towers.

    Radial sectors use the lowest weight p0 = (k + L)/2, the one whose
    states vanish like r^(L+1) at the origin.  The line carries two irreps,
    p0 = (k - 1)/2 (even, L = -1) and p0 = k/2 (odd, L = 0); both are
    returned whichever parity ``dp`` was built for.
    """
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    k = dp.k
    if dp.is_line:
        return {
            "even": _build(dp, (k - 1.0) / 2.0, -1.0, "even", n_max),
            "odd": _build(dp, k / 2.0, 0.0, "odd", n_max),
        }
    return {"radial": _build(dp, (k + dp.L) / 2.0, dp.L, None, n_max)}


def sector_rep(dp: DerivedParams, n_max: int = 20) -> RepCoefficients:
    """The irrep spanned by the states of ``dp``'s own tower."""
    reps = rep_coefficients(dp, n_max)
    return reps[dp.sector.parity] if dp.is_line else reps["radial"]


# ---------------------------------------------------------------- deformed su(1,1)


def kplus_element(dp: DerivedParams, n: int) -> float:
    """<n+1|K+|n> = (alpha/lambda) sqrt((n+1)(n+L+3/2)(n+k+L+1)(n+k+1/2))."""
    k, L = dp.k, dp.L
    return dp.alpha / dp.lam * math.sqrt((n + 1) * (n + L + 1.5) * (n + k + L + 1.0) * (n + k + 0.5))


def kminus_element(dp: DerivedParams, n: int) -> float:
    """<n-1|K-|n> = (alpha/lambda) sqrt(n(n+L+1/2)(n+k+L)(n+k-1/2)); 0 at n = 0."""
    if n == 0:
        return 0.0
    k, L = dp.k, dp.L
    return dp.alpha / dp.lam * math.sqrt(n * (n + L + 0.5) * (n + k + L) * (n + k - 0.5))


def line_kplus_element(dp: DerivedParams, n_full: int) -> float:
    """<N+2|K+|N> = (alpha/4 lambda) sqrt((N+1)(N+2)(N+2k)(N+2k+1)) in the full-line index."""
    k, N = dp.k, n_full
    return dp.alpha / (4.0 * dp.lam) * math.sqrt((N + 1) * (N + 2) * (N + 2 * k) * (N + 2 * k + 1))


def line_kminus_element(dp: DerivedParams, n_full: int) -> float:
    """<N-2|K-|N> = (alpha/4 lambda) sqrt(N(N-1)(N+2k-2)(N+2k-1))."""
    k, N = dp.k, n_full
    if N < 2:
        return 0.0
    return dp.alpha / (4.0 * dp.lam) * math.sqrt(N * (N - 1) * (N + 2 * k - 2) * (N + 2 * k - 1))


def deformed_casimir_value(dp: DerivedParams) -> float:
    r = dp.alpha / dp.lam
    L = dp.L
    return 0.25 * (1.0 - r) * (L + 1.5) * (L - 0.5) - 3.0 * r * r / 16.0 * L * (L + 1.0)


@dataclass
class MatrixTables:
    """Closed-form tables and dense matrices on psi_0 .. psi_n_max of one tower."""

    basis: str
    n_max: int
    tables: dict[str, np.ndarray]
    matrices: dict[str, np.ndarray]

    def to_dict(self) -> dict[str, Any]:
        return {
            "basis": self.basis,
            "n_max": self.n_max,
            "tables": {k: v.tolist() for k, v in self.tables.items()},
        }


def matrix_elements(dp: DerivedParams, n_max: int, basis: str = "tilde") -> MatrixTables:
    """Closed-form matrix elements in the sector's own tower.

    ``tilde``: a_n, b_n, g_n and the matrices of Kt1, Kt2, Kt3 (Kt3 real
    antisymmetric).  ``deformed``: K+, K-, K0; on the line K+- connect the
    full-line levels N and N +- 2 and are evaluated from the line formulas.
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    N = n_max + 1
    ns = np.arange(N)
    E = np.array([energy(dp, n) for n in ns])
    if basis == "tilde":
        rep = sector_rep(dp, n_max + 1)
        a_n, b_n, g_n = rep.a_n, rep.b_n, rep.g_n
        K1 = np.diag(E)
        K2 = np.diag(b_n[:N])
        K3 = np.zeros((N, N))
        for n in range(n_max):
            K2[n + 1, n] = K2[n, n + 1] = a_n[n + 1]
            K3[n + 1, n] = g_n[n + 1] * a_n[n + 1]
            K3[n, n + 1] = -g_n[n + 1] * a_n[n + 1]
        tables = {
            "a_n": a_n[:N],
            "b_n": b_n[:N],
            "g_n": g_n[:N],
            "lambda_p": rep.lambda_p[:N],
        }
        return MatrixTables("tilde", n_max, tables, {"Kt1": K1, "Kt2": K2, "Kt3": K3})
    if basis == "deformed":
        if dp.is_line:
            up = np.array([line_kplus_element(dp, dp.full_index(n)) for n in ns])
            down = np.array([line_kminus_element(dp, dp.full_index(n)) for n in ns])
        else:
            up = np.array([kplus_element(dp, n) for n in ns])
            down = np.array([kminus_element(dp, n) for n in ns])
        K0 = np.diag(E / (4.0 * dp.lam))
        Kp = np.zeros((N, N))
        Km = np.zeros((N, N))
        for n in range(n_max):
            Kp[n + 1, n] = up[n]
            Km[n, n + 1] = down[n + 1]
        tables = {"K+": up, "K-": down, "K0": np.diag(K0).copy()}
        return MatrixTables("deformed", n_max, tables, {"K0": K0, "K+": Kp, "K-": Km})
    raise DomainError(f"unknown basis {basis!r}")


def _compare(
    name: str,
    lhs: np.ndarray,
    rhs: np.ndarray,
    mode: str,
    tol: float | None,
    meta: dict,
    magnitude: np.ndarray | None = None,
) -> ResidualReport:
    diff = np.abs(lhs - rhs)
    if mode == "relative":
        # entry by entry; pairs of exact zeros do not count
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
        if magnitude is not None:
            scale = np.maximum(scale, magnitude)
        mask = scale > 0
        res = float(np.max(diff[mask] / scale[mask])) if mask.any() else 0.0
    elif mode == "scaled":
        # worst entry against the largest entry of the block
        res = float(np.max(diff)) if diff.size else 0.0
        big = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
        if magnitude is not None:
            big = max(big, float(np.max(magnitude)))
        return ResidualReport(name, res, big, dict(meta, mode=mode), tol)
    elif mode == "absolute":
        res = float(np.max(diff)) if diff.size else 0.0
    else:
        raise DomainError(f"unknown comparison mode {mode!r}")
    return ResidualReport(name, res, 1.0, dict(meta, mode=mode), tol)


def deformed_relations(
    dp: DerivedParams,
    K0: np.ndarray,
    Kp: np.ndarray,
    Km: np.ndarray,
    safe: int,
    mode: str = "relative",
    tolerance: float | None = 1e-12,
    meta: dict | None = None,
) -> list[ResidualReport]:
    """Deformed commutators and Casimir on the block of indices <= ``safe``.

    Rows and columns above ``safe`` are dropped because products of
    truncated matrices are wrong there.  The Casimir is a small number left
    after cancelling terms of size ~ K0^2, so its entries are measured
    against the sum of the magnitudes of its four terms.  ``mode`` is
    "relative" (entry by entry), "scaled" (worst entry over the largest
    entry) or "absolute".
    """
    meta = dict(meta or {}, safe=safe)
    size = K0.shape[0]
    a, lam = dp.alpha, dp.lam
    delta = np.diag([delta_of_n(dp, n) for n in range(size)])
    eye = np.eye(size)
    blk = slice(0, safe + 1)
    c1_l = K0 @ Kp - Kp @ K0
    c1_r = (a / lam) * Kp @ (delta + eye)
    c2_l = Kp @ Km - Km @ Kp
    c2_r = -(a / lam) * delta @ (2.0 * K0 + (a / (4.0 * lam)) * eye)
    terms = (
        -Kp @ Km,
        K0 @ K0,
        -(a / lam) * (delta - 1.25 * eye) @ K0,
        -(a * a / (8.0 * lam * lam)) * delta,
    )
    C = sum(terms)
    mag = sum(np.abs(t) for t in terms)
    cval = deformed_casimir_value(dp)
    return [
        _compare("[K0,K+]=(a/lam)K+(delta+1)", c1_l[blk, blk], c1_r[blk, blk], mode, tolerance, meta),
        _compare("[K+,K-]=-(a delta/lam)(2K0+a/4lam)", c2_l[blk, blk], c2_r[blk, blk], mode, tolerance, meta),
        _compare("deformed Casimir = C0", C[blk, blk], cval * eye[blk, blk], mode, tolerance, meta, mag[blk, blk]),
    ]


def deformed_commutator_matrices(
    dp: DerivedParams, n_max: int = 12, safe: int | None = None, tolerance: float | None = 1e-12
) -> list[ResidualReport]:
    """Check the deformed su(1,1) relations on closed-form matrices."""
    safe = n_max - 2 if safe is None else safe
    m = matrix_elements(dp, n_max, "deformed").matrices
    return deformed_relations(dp, m["K0"], m["K+"], m["K-"], safe, "relative", tolerance, {"n_max": n_max})


# ---------------------------------------------------------------- constant-mass limit


@dataclass(frozen=True)
class LimitRow:
    alpha: float
    n: int
    E: float
    E_limit: float
    dE: float
    Kp: float
    Kp_limit: float
    dKp: float


def constant_mass_limit(
    omega: float, sector, alphas: Sequence[float], n_max: int = 4
) -> list[LimitRow]:
    """Deviations from the undeformed oscillator as alpha -> 0.

    E_n is compared with omega(2n+L+3/2) and <n+1|K+|n> with
    sqrt((n+1)(n+L+3/2)).  Both deviations are O(alpha).
    """
    from .model import ModelParams

    rows = []
    for alpha in alphas:
        dp = ModelParams(float(alpha), float(omega), sector).derived
        up = matrix_elements(dp, max(n_max, 1), "deformed").tables["K+"]
        L = dp.L
        for n in range(n_max + 1):
            E = energy(dp, n)
            E0 = omega * (2 * n + L + 1.5)
            K0 = math.sqrt((n + 1) * (n + L + 1.5))
            rows.append(LimitRow(float(alpha), n, E, E0, abs(E - E0), float(up[n]), K0, abs(up[n] - K0)))
    return rows


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


# ---------------------------------------------------------------- export


def rep_to_json(dp: DerivedParams, n_max: int = 20) -> str:
    reps = rep_coefficients(dp, n_max)
    doc = {
        "params": dp.params.to_dict(),
        "qj3": qj3_params(dp).to_dict(),
        "admissible_p0": [float(p) for p in admissible_lowest_weights(dp.k, dp.L)],
        "irreps": {key: rep.to_dict() for key, rep in reps.items()},
        "deformed_casimir": deformed_casimir_value(dp),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def write_matrix_element_csv(
    fh,
    dp: DerivedParams,
    rows: Sequence[tuple[int, str, float, float]],
) -> None:
    """Columns n, value, closed_form, quadrature, abs_diff.

    ``value`` names the matrix element, e.g. "<n+1|K+|n>"; ``rows`` holds
    (n, value, closed_form, quadrature) tuples.
    """
    fh.write("# " + json.dumps(dp.params.to_dict(), sort_keys=True) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "value", "closed_form", "quadrature", "abs_diff"])
    for n, name, cf, q in rows:
        w.writerow([n, name, f"{cf:.17g}", f"{q:.17g}", f"{abs(cf - q):.17g}"])
