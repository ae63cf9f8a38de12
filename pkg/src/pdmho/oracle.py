"""Independent finite-difference reference for spectra and wavefunctions.

The radial operator -(d/dr) f^2 (d/dr) + V_tilde is discretized with the
conservative three-point stencil on a grid that is uniform in a mapped
coordinate s, r = r(s).  With J = dr/ds and p = f^2 / J the eigenproblem

    -(p psi_s)_s + J V_tilde psi = E J psi

becomes A psi = E W psi with A tridiagonal and W = diag(J); the symmetric
matrix W^(-1/2) A W^(-1/2) is handed to a Sturm-bisection eigensolver.  For
r = s (``mapping="uniform"``) the stencil is the textbook one with 1/M = f^2
at the midpoints.  Nothing here touches the closed forms except the
comparisons in :func:`spectrum_study`.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .grid import (
    GridFunction,
    Mapping,
    ResidualReport,
    _map,
    _s_of_r,
    default_mapping,
    default_r_max,
    grid_inner,
    make_grid,
)
from .gridops import apply_generator
from .model import DerivedParams, DomainError, effective_potentials
from .spectrum import energy, psi_many

__all__ = [
    "EigensolverError",
    "SLDiscretization",
    "assemble",
    "SpectralResult",
    "tridiagonal_eigenpairs",
    "eigensolve",
    "oracle_r_max",
    "SpectrumRow",
    "SpectrumStudy",
    "spectrum_study",
    "verify_spectrum",
    "stencil_agreement",
    "truncation_check",
    "write_spectrum_csv",
]

ENERGY_TARGET = 30.0


class EigensolverError(RuntimeError):
    """The tridiagonal eigensolver failed or returned an inconsistent result."""


def oracle_r_max(dp: DerivedParams, n_max: int = 8) -> float:
    """Outer wall far enough out that it shifts levels by about e^-30."""
    return default_r_max(dp, n_max, energy_target=ENERGY_TARGET)


@dataclass(frozen=True, eq=False)
class SLDiscretization:
    """Symmetric tridiagonal form of the radial operator on one grid.

    ``diag``/``off`` hold W^(-1/2) A W^(-1/2); ``weight`` holds W, so a grid
    function psi has norm^2 = h sum(W psi^2).  On the even line the node at
    x = 0 is kept with half its weight (a reflecting wall); every other
    boundary is a Dirichlet wall one step beyond the last node.
    """

    dp: DerivedParams
    s: np.ndarray
    r: np.ndarray
    weight: np.ndarray
    h: float
    mapping: Mapping
    scale: float
    r_wall: float
    diag: np.ndarray
    off: np.ndarray
    boundary: str

    @property
    def n(self) -> int:
        return self.s.size

    def meta(self) -> dict[str, Any]:
        return {
            "h": self.h,
            "n": self.n,
            "r_max": self.r_wall,
            "mapping": self.mapping,
            "boundary": self.boundary,
        }

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """(W^-1 A) psi, i.e. the discrete operator acting on psi values."""
        phi = np.sqrt(self.weight) * psi
        out = self.diag * phi
        out[:-1] += self.off * phi[1:]
        out[1:] += self.off * phi[:-1]
        return out / np.sqrt(self.weight)

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(self.h * np.sum(self.weight * a * b))


def assemble(
    dp: DerivedParams,
    n_points: int = 4000,
    r_max: float | None = None,
    mapping: Mapping | None = None,
    scale: float | None = None,
) -> SLDiscretization:
    """Build the discretization with ``n_points`` interior nodes s_i = i h.

    The wall sits at s = (n_points + 1) h = s(r_max).  The even line sector
    adds the node s = 0.
    """
    if n_points < 4:
        raise DomainError("need at least 4 interior nodes")
    if mapping is None:
        mapping = default_mapping(dp)
    if dp.is_line and mapping == "sinh2":
        raise DomainError("the sinh^2 map folds the line onto itself")
    if r_max is None:
        r_max = oracle_r_max(dp)
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    if mapping == "uniform":
        c = 1.0
    else:
        c = scale if scale is not None else 1.0 / math.sqrt(dp.alpha + dp.lam)
    s_wall = _s_of_r(mapping, r_max, c)
    h = s_wall / (n_points + 1)
    even = dp.is_line and dp.sector.parity == "even"
    idx = np.arange(0 if even else 1, n_points + 1)
    s = h * idx
    r, jac, _ = _map(mapping, s, c)
    v_tilde, _ = effective_potentials(dp, r)

    def p_at(sm: np.ndarray) -> np.ndarray:
        rm, jm, _ = _map(mapping, sm, c)
        return (1.0 + dp.alpha * rm * rm) ** 2 / jm

    p_up = p_at(s + 0.5 * h)
    p_down = p_at(s - 0.5 * h)
    diag_a = (p_up + p_down) / h**2 + jac * v_tilde
    weight = jac.copy()
    if even:
        # mirror node psi_{-1} = psi_1; halving row 0 keeps A symmetric
        diag_a[0] = p_up[0] / h**2 + 0.5 * jac[0] * v_tilde[0]
        weight[0] = 0.5 * jac[0]
    off_a = -p_up[:-1] / h**2
    iw = 1.0 / np.sqrt(weight)
    return SLDiscretization(
        dp=dp,
        s=s,
        r=r,
        weight=weight,
        h=h,
        mapping=mapping,
        scale=c,
        r_wall=float(r_max),
        diag=diag_a * iw * iw,
        off=off_a * iw[:-1] * iw[1:],
        boundary="reflecting at 0, Dirichlet at r_max" if even else "Dirichlet at both ends",
    )


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # shape (count, n); h sum(W psi_i psi_j) = delta_ij
    grid: dict[str, Any]
    orthonormality: float
    extrapolation: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "eigenvalues": self.eigenvalues.tolist(),
            "grid": self.grid,
            "orthonormality": self.orthonormality,
        }
        if self.extrapolation is not None:
            out["extrapolation"] = self.extrapolation
        return out


def tridiagonal_eigenpairs(diag, off, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``count`` eigenpairs of a symmetric tridiagonal matrix.

    Sturm bisection and inverse iteration (LAPACK stebz/stein).  The
    absolute tolerance is set to the smallest normal number, so bisection
    stops on its relative test (about two ulps of the eigenvalue).  The
    default, eps times the matrix norm, is useless for the oracle matrices:
    their entries grow like (alpha r / h)^2 towards the wall while the low
    eigenvectors have long since decayed.  Columns of the returned array
    are orthonormal eigenvectors.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    if off.size != diag.size - 1:
        raise DomainError("off-diagonal must be one shorter than the diagonal")
    if not 1 <= count <= diag.size:
        raise DomainError(f"count must be in [1, {diag.size}], got {count}")
    try:
        vals, vecs = eigh_tridiagonal(
            diag,
            off,
            select="i",
            select_range=(0, count - 1),
            lapack_driver="stebz",
            tol=np.finfo(float).tiny,
        )
    except LinAlgError as exc:
        raise EigensolverError(f"tridiagonal eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(vals)) or np.any(np.diff(vals) <= 0):
        raise EigensolverError(f"eigenvalues not strictly increasing: {vals}")
    q, rr = np.linalg.qr(vecs)
    return vals, q * np.sign(np.diag(rr))


def eigensolve(disc: SLDiscretization, count: int) -> SpectralResult:
    """Lowest ``count`` eigenpairs of the discretized operator.

    Eigenvectors are returned as psi values normalized in the grid norm
    h sum(W psi^2), signed so that the first sizeable value is positive.
    """
    if count < 1 or count >= disc.n // 2:
        raise DomainError(f"count must be in [1, {disc.n // 2}), got {count}")
    vals, q = tridiagonal_eigenpairs(disc.diag, disc.off, count)
    psi = (q / np.sqrt(disc.weight * disc.h)[:, None]).T
    for row in psi:
        # fix the sign by the first sizeable value from the origin side
        first = np.flatnonzero(np.abs(row) > 1e-3 * np.abs(row).max())[0]
        row *= np.sign(row[first])
    gram = disc.h * (psi * disc.weight) @ psi.T
    ortho = float(np.max(np.abs(gram - np.eye(count))))
    return SpectralResult(vals, psi, disc.meta(), ortho)


@dataclass
class SpectrumRow:
    n: int
    E_closed: float
    E_h: float
    E_h2: float
    E_h4: float
    E_extrap: float
    rel_err: float
    order: float
    overlap: float

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class SpectrumStudy:
    """Three-resolution study of the lowest levels of one sector."""

    params: dict[str, Any]
    rows: list[SpectrumRow]
    grids: list[dict[str, Any]]
    tolerance: float
    overlap_tolerance: float
    certified: bool
    orthonormality: float
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(rep.passed for rep in self.reports())

    def reports(self) -> list[ResidualReport]:
        out = []
        for row in self.rows:
            out.append(
                ResidualReport(
                    f"E_{row.n} extrapolated vs closed form",
                    abs(row.E_extrap - row.E_closed),
                    abs(row.E_closed),
                    self.grids[1],
                    self.tolerance,
                )
            )
            out.append(
                ResidualReport(
                    f"1 - |<psi_{row.n} oracle, psi_{row.n} closed>|",
                    1.0 - row.overlap,
                    1.0,
                    self.grids[-1],
                    self.overlap_tolerance,
                )
            )
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params,
            "rows": [r.to_dict() for r in self.rows],
            "grids": self.grids,
            "tolerance": self.tolerance,
            "overlap_tolerance": self.overlap_tolerance,
            "certified": self.certified,
            "orthonormality": self.orthonormality,
            "notes": self.notes,
            "passed": self.passed,
        }


def _observed_order(e1: float, e2: float, e4: float) -> float:
    d1, d2 = e1 - e2, e2 - e4
    if d2 == 0.0 or d1 / d2 <= 0.0:
        return math.nan
    return math.log2(d1 / d2)


def spectrum_study(
    dp: DerivedParams,
    n_list: Sequence[int] = (0, 1, 2),
    n_points: int = 4000,
    r_max: float | None = None,
    mapping: Mapping | None = None,
    tolerance: float = 1e-6,
    overlap_tolerance: float = 1e-6,
) -> SpectrumStudy:
    """Eigenvalues on spacings h, h/2, h/4 and the Richardson value from h, h/2.

    The extrapolation assumes second-order convergence; the observed order
    from all three spacings is reported next to it.  Overlaps use the h/4
    eigenvectors and the closed forms normalized in the same discrete norm.
    """
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list or n_list[0] < 0:
        raise DomainError("n_list must hold non-negative integers")
    count = n_list[-1] + 1
    if r_max is None:
        r_max = oracle_r_max(dp, max(8, count))
    results, grids = [], []
    for m in (1, 2, 4):
        # halving h means m (N + 1) - 1 interior nodes
        disc = assemble(dp, m * (n_points + 1) - 1, r_max, mapping)
        res = eigensolve(disc, count)
        results.append((disc, res))
        grids.append(res.grid)
    disc4, res4 = results[-1]
    closed = psi_many(dp, n_list[-1], disc4.r)
    rows = []
    for n in n_list:
        e1, e2, e4 = (res.eigenvalues[n] for _, res in results)
        extrap = (4.0 * e2 - e1) / 3.0
        ec = energy(dp, n)
        c = closed[n]
        ov = abs(disc4.inner(res4.eigenvectors[n], c)) / math.sqrt(disc4.inner(c, c))
        rows.append(
            SpectrumRow(n, ec, e1, e2, e4, extrap, abs(extrap / ec - 1.0), _observed_order(e1, e2, e4), ov)
        )
    certified = not dp.sector.flagged
    notes = []
    if not certified:
        notes.append("L = -1/2: the -1/(4 r^2) term slows convergence; reported, not certified")
    return SpectrumStudy(
        params=dp.params.to_dict(),
        rows=rows,
        grids=grids,
        tolerance=tolerance,
        overlap_tolerance=overlap_tolerance,
        certified=certified,
        orthonormality=max(res.orthonormality for _, res in results),
        notes=notes,
    )


def verify_spectrum(
    dp: DerivedParams,
    n_list: Sequence[int] = (0, 1, 2),
    tolerance: float = 1e-6,
    overlap_tolerance: float = 1e-6,
    **kwargs,
) -> list[ResidualReport]:
    """Energy and overlap reports of :func:`spectrum_study`."""
    return spectrum_study(dp, n_list, tolerance=tolerance, overlap_tolerance=overlap_tolerance, **kwargs).reports()


def stencil_agreement(
    dp: DerivedParams, n_list: Sequence[int] = (0, 1, 2), n_points: int = 4000
) -> list[dict[str, float]]:
    """Energies of closed-form states under the oracle matrix and the Kt1 stencil.

    The oracle side is <psi, A psi>/<psi, W psi> on spacings h and h/2,
    Richardson-extrapolated like the eigenvalues; the other side is
    <psi, Kt1 psi>/<psi, psi> with Kt1 applied by
    :func:`pdmho.gridops.apply_generator` on the default grid.
    """
    n_top = max(n_list)
    r_max = oracle_r_max(dp, max(8, n_top + 1))
    quad = []
    for m in (1, 2):
        disc = assemble(dp, m * (n_points + 1) - 1, r_max)
        closed = psi_many(dp, n_top, disc.r)
        quad.append([disc.inner(closed[n], disc.apply(closed[n])) / disc.inner(closed[n], closed[n]) for n in n_list])
    grid = make_grid(dp)
    closed_g = psi_many(dp, n_top, grid.r)
    out = []
    for j, n in enumerate(n_list):
        e_sl = (4.0 * quad[1][j] - quad[0][j]) / 3.0
        gf = GridFunction(closed_g[n], grid)
        e_kt = grid_inner(gf, apply_generator("Kt1", dp, gf)) / grid_inner(gf, gf)
        out.append({"n": n, "E_oracle": e_sl, "E_Kt1": e_kt, "rel_diff": abs(e_sl / e_kt - 1.0)})
    return out


def truncation_check(dp: DerivedParams, n_max: int = 5, n_points: int = 4000) -> dict[str, Any]:
    """Relative change of E_0..E_n_max when the wall moves from R to 2R at fixed h."""
    r_max = oracle_r_max(dp, max(8, n_max + 1))
    base = assemble(dp, n_points, r_max)
    c = base.scale
    s2 = _s_of_r(base.mapping, 2.0 * r_max, c)
    n2 = int(round(s2 / base.h)) - 1
    far = assemble(dp, n2, _map(base.mapping, np.array([(n2 + 1) * base.h]), c)[0][0], base.mapping)
    e1 = eigensolve(base, n_max + 1).eigenvalues
    e2 = eigensolve(far, n_max + 1).eigenvalues
    rel = np.abs(e2 / e1 - 1.0)
    return {"r_max": r_max, "r_max_far": far.r_wall, "h": base.h, "rel_change": rel.tolist(), "max": float(rel.max())}


def write_spectrum_csv(fh, study: SpectrumStudy) -> None:
    """Columns n, E_closed, E_h, E_h2, E_extrap, rel_err, overlap."""
    fh.write("# " + json.dumps(study.params, sort_keys=True) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    cols = ["n", "E_closed", "E_h", "E_h2", "E_extrap", "rel_err", "overlap"]
    w.writerow(cols)
    for row in study.rows:
        d = row.to_dict()
        w.writerow([row.n] + [f"{d[c]:.17g}" for c in cols[1:]])
