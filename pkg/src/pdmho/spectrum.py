"""Closed-form energies, normalizations and wavefunctions.

Within a sector, ``n`` counts states of one tower.  On the line the tower
index ``n`` maps to the full-line quantum number ``2n`` (even) or ``2n+1``
(odd); see :meth:`DerivedParams.full_index`.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .model import DerivedParams, DomainError, r_of_t, t_of_r
from .specfun import JacobiParams, gauss_jacobi_reduced, jacobi_sequence, ln_gamma, ln_gamma_ratio

__all__ = [
    "BoundState",
    "NormalizationTable",
    "DeltaResult",
    "energy",
    "energy_formula",
    "line_energy",
    "bound_state",
    "delta_and_n",
    "delta_of_n",
    "jacobi_params",
    "normalization_table",
    "psi",
    "psi_many",
    "dpsi",
    "gj_inner",
    "gj_gram",
    "write_wavefunction_csv",
]


@dataclass(frozen=True)
class BoundState:
    n: int
    energy: float
    sector_ref: DerivedParams

    @property
    def full_index(self) -> int:
        return self.sector_ref.full_index(self.n)


@dataclass(frozen=True)
class DeltaResult:
    delta: float
    n: int
    exact: bool


def energy_formula(alpha, k, L, n):
    """alpha (4n^2 + 4n(L+1) + L + 1 + (4n + 2L + 3) k); exact for Fraction inputs."""
    return alpha * (4 * n * n + 4 * n * (L + 1) + L + 1 + (4 * n + 2 * L + 3) * k)


def energy(dp: DerivedParams, n: int) -> float:
    """Energy of the ``n``-th state of the sector's tower."""
    if n < 0:
        raise DomainError("n must be non-negative")
    return float(energy_formula(dp.alpha, dp.k, dp.L, n))


def line_energy(dp: DerivedParams, n_full: int) -> float:
    """Full-line energy alpha (n^2 + (2n+1) lambda/alpha); both parities."""
    if n_full < 0:
        raise DomainError("n must be non-negative")
    return dp.alpha * (n_full * n_full + (2.0 * n_full + 1.0) * dp.k)


def bound_state(dp: DerivedParams, n: int) -> BoundState:
    return BoundState(n, energy(dp, n), dp)


def delta_and_n(dp: DerivedParams, E: float, rtol: float = 1e-9) -> DeltaResult:
    """Invert the spectrum: delta = sqrt(E/alpha + k(k-1) + L(L+1)).

    On an eigenvalue delta = k + L + 1 + 2n.  For other ``E`` the nearest
    non-negative integer is returned with ``exact=False``.
    """
    rad = E / dp.alpha + dp.kk + dp.LL
    if rad < 0:
        raise DomainError(f"negative radicand {rad} for E={E}")
    delta = math.sqrt(rad)
    x = 0.5 * (delta - (dp.k + dp.L + 1.0))
    n = max(int(round(x)), 0)
    exact = x > -0.5 and abs(energy(dp, n) - E) <= rtol * max(abs(E), 1.0)
    return DeltaResult(delta, n, exact)


def delta_of_n(dp: DerivedParams, n: int) -> float:
    """delta_n = k + L + 1 + 2n, the value of delta on the n-th state."""
    return dp.k + dp.L + 1.0 + 2.0 * n


def jacobi_params(dp: DerivedParams) -> JacobiParams:
    return JacobiParams(dp.k - 0.5, dp.L + 0.5)


@dataclass(frozen=True)
class NormalizationTable:
    """Ground normalization and the ratios N_n/N_0 (all phases +1)."""

    N0: float
    ratio: np.ndarray
    tau: np.ndarray
    ln_N0: float
    ln_ratio: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.ratio) - 1


def _ln_ratio_radial(dp: DerivedParams, n: int) -> float:
    k, L = dp.k, dp.L
    return 0.5 * (
        ln_gamma(n + 1.0)
        + math.log(k + 2.0 * n + L + 1.0)
        + ln_gamma_ratio(k + L + 2.0, n - 1.0)
        - ln_gamma_ratio(k + 0.5, n)
        - ln_gamma_ratio(L + 1.5, n)
    )


def _ln_ratio_line(dp: DerivedParams, nu: int) -> float:
    k = dp.k
    half_ln_pi = 0.5 * math.log(math.pi)
    if dp.sector.parity == "even":
        return 0.5 * (
            half_ln_pi
            + ln_gamma(nu + 1.0)
            + math.log(k + 2.0 * nu)
            + ln_gamma_ratio(k + 1.0, nu - 1.0)
            - ln_gamma_ratio(k + 0.5, nu)
            - ln_gamma(nu + 0.5)
        )
    return 0.5 * (
        half_ln_pi
        + ln_gamma(nu + 1.0)
        + math.log(k + 2.0 * nu + 1.0)
        + ln_gamma_ratio(k + 2.0, nu - 1.0)
        - ln_gamma_ratio(k + 0.5, nu)
        - math.log(2.0)
        - ln_gamma(nu + 1.5)
    )


def _ln_N0(dp: DerivedParams) -> float:
    a, k, L = dp.alpha, dp.k, dp.L
    if dp.is_line:
        if dp.sector.parity == "even":
            return 0.5 * (0.5 * math.log(a) - 0.5 * math.log(math.pi) + ln_gamma_ratio(k + 0.5, 0.5))
        return 0.5 * (
            math.log(2.0) + 1.5 * math.log(a) - 0.5 * math.log(math.pi) + ln_gamma_ratio(k + 0.5, 1.5)
        )
    return 0.5 * (
        math.log(2.0)
        + (L + 1.5) * math.log(a)
        - ln_gamma(L + 1.5)
        + ln_gamma_ratio(k + 0.5, L + 1.5)
    )


def normalization_table(dp: DerivedParams, n_max: int) -> NormalizationTable:
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    ln_ratio_fn = _ln_ratio_line if dp.is_line else _ln_ratio_radial
    ln_ratio = np.array([ln_ratio_fn(dp, n) for n in range(n_max + 1)])
    ln_ratio[0] = 0.0
    ln_N0 = _ln_N0(dp)
    return NormalizationTable(
        N0=math.exp(ln_N0),
        ratio=np.exp(ln_ratio),
        tau=np.ones(n_max + 1),
        ln_N0=ln_N0,
        ln_ratio=ln_ratio,
    )


def _ln_envelope(dp: DerivedParams, r: np.ndarray) -> np.ndarray:
    """log of |r|^(L+1) f^(-(k+L+2)/2); -inf where it vanishes."""
    u = dp.alpha * r * r
    with np.errstate(divide="ignore"):
        ln_r = np.log(np.abs(r))
    out = -0.5 * (dp.k + dp.L + 2.0) * np.log1p(u)
    if dp.L + 1.0 != 0.0:
        out = out + (dp.L + 1.0) * ln_r
    return out


def psi_many(dp: DerivedParams, n_max: int, r) -> np.ndarray:
    """Normalized psi_0 .. psi_{n_max} at ``r``; shape ``(n_max+1,) + shape(r)``.

    On the line, ``r`` is the coordinate x (any sign) and the odd tower
    carries the sign of x.
    """
    r = np.asarray(r, dtype=float)
    if not dp.is_line and np.any(r < 0):
        raise DomainError("radial coordinate must be non-negative")
    table = normalization_table(dp, n_max)
    t = t_of_r(dp, r)
    P = jacobi_sequence(n_max, jacobi_params(dp), t)
    env = np.exp(table.ln_N0 + _ln_envelope(dp, r))
    if dp.is_line and dp.sector.parity == "odd":
        env = env * np.sign(r)
    return table.ratio.reshape((-1,) + (1,) * r.ndim) * P * env


def psi(dp: DerivedParams, n: int, r):
    return psi_many(dp, n, r)[n]


def dpsi(dp: DerivedParams, n: int, r):
    """Exact derivative d psi_n / dr from the closed form."""
    r = np.asarray(r, dtype=float)
    a, k, L = dp.alpha, dp.k, dp.L
    jp = jacobi_params(dp)
    f = 1.0 + a * r * r
    t = t_of_r(dp, r)
    P = jacobi_sequence(n, jp, t)[n]
    if n > 0:
        shifted = JacobiParams(jp.beta + 1.0, jp.gamma_ + 1.0)
        dP = 0.5 * (n + jp.beta + jp.gamma_ + 1.0) * jacobi_sequence(n - 1, shifted, t)[n - 1]
    else:
        dP = np.zeros_like(t)
    table = normalization_table(dp, n)
    env0 = table.ratio[n] * np.exp(table.ln_N0 - 0.5 * (k + L + 2.0) * np.log1p(a * r * r))
    # power part |r|^(L+1), carrying sign(x) on the odd line tower
    odd_line = dp.is_line and dp.sector.parity == "odd"
    pw = np.abs(r) ** (L + 1.0) * (np.sign(r) if odd_line else 1.0)
    if L + 1.0 == 0.0:
        dpw = np.zeros_like(r)
    else:
        with np.errstate(divide="ignore"):
            dpw = (L + 1.0) * np.abs(r) ** L
    dt_dr = 4.0 * a * r / (f * f)
    return env0 * (dpw * P + pw * (dP * dt_dr - (k + L + 2.0) * a * r / f * P))


def gj_inner(
    dp: DerivedParams,
    g: Callable[[np.ndarray], np.ndarray],
    h: Callable[[np.ndarray], np.ndarray],
    npts: int,
) -> float:
    """Integral of g(r) h(r) dr over the half-line by Gauss-Jacobi in t.

    Exact whenever g h dr/dt is (1-t)^(k-1/2) (1+t)^(L+1/2) times a
    polynomial of degree below ``2 npts``, which is the case for products
    of closed-form wavefunctions.
    """
    jp = jacobi_params(dp)
    t, ln_red = gauss_jacobi_reduced(npts, jp)
    r = r_of_t(dp, t)
    dr_dt = 1.0 / (dp.alpha * r * (1.0 - t) ** 2)
    return float(np.dot(np.exp(ln_red), g(r) * h(r) * dr_dt))


def gj_gram(dp: DerivedParams, n_max: int, op: Callable | None = None, extra_degree: int = 1) -> np.ndarray:
    """Matrix of <psi_m, op psi_n> over the half-line (the full line on Line).

    ``op`` maps ``(psis, r)`` to transformed values; ``None`` is the identity.
    """
    jp = jacobi_params(dp)
    npts = n_max + 2 + extra_degree
    t, ln_red = gauss_jacobi_reduced(npts, jp)
    r = r_of_t(dp, t)
    dr_dt = 1.0 / (dp.alpha * r * (1.0 - t) ** 2)
    P = psi_many(dp, n_max, r)
    Q = P if op is None else op(P, r)
    scale = np.exp(ln_red) * dr_dt
    gram = (P * scale) @ Q.T
    # each parity tower lives on both half-lines
    return 2.0 * gram if dp.is_line else gram


def write_wavefunction_csv(
    fh,
    dp: DerivedParams,
    r: Sequence[float],
    n_list: Iterable[int],
) -> None:
    """Columns r (or x), t, psi_<n>...; first line echoes the parameters."""
    n_list = list(n_list)
    r = np.asarray(r, dtype=float)
    vals = psi_many(dp, max(n_list), r) if n_list else np.empty((0, r.size))
    t = t_of_r(dp, r)
    coord = "x" if dp.is_line else "r"
    fh.write("# " + json.dumps(dp.params.to_dict(), sort_keys=True) + "\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([coord, "t"] + [f"psi_{n}" for n in n_list])
    for i in range(r.size):
        writer.writerow([f"{r[i]:.17g}", f"{t[i]:.17g}"] + [f"{vals[n][i]:.17g}" for n in n_list])
