"""Algebraic construction of the bound states.

The ground state solves a first-order equation in ln r; excited states
follow by repeated application of the raising operator A_+ with an explicit
normalization factor.  Everything is compared against the closed forms of
:mod:`pdmho.spectrum`.

Repeated application of a first-order differential operator on a grid is
unstable: content at s-wavenumber xi grows by roughly xi each step, so
roundoff at the grid scale swamps psi_8 on the default grid.  The tower
therefore passes every state through a :class:`TowerFilter`, a sharp
spectral low-pass in s whose cutoff comes from the computed states, never
from a closed form.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from scipy.integrate import solve_ivp

from .grid import (
    EDGE_BAND,
    GridFunction,
    RadialGrid,
    edge_taper,
    grid_norm,
    lowpass,
    make_grid,
    spectral_extent,
)
from .gridops import apply_ladder, energy_form
from .model import DerivedParams, DomainError, t_of_r
from .spectrum import (
    _ln_envelope,
    delta_of_n,
    energy,
    jacobi_params,
    normalization_table,
    psi_many,
)
from .specfun import jacobi_p, jacobi_raise_rhs

__all__ = [
    "LadderAccuracyWarning",
    "ground_state_slope",
    "ground_state_ode",
    "raise_coefficient",
    "raise_state",
    "norm_recursion",
    "tail_weight",
    "TowerFilter",
    "origin_parity",
    "TowerResult",
    "build_tower",
    "raising_consistency",
    "write_tower_csv",
]


class LadderAccuracyWarning(RuntimeWarning):
    """A raised state lost more normalization than the grid should allow."""


def ground_state_slope(dp: DerivedParams, r):
    """d ln psi_0 / d ln r = -(k+1)(1+t)/2 + (L+1)(1-t)/2."""
    t = t_of_r(dp, r)
    return -0.5 * (dp.k + 1.0) * (1.0 + t) + 0.5 * (dp.L + 1.0) * (1.0 - t)


def ground_state_ode(
    dp: DerivedParams, grid: RadialGrid, rtol: float = 1e-13, atol: float = 1e-12
) -> GridFunction:
    """Ground state from the first-order equation, integrated for ln psi.

    Integration starts at the middle positive node (ln psi = 0 there) and
    runs outward in both directions with an adaptive Runge-Kutta method; the
    result is exponentiated and normalized last.  The independent variable
    is ln r, except for the even line state where the equation is regular at
    x = 0 and x itself is used so the origin is included.  On the line the
    half-line solution is extended by parity.
    """
    even_line = grid.line and dp.sector.parity == "even"
    idx = np.flatnonzero(grid.r >= 0) if even_line else np.flatnonzero(grid.r > 0)
    if idx.size < 2:
        raise DomainError("grid has fewer than two positive nodes")
    if even_line:
        var = grid.r[idx]

        def rhs(x, y):
            # slope / x with L = -1: -(k+1) alpha x / f
            return [-(dp.k + 1.0) * dp.alpha * x / (1.0 + dp.alpha * x * x)]

    else:
        var = np.log(grid.r[idx])

        def rhs(lnr, y):
            return [ground_state_slope(dp, math.exp(lnr))]

    mid = idx.size // 2
    ln_psi = np.empty(idx.size)
    ln_psi[mid] = 0.0
    for seg in (slice(mid, None), slice(mid, None, -1)):
        pts = var[seg]
        if pts.size < 2:
            continue
        sol = solve_ivp(
            rhs, (pts[0], pts[-1]), [0.0], method="DOP853", t_eval=pts, rtol=rtol, atol=atol
        )
        if not sol.success or not np.all(np.isfinite(sol.y[0])):
            raise DomainError(f"ground-state integration failed: {sol.message}")
        ln_psi[seg] = sol.y[0]
    values = np.zeros(grid.n)
    # shift before exponentiating so the peak is 1
    values[idx] = np.exp(ln_psi - ln_psi.max())
    if grid.line:
        # the line grid is symmetric: node i mirrors node n-1-i
        neg = np.flatnonzero(grid.r < 0)
        sign = -1.0 if dp.sector.parity == "odd" else 1.0
        values[neg] = sign * values[grid.n - 1 - neg]
    gf = GridFunction(values, grid)
    return gf / gf.norm()


def raise_coefficient(dp: DerivedParams, n: int) -> float:
    """Scalar c_n with psi_{n+1} = c_n A_+ psi_n."""
    k, L = dp.k, dp.L
    d = delta_of_n(dp, n)
    radicand = (n + 1) * (n + L + 1.5) * (n + k + L + 1.0) * (n + k + 0.5)
    return (d + 1.0) * math.sqrt(d + 2.0) / (16.0 * dp.alpha * math.sqrt(radicand * d))


def raise_state(
    dp: DerivedParams, n: int, psi_n: GridFunction, warn_tol: float = 1e-6
) -> tuple[GridFunction, float]:
    """Return (normalized psi_{n+1}, norm error of the unnormalized image).

    The norm error ||c_n A_+ psi_n|| - 1 should vanish for the exact state;
    beyond ``warn_tol`` a :class:`LadderAccuracyWarning` is issued.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    image = raise_coefficient(dp, n) * apply_ladder(dp, n, "A+", psi_n)
    nrm = image.norm()
    err = nrm - 1.0
    if abs(err) > warn_tol:
        g = psi_n.grid
        warnings.warn(
            f"raising step {n} -> {n + 1} changed the norm by {err:.3e} "
            f"(grid h={g.h:.4g}, n={g.n}, r_max={g.r_max:.4g}, mapping={g.mapping})",
            LadderAccuracyWarning,
            stacklevel=2,
        )
    return image / nrm, err


def norm_recursion(dp: DerivedParams, n: int) -> float:
    """N_{n+1}/N_n from the one-step recursion."""
    if n < 0:
        raise DomainError("n must be non-negative")
    k, L = dp.k, dp.L
    num = (n + 1) * (n + k + L + 1.0) * (2 * n + k + L + 3.0)
    den = (n + L + 1.5) * (n + k + 0.5) * (2 * n + k + L + 1.0)
    return math.sqrt(num / den)


def origin_parity(dp: DerivedParams, grid: RadialGrid) -> int:
    """Parity in s about s = 0 of a radial state on ``grid``.

    States go like r^(L+1) times a function of r^2; with r = c sinh(s) that
    is sinh(s)^(L+1), with r = c sinh(s)^2 it is sinh(s)^(2L+2).
    """
    if grid.line:
        return 1
    power = 2.0 * dp.L + 2.0 if grid.mapping == "sinh2" else dp.L + 1.0
    return -1 if round(power) % 2 else 1


def tail_weight(dp: DerivedParams, grid: RadialGrid) -> np.ndarray:
    """(r^2 + c^2)^((L+1)/2) f^(-(k+L+2)/2), scaled to a peak of 1.

    The power laws are the two limits of the ground-state slope; c is the
    grid's length scale, which keeps the weight away from zero at r = 0.
    """
    r2 = grid.r**2
    ln_w = 0.5 * (dp.L + 1.0) * np.log(r2 + grid.scale**2) - 0.5 * (dp.k + dp.L + 2.0) * np.log1p(
        dp.alpha * r2
    )
    return np.exp(ln_w - ln_w.max())


@dataclass(frozen=True)
class TowerFilter:
    """Noise control applied to every state of the tower.

    ``"direct"`` tapers the state at the outer edge and low-passes it with
    a fixed cutoff, ``factor`` times the s-wavenumber at which the ground
    state's spectrum drops below ``threshold``.  Its noise floor is absolute,
    which is harmless for Gaussian-like tails but not for power-law tails,
    where f^2 makes the far tail carry energy.

    ``"weighted"`` low-passes q = psi / :func:`tail_weight` instead, so the
    floor follows the decay of the state.  q is bent onto its edge value
    over the taper band (psi is negligible there), and the cutoff is set
    from the spectrum of each q in turn, never below 1.  q stays O(1) only
    once the power-law tail is reached inside the grid.

    ``"auto"`` picks ``"weighted"`` when alpha r_max^2 >= ``weighted_above``.
    """

    factor: float = 1.6
    order: int = 16
    threshold: float = 1e-12
    taper_fraction: float = 0.1
    max_taper: float = 1.0
    mode: Literal["auto", "direct", "weighted"] = "auto"
    weighted_above: float = 1e4

    def resolve_mode(self, dp: DerivedParams, grid: RadialGrid) -> str:
        if self.mode not in ("auto", "direct", "weighted"):
            raise DomainError(f"unknown filter mode {self.mode!r}")
        if self.mode != "auto":
            return self.mode
        return "weighted" if dp.alpha * grid.r_max**2 >= self.weighted_above else "direct"

    def setup(self, dp: DerivedParams, psi0: GridFunction):
        grid = psi0.grid
        parity = origin_parity(dp, grid)
        width = min(self.max_taper, self.taper_fraction * float(grid.s[-1]))
        taper = edge_taper(grid, width)
        mode = self.resolve_mode(dp, grid)
        meta: dict[str, Any] = {"mode": mode, "taper_width": width, "order": self.order}

        if mode == "direct":
            cutoff = self.factor * spectral_extent(psi0, parity, self.threshold)
            meta["cutoff"] = cutoff

            def apply(gf: GridFunction) -> GridFunction:
                out = lowpass(gf * taper, cutoff, parity, self.order)
                return out / out.norm()

            return apply, meta

        weight = tail_weight(dp, grid)
        meta["cutoff"] = cutoffs = []

        def apply(gf: GridFunction) -> GridFunction:
            q = gf.values / weight
            edge = np.where(grid.s > 0, q[-1], q[0])
            q = GridFunction(edge + (q - edge) * taper, grid)
            cutoff = max(self.factor * spectral_extent(q, parity, self.threshold), 1.0)
            cutoffs.append(cutoff)
            out = lowpass(q, cutoff, parity, self.order) * weight
            return out / out.norm()

        return apply, meta


@dataclass
class TowerResult:
    """States psi_0 .. psi_N built by the ladder, with per-step diagnostics."""

    states: list[GridFunction]
    energies: np.ndarray
    deviation: np.ndarray
    rayleigh: np.ndarray
    norm_error: np.ndarray
    norm_ratio_error: np.ndarray
    grid: RadialGrid
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return len(self.states) - 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": list(range(self.n_max + 1)),
            "E_n": self.energies.tolist(),
            "L2_deviation": self.deviation.tolist(),
            "rayleigh_quotient": self.rayleigh.tolist(),
            "norm_error": self.norm_error.tolist(),
            "norm_ratio_error": self.norm_ratio_error.tolist(),
            "grid": self.grid.meta(),
        }


def build_tower(
    dp: DerivedParams,
    n_max: int = 8,
    grid: RadialGrid | None = None,
    noise_filter: TowerFilter | None = TowerFilter(),
) -> TowerResult:
    """Ground state from the ODE, then n_max raising steps.

    With ``noise_filter=None`` the raw recursion is run; expect it to lose
    all accuracy after a handful of steps on fine grids.

    ``deviation[n]`` is the L2 distance to the closed-form psi_n (phase
    +1), ``rayleigh[n]`` is <psi_n, Kt1 psi_n> from the weak form,
    ``norm_error[n]`` the norm defect of the raw raised state (0 for n = 0)
    and ``norm_ratio_error[n]`` the relative gap between the product of
    one-step ratios and the closed-form N_n/N_0.
    """
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    grid = grid or make_grid(dp, n_max=max(n_max, 8))
    exact = psi_many(dp, n_max, grid.r)
    table = normalization_table(dp, n_max)
    psi0 = ground_state_ode(dp, grid)
    meta: dict[str, Any] = {"params": dp.params.to_dict()}
    if noise_filter is not None:
        smooth, meta["filter"] = noise_filter.setup(dp, psi0)
    else:
        def smooth(gf):
            return gf
    states = [smooth(psi0)]
    norm_err = [0.0]
    for n in range(n_max):
        nxt, err = raise_state(dp, n, states[-1])
        states.append(smooth(nxt))
        norm_err.append(err)
    dev, ray, ratio_err = [], [], []
    prod = 1.0
    for n, s in enumerate(states):
        dev.append(grid_norm(s - GridFunction(exact[n], grid)))
        ray.append(energy_form(dp, s))
        if n > 0:
            prod *= norm_recursion(dp, n - 1)
        ratio_err.append(abs(prod / table.ratio[n] - 1.0))
    return TowerResult(
        states=states,
        energies=np.array([energy(dp, n) for n in range(n_max + 1)]),
        deviation=np.array(dev),
        rayleigh=np.array(ray),
        norm_error=np.array(norm_err),
        norm_ratio_error=np.array(ratio_err),
        grid=grid,
        meta=meta,
    )


def raising_consistency(
    dp: DerivedParams, n: int, grid: RadialGrid | None = None, band: int = EDGE_BAND
) -> float:
    """Pointwise check that A_+ maps envelope * P_n onto a Jacobi raising.

    With psi_0 the unnormalized envelope and P_n = P_n^(k-1/2, L+1/2)(t),
        A_+ (psi_0 P_n) = -8 alpha psi_0 / (2n+k+L+2) * R_n(t),
    where R_n is the first-order raising combination that equals
    -2 (n+1)(n+k+L+1) P_{n+1}.  Returns the worst interior deviation
    relative to the largest value of the right-hand side.
    """
    grid = grid or make_grid(dp)
    r = grid.r
    jp = jacobi_params(dp)
    t = t_of_r(dp, r)
    ln_env = _ln_envelope(dp, r)
    env = np.exp(ln_env - np.max(ln_env[np.isfinite(ln_env)]))
    if dp.is_line and dp.sector.parity == "odd":
        env = env * np.sign(r)
    gf = GridFunction(env * jacobi_p(n, jp, t), grid)
    lhs = apply_ladder(dp, n, "A+", gf).values
    rhs = -8.0 * dp.alpha * env / (2.0 * n + dp.k + dp.L + 2.0) * jacobi_raise_rhs(n, jp, t)
    inner = slice(band, grid.n - band)
    scale = np.max(np.abs(rhs[inner]))
    return float(np.max(np.abs(lhs[inner] - rhs[inner])) / scale)


def write_tower_csv(fh, tower: TowerResult) -> None:
    """Columns n, E_n, L2_deviation, rayleigh_quotient, norm_error."""
    fh.write("# " + json.dumps(tower.meta.get("params", {}), sort_keys=True) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "E_n", "L2_deviation", "rayleigh_quotient", "norm_error"])
    for n in range(tower.n_max + 1):
        w.writerow(
            [
                n,
                f"{tower.energies[n]:.17g}",
                f"{tower.deviation[n]:.17g}",
                f"{tower.rayleigh[n]:.17g}",
                f"{tower.norm_error[n]:.17g}",
            ]
        )
