"""Grids, grid functions, finite-difference derivatives and residual reports.

Grids are uniform in a computational coordinate ``s`` and mapped to the
physical coordinate by ``r = s``, ``r = c sinh(s)`` or ``r = c sinh(s)^2``.
The sinh map is the default: near the origin it is uniform with spacing
``c h``, and far out it turns the power-law tails of the deformed oscillator
(psi ~ r^-(k+1)) into exponentials in ``s``, so a few thousand points reach
r ~ 1e9.  For half-integer L the states behave like r^(L+1) with a
half-integer power, which no uniform-near-the-origin map can differentiate
accurately; sinh^2 turns that power into an integer power of sinh(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.integrate import simpson

from .model import DerivedParams, DomainError

__all__ = [
    "RadialGrid",
    "GridFunction",
    "ResidualReport",
    "default_r_max",
    "default_mapping",
    "make_grid",
    "differentiate",
    "grid_inner",
    "grid_norm",
    "residual_report",
    "spectral_extent",
    "lowpass",
    "edge_taper",
    "even_origin_value",
    "EDGE_BAND",
]

EDGE_BAND = 5

Mapping = Literal["sinh", "sinh2", "uniform"]


@dataclass(frozen=True, eq=False)
class RadialGrid:
    s: np.ndarray
    r: np.ndarray
    dr_ds: np.ndarray
    d2r_ds2: np.ndarray
    h: float
    mapping: Mapping
    scale: float
    line: bool

    @property
    def n(self) -> int:
        return self.r.size

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def meta(self) -> dict:
        return {"h": self.h, "n": self.n, "r_max": self.r_max, "mapping": self.mapping}


def default_r_max(
    dp: DerivedParams,
    n_max: int = 8,
    amp_target: float = 29.0,
    energy_target: float | None = None,
) -> float:
    """Outer radius from the decay of the recessive solution at infinity.

    Far out the two solutions of the radial equation behave like r^-(k+1)
    and r^(k-2).  Bound states have dropped by about f(R)^-(k+1)/2 at R; R
    is chosen so that this is below e^-amp_target, with a margin for the
    growth of the polynomial factor of the ``n_max``-th state.  When
    ``energy_target`` is given, R is also large enough that a Dirichlet wall
    there shifts levels by less than about e^-energy_target, a shift that
    scales like f(R)^-(k-1/2).
    """
    growth = (
        math.lgamma(n_max + dp.k + 0.5)
        - math.lgamma(dp.k + 0.5)
        - math.lgamma(n_max + 1.0)
        + 1.0
    )
    expo = 2.0 * (amp_target + growth) / (dp.k + 1.0)
    if energy_target is not None:
        expo = max(expo, (energy_target + 2.0 * growth) / (dp.k - 0.5))
    return math.sqrt(math.expm1(min(expo, 700.0)) / dp.alpha)


def default_mapping(dp: DerivedParams) -> Mapping:
    """sinh for integer L; sinh^2 when r^(L+1) has a half-integer power."""
    return "sinh2" if (2.0 * dp.L) % 2.0 == 1.0 else "sinh"


def _map(mapping: Mapping, s: np.ndarray, c: float):
    if mapping == "sinh":
        return c * np.sinh(s), c * np.cosh(s), c * np.sinh(s)
    if mapping == "sinh2":
        return c * np.sinh(s) ** 2, c * np.sinh(2.0 * s), 2.0 * c * np.cosh(2.0 * s)
    if mapping == "uniform":
        return s.copy(), np.ones_like(s), np.zeros_like(s)
    raise DomainError(f"unknown grid mapping {mapping!r}")


def _s_of_r(mapping: Mapping, r: float, c: float) -> float:
    if mapping == "sinh":
        return math.asinh(r / c)
    if mapping == "sinh2":
        return math.asinh(math.sqrt(r / c))
    if mapping == "uniform":
        return r
    raise DomainError(f"unknown grid mapping {mapping!r}")


def make_grid(
    dp: DerivedParams,
    n_points: int = 4001,
    r_max: float | None = None,
    mapping: Mapping | None = None,
    n_max: int = 8,
    scale: float | None = None,
) -> RadialGrid:
    """Build the default grid for a sector.

    Radial grids hold ``n_points`` points s = h, 2h, ..., s_max (the origin
    is excluded).  Line grids are symmetric about x = 0 and hold
    ``n_points`` nodes on each side of it (``2 n_points - 1`` in total), so
    both sectors share the same spacing.  The sinh^2 map is only available
    on radial grids.
    """
    if n_points < 8:
        raise DomainError("need at least 8 grid points")
    if mapping is None:
        mapping = default_mapping(dp)
    if dp.is_line and mapping == "sinh2":
        raise DomainError("the sinh^2 map folds the line onto itself")
    if r_max is None:
        r_max = default_r_max(dp, n_max)
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    if mapping == "uniform":
        c = 1.0
    else:
        c = scale if scale is not None else 1.0 / math.sqrt(dp.alpha + dp.lam)
    s_max = _s_of_r(mapping, r_max, c)
    if dp.is_line:
        h = s_max / (n_points - 1)
        s = h * np.arange(-(n_points - 1), n_points)
    else:
        h = s_max / n_points
        s = h * np.arange(1, n_points + 1)
    r, rs, rss = _map(mapping, s, c)
    return RadialGrid(s, r, rs, rss, h, mapping, c, dp.is_line)


@dataclass(eq=False)
class GridFunction:
    values: np.ndarray
    grid: RadialGrid

    # let ndarray * GridFunction fall through to the reflected operators
    __array_ufunc__ = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.r.shape:
            raise DomainError("grid function length does not match its grid")

    def _wrap(self, values) -> "GridFunction":
        return GridFunction(values, self.grid)

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.grid is not self.grid:
                raise DomainError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __neg__(self):
        return self._wrap(-self.values)

    def norm(self, band: int = 0) -> float:
        return grid_norm(self, band)


_C1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
_C2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def _one_sided_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    m = offsets.size
    V = np.vander(offsets.astype(float), m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(V, rhs)
    # exact annihilation of constants
    j = int(np.argmax(np.abs(w)))
    w[j] -= w.sum()
    return w


_EDGE_W = {
    order: [_one_sided_weights(np.arange(8) - i, order) for i in range(3)] for order in (1, 2)
}


def _diff_s(v: np.ndarray, h: float, order: int) -> np.ndarray:
    n = v.size
    if n < 8:
        raise DomainError("differentiation needs at least 8 points")
    c = _C1 if order == 1 else _C2
    out = np.empty_like(v)
    out[3:-3] = sum(c[j] * v[j : n - 6 + j] for j in range(7))
    for i, w in enumerate(_EDGE_W[order]):
        out[i] = w @ v[:8]
        out[n - 1 - i] = (-1) ** order * (w @ v[::-1][:8])
    return out / h**order


def differentiate(gf: GridFunction, order: Literal[1, 2]) -> GridFunction:
    """d/dr or d^2/dr^2 by sixth-order central differences in ``s``.

    Interior points use the 7-point central stencils; the three points at
    each edge use 8-point one-sided stencils and belong to the edge band that
    residual norms exclude.
    """
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    g = gf.grid
    v1 = _diff_s(gf.values, g.h, 1)
    if order == 1:
        return GridFunction(v1 / g.dr_ds, g)
    v2 = _diff_s(gf.values, g.h, 2)
    return GridFunction((v2 - g.d2r_ds2 / g.dr_ds * v1) / g.dr_ds**2, g)


def even_origin_value(values: np.ndarray, grid: RadialGrid) -> float:
    """Value at s = 0 of a function even in s, from its first four radial nodes."""
    s2 = (grid.s[:4] / grid.h) ** 2
    return float(np.linalg.solve(np.vander(s2, 4, increasing=True), values[:4])[0])


def _origin_value(integrand: np.ndarray, grid: RadialGrid) -> float:
    # With r = c sinh(s) (or r = s) the integrands in use are even in s and
    # are extrapolated to s = 0 from the first four nodes; with r = c sinh(s)^2
    # the factor dr/ds makes them odd, so they vanish there.
    if grid.mapping == "sinh2":
        return 0.0
    return even_origin_value(integrand, grid)


def _quad_values(gf_values: np.ndarray, grid: RadialGrid, band: int) -> float:
    integrand = gf_values * grid.dr_ds
    if band:
        integrand = integrand.copy()
        integrand[:band] = 0.0
        integrand[-band:] = 0.0
    if grid.line:
        return float(simpson(integrand, dx=grid.h))
    head = 0.0 if band else _origin_value(integrand, grid)
    return float(simpson(np.concatenate(([head], integrand)), dx=grid.h))


def grid_inner(a: GridFunction, b: GridFunction, band: int = 0) -> float:
    """Integral of a b dr by Simpson's rule in ``s``."""
    if a.grid is not b.grid:
        raise DomainError("grid functions live on different grids")
    return _quad_values(a.values * b.values, a.grid, band)


def grid_norm(a: GridFunction, band: int = 0) -> float:
    return math.sqrt(max(grid_inner(a, a, band), 0.0))


@dataclass
class ResidualReport:
    """Residual of one operator identity, measured in L2 on an interior window."""

    identity: str
    residual: float
    scale: float
    grid: dict = field(default_factory=dict)
    tolerance: float | None = None

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else math.inf

    @property
    def passed(self) -> bool:
        return bool(self.tolerance is None or self.relative <= self.tolerance)

    def to_dict(self) -> dict:
        out = {
            "identity": self.identity,
            "residual": float(self.residual),
            "scale": float(self.scale),
            "relative": float(self.relative),
            "grid": self.grid,
        }
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
            out["passed"] = self.passed
        return out


def residual_report(
    identity: str,
    lhs: GridFunction,
    rhs: GridFunction,
    band: int = EDGE_BAND,
    tolerance: float | None = None,
    scale: float | None = None,
) -> ResidualReport:
    """Compare two grid functions; the scale defaults to the larger norm."""
    res = grid_norm(lhs - rhs, band)
    if scale is None:
        scale = max(grid_norm(lhs, band), grid_norm(rhs, band))
    return ResidualReport(identity, res, scale, lhs.grid.meta(), tolerance)


# ---------------------------------------------------------------- spectral filtering


def _periodic_extension(gf: GridFunction, parity: int) -> np.ndarray:
    # Radial functions vanish at s = 0 and are continued to s < 0 with the
    # given parity.  The result is then mirrored about the outer edge, so
    # the periodic wrap is continuous with a derivative jump of 2 u'(s_max).
    v = gf.values
    base = v if gf.grid.line else np.concatenate((parity * v[::-1], [0.0], v))
    return np.concatenate((base, base[::-1]))


def _wavenumbers(m: int, h: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.rfftfreq(m, d=h)


def spectral_extent(gf: GridFunction, parity: int = 1, threshold: float = 1e-12) -> float:
    """Largest s-wavenumber whose Fourier amplitude exceeds ``threshold`` of the peak."""
    ext = _periodic_extension(gf, parity)
    amp = np.abs(np.fft.rfft(ext))
    xi = _wavenumbers(ext.size, gf.grid.h)
    return float(xi[np.flatnonzero(amp > threshold * amp.max())[-1]])


def lowpass(gf: GridFunction, cutoff: float, parity: int = 1, order: int = 16) -> GridFunction:
    """Multiply the Fourier transform in ``s`` by exp(-(xi/cutoff)^(2 order)).

    Radial functions are extended to s < 0 with the given parity before
    transforming, and the result is mirrored about the outer edge, so the
    function should be flat there (see :func:`edge_taper`); a slope at the
    edge rings through the whole interval.
    """
    ext = _periodic_extension(gf, parity)
    m = ext.size
    spec = np.fft.rfft(ext)
    spec *= np.exp(-((_wavenumbers(m, gf.grid.h) / cutoff) ** (2 * order)))
    out = np.fft.irfft(spec, m)[: m // 2]
    if not gf.grid.line:
        out = out[gf.values.size + 1 :]
    return GridFunction(out, gf.grid)


def edge_taper(grid: RadialGrid, width: float) -> np.ndarray:
    """Smooth C-infinity step: 0 at the outer edge(s), 1 from ``width`` inside in s."""
    x = (grid.s[-1] - np.abs(grid.s)) / width
    w = np.ones_like(x)
    m = x < 1.0
    u = np.clip(x[m], 1e-300, 1.0)
    a = np.exp(-1.0 / u)
    b = np.exp(-1.0 / np.clip(1.0 - u, 1e-300, 1.0))
    w[m] = a / (a + b)
    return w
