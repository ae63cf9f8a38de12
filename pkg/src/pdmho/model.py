"""Parameters, sectors and elementary profiles of the deformed-mass oscillator.

Units follow hbar = 2 m0 = 1.  The mass profile is M(r) = 1/f(r)^2 with
f(r) = 1 + alpha r^2, and the natural compact variable is
t = (alpha r^2 - 1)/(alpha r^2 + 1) in [-1, 1).

The one-dimensional oscillator on the line is handled as a pseudo-radial
sector with L = -1 (even parity) or L = 0 (odd parity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Literal, Union

import numpy as np

__all__ = [
    "DomainError",
    "Radial",
    "Line",
    "Sector",
    "ModelParams",
    "DerivedParams",
    "derive_params",
    "mass_and_profiles",
    "effective_potentials",
    "t_of_r",
    "r_of_t",
    "parse_sector",
    "params_from_dict",
]


class DomainError(ValueError):
    """Raised when an input lies outside the domain of a formula."""


@dataclass(frozen=True)
class Radial:
    """Radial problem in ``d >= 2`` dimensions with angular momentum ``l``."""

    d: int
    l: int

    def __post_init__(self) -> None:
        if int(self.d) != self.d or self.d < 2:
            raise DomainError(f"radial sector needs integer d >= 2, got {self.d!r}")
        if int(self.l) != self.l or self.l < 0:
            raise DomainError(f"radial sector needs integer l >= 0, got {self.l!r}")

    is_line = False

    @property
    def L_exact(self) -> Fraction:
        return Fraction(self.l) + Fraction(self.d - 3, 2)

    @property
    def flagged(self) -> bool:
        # attractive -1/(4 r^2) centrifugal term; see README
        return self.L_exact == Fraction(-1, 2)

    def label(self) -> str:
        return f"radial:{self.d},{self.l}"

    def to_dict(self) -> dict[str, Any]:
        return {"type": "radial", "d": self.d, "l": self.l}


@dataclass(frozen=True)
class Line:
    """Oscillator on the full line, restricted to one parity tower."""

    parity: Literal["even", "odd"]

    def __post_init__(self) -> None:
        if self.parity not in ("even", "odd"):
            raise DomainError(f"parity must be 'even' or 'odd', got {self.parity!r}")

    is_line = True
    flagged = False

    @property
    def L_exact(self) -> Fraction:
        return Fraction(-1) if self.parity == "even" else Fraction(0)

    def label(self) -> str:
        return f"line:{self.parity}"

    def to_dict(self) -> dict[str, Any]:
        return {"type": "line", "parity": self.parity}


Sector = Union[Radial, Line]


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    omega: float
    sector: Sector

    def __post_init__(self) -> None:
        for name in ("alpha", "omega"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DomainError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")
        if not isinstance(self.sector, (Radial, Line)):
            raise DomainError(f"unknown sector {self.sector!r}")

    @cached_property
    def derived(self) -> "DerivedParams":
        return derive_params(self)

    def to_dict(self) -> dict[str, Any]:
        return {"alpha": self.alpha, "omega": self.omega, "sector": self.sector.to_dict()}


@dataclass(frozen=True)
class DerivedParams:
    """Constants derived once from :class:`ModelParams` and shared downstream.

    ``k`` is the ratio lambda/alpha that appears throughout the closed forms.
    """

    params: ModelParams
    Delta: float
    lam: float
    L: float
    k: float

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def omega(self) -> float:
        return self.params.omega

    @property
    def sector(self) -> Sector:
        return self.params.sector

    @property
    def is_line(self) -> bool:
        return self.params.sector.is_line

    @property
    def nu_ratio(self) -> float:
        return self.k

    @property
    def LL(self) -> float:
        """L(L+1); zero for both line sectors."""
        return self.L * (self.L + 1.0)

    @property
    def kk(self) -> float:
        """(lambda/alpha)(lambda/alpha - 1), evaluated as omega^2/(4 alpha^2).

        The product form cancels when omega << alpha and k rounds to 1.
        """
        return (0.5 * self.omega / self.alpha) ** 2

    def full_index(self, n: int) -> int:
        """Full-line quantum number of the ``n``-th state of a tower."""
        if not self.is_line:
            return n
        return 2 * n + (1 if self.sector.parity == "odd" else 0)


def derive_params(params: ModelParams) -> DerivedParams:
    alpha, omega = params.alpha, params.omega
    if alpha <= 0 or omega <= 0:
        raise DomainError("alpha and omega must be positive")
    Delta = math.hypot(omega, alpha)
    lam = 0.5 * (alpha + Delta)
    return DerivedParams(
        params=params,
        Delta=Delta,
        lam=lam,
        L=float(params.sector.L_exact),
        k=lam / alpha,
    )


def _as_dp(p: ModelParams | DerivedParams) -> DerivedParams:
    return p.derived if isinstance(p, ModelParams) else p


def mass_and_profiles(p: ModelParams | DerivedParams, r):
    """Return ``(f, M, f')`` at ``r`` (scalar or array)."""
    dp = _as_dp(p)
    r = np.asarray(r, dtype=float)
    if not dp.is_line and np.any(r < 0):
        raise DomainError("radial coordinate must be non-negative")
    f = 1.0 + dp.alpha * r * r
    return f, 1.0 / (f * f), 2.0 * dp.alpha * r


def effective_potentials(p: ModelParams | DerivedParams, r):
    """Return ``(V_tilde_eff, V_eff)``.

    ``V_tilde_eff`` is the potential of the self-adjoint form
    -(d/dr) f^2 (d/dr) + V_tilde_eff used by the finite-difference oracle;
    ``V_eff`` is the Cartesian effective potential (d = 1 on the line).
    """
    dp = _as_dp(p)
    a, w2, LL = dp.alpha, dp.omega**2, dp.LL
    r = np.asarray(r, dtype=float)
    if not dp.is_line and np.any(r < 0):
        raise DomainError("radial coordinate must be non-negative")
    if LL != 0.0 and np.any(r == 0):
        raise DomainError("centrifugal term is singular at r = 0")
    r2 = r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        cent = LL / r2 if LL != 0.0 else np.zeros_like(r2)
    v_tilde = cent + 0.25 * (w2 - 8.0 * a * a) * r2 - a
    d = 1 if dp.is_line else dp.sector.d
    v_eff = 0.25 * (w2 - 4.0 * a * a * (LL + 2 * d)) * r2 - a * (2.0 * LL + 2 * d - 1)
    return v_tilde, v_eff


def t_of_r(p: ModelParams | DerivedParams, r):
    dp = _as_dp(p)
    u = dp.alpha * np.asarray(r, dtype=float) ** 2
    return (u - 1.0) / (u + 1.0)


def r_of_t(p: ModelParams | DerivedParams, t):
    """Inverse of :func:`t_of_r` on ``[-1, 1)``; returns the root ``r >= 0``."""
    dp = _as_dp(p)
    t = np.asarray(t, dtype=float)
    if np.any(t >= 1) or np.any(t < -1):
        raise DomainError("t must lie in [-1, 1)")
    return np.sqrt((1.0 + t) / ((1.0 - t) * dp.alpha))


def parse_sector(spec: str | dict[str, Any]) -> Sector:
    """Build a sector from ``"radial:d,l"``, ``"line:even"`` or the JSON form."""
    if isinstance(spec, dict):
        kind = spec.get("type")
        if kind == "radial":
            extra = set(spec) - {"type", "d", "l"}
            if extra:
                raise DomainError(f"unknown sector keys: {sorted(extra)}")
            return Radial(int(spec["d"]), int(spec["l"]))
        if kind == "line":
            extra = set(spec) - {"type", "parity"}
            if extra:
                raise DomainError(f"unknown sector keys: {sorted(extra)}")
            return Line(spec["parity"])
        raise DomainError(f"unknown sector type {kind!r}")
    kind, _, rest = spec.partition(":")
    if kind == "radial":
        try:
            d, l = (int(x) for x in rest.split(","))
        except ValueError as exc:
            raise DomainError(f"expected radial:d,l, got {spec!r}") from exc
        return Radial(d, l)
    if kind == "line":
        return Line(rest)
    raise DomainError(f"cannot parse sector {spec!r}")


def params_from_dict(data: dict[str, Any]) -> ModelParams:
    extra = set(data) - {"alpha", "omega", "sector"}
    if extra:
        raise DomainError(f"unknown parameter keys: {sorted(extra)}")
    try:
        return ModelParams(data["alpha"], data["omega"], parse_sector(data["sector"]))
    except KeyError as exc:
        raise DomainError(f"missing parameter {exc.args[0]!r}") from exc
