"""Log-gamma, Jacobi polynomials and Gauss-Jacobi quadrature.

Jacobi polynomials use the convention P_n^(b, g) orthogonal under the weight
(1 - t)^b (1 + t)^g on [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import poch

from .model import DomainError

__all__ = [
    "JacobiParams",
    "ln_gamma",
    "ln_gamma_ratio",
    "jacobi_sequence",
    "jacobi_p",
    "jacobi_dp",
    "jacobi_raise_rhs",
    "jacobi_norm_sq",
    "gauss_jacobi",
    "gauss_jacobi_reduced",
]


@dataclass(frozen=True)
class JacobiParams:
    beta: float
    gamma_: float

    def __post_init__(self) -> None:
        if not (self.beta > -1 and self.gamma_ > -1):
            raise DomainError(f"Jacobi exponents must exceed -1, got {self.beta}, {self.gamma_}")


def ln_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"ln_gamma needs x > 0, got {x!r}")
    return math.lgamma(x)


def ln_gamma_ratio(x: float, a: float) -> float:
    """log Gamma(x+a) - log Gamma(x), without the cancellation of two lgammas.

    The integer part of ``a`` is a finite product; the fractional part goes
    through the Pochhammer symbol.  For x ~ 1e5 the plain difference of
    lgammas already loses 1e-11.
    """
    if not (x > 0 and x + a > 0):
        raise DomainError(f"ln_gamma_ratio needs x > 0 and x + a > 0, got {x!r}, {a!r}")
    m = math.floor(a)
    if abs(m) > 10000:
        return math.lgamma(x + a) - math.lgamma(x)
    frac = a - m
    out = math.log(poch(x, frac)) if frac else 0.0
    y = x + frac
    if m >= 0:
        return out + math.fsum(math.log(y + j) for j in range(m))
    return out - math.fsum(math.log(y + j) for j in range(m, 0))


def jacobi_sequence(n: int, jp: JacobiParams, t) -> np.ndarray:
    """Values P_0 .. P_n at ``t``; result has shape ``(n + 1,) + shape(t)``."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    b, g = jp.beta, jp.gamma_
    t = np.asarray(t, dtype=float)
    out = np.empty((n + 1,) + t.shape)
    out[0] = 1.0
    if n == 0:
        return out
    out[1] = 0.5 * ((b + g + 2.0) * t + (b - g))
    for m in range(1, n):
        s = 2.0 * m + b + g
        c1 = 2.0 * (m + 1) * (m + b + g + 1) * s
        c2 = (s + 1.0) * ((s + 2.0) * s * t + b * b - g * g)
        c3 = 2.0 * (m + b) * (m + g) * (s + 2.0)
        out[m + 1] = (c2 * out[m] - c3 * out[m - 1]) / c1
    return out


def jacobi_p(n: int, jp: JacobiParams, t):
    return jacobi_sequence(n, jp, t)[n]


def jacobi_dp(n: int, jp: JacobiParams, t):
    """d/dt P_n^(b, g)(t) = (n + b + g + 1)/2 * P_{n-1}^(b+1, g+1)(t)."""
    t = np.asarray(t, dtype=float)
    if n == 0:
        return np.zeros_like(t)
    shifted = JacobiParams(jp.beta + 1.0, jp.gamma_ + 1.0)
    return 0.5 * (n + jp.beta + jp.gamma_ + 1.0) * jacobi_p(n - 1, shifted, t)


def jacobi_raise_rhs(n: int, jp: JacobiParams, t):
    """Evaluate the first-order raising combination acting on P_n.

    {(2n+b+g+2)(1-t^2) d/dt - (n+b+g+1)[b-g + (2n+b+g+2) t]} P_n(t),
    which equals -2 (n+1)(n+b+g+1) P_{n+1}(t).
    """
    b, g = jp.beta, jp.gamma_
    t = np.asarray(t, dtype=float)
    s2 = 2.0 * n + b + g + 2.0
    return s2 * (1.0 - t * t) * jacobi_dp(n, jp, t) - (n + b + g + 1.0) * (
        b - g + s2 * t
    ) * jacobi_p(n, jp, t)


def ln_jacobi_norm_sq(n: int, jp: JacobiParams) -> float:
    b, g = jp.beta, jp.gamma_
    return (
        (b + g + 1.0) * math.log(2.0)
        - math.log(2.0 * n + b + g + 1.0)
        + ln_gamma(n + b + 1.0)
        + ln_gamma(n + g + 1.0)
        - ln_gamma(n + b + g + 1.0)
        - ln_gamma(n + 1.0)
    )


def jacobi_norm_sq(n: int, jp: JacobiParams) -> float:
    """Integral of (1-t)^b (1+t)^g P_n(t)^2 over [-1, 1]."""
    return math.exp(ln_jacobi_norm_sq(n, jp))


def _golub_welsch_nodes(npts: int, b: float, g: float) -> np.ndarray:
    # symmetric Jacobi matrix of the monic recurrence; starting guesses only
    m = np.arange(npts, dtype=float)
    s = 2.0 * m + b + g
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (g * g - b * b) / (s * (s + 2.0))
    diag[0] = (g - b) / (b + g + 2.0)
    m1 = m[1:]
    s1 = 2.0 * m1 + b + g
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.abs(s1 - 1.0) > 1e-12, (m1 + b + g) / (s1 - 1.0), 1.0)
    off = np.sqrt(4.0 * m1 * (m1 + b) * (m1 + g) * ratio / (s1 * s1 * (s1 + 1.0)))
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return np.sort(np.linalg.eigvalsh(jac))


@lru_cache(maxsize=64)
def _gauss_jacobi_cached(npts: int, b: float, g: float) -> tuple[np.ndarray, np.ndarray]:
    jp = JacobiParams(b, g)
    x = _golub_welsch_nodes(npts, b, g)
    for _ in range(100):
        step = jacobi_p(npts, jp, x) / jacobi_dp(npts, jp, x)
        x = x - step
        if np.max(np.abs(step)) < 1e-14:
            break
    else:
        raise RuntimeError("Gauss-Jacobi Newton iteration did not converge")
    dp = jacobi_dp(npts, jp, x)
    ln_c = (
        (b + g + 1.0) * math.log(2.0)
        + ln_gamma(npts + b + 1.0)
        + ln_gamma(npts + g + 1.0)
        - ln_gamma(npts + b + g + 1.0)
        - ln_gamma(npts + 1.0)
    )
    ln_w = ln_c - np.log1p(-x * x) - 2.0 * np.log(np.abs(dp))
    # log of w / ((1-x)^b (1+x)^g); the (b+g+1) log 2 of ln_c is folded into
    # the two weight factors so that nothing of size b cancels
    ln_red = (
        math.log(2.0)
        - ln_gamma_ratio(npts + b + 1.0, g)
        + ln_gamma(npts + g + 1.0)
        - ln_gamma(npts + 1.0)
        - np.log1p(-x * x)
        - 2.0 * np.log(np.abs(dp))
        - b * np.log1p(-0.5 * (1.0 + x))
        - g * np.log1p(-0.5 * (1.0 - x))
    )
    for arr in (x, ln_w, ln_red):
        arr.setflags(write=False)
    return x, ln_w, ln_red


def gauss_jacobi(npts: int, jp: JacobiParams) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``npts``-point Gauss-Jacobi rule.

    Nodes are the roots of P_npts, found by Newton iteration on the
    recurrence (tolerance 1e-14, at most 100 steps) started from the
    eigenvalues of the Jacobi matrix.  Exact for polynomials of degree
    ``2 npts - 1`` against the weight (1-t)^b (1+t)^g.
    """
    if npts < 1:
        raise DomainError("need at least one node")
    x, ln_w, _ = _gauss_jacobi_cached(int(npts), float(jp.beta), float(jp.gamma_))
    return x, np.exp(ln_w)


def gauss_jacobi_reduced(npts: int, jp: JacobiParams) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and log(w_i / ((1-x_i)^b (1+x_i)^g)).

    The plain weights overflow once b is in the hundreds; the reduced ones
    stay O(1) and are what a quadrature of an unweighted integrand needs.
    """
    if npts < 1:
        raise DomainError("need at least one node")
    x, _, ln_red = _gauss_jacobi_cached(int(npts), float(jp.beta), float(jp.gamma_))
    return x, ln_red
