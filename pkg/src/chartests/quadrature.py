"""Adaptive quadrature over (semi-)infinite intervals with known breakpoints.

Every integrand in this package is smooth between a handful of indicator
jumps, so integration is always split at the jumps.  Infinite pieces are
mapped onto the unit interval with a rational change of variables
(``x = a + v / (1 - v)``), which keeps algebraic tails such as ``x**-2``
bounded after the Jacobian is applied.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable

import numpy as np
from scipy import integrate as _integrate

from ._common import NumericalError

DEFAULT_TOL = 1e-10


def _pieces(a: float, b: float, breakpoints: Iterable[float]) -> list[tuple[float, float]]:
    inner = sorted({float(p) for p in breakpoints if a < p < b})
    edges = [a, *inner, b]
    if np.isinf(a) and np.isinf(b) and not inner:
        edges = [a, 0.0, b]
    return list(zip(edges[:-1], edges[1:]))


def integrate(
    func: Callable[[float], float],
    a: float,
    b: float,
    breakpoints: Iterable[float] = (),
    tol: float = DEFAULT_TOL,
) -> float:
    """Integrate a scalar function over ``[a, b]``, splitting at ``breakpoints``."""
    total = 0.0
    for lo, hi in _pieces(a, b, breakpoints):
        if lo == hi:
            continue
        value, err = _integrate.quad(func, lo, hi, epsabs=tol, epsrel=1e-12, limit=400)
        if not np.isfinite(value):
            raise NumericalError(f"non-finite integral on [{lo}, {hi}]")
        total += value
    return total


def _map_unit(v: float, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map ``v`` in (0, 1) into every piece ``[lo, hi]``; return points and Jacobians."""
    left_inf = np.isneginf(lo)
    right_inf = np.isposinf(hi)
    finite = ~(left_inf | right_inf)
    x = np.empty_like(lo)
    jac = np.empty_like(lo)
    span = np.where(finite, hi - lo, 0.0)
    x[finite] = lo[finite] + span[finite] * v
    jac[finite] = span[finite]
    r = right_inf & ~left_inf
    x[r] = lo[r] + v / (1.0 - v)
    jac[r] = 1.0 / (1.0 - v) ** 2
    l_ = left_inf & ~right_inf
    x[l_] = hi[l_] - (1.0 - v) / v
    jac[l_] = 1.0 / v**2
    both = left_inf & right_inf
    if both.any():
        raise ValueError("a piece spans the whole real line; add a breakpoint")
    return x, jac


def integrate_pieces(
    func: Callable[[np.ndarray], np.ndarray],
    edges: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Integrate many piecewise-smooth integrands at once.

    ``edges`` has shape ``(P, K + 1)``: row ``p`` lists the sorted piece
    boundaries of integrand ``p`` (the outer ones may be infinite).
    ``func`` receives points of shape ``(P, K)`` (one per piece) and must
    return values of the same shape.  The result has shape ``(P,)``.

    All ``P * K`` pieces share one adaptive subdivision of the unit
    interval, driven by the max-norm of the error.
    """
    edges = np.atleast_2d(np.asarray(edges, dtype=float))
    lo = edges[:, :-1]
    hi = edges[:, 1:]
    if np.any(np.isneginf(lo) & np.isposinf(hi)):
        raise ValueError("a piece spans the whole real line; add a breakpoint")

    def integrand(v: float) -> np.ndarray:
        x, jac = _map_unit(v, lo, hi)
        vals = func(x) * jac
        # degenerate pieces (lo == hi) contribute nothing, even if func blows up there
        vals = np.where(jac == 0.0, 0.0, vals)
        return vals.sum(axis=1)

    res, err = _integrate.quad_vec(integrand, 0.0, 1.0, epsabs=tol, epsrel=1e-12, norm="max", limit=2000)
    if not np.all(np.isfinite(res)):
        raise NumericalError("non-finite value in batched quadrature")
    return np.asarray(res)
