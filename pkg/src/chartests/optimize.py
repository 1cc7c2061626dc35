"""Multistart maximization of smooth-ish surfaces over the parameter region.

Unbounded regions are compactified through the null quantile function:
``t = F0^{-1}(u)`` with ``u`` in the open unit square.  A coarse uniform grid
in ``u`` picks the starting cells; Nelder-Mead polishes each start.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ._common import TestKind
from .distributions import NullFamily

_EDGE = 1e-12


@dataclass(frozen=True)
class MaxResult:
    point: tuple[float, float]
    value: float
    evaluations: int


def to_region(kind: TestKind, u):
    """Null quantile map from (0, 1) onto the parameter axis."""
    u = np.clip(np.asarray(u, dtype=float), _EDGE, 1.0 - _EDGE)
    return NullFamily(kind).quantile(u)


def to_unit(kind: TestKind, t):
    return NullFamily(kind).cdf(t)


def unit_grid(m: int) -> np.ndarray:
    return (np.arange(m) + 0.5) / m


def maximize(
    kind: TestKind,
    surface: Callable[[np.ndarray, np.ndarray], np.ndarray],
    coarse: int = 64,
    restarts: int = 8,
    xatol: float = 1e-6,
    local_surface: Callable[[float, float], float] | None = None,
) -> MaxResult:
    """Global max of ``surface(t1, t2)`` over the region of ``kind``.

    ``surface`` must accept broadcastable arrays; ``local_surface`` (scalar
    in, scalar out) is used for the local polish if given.
    """
    local = local_surface or (lambda a, b: float(surface(np.array(a), np.array(b))))
    g = unit_grid(coarse)
    tg = to_region(kind, g)
    vals = np.asarray(surface(tg[:, None], tg[None, :]), dtype=float)
    evals = vals.size
    order = np.argsort(vals, axis=None)[::-1][:restarts]
    best_val, best_pt = -np.inf, None
    for flat in order:
        i, j = np.unravel_index(int(flat), vals.shape)
        start = np.array([g[i], g[j]])

        def neg(u):
            if np.any(u <= 0.0) or np.any(u >= 1.0):
                return np.inf
            t = to_region(kind, u)
            return -local(float(t[0]), float(t[1]))

        res = minimize(
            neg, start, method="Nelder-Mead",
            options={"xatol": xatol, "fatol": 1e-15, "maxiter": 4000,
                     "initial_simplex": np.array([start, start + [0.5 / coarse, 0], start + [0, 0.5 / coarse]])},
        )
        evals += res.nfev
        if -res.fun > best_val:
            best_val = -res.fun
            best_pt = to_region(kind, res.x)
        if vals[i, j] > best_val:
            best_val = float(vals[i, j])
            best_pt = np.array([tg[i], tg[j]])
    return MaxResult((float(best_pt[0]), float(best_pt[1])), float(best_val), int(evals))
