"""Kernel projections, variance surfaces and their suprema.

For each test the U-statistic kernel ``Xi`` has a projection
``xi(s) = E[Xi(s, X_2, ..., X_m)]`` under the standard null.  The variance
surface is ``sigma2(t1, t2) = E xi(X)^2``; its supremum ``sigma0^2`` fixes the
large-deviation rate of the statistic.

Orientation: the Pareto and logistic kernels are ``H - G``; the exponential
kernel is ``G - H``.  ``xi`` is always the projection of the kernel as
oriented here.  Variances do not care.
"""

from __future__ import annotations

import csv
import enum
import io
import os
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from ._common import DomainError, TestKind
from .distributions import NullFamily
from .empirical import GridSpec
from .optimize import MaxResult, maximize, to_region, unit_grid
from .quadrature import DEFAULT_TOL, integrate_pieces


class Form(enum.Enum):
    CLOSED = "closed"
    QUADRATURE = "quadrature"


def _params(kind: TestKind, t1, t2):
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(np.isnan(t1)) or np.any(np.isnan(t2)):
        raise DomainError("parameters must not be NaN")
    # the closure of the region is admitted: the surfaces extend continuously to it
    if kind is TestKind.PARETO and (np.any(t1 < 1.0) or np.any(t2 < 1.0)):
        raise DomainError("Pareto parameters must satisfy t1, t2 >= 1")
    if kind is TestKind.EXPONENTIAL and (np.any(t1 < 0.0) or np.any(t2 < 0.0)):
        raise DomainError("exponential parameters must satisfy t1, t2 >= 0")
    if kind is TestKind.LOGISTIC and (np.any(np.isinf(t1)) or np.any(np.isinf(t2))):
        raise DomainError("logistic parameters must be finite")
    return t1, t2


def breakpoints(kind: TestKind, t1, t2) -> np.ndarray:
    """Points where ``xi(kind, ., t1, t2)`` jumps, stacked on the last axis."""
    t1, t2 = np.broadcast_arrays(np.asarray(t1, float), np.asarray(t2, float))
    third = t1 * t2 if kind is TestKind.PARETO else t1 + t2
    return np.stack([t1, t2, third], axis=-1)


def _lo_coefficients(t1, t2):
    """Constant and jump sizes of the piecewise-constant logistic projection."""
    s = t1 + t2
    c0 = (expit(-s) - 2.0 * expit(-t1) * expit(-t2) * expit(-s)) / 3.0
    c1 = np.exp(log_expit(t2) + log_expit(-s) - log_expit(-t1)) / 3.0
    c2 = np.exp(log_expit(t1) + log_expit(-s) - log_expit(-t2)) / 3.0
    c3 = np.exp(log_expit(-t1) + log_expit(-t2) - log_expit(-s)) / 3.0
    return c0, c1, c2, c3


def xi(kind: TestKind, s, t1, t2):
    """Projection of the kernel onto its first argument, at ``X_1 = s``."""
    kind = TestKind.parse(kind)
    t1, t2 = _params(kind, t1, t2)
    s = np.asarray(s, dtype=float)
    if kind is TestKind.PARETO:
        out = (
            -0.5 / (t1 * t2)
            + (s > t1) * (0.5 / t2)
            + (s > t2) * (0.5 / t1)
            - 0.5 * (s > t1 * t2)
        )
    elif kind is TestKind.LOGISTIC:
        c0, c1, c2, c3 = _lo_coefficients(t1, t2)
        out = -c0 + c1 * (s > t1) + c2 * (s > t2) - c3 * (s > t1 + t2)
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            d2 = np.where(s > t2, np.expm1(np.minimum(t2 - s, 0.0)), 0.0)
            d1 = np.where(s > t1, -np.expm1(np.minimum(t1 - s, 0.0)), 0.0)
            d12 = np.where(s > t1 + t2, np.expm1(np.minimum(t1 + t2 - s, 0.0)), 0.0)
            out = 0.5 * (
                np.exp(-2 * t1 - t2) * -np.expm1(-np.maximum(s, 0.0))
                + np.exp(-2 * t1) * d2
                - np.exp(-t1 - t2) * d1
                - np.exp(-t1) * d12
            )
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


def kernel(kind: TestKind, args, t1: float, t2: float):
    """The U-statistic kernel, evaluated on the last axis of ``args``.

    ``args[..., 0]`` is the conditioning argument, so that the mean over the
    remaining coordinates drawn from the null reproduces :func:`xi`.
    """
    kind = TestKind.parse(kind)
    x = np.asarray(args, dtype=float)
    if x.shape[-1] != kind.degree:
        raise DomainError(f"{kind.label} kernel takes {kind.degree} arguments")
    if kind is TestKind.PARETO:
        a, b = x[..., 0], x[..., 1]
        h = 0.5 * ((a > t1) & (b > t2)) + 0.5 * ((a > t2) & (b > t1))
        g = 0.5 * (a > t1 * t2) + 0.5 * (b > t1 * t2)
        return h - g
    if kind is TestKind.LOGISTIC:
        s = t1 + t2
        total = np.zeros(x.shape[:-1])
        for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
            xi_, xj, xk = x[..., i], x[..., j], x[..., k]
            total += ((xi_ < s) & (xj > t1) & (xk > t2)).astype(float)
            total -= ((xi_ > s) & (xj < t1) & (xk < t2)).astype(float)
        return total / 6.0
    a, b, c, d = (x[..., k] for k in range(4))
    first = (np.minimum(a, b) <= t1) * ((np.abs(a - b) <= t2).astype(float) - (np.abs(c - d) <= t2))
    second = (np.minimum(b, c) <= t1) * ((np.abs(b - c) <= t2).astype(float) - (np.abs(a - d) <= t2))
    return 0.5 * first + 0.5 * second


def _sigma2_pa(t1, t2):
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    # symmetric form of the two printed branches
    return (-1.0 + lo - hi + t1 * t2) / (4.0 * t1**2 * t2**2)


def _sigma2_ex(t1, t2):
    # e^{-5a-3b}(e^a-1)^2(e^{2b}+e^b-e^a-1) with the large exponentials factored out
    def branch(a, b):
        return np.exp(-3 * a - b) * np.expm1(-a) ** 2 * (1.0 + np.exp(-b) - np.exp(a - 2 * b) - np.exp(-2 * b)) / 12.0

    with np.errstate(over="ignore", invalid="ignore"):
        low = branch(t1, t2)
        # the t1 > t2 branch has the roles of the exponents swapped inside the brackets only
        high = (
            np.exp(-3 * t1 - t2) * np.expm1(-t2) ** 2
            * (1.0 + np.exp(-t1) - np.exp(t2 - 2 * t1) - np.exp(-2 * t1))
        ) / 12.0
    return np.where(t1 <= t2, low, high)


def _sigma2_lo(t1, t2):
    """Exact ``sum_k xi_k^2 (F(b_{k+1}) - F(b_k))`` over the constant pieces."""
    # fixed argument order keeps the result bit-symmetric in (t1, t2)
    t1, t2 = np.minimum(t1, t2), np.maximum(t1, t2)
    bp = np.sort(breakpoints(TestKind.LOGISTIC, t1, t2), axis=-1)
    lo_edges = np.concatenate([np.full(bp.shape[:-1] + (1,), -np.inf), bp], axis=-1)
    hi_edges = np.concatenate([bp, np.full(bp.shape[:-1] + (1,), np.inf)], axis=-1)
    # probability mass of each piece, as a difference of upper tails for accuracy
    mass = np.where(lo_edges > 0, expit(-lo_edges) - expit(-hi_edges), expit(hi_edges) - expit(lo_edges))
    rep = np.where(
        np.isinf(lo_edges), hi_edges - 1.0, np.where(np.isinf(hi_edges), lo_edges + 1.0, 0.5 * (lo_edges + hi_edges))
    )
    vals = xi(TestKind.LOGISTIC, rep, t1[..., None], t2[..., None])
    return np.sum(vals**2 * mass, axis=-1)


def _support_edges(kind: TestKind, bp: np.ndarray) -> np.ndarray:
    lo, hi = NullFamily(kind).support
    bp = np.sort(bp, axis=-1)
    bp = np.clip(bp, lo, hi) if np.isfinite(lo) else bp
    lo_col = np.full(bp.shape[:-1] + (1,), lo)
    hi_col = np.full(bp.shape[:-1] + (1,), hi)
    return np.concatenate([lo_col, bp, hi_col], axis=-1)


def expectation(
    kind: TestKind,
    integrand: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    t1,
    t2,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Batched ``int integrand(x, t1, t2) dx`` over the null support, split at the jumps."""
    t1, t2 = np.broadcast_arrays(np.atleast_1d(np.asarray(t1, float)), np.atleast_1d(np.asarray(t2, float)))
    shape = t1.shape
    a, b = t1.ravel(), t2.ravel()
    edges = _support_edges(kind, breakpoints(kind, a, b))
    out = integrate_pieces(lambda x: integrand(x, a[:, None], b[:, None]), edges, tol=tol)
    return out.reshape(shape)


def sigma2(kind: TestKind, t1, t2, form: Form = Form.CLOSED, tol: float = DEFAULT_TOL):
    """Variance of the projection under the standard null."""
    kind = TestKind.parse(kind)
    t1, t2 = _params(kind, t1, t2)
    if form is Form.QUADRATURE:
        f0 = NullFamily(kind).pdf
        out = expectation(kind, lambda x, a, b: xi(kind, x, a, b) ** 2 * f0(x), t1, t2, tol=tol)
        out = out.reshape(np.broadcast(t1, t2).shape)
    elif kind is TestKind.PARETO:
        out = _sigma2_pa(t1, t2)
    elif kind is TestKind.EXPONENTIAL:
        out = _sigma2_ex(t1, t2)
    else:
        out = _sigma2_lo(*np.broadcast_arrays(t1, t2))
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class VarianceSup:
    kind: TestKind
    argmax: tuple[float, float]
    sigma0_sq: float
    evaluations: int


def sigma2_sup(kind: TestKind, coarse: int = 64, restarts: int = 8, xatol: float = 1e-6) -> VarianceSup:
    """Global maximum of the variance surface over the parameter region."""
    kind = TestKind.parse(kind)
    res: MaxResult = maximize(
        kind,
        lambda a, b: sigma2(kind, a, b),
        coarse=coarse,
        restarts=restarts,
        xatol=xatol,
    )
    return VarianceSup(kind, res.point, res.value, res.evaluations)


def surface_grid(kind: TestKind, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Axis points ``F0^{-1}((k + 1/2) / m)`` for a surface dump."""
    if grid.empty:
        return np.empty(0), np.empty(0)
    return to_region(kind, unit_grid(grid.m1)), to_region(kind, unit_grid(grid.m2))


def surface_dump(
    kind: TestKind,
    values: Callable[[np.ndarray, np.ndarray], np.ndarray],
    grid: GridSpec,
    out: str | os.PathLike | io.TextIOBase,
) -> int:
    """Write ``t1,t2,value`` rows in row-major order; return the row count."""
    kind = TestKind.parse(kind)
    a1, a2 = surface_grid(kind, grid)
    vals = np.asarray(values(a1[:, None], a2[None, :]), dtype=float) if a1.size and a2.size else np.empty((0, 0))

    def write(fh) -> int:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t1", "t2", "value"])
        rows = 0
        for i, x in enumerate(a1):
            for j, y in enumerate(a2):
                w.writerow([f"{x:.17g}", f"{y:.17g}", f"{vals[i, j]:.17g}"])
                rows += 1
        return rows

    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            return write(fh)
    return write(out)
