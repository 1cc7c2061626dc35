"""U-empirical differences and their two-dimensional suprema.

For each test the field ``D(t1, t2) = H_n(t1, t2) - G_n(t1, t2)`` is piecewise
constant.  The count-based evaluators below compute it from a handful of
order-statistic counts (binary searches on the sorted sample); the
brute-force evaluators enumerate index tuples and serve as test oracles.

Exact suprema are found by walking the cells of the arrangement that the
jump sets cut out of the parameter plane:

* Pareto: lines ``t1 = X_i``, ``t2 = X_j`` and curves ``t1 * t2 = X_k``.
* logistic: lines ``t1 = X_i``, ``t2 = X_j`` and ``t1 + t2 = X_k``.
* exponential: lines ``t1 = X_i`` and ``t2 = |X_i - X_j|`` (a product grid).

For Pareto and logistic, inside the product of one ``t1``-cell and one
``t2``-cell the field depends on ``(t1, t2)`` only through the combined
variable ``p`` (product or sum), and it is nondecreasing in ``p``.  The
extremes over the cell pair are therefore the one-sided limits at the two
ends of the ``p``-range, which reduces the search to ``O(n^2)`` count
evaluations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._common import DomainError, ExactModeRefused, Mode, TestKind
from .sample import Sample, SampleLike, as_sample

EXACT_CAPS = {TestKind.PARETO: 200, TestKind.LOGISTIC: 100, TestKind.EXPONENTIAL: 200}
BRUTE_FORCE_CAP = 30
_ROW_CHUNK = 1 << 20


@dataclass(frozen=True)
class GridSpec:
    """Resolution of the quantile-spaced search grid (GRID mode and surface dumps)."""

    m1: int = 256
    m2: int = 256
    refine: bool = True
    zoom: int = 10

    def __post_init__(self) -> None:
        if self.m1 < 0 or self.m2 < 0 or self.zoom < 1:
            raise DomainError("grid sizes must be nonnegative and zoom positive")

    @classmethod
    def parse(cls, text: str) -> GridSpec:
        try:
            a, b = text.lower().split("x")
            return cls(int(a), int(b))
        except ValueError:
            raise DomainError(f"grid must look like '256x256', got {text!r}") from None

    @property
    def empty(self) -> bool:
        return self.m1 == 0 or self.m2 == 0


@dataclass(frozen=True)
class SupremumResult:
    value: float
    argmax: tuple[float, float]
    mode: Mode
    evaluations: int


# ---------------------------------------------------------------------------
# counting helpers on a sorted sample

def _lt(x, v):
    return np.searchsorted(x, v, side="left")


def _le(x, v):
    return np.searchsorted(x, v, side="right")


def _require_n(sample: Sample, m: int) -> None:
    if sample.n < m:
        raise DomainError(f"need at least {m} observations, got {sample.n}")


def _triples(a, b, c, ab, ac, bc, abc):
    """Ordered triples of distinct indices (i, j, k) with i in a, j in b, k in c."""
    return a * b * c - ab * c - ac * b - bc * a + 2.0 * abc


# ---------------------------------------------------------------------------
# count-based differences

def diff_pa(sample: SampleLike, t1, t2):
    """``H_n - G_n`` for the Pareto test at ``t1, t2 > 1`` (broadcasts)."""
    sample = as_sample(sample)
    _require_n(sample, 2)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(t1 <= 1.0) or np.any(t2 <= 1.0):
        raise DomainError("Pareto test parameters must exceed 1")
    x, n = sample.sorted, sample.n
    a1 = n - _le(x, t1)
    a2 = n - _le(x, t2)
    amax = n - _le(x, np.maximum(t1, t2))
    ap = n - _le(x, t1 * t2)
    h = (a1 * a2 - amax) / (n * (n - 1.0))
    out = h - ap / n
    return out[()] if out.ndim == 0 else out


def _lo_counts(x, n, a_cnt, ap_cnt, r1, r2):
    """Logistic ``H - G`` given the sizes of the sets built on ``t1 + t2``.

    ``a_cnt = #{X < s}`` and ``ap_cnt = #{X > s}`` (or their one-sided
    limits); ``r1``, ``r2`` are the parameter values.
    """
    le1, le2 = _le(x, r1), _le(x, r2)
    lt1, lt2 = _lt(x, r1), _lt(x, r2)
    hi_r = np.maximum(r1, r2)
    lo_r = np.minimum(r1, r2)
    b, c = n - le1, n - le2
    ab = np.maximum(a_cnt - le1, 0)
    ac = np.maximum(a_cnt - le2, 0)
    bc = n - _le(x, hi_r)
    abc = np.maximum(a_cnt - _le(x, hi_r), 0)
    th = _triples(a_cnt, b, c, ab, ac, bc, abc)
    comp = n - ap_cnt  # size of the lower set {X <= s}
    bp, cp = lt1, lt2
    apbp = np.maximum(lt1 - comp, 0)
    apcp = np.maximum(lt2 - comp, 0)
    lt_lo = _lt(x, lo_r)
    bpcp = lt_lo
    apbpcp = np.maximum(lt_lo - comp, 0)
    tg = _triples(ap_cnt, bp, cp, apbp, apcp, bpcp, apbpcp)
    return (th.astype(float) - tg) / (n * (n - 1.0) * (n - 2.0))


def diff_lo(sample: SampleLike, t1, t2):
    """``H_n - G_n`` for the logistic test at real ``t1, t2`` (broadcasts)."""
    sample = as_sample(sample)
    _require_n(sample, 3)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if not (np.all(np.isfinite(t1)) and np.all(np.isfinite(t2))):
        raise DomainError("logistic test parameters must be finite")
    x, n = sample.sorted, sample.n
    s = t1 + t2
    out = _lo_counts(x, n, _lt(x, s), n - _le(x, s), t1, t2)
    return out[()] if np.ndim(out) == 0 else out


def _pairs(x: np.ndarray):
    """Minimum and gap of every pair ``i < j`` of the sorted sample."""
    i, j = np.triu_indices(x.size, k=1)
    return x[i], x[j] - x[i]


def diff_ex(sample: SampleLike, t1, t2, orientation: str = "lower"):
    """``H_n - G_n`` for the exponential test at ``t1, t2 > 0`` (broadcasts).

    ``orientation="upper"`` uses ``I{min > t1}`` in both ``H`` and ``G``;
    the result is the pointwise negative of the default.
    """
    sample = as_sample(sample)
    _require_n(sample, 2)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(t1 <= 0.0) or np.any(t2 <= 0.0):
        raise DomainError("exponential test parameters must be positive")
    if orientation not in ("lower", "upper"):
        raise DomainError("orientation must be 'lower' or 'upper'")
    x, n = sample.sorted, sample.n
    t1b, t2b = np.broadcast_arrays(t1, t2)
    shape = t1b.shape
    f1, f2 = t1b.ravel(), t2b.ravel()
    mins, gaps = _pairs(x)
    npairs = mins.size
    gaps_sorted = np.sort(gaps)
    p2 = np.searchsorted(gaps_sorted, f2, side="right").astype(float)
    a = n - _le(x, f1)
    p1 = npairs - a * (a - 1) / 2.0
    p12 = np.empty(f1.size)
    step = max(1, _ROW_CHUNK // max(npairs, 1))
    for k in range(0, f1.size, step):
        q1 = f1[k:k + step, None]
        q2 = f2[k:k + step, None]
        p12[k:k + step] = np.count_nonzero((mins <= q1) & (gaps <= q2), axis=1)
    if orientation == "upper":
        p1 = npairs - p1
        p12 = p2 - p12
    out = (p1 * p2 / npairs**2 - p12 / npairs).reshape(shape)
    return out[()] if out.ndim == 0 else out


def diff(kind: TestKind, sample: SampleLike, t1, t2):
    kind = TestKind.parse(kind)
    if kind is TestKind.PARETO:
        return diff_pa(sample, t1, t2)
    if kind is TestKind.LOGISTIC:
        return diff_lo(sample, t1, t2)
    return diff_ex(sample, t1, t2)


# ---------------------------------------------------------------------------
# product-grid evaluation

def _ex_grid(sample: Sample, t1s: np.ndarray, t2s: np.ndarray) -> np.ndarray:
    """Exponential field on the product grid ``t1s x t2s`` via a 2-D pair histogram."""
    x, n = sample.sorted, sample.n
    npairs = n * (n - 1) // 2
    o1, o2 = np.argsort(t1s), np.argsort(t2s)
    s1, s2 = t1s[o1], t2s[o2]
    m1, m2 = s1.size, s2.size
    hist = np.zeros((m1 + 1) * (m2 + 1), dtype=np.int64)
    p2 = np.zeros(m2 + 1, dtype=np.int64)
    rows = max(1, _ROW_CHUNK // max(n, 1))
    for start in range(0, n - 1, rows):
        i = np.arange(start, min(start + rows, n - 1))
        ii = np.repeat(i, n - 1 - i)
        jj = np.concatenate([np.arange(k + 1, n) for k in i]) if i.size else np.empty(0, int)
        mins = x[ii]
        gaps = x[jj] - x[ii]
        r1 = np.searchsorted(s1, mins, side="left")
        r2 = np.searchsorted(s2, gaps, side="left")
        hist += np.bincount(r1 * (m2 + 1) + r2, minlength=hist.size)
        p2 += np.bincount(r2, minlength=m2 + 1)
    cum = hist.reshape(m1 + 1, m2 + 1).cumsum(axis=0).cumsum(axis=1)[:m1, :m2]
    p2 = np.cumsum(p2)[:m2]
    a = n - _le(x, s1)
    p1 = npairs - a * (a - 1) // 2
    field = np.outer(p1, p2) / float(npairs) ** 2 - cum / float(npairs)
    out = np.empty_like(field)
    out[np.ix_(o1, o2)] = field
    return out


def field_grid(kind: TestKind, sample: SampleLike, t1s, t2s) -> np.ndarray:
    """``D`` on the product grid ``t1s x t2s``; shape ``(len(t1s), len(t2s))``."""
    kind = TestKind.parse(kind)
    sample = as_sample(sample)
    _require_n(sample, 2 if kind is not TestKind.LOGISTIC else 3)
    t1s = np.asarray(t1s, dtype=float).ravel()
    t2s = np.asarray(t2s, dtype=float).ravel()
    if t1s.size == 0 or t2s.size == 0:
        return np.empty((t1s.size, t2s.size))
    if kind is TestKind.EXPONENTIAL:
        if np.any(t1s <= 0.0) or np.any(t2s <= 0.0):
            raise DomainError("exponential test parameters must be positive")
        return _ex_grid(sample, t1s, t2s)
    fn = diff_pa if kind is TestKind.PARETO else diff_lo
    out = np.empty((t1s.size, t2s.size))
    step = max(1, _ROW_CHUNK // (4 * t2s.size))
    for k in range(0, t1s.size, step):
        out[k:k + step] = fn(sample, t1s[k:k + step, None], t2s[None, :])
    return out


# ---------------------------------------------------------------------------
# brute-force oracle

def brute_force_diff(kind: TestKind, sample: SampleLike, t1: float, t2: float) -> float:
    """Direct enumeration over index tuples; ``O(n^m)``, for testing only."""
    kind = TestKind.parse(kind)
    sample = as_sample(sample)
    xs = [float(v) for v in sample.values]
    n = len(xs)
    if n > BRUTE_FORCE_CAP:
        raise DomainError(f"brute force is limited to n <= {BRUTE_FORCE_CAP}")
    if kind is TestKind.PARETO:
        _require_n(sample, 2)
        h = 0.0
        for i, j in itertools.permutations(range(n), 2):
            h += (xs[i] > t1) * (xs[j] > t2)
        g = sum(v > t1 * t2 for v in xs)
        return h / (n * (n - 1)) - g / n
    if kind is TestKind.LOGISTIC:
        _require_n(sample, 3)
        h = g = 0
        for i, j, k in itertools.permutations(range(n), 3):
            h += (xs[i] < t1 + t2) and (xs[j] > t1) and (xs[k] > t2)
            g += (xs[i] > t1 + t2) and (xs[j] < t1) and (xs[k] < t2)
        return (h - g) / (n * (n - 1) * (n - 2))
    _require_n(sample, 2)
    pairs = list(itertools.combinations(range(n), 2))
    c = len(pairs)
    p1 = sum(min(xs[i], xs[j]) <= t1 for i, j in pairs)
    p2 = sum(abs(xs[i] - xs[j]) <= t2 for i, j in pairs)
    p12 = sum(min(xs[i], xs[j]) <= t1 and abs(xs[i] - xs[j]) <= t2 for i, j in pairs)
    return (p1 / c) * (p2 / c) - p12 / c


# ---------------------------------------------------------------------------
# exact suprema

def _pick_level(data: np.ndarray, lo: float, hi: float, upper: bool) -> float:
    """A level strictly inside ``(lo, hi)`` that sees the same data as the ``hi``
    end (``upper``) or the ``lo`` end of the range."""
    if upper:
        k = _lt(data, hi)
        w = data[k - 1] if k > 0 else -math.inf
        base = max(lo, w)
        return 0.5 * (base + hi)
    k = _le(data, lo)
    z = data[k] if k < data.size else math.inf
    return 0.5 * (lo + min(z, hi))


def _split_sum(level, c1, c2):
    """``(t1, t2)`` in the two cells with ``t1 + t2 = level``."""
    lo1, hi1, pt1 = c1
    lo2, hi2, pt2 = c2
    if pt1:
        return lo1, level - lo1
    if pt2:
        return level - lo2, lo2
    a = max(lo1, level - hi2)
    b = min(hi1, level - lo2)
    t1 = 0.5 * (a + b)
    return t1, level - t1


def _split_product(level, c1, c2):
    lo1, hi1 = c1
    lo2, hi2 = c2
    a = max(lo1, level / hi2)
    b = min(hi1, level / lo2)
    t1 = math.sqrt(a * b)
    return t1, level / t1


def _exact_pa(sample: Sample) -> SupremumResult:
    x, n = sample.sorted, sample.n
    v = np.unique(x[x > 1.0])
    top = 2.0 * max(float(x[-1]), 1.0)
    edges = np.concatenate([[1.0], v, [top]])
    lo, hi = edges[:-1], edges[1:]
    acnt = n - _le(x, lo)
    i, j = np.triu_indices(lo.size)
    low = lo[i] * lo[j]
    upp = hi[i] * hi[j]
    h = (acnt[i] * acnt[j] - np.minimum(acnt[i], acnt[j])) / (n * (n - 1.0))
    d_up = h - (n - _lt(x, upp)) / n       # p -> upp from below: #{X >= upp}
    d_low = h - (n - _le(x, low)) / n      # p -> low from above: #{X > low}
    k_up, k_low = int(np.argmax(d_up)), int(np.argmin(d_low))
    if d_up[k_up] >= -d_low[k_low]:
        k, upper, value = k_up, True, float(d_up[k_up])
    else:
        k, upper, value = k_low, False, float(-d_low[k_low])
    level = _pick_level(x, low[k], upp[k], upper)
    t1, t2 = _split_product(level, (lo[i[k]], hi[i[k]]), (lo[j[k]], hi[j[k]]))
    return SupremumResult(max(value, 0.0), (t1, t2), Mode.EXACT, 2 * i.size)


def _line_cells(u: np.ndarray, width: float):
    """Open intervals and single points cut out of the real line by ``u``."""
    ends = np.concatenate([[u[0] - width], u, [u[-1] + width]])
    lo_i, hi_i = ends[:-1], ends[1:]
    r = u.size
    lo = np.empty(2 * r + 1)
    hi = np.empty(2 * r + 1)
    point = np.zeros(2 * r + 1, dtype=bool)
    lo[0::2], hi[0::2] = lo_i, hi_i
    lo[1::2], hi[1::2] = u, u
    point[1::2] = True
    rep = np.where(point, lo, 0.5 * (lo + hi))
    return lo, hi, rep, point


def _exact_lo(sample: Sample) -> SupremumResult:
    x, n = sample.sorted, sample.n
    u = np.unique(x)
    width = 1.0 + abs(u[0]) + abs(u[-1]) + (u[-1] - u[0])
    lo, hi, rep, point = _line_cells(u, width)
    i, j = np.triu_indices(lo.size)
    both = point[i] & point[j]
    r1, r2 = rep[i], rep[j]
    low = lo[i] + lo[j]
    upp = hi[i] + hi[j]
    s = r1 + r2  # only used where both cells are points
    # upper end of the s-range: {X < upp}, {X >= upp}; exact where both are points
    a_up = np.where(both, _lt(x, s), _lt(x, upp))
    ap_up = np.where(both, n - _le(x, s), n - _lt(x, upp))
    a_low = np.where(both, _lt(x, s), _le(x, low))
    ap_low = np.where(both, n - _le(x, s), n - _le(x, low))
    d_up = _lo_counts(x, n, a_up, ap_up, r1, r2)
    d_low = _lo_counts(x, n, a_low, ap_low, r1, r2)
    k_up, k_low = int(np.argmax(d_up)), int(np.argmin(d_low))
    if d_up[k_up] >= -d_low[k_low]:
        k, upper, value = k_up, True, float(d_up[k_up])
    else:
        k, upper, value = k_low, False, float(-d_low[k_low])
    c1 = (lo[i[k]], hi[i[k]], bool(point[i[k]]))
    c2 = (lo[j[k]], hi[j[k]], bool(point[j[k]]))
    if both[k]:
        t1, t2 = float(r1[k]), float(r2[k])
    else:
        level = _pick_level(x, low[k], upp[k], upper)
        t1, t2 = _split_sum(level, c1, c2)
    return SupremumResult(max(value, 0.0), (float(t1), float(t2)), Mode.EXACT, 2 * i.size)


def _half_open_reps(breaks: np.ndarray) -> np.ndarray:
    """One interior point per cell of ``(0, b1), [b1, b2), ..., [bk, inf)``."""
    if breaks.size == 0:
        return np.array([1.0])
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    return np.concatenate([[0.5 * breaks[0]], mids, [2.0 * breaks[-1]]])


def _exact_ex(sample: Sample) -> SupremumResult:
    x = sample.sorted
    reps1 = _half_open_reps(np.unique(x[x > 0.0]))
    _, gaps = _pairs(x)
    reps2 = _half_open_reps(np.unique(gaps[gaps > 0.0]))
    field = np.abs(_ex_grid(sample, reps1, reps2))
    k = np.unravel_index(int(np.argmax(field)), field.shape)
    return SupremumResult(float(field[k]), (float(reps1[k[0]]), float(reps2[k[1]])), Mode.EXACT, field.size)


# ---------------------------------------------------------------------------
# grid suprema

def _quantile_axis(values: np.ndarray, m: int) -> np.ndarray:
    return np.quantile(values, np.linspace(0.0, 1.0, m))


def _gap_quantile_source(x: np.ndarray, limit: int = 700) -> np.ndarray:
    if x.size > limit:
        x = x[np.linspace(0, x.size - 1, limit).astype(int)]
    _, gaps = _pairs(x)
    return gaps[gaps > 0.0]


def _grid_axes(kind: TestKind, sample: Sample, grid: GridSpec):
    x = sample.sorted
    if kind is TestKind.PARETO:
        src = x[x > 1.0]
        if src.size == 0:
            src = np.array([1.5])
        a = np.maximum(_quantile_axis(src, grid.m1), np.nextafter(1.0, 2.0))
        b = np.maximum(_quantile_axis(src, grid.m2), np.nextafter(1.0, 2.0))
        return a, b
    if kind is TestKind.LOGISTIC:
        return _quantile_axis(x, grid.m1), _quantile_axis(x, grid.m2)
    src1 = x[x > 0.0]
    src2 = _gap_quantile_source(x)
    if src1.size == 0:
        src1 = np.array([1.0])
    if src2.size == 0:
        src2 = np.array([1.0])
    return _quantile_axis(src1, grid.m1), _quantile_axis(src2, grid.m2)


def _grid_sup(kind: TestKind, sample: Sample, grid: GridSpec) -> SupremumResult:
    if grid.empty:
        raise DomainError("GRID mode needs a non-empty grid")
    a, b = _grid_axes(kind, sample, grid)
    field = np.abs(field_grid(kind, sample, a, b))
    i, j = np.unravel_index(int(np.argmax(field)), field.shape)
    best, arg, evals = float(field[i, j]), (float(a[i]), float(b[j])), field.size
    if grid.refine:
        npts = 2 * grid.zoom + 1
        za = np.linspace(a[max(i - 1, 0)], a[min(i + 1, a.size - 1)], npts)
        zb = np.linspace(b[max(j - 1, 0)], b[min(j + 1, b.size - 1)], npts)
        zf = np.abs(field_grid(kind, sample, za, zb))
        p, q = np.unravel_index(int(np.argmax(zf)), zf.shape)
        evals += zf.size
        if zf[p, q] > best:
            best, arg = float(zf[p, q]), (float(za[p]), float(zb[q]))
    return SupremumResult(best, arg, Mode.GRID, evals)


def k_statistic(
    kind: TestKind,
    sample: SampleLike,
    mode: Mode | str = Mode.EXACT,
    grid: GridSpec | None = None,
    exact_cap: int | None = None,
) -> SupremumResult:
    """Supremum of ``|H_n - G_n|`` over the parameter region.

    EXACT mode visits every cell of the jump arrangement and refuses
    samples larger than ``exact_cap`` (defaults in :data:`EXACT_CAPS`).
    GRID mode searches a quantile-spaced grid with one local zoom.
    """
    kind = TestKind.parse(kind)
    mode = Mode.parse(mode)
    sample = as_sample(sample)
    _require_n(sample, kind.degree)
    if mode is Mode.GRID:
        return _grid_sup(kind, sample, grid or GridSpec())
    cap = EXACT_CAPS[kind] if exact_cap is None else exact_cap
    if sample.n > cap:
        raise ExactModeRefused(
            f"EXACT mode is capped at n={cap} for the {kind.label} test (got n={sample.n}); use GRID mode"
        )
    if kind is TestKind.PARETO:
        return _exact_pa(sample)
    if kind is TestKind.LOGISTIC:
        return _exact_lo(sample)
    return _exact_ex(sample)
