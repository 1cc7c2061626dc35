"""Monte Carlo null distributions, critical values, p-values, power and
empirical large-deviation rates.

Every replication ``r`` draws from its own counter-based stream
``Philox(SeedSequence(seed, spawn_key=(stream, r)))``, so results depend only
on ``(seed, r)`` and never on scheduling or the number of workers.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._common import DomainError, Mode, TestKind
from .distributions import AlternativeFamily, NullFamily
from .empirical import GridSpec, k_statistic
from .sample import SampleLike

NULL_STREAM = 0
ALT_STREAM = 1
# statistics are sums of lattice fractions; comparisons allow for rounding
TIE_TOL = 1e-12


def replication_rng(seed: int, r: int, stream: int = NULL_STREAM) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream, r))))


@dataclass(frozen=True)
class SimPlan:
    kind: TestKind
    n: int
    reps: int
    seed: int
    alpha: float = 0.05
    mode: Mode = Mode.EXACT
    grid: GridSpec | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TestKind.parse(self.kind))
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.reps < 100:
            raise DomainError(f"reps must be at least 100, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n < self.kind.degree:
            raise DomainError(f"{self.kind.label} test needs n >= {self.kind.degree}, got {self.n}")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")


def _batch(kind: TestKind, n: int, seed: int, mode: Mode, grid, stream: int, start: int, stop: int,
           alt: AlternativeFamily | None = None, theta: float = 0.0) -> np.ndarray:
    out = np.empty(stop - start)
    null = NullFamily(kind)
    for k, r in enumerate(range(start, stop)):
        rng = replication_rng(seed, r, stream)
        x = null.sample(n, rng) if alt is None else alt.sample(theta, n, rng)
        out[k] = k_statistic(kind, x, mode, grid).value
    return out


def _run(kind, n, reps, seed, mode, grid, stream, workers, alt=None, theta=0.0) -> np.ndarray:
    workers = max(1, int(workers or 1))
    if workers == 1 or reps < 2 * workers:
        return _batch(kind, n, seed, mode, grid, stream, 0, reps, alt, theta)
    bounds = np.linspace(0, reps, 4 * workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = ex.map(
            _batch,
            *zip(*[(kind, n, seed, mode, grid, stream, int(a), int(b), alt, theta)
                   for a, b in zip(bounds[:-1], bounds[1:])]),
        )
        return np.concatenate(list(parts))


def _cache_path(cache_dir, plan: SimPlan) -> Path:
    name = f"null_{plan.kind.short}_n{plan.n}_r{plan.reps}_s{plan.seed}_{plan.mode.value}.json"
    return Path(cache_dir) / name


def simulate_null(plan: SimPlan, workers: int = 1, cache_dir: str | os.PathLike | None = None) -> np.ndarray:
    """Statistic values for ``plan.reps`` null samples, in replication order."""
    path = _cache_path(cache_dir, plan) if cache_dir is not None and plan.mode is Mode.EXACT else None
    if path is not None and path.exists():
        with open(path, encoding="utf-8") as fh:
            rec = json.load(fh)
        return np.asarray(rec["stats"], dtype=float)
    stats = _run(plan.kind, plan.n, plan.reps, plan.seed, plan.mode, plan.grid, NULL_STREAM, workers)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        rec = {"kind": plan.kind.label, "n": plan.n, "reps": plan.reps, "seed": plan.seed,
               "mode": plan.mode.value, "stats": stats.tolist()}
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(rec, fh)
        os.replace(tmp, path)
    return stats


def critical_value(plan: SimPlan, workers: int = 1, cache_dir=None, null_stats: np.ndarray | None = None) -> float:
    """Empirical ``1 - alpha`` quantile of the null statistic."""
    stats = simulate_null(plan, workers, cache_dir) if null_stats is None else null_stats
    return float(np.quantile(stats, 1.0 - plan.alpha))


def p_value_from(observed: float, null_stats: np.ndarray) -> float:
    hits = int(np.count_nonzero(null_stats >= observed - TIE_TOL))
    return (1.0 + hits) / (null_stats.size + 1.0)


def p_value(kind: TestKind, sample: SampleLike, reps: int, seed: int, mode: Mode = Mode.EXACT,
            workers: int = 1, cache_dir=None, observed: float | None = None) -> float:
    """Add-one Monte Carlo p-value ``(1 + #{K_r >= K_obs}) / (reps + 1)``."""
    kind = TestKind.parse(kind)
    if observed is None:
        observed = k_statistic(kind, sample, mode).value
    n = len(sample)
    plan = SimPlan(kind, n, reps, seed, mode=mode)
    return p_value_from(observed, simulate_null(plan, workers, cache_dir))


def rejection_rate(stats: np.ndarray, crit: float) -> float:
    return float(np.mean(stats > crit + TIE_TOL))


def power(plan: SimPlan, alt, theta: float, workers: int = 1, cache_dir=None,
          crit: float | None = None) -> float:
    """Rejection frequency under ``g(., theta)`` at the plan's critical value."""
    fam = alt if isinstance(alt, AlternativeFamily) else AlternativeFamily(alt)
    if fam.null_kind is not plan.kind:
        raise DomainError(f"{fam.label} is not an alternative to the {plan.kind.label} null")
    theta = fam.check_theta(theta)
    if crit is None:
        crit = critical_value(plan, workers, cache_dir)
    stats = _run(plan.kind, plan.n, plan.reps, plan.seed, plan.mode, plan.grid, ALT_STREAM, workers, fam, theta)
    return rejection_rate(stats, crit)


@dataclass(frozen=True)
class RatePoint:
    n: int
    reps: int
    hits: int
    tail_prob: float
    rate: float | None
    flag: str | None


def ld_empirical(kind: TestKind, epsilon: float, n_list, reps: int, seed: int,
                 mode: Mode = Mode.EXACT, workers: int = 1, cache_dir=None) -> list[RatePoint]:
    """``-(1/n) log P(K_n >= eps)`` estimated from ``reps`` null replications per ``n``.

    Entries with no exceedances carry ``rate=None`` and a flag; entries with
    fewer than 10 exceedances are flagged as unreliable.
    """
    kind = TestKind.parse(kind)
    out = []
    for n in n_list:
        stats = simulate_null(SimPlan(kind, int(n), reps, seed, mode=mode), workers, cache_dir)
        hits = int(np.count_nonzero(stats >= epsilon - TIE_TOL))
        p = hits / reps
        if hits == 0:
            out.append(RatePoint(int(n), reps, 0, 0.0, None, "no exceedances"))
            continue
        flag = "fewer than 10 exceedances" if hits < 10 else None
        out.append(RatePoint(int(n), reps, hits, p, -math.log(p) / n, flag))
    return out


def record(kind: TestKind, n: int, alpha: float | None, reps: int, seed: int, value) -> dict:
    return {"kind": TestKind.parse(kind).label, "n": n, "alpha": alpha, "reps": reps, "seed": seed, "value": value}
