"""Command-line front end: ``chartests <command> [flags]``.

Every command is a thin adapter over the library.  Flags may also be given
in a flat ``key = value`` config file (``--config``); flags on the command
line win.  Exit status: 0 success, 2 usage or domain error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
from collections.abc import Sequence

from . import bahadur, montecarlo, projection
from ._common import DomainError, Mode, NumericalError, TestKind
from .distributions import AlternativeFamily
from .empirical import GridSpec, k_statistic
from .sample import read_sample

log = logging.getLogger("chartests")

DEFAULTS = {
    "alpha": 0.05,
    "reps": 10000,
    "mode": "exact",
    "grid": "256x256",
    "format": "json",
    "threads": 1,
    "convention": "paper-compat",
    "which": "variance",
    "beta": 6.0,
    "epsilon": 0.1,
}

INT_KEYS = {"reps", "seed", "threads", "n"}
FLOAT_KEYS = {"alpha", "beta", "epsilon", "theta"}
LIST_KEYS = {"n", "alpha", "theta"}


class UsageError(DomainError):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chartests", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, fmt=True):
        sp.add_argument("--config", help="flat key=value file; command-line flags override it")
        sp.add_argument("--out", help="write output here instead of standard output")
        if fmt:
            sp.add_argument("--format", choices=["json", "csv"], default=None)
        if seed:
            sp.add_argument("--seed", type=int, default=None, help="master seed (printed if omitted)")
            sp.add_argument("--threads", type=int, default=None, help="maximum worker processes")
            sp.add_argument("--cache-dir", default=None, help="directory for cached null simulations")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("test", help="run a test on a data file")
    sp.add_argument("--kind")
    sp.add_argument("--data")
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--reps", type=int, default=None)
    sp.add_argument("--mode", choices=["exact", "grid"], default=None)
    sp.add_argument("--grid", default=None, help="GRID mode resolution, e.g. 256x256")
    common(sp)

    sp = sub.add_parser("critvals", help="simulated critical values")
    sp.add_argument("--kind")
    sp.add_argument("--n", type=int, nargs="+")
    sp.add_argument("--alpha", type=float, nargs="+", default=None)
    sp.add_argument("--reps", type=int, default=None)
    sp.add_argument("--mode", choices=["exact", "grid"], default=None)
    sp.add_argument("--grid", default=None)
    common(sp)

    sp = sub.add_parser("power", help="simulated power against an alternative")
    sp.add_argument("--kind")
    sp.add_argument("--alt")
    sp.add_argument("--beta", type=float, default=None, help="mixture exponent")
    sp.add_argument("--theta", type=float, nargs="+")
    sp.add_argument("--n", type=int)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--reps", type=int, default=None)
    sp.add_argument("--mode", choices=["exact", "grid"], default=None)
    sp.add_argument("--grid", default=None)
    common(sp)

    sp = sub.add_parser("surface", help="dump a variance or a'(0) surface as CSV")
    sp.add_argument("--kind")
    sp.add_argument("--which", choices=["variance", "aprime"], default=None)
    sp.add_argument("--alt", help="alternative for --which aprime")
    sp.add_argument("--beta", type=float, default=None)
    sp.add_argument("--grid", default=None)
    common(sp, seed=False, fmt=False)

    sp = sub.add_parser("efficiency", help="local Bahadur efficiency report")
    sp.add_argument("--kind")
    sp.add_argument("--alt")
    sp.add_argument("--beta", type=float, default=None)
    sp.add_argument("--convention", choices=["lemma", "paper-compat"], default=None)
    sp.add_argument("--all", action="store_true", help="every (test, alternative) pair")
    common(sp, seed=False)

    sp = sub.add_parser("ldcheck", help="empirical large-deviation rates")
    sp.add_argument("--kind")
    sp.add_argument("--epsilon", type=float, default=None)
    sp.add_argument("--n", type=int, nargs="+")
    sp.add_argument("--reps", type=int, default=None)
    sp.add_argument("--mode", choices=["exact", "grid"], default=None)
    common(sp)
    return p


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}: line {lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _convert(key: str, text: str):
    conv = int if key in INT_KEYS else float if key in FLOAT_KEYS else str
    try:
        if key in LIST_KEYS:
            return [conv(v) for v in text.replace(",", " ").split()]
        if key == "all":
            return text.lower() in ("1", "true", "yes")
        return conv(text)
    except ValueError:
        raise UsageError(f"config: cannot parse {key} = {text!r}") from None


def resolve(ns: argparse.Namespace) -> argparse.Namespace:
    """Merge flags, config file and defaults, in that order of precedence."""
    cfg = read_config(ns.config) if getattr(ns, "config", None) else {}
    for key, text in cfg.items():
        if not hasattr(ns, key):
            raise UsageError(f"config key {key!r} does not apply to {ns.command}")
        current = getattr(ns, key)
        if current is None or current is False:
            value = _convert(key, text)
            # single-valued flags get scalars even if the parser allows lists
            if key == "n" and ns.command in ("power",) and isinstance(value, list):
                value = value[0]
            setattr(ns, key, value)
    for key, value in DEFAULTS.items():
        if hasattr(ns, key) and getattr(ns, key) is None:
            setattr(ns, key, value)
    if hasattr(ns, "alpha") and ns.command == "critvals" and not isinstance(ns.alpha, list):
        ns.alpha = [ns.alpha]
    if hasattr(ns, "seed") and ns.seed is None:
        ns.seed = secrets.randbits(32)
        print(f"chartests: no --seed given, using seed {ns.seed}", file=sys.stderr)
    log.info("resolved configuration: %s", vars(ns))
    return ns


def _need(ns, *names):
    for name in names:
        if getattr(ns, name, None) in (None, []):
            raise UsageError(f"{ns.command}: --{name.replace('_', '-')} is required")


def _family(ns) -> AlternativeFamily:
    return AlternativeFamily(ns.alt, beta=ns.beta)


def _emit(ns, records, columns: Sequence[str] | None = None) -> None:
    fmt = getattr(ns, "format", "json")
    if fmt == "csv":
        rows = records if isinstance(records, list) else [records]
        cols = list(columns or rows[0].keys())
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, tuple)) else v for k, v in r.items()})
        text = buf.getvalue()
    else:
        text = json.dumps(records, indent=2) + "\n"
    if ns.out:
        with open(ns.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_test(ns) -> None:
    _need(ns, "kind", "data")
    kind = TestKind.parse(ns.kind)
    sample = read_sample(ns.data)
    mode = Mode.parse(ns.mode)
    res = k_statistic(kind, sample, mode, GridSpec.parse(ns.grid))
    plan = montecarlo.SimPlan(kind, sample.n, ns.reps, ns.seed, ns.alpha, mode, GridSpec.parse(ns.grid))
    null = montecarlo.simulate_null(plan, ns.threads, ns.cache_dir)
    crit = montecarlo.critical_value(plan, null_stats=null)
    p = montecarlo.p_value_from(res.value, null)
    _emit(ns, {
        "kind": kind.label, "n": sample.n, "statistic": res.value, "argmax": list(res.argmax),
        "mode": res.mode.value, "p_value": p, "critical_value": crit, "alpha": ns.alpha,
        "decision": "reject" if res.value > crit + montecarlo.TIE_TOL else "retain",
        "reps": ns.reps, "seed": ns.seed,
    })


def cmd_critvals(ns) -> None:
    _need(ns, "kind", "n")
    kind = TestKind.parse(ns.kind)
    out = []
    for n in ns.n:
        plan = montecarlo.SimPlan(kind, n, ns.reps, ns.seed, ns.alpha[0], Mode.parse(ns.mode), GridSpec.parse(ns.grid))
        null = montecarlo.simulate_null(plan, ns.threads, ns.cache_dir)
        for a in ns.alpha:
            plan_a = montecarlo.SimPlan(kind, n, ns.reps, ns.seed, a, plan.mode)
            out.append(montecarlo.record(kind, n, a, ns.reps, ns.seed, montecarlo.critical_value(plan_a, null_stats=null)))
    _emit(ns, out, ["kind", "n", "alpha", "reps", "seed", "value"])


def cmd_power(ns) -> None:
    _need(ns, "kind", "alt", "theta", "n")
    kind = TestKind.parse(ns.kind)
    fam = _family(ns)
    plan = montecarlo.SimPlan(kind, ns.n, ns.reps, ns.seed, ns.alpha, Mode.parse(ns.mode), GridSpec.parse(ns.grid))
    crit = montecarlo.critical_value(plan, ns.threads, ns.cache_dir)
    out = []
    for th in ns.theta:
        rec = montecarlo.record(kind, ns.n, ns.alpha, ns.reps, ns.seed, montecarlo.power(plan, fam, th, ns.threads, crit=crit))
        rec.update(alt=fam.label, theta=th, critical_value=crit)
        out.append(rec)
    _emit(ns, out, ["kind", "alt", "theta", "n", "alpha", "reps", "seed", "critical_value", "value"])


def cmd_surface(ns) -> None:
    _need(ns, "kind")
    kind = TestKind.parse(ns.kind)
    grid = GridSpec.parse(ns.grid)
    if ns.which == "variance":
        values = lambda a, b: projection.sigma2(kind, a, b)  # noqa: E731
    else:
        _need(ns, "alt")
        fam = _family(ns)
        values = lambda a, b: bahadur.a_prime(kind, fam, a, b)  # noqa: E731
    rows = projection.surface_dump(kind, values, grid, ns.out if ns.out else sys.stdout)
    print(f"chartests: wrote {rows} rows", file=sys.stderr)


def cmd_efficiency(ns) -> None:
    conv = bahadur.Convention.parse(ns.convention)
    if ns.all:
        reports = [bahadur.efficiency(k, f, conv) for k, f in bahadur.ALL_PAIRS]
        _emit(ns, [r.to_dict() for r in reports], [
            "kind", "alt", "convention", "sigma0_sq", "ld_coef", "sup_abs_aprime", "b_coef", "kl2_coef",
            "lambda_slope", "efficiency", "paper_value", "discrepancy_note",
        ])
        return
    _need(ns, "kind", "alt")
    rep = bahadur.efficiency(TestKind.parse(ns.kind), _family(ns), conv)
    _emit(ns, rep.to_dict())


def cmd_ldcheck(ns) -> None:
    _need(ns, "kind", "n")
    kind = TestKind.parse(ns.kind)
    predicted = bahadur.ld_coefficient(kind) * ns.epsilon**2
    pts = montecarlo.ld_empirical(kind, ns.epsilon, ns.n, ns.reps, ns.seed, Mode.parse(ns.mode), ns.threads, ns.cache_dir)
    out = []
    for pt in pts:
        gap = None if pt.rate is None else abs(pt.rate - predicted) / predicted
        out.append({
            "kind": kind.label, "epsilon": ns.epsilon, "n": pt.n, "reps": pt.reps, "seed": ns.seed,
            "hits": pt.hits, "tail_prob": pt.tail_prob, "rate": pt.rate, "predicted_rate": predicted,
            "relative_gap": gap, "flag": pt.flag,
        })
    _emit(ns, out)


COMMANDS = {
    "test": cmd_test, "critvals": cmd_critvals, "power": cmd_power,
    "surface": cmd_surface, "efficiency": cmd_efficiency, "ldcheck": cmd_ldcheck,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        resolve(ns)
        COMMANDS[ns.command](ns)
    except NumericalError as exc:
        print(f"chartests: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (DomainError, ValueError, OSError) as exc:
        print(f"chartests: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
