"""Local Bahadur efficiency of the three supremum tests.

The efficiency against a close alternative ``g(x, theta)`` is composed at
leading order in ``theta``::

    efficiency = 2 * ld_coef * b_coef**2 / kl2_coef

where ``ld_coef = 1 / (2 m^2 sigma0^2)`` is the large-deviation coefficient,
``b_coef`` the coefficient of ``theta`` in the limit of the statistic under
the alternative and ``kl2_coef`` the coefficient of ``theta^2`` in twice the
Kullback-Leibler distance to the null family.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from ._common import DomainError, NumericalError, TestKind
from .distributions import Alternative, AlternativeFamily, NullFamily
from .optimize import maximize
from .projection import Form, breakpoints, expectation, sigma2_sup, xi
from .quadrature import integrate

LO_THETAS = (0.02, 0.04, 0.08)
LAMBDA_BRACKET = (0.2, 5.0)
KL_TOL = 1e-14

# values printed alongside the computed ones; None where nothing was reported
REFERENCE_EFFICIENCY = {
    Alternative.MIXTURE: 0.29,
    Alternative.LEY_PAINDAVEINE: 0.23,
    Alternative.SHIFTED_LOGISTIC: 0.55,
    Alternative.GLD: 0.43,
    Alternative.MAKEHAM: 0.38,
    Alternative.WEIBULL: 0.20,
}
REFERENCE_LD = {TestKind.PARETO: 2.0, TestKind.LOGISTIC: 5.87, TestKind.EXPONENTIAL: 0.715}
REFERENCE_LAMBDA_SLOPE = {Alternative.SHIFTED_LOGISTIC: 0.0, Alternative.GLD: -0.35}
REFERENCE_SIGMA0 = {TestKind.PARETO: 0.0625, TestKind.LOGISTIC: 0.00945, TestKind.EXPONENTIAL: 0.0223}


class Convention(enum.Enum):
    """How the slope coefficient is read off ``a_prime``.

    ``LEMMA``: ``b = sup |a_prime|``.  ``PAPER_COMPAT``: ``b = m sup |a_prime|``,
    which is the reading that reproduces the reference efficiencies.
    """

    LEMMA = "lemma"
    PAPER_COMPAT = "paper-compat"

    @classmethod
    def parse(cls, name: str | Convention) -> Convention:
        if isinstance(name, Convention):
            return name
        key = name.strip().lower().replace("_", "-")
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown convention {name!r}") from None


def _family(alt) -> AlternativeFamily:
    if isinstance(alt, AlternativeFamily):
        return alt
    return AlternativeFamily(Alternative.parse(alt))


def _check_pair(kind: TestKind, fam: AlternativeFamily) -> None:
    if fam.null_kind is not kind:
        raise DomainError(f"{fam.label} perturbs the {fam.null_kind.label} null, not {kind.label}")


@lru_cache(maxsize=None)
def _sup(kind: TestKind, coarse: int):
    return sigma2_sup(kind, coarse=coarse)


def ld_coefficient(kind: TestKind, sigma0_sq: float | None = None, coarse: int = 64) -> float:
    """Coefficient of ``eps^2`` in the large-deviation rate, ``1 / (2 m^2 sigma0^2)``."""
    kind = TestKind.parse(kind)
    if sigma0_sq is None:
        sigma0_sq = _sup(kind, coarse).sigma0_sq
    return 1.0 / (2.0 * kind.degree**2 * sigma0_sq)


# -- slope -----------------------------------------------------------------


def a_prime(kind: TestKind, alt, t1, t2, form: Form = Form.CLOSED):
    """``int xi(x; t1, t2) h(x) dx`` with ``xi`` oriented as ``H - G``.

    The derivative at ``theta = 0`` of the population value of ``H - G`` is
    ``m`` times this quantity (see :func:`population_difference`).

    The Pareto and logistic projections are piecewise constant, so the closed
    form is an exact sum of jumps of the antiderivative of ``h``; the
    exponential projection is always integrated numerically.
    """
    kind = TestKind.parse(kind)
    fam = _family(alt)
    _check_pair(kind, fam)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if form is Form.CLOSED and kind is not TestKind.EXPONENTIAL:
        out = _aprime_piecewise(kind, fam, t1, t2)
    elif t1.ndim == 0 and t2.ndim == 0:
        out = np.asarray(_aprime_scalar(kind, fam, float(t1), float(t2)))
    else:
        sign = -1.0 if kind is TestKind.EXPONENTIAL else 1.0
        out = sign * expectation(kind, lambda x, a, b: xi(kind, x, a, b) * fam.score(x), t1, t2)
        out = out.reshape(np.broadcast(t1, t2).shape)
    return out[()] if out.ndim == 0 else out


def _aprime_piecewise(kind: TestKind, fam: AlternativeFamily, t1, t2):
    xi(kind, 0.0 if kind is TestKind.LOGISTIC else 2.0, t1, t2)  # domain check
    t1, t2 = np.broadcast_arrays(t1, t2)
    lo, hi = fam.null.support
    bp = np.sort(breakpoints(kind, t1, t2), axis=-1)
    lo_e = np.concatenate([np.full(bp.shape[:-1] + (1,), lo), bp], axis=-1)
    hi_e = np.concatenate([bp, np.full(bp.shape[:-1] + (1,), hi)], axis=-1)
    rep = np.where(
        np.isinf(lo_e), hi_e - 1.0, np.where(np.isinf(hi_e), lo_e + 1.0, 0.5 * (lo_e + hi_e))
    )
    vals = xi(kind, rep, t1[..., None], t2[..., None])
    return np.sum(vals * (fam.score_cdf(hi_e) - fam.score_cdf(lo_e)), axis=-1)


def _xi_ex_scalar(t1: float, t2: float):
    """Scalar closure equal to ``-xi(EXPONENTIAL, s, t1, t2)``, for fast quadrature."""
    c0 = 0.5 * math.exp(-2 * t1 - t2)
    c2 = 0.5 * math.exp(-2 * t1)
    c1 = 0.5 * math.exp(-t1 - t2)
    c12 = 0.5 * math.exp(-t1)
    s12 = t1 + t2

    def f(s: float) -> float:
        v = -c0 * math.expm1(-s)
        if s > t2:
            v += c2 * math.expm1(t2 - s)
        if s > t1:
            v += c1 * math.expm1(t1 - s)
        if s > s12:
            v -= c12 * math.expm1(s12 - s)
        return -v

    return f


def _aprime_scalar(kind: TestKind, fam: AlternativeFamily, t1: float, t2: float) -> float:
    xi(kind, 1.0, t1, t2)  # domain check
    lo, hi = fam.null.support
    brk = breakpoints(kind, t1, t2).tolist()
    if kind is TestKind.EXPONENTIAL:
        proj = _xi_ex_scalar(t1, t2)
        score = _scalar_score(fam)
        return integrate(lambda x: proj(x) * score(x), lo, hi, brk)
    if not np.isfinite(lo):
        brk.append(0.0)
    return integrate(lambda x: float(xi(kind, x, t1, t2)) * float(fam.score(x)), lo, hi, brk)


def _scalar_score(fam: AlternativeFamily):
    if fam.name is Alternative.MAKEHAM:
        return lambda x: math.exp(-x) * (2.0 - 2.0 * math.exp(-x) - x)
    if fam.name is Alternative.WEIBULL:
        return lambda x: math.exp(-x) * (1.0 + math.log(x) - x * math.log(x)) if x > 0 else 0.0
    return lambda x: float(fam.score(x))


def population_difference(kind: TestKind, alt, theta: float, t1: float, t2: float) -> float:
    """Limit in probability of ``H_n - G_n`` when sampling from ``g(., theta)``."""
    kind = TestKind.parse(kind)
    fam = _family(alt)
    _check_pair(kind, fam)
    F = lambda x: float(fam.cdf(x, theta))  # noqa: E731
    if kind is TestKind.PARETO:
        return (1 - F(t1)) * (1 - F(t2)) - (1 - F(t1 * t2))
    if kind is TestKind.LOGISTIC:
        s = t1 + t2
        return F(s) * (1 - F(t1)) * (1 - F(t2)) - (1 - F(s)) * F(t1) * F(t2)
    g = lambda x: float(fam.pdf(x, theta))  # noqa: E731
    brk = [t1, t2, t1 + t2]
    p_gap = integrate(lambda x: g(x) * (F(x + t2) - F(max(x - t2, 0.0))), 0.0, math.inf, brk, tol=1e-13)
    p_min = 1 - (1 - F(t1)) ** 2
    upper = integrate(
        lambda x: g(x) * (F(x + t2) - F(max(x - t2, t1))), t1, math.inf, brk, tol=1e-13
    )
    joint = p_gap - upper
    return p_min * p_gap - joint


@dataclass(frozen=True)
class Slope:
    b_coef: float
    sup_abs_aprime: float
    argmax: tuple[float, float]


def b_slope(kind: TestKind, alt, convention: Convention = Convention.LEMMA, coarse: int = 64) -> Slope:
    kind = TestKind.parse(kind)
    fam = _family(alt)
    convention = Convention.parse(convention)
    res = _aprime_sup(kind, fam, coarse)
    scale = kind.degree if convention is Convention.PAPER_COMPAT else 1
    return Slope(scale * res.value, res.value, res.point)


@lru_cache(maxsize=None)
def _aprime_sup(kind: TestKind, fam: AlternativeFamily, coarse: int):
    _check_pair(kind, fam)
    return maximize(kind, lambda a, b: np.abs(a_prime(kind, fam, a, b)), coarse=coarse)


# -- Kullback-Leibler --------------------------------------------------------


def _lambda_score(kind: TestKind, x, lam: float):
    """``d/d lambda log g_lambda(x)`` for the null scale/shape family."""
    if kind is TestKind.PARETO:
        return 1.0 / lam - np.log(x)
    if kind is TestKind.LOGISTIC:
        return 1.0 / lam - x * np.tanh(lam * x / 2.0)
    return 1.0 / lam - x


def _support_integral(fam: AlternativeFamily, func, tol: float = KL_TOL) -> float:
    lo, hi = fam.null.support
    brk = [2.0] if fam.null_kind is TestKind.PARETO else [1.0] if np.isfinite(lo) else [0.0]
    return integrate(func, lo, hi, brk, tol=tol)


@dataclass(frozen=True)
class KLPoint:
    theta: float
    kl: float
    lam: float


def kl_distance(alt, theta: float) -> KLPoint:
    """``K(theta) = inf_lambda KL(g_theta || g0_lambda)``.

    ``-E log g_lambda`` is strictly convex in ``lambda`` for all three null
    families, so the infimum is the unique root of the score equation
    ``E_theta[d/dlambda log g_lambda(X)] = 0``.  Negative ``theta`` inside the
    family's natural range is accepted, which allows symmetric differences.
    """
    fam = _family(alt)
    theta = fam.check_theta(theta, signed=True)
    kind = fam.null_kind

    def score_mean(lam: float) -> float:
        return _support_integral(fam, lambda x: float(fam.pdf(x, theta, True)) * float(_lambda_score(kind, x, lam)))

    lo, hi = LAMBDA_BRACKET
    f_lo, f_hi = score_mean(lo), score_mean(hi)
    if not (f_lo > 0 > f_hi):
        raise NumericalError(f"lambda score not bracketed on [{lo}, {hi}] at theta={theta}: {f_lo}, {f_hi}")
    lam, info = brentq(score_mean, lo, hi, xtol=1e-13, rtol=1e-14, full_output=True)
    if not info.converged:
        raise NumericalError(f"inner minimization over lambda failed at theta={theta}")
    null = NullFamily(kind, lam)

    def integrand(x):
        lg = float(fam.logpdf(x, theta, True))
        if not np.isfinite(lg):
            return 0.0
        return math.exp(lg) * (lg - float(null.logpdf(x)))

    return KLPoint(theta, _support_integral(fam, integrand), float(lam))


@dataclass(frozen=True)
class KLExpansion:
    kl2_coef: float
    lambda_slope: float | None
    points: tuple[KLPoint, ...] = field(default=())


def kl_expansion(alt, thetas=LO_THETAS) -> KLExpansion:
    """Extrapolate ``2K(theta) / theta^2`` and ``(lambda~ - 1) / theta`` to ``theta = 0``."""
    fam = _family(alt)
    pts = tuple(kl_distance(fam, t) for t in thetas)
    th = np.array([p.theta for p in pts])
    deg = len(th) - 1
    ratio = np.array([2.0 * p.kl for p in pts]) / th**2
    slope = (np.array([p.lam for p in pts]) - 1.0) / th
    c = np.polyfit(th, ratio, deg)[-1]
    s = np.polyfit(th, slope, deg)[-1]
    return KLExpansion(float(c), float(s), pts)


def kl2_coefficient(kind: TestKind, alt) -> KLExpansion:
    """Coefficient of ``theta^2`` in ``2K(theta)``."""
    kind = TestKind.parse(kind)
    fam = _family(alt)
    _check_pair(kind, fam)
    h = lambda x: float(fam.score(x))  # noqa: E731
    if kind is TestKind.PARETO:
        a = _support_integral(fam, lambda x: (x * h(x)) ** 2)
        b = _support_integral(fam, lambda x: h(x) * math.log(x))
        return KLExpansion(a - b * b, None)
    if kind is TestKind.EXPONENTIAL:
        # h^2 e^x is evaluated as (h e^{x/2})^2 to keep the tail finite
        a = _support_integral(fam, lambda x: (h(x) * math.exp(min(0.5 * x, 700.0))) ** 2 if x > 0 else 0.0)
        b = _support_integral(fam, lambda x: x * h(x))
        return KLExpansion(a - b * b, None)
    return kl_expansion(fam)


# -- efficiency --------------------------------------------------------------


@dataclass(frozen=True)
class EfficiencyReport:
    kind: str
    alt: str
    ld_coef: float
    b_coef: float
    kl2_coef: float
    efficiency: float
    convention: str
    argmax: tuple[float, float]
    sup_abs_aprime: float
    sigma0_sq: float
    lambda_slope: float | None
    paper_value: float | None
    discrepancy_note: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmax"] = list(self.argmax)
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _note(kind: TestKind, fam: AlternativeFamily, eff: float, sigma0_sq: float, ld: float,
          convention: Convention, reference: float | None, lambda_slope: float | None = None) -> str:
    notes = []
    ref_s = REFERENCE_SIGMA0[kind]
    if abs(sigma0_sq - ref_s) > 2e-4:
        notes.append(f"computed sigma0^2={sigma0_sq:.6g} differs from the reference {ref_s:g}")
    ref_ld = REFERENCE_LD[kind]
    if abs(ld - ref_ld) > 0.05 * ref_ld:
        if kind is TestKind.EXPONENTIAL:
            notes.append(
                f"reference ld coefficient {ref_ld:g} is inconsistent with 1/(2 m^2 sigma0^2) for m=4 and "
                f"sigma0^2={ref_s:g} (that gives {1 / (32 * ref_s):.4g}; {ref_ld:g} equals 2 m^2 sigma0^2); "
                f"computed {ld:.5g}"
            )
        else:
            notes.append(f"ld coefficient {ld:.5g} differs from the reference {ref_ld:g}")
    if reference is not None:
        gap = eff - reference
        verdict = "within 0.02" if abs(gap) <= 0.02 else "outside 0.02"
        notes.insert(0, f"efficiency {eff:.4f} vs reference {reference:g} (gap {gap:+.4f}, {verdict})")
        if convention is Convention.LEMMA:
            notes.append("reference values correspond to the paper-compat convention")
    ref_l = REFERENCE_LAMBDA_SLOPE.get(fam.name)
    if ref_l is not None and lambda_slope is not None and abs(lambda_slope - ref_l) > 0.02:
        notes.append(
            f"lambda~ slope {lambda_slope:+.4f} (rate parameter of F(x)=1/(1+exp(-lambda x))) differs from the "
            f"reference {ref_l:+g}; the reference matches the reciprocal, scale parameterisation"
        )
    return "; ".join(notes) if notes else "no reference value"


def efficiency(kind: TestKind, alt, convention: Convention = Convention.PAPER_COMPAT, coarse: int = 64) -> EfficiencyReport:
    kind = TestKind.parse(kind)
    fam = _family(alt)
    convention = Convention.parse(convention)
    _check_pair(kind, fam)
    sup = _sup(kind, coarse)
    ld = ld_coefficient(kind, sup.sigma0_sq)
    slope = b_slope(kind, fam, convention, coarse=coarse)
    kl = kl2_coefficient(kind, fam)
    eff = 2.0 * ld * slope.b_coef**2 / kl.kl2_coef
    reference = REFERENCE_EFFICIENCY[fam.name] if fam.name is not Alternative.MIXTURE or fam.beta == 6.0 else None
    return EfficiencyReport(
        kind=kind.label,
        alt=fam.label,
        ld_coef=ld,
        b_coef=slope.b_coef,
        kl2_coef=kl.kl2_coef,
        efficiency=eff,
        convention=convention.value,
        argmax=slope.argmax,
        sup_abs_aprime=slope.sup_abs_aprime,
        sigma0_sq=sup.sigma0_sq,
        lambda_slope=kl.lambda_slope,
        paper_value=reference,
        discrepancy_note=_note(kind, fam, eff, sup.sigma0_sq, ld, convention, reference, kl.lambda_slope),
    )


ALL_PAIRS = tuple((f.null_kind, f) for f in (AlternativeFamily(a) for a in Alternative))


def efficiency_table(convention: Convention = Convention.PAPER_COMPAT) -> list[EfficiencyReport]:
    return [efficiency(k, f, convention) for k, f in ALL_PAIRS]
