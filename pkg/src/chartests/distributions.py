"""Null families and the close alternatives used for efficiency and power.

All families are immutable values.  Randomness enters only through an
explicit :class:`numpy.random.Generator` argument.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from ._common import DomainError, NumericalError, TestKind
from .sample import Sample

INVERSION_TOL = 1e-10
SAMPLER_THETA_CAP = 2.0


def _softplus(x):
    """log(1 + exp(x)) without overflow."""
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class NullFamily:
    """Pareto on (1, inf), logistic on R, or exponential on (0, inf)."""

    kind: TestKind
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be positive, got {self.lam}")

    @property
    def support(self) -> tuple[float, float]:
        return {
            TestKind.PARETO: (1.0, math.inf),
            TestKind.LOGISTIC: (-math.inf, math.inf),
            TestKind.EXPONENTIAL: (0.0, math.inf),
        }[self.kind]

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        lam = self.lam
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.kind is TestKind.PARETO:
                out = np.where(x > 1.0, lam * x ** (-lam - 1.0), 0.0)
            elif self.kind is TestKind.LOGISTIC:
                out = lam * expit(lam * x) * expit(-lam * x)
            else:
                out = np.where(x >= 0.0, lam * np.exp(-lam * x), 0.0)
        return out[()] if out.ndim == 0 else out

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        lam = self.lam
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind is TestKind.PARETO:
                out = np.where(x > 1.0, math.log(lam) - (lam + 1.0) * np.log(x), -np.inf)
            elif self.kind is TestKind.LOGISTIC:
                out = math.log(lam) - _softplus(-lam * x) - _softplus(lam * x)
            else:
                out = np.where(x >= 0.0, math.log(lam) - lam * x, -np.inf)
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lam = self.lam
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.kind is TestKind.PARETO:
                out = np.where(x > 1.0, -np.expm1(-lam * np.log(np.maximum(x, 1.0))), 0.0)
            elif self.kind is TestKind.LOGISTIC:
                out = expit(lam * x)
            else:
                out = np.where(x > 0.0, -np.expm1(-lam * np.maximum(x, 0.0)), 0.0)
        return out[()] if out.ndim == 0 else out

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise DomainError("quantile level must lie in (0, 1)")
        if self.kind is TestKind.PARETO:
            out = np.exp(-np.log1p(-p) / self.lam)
        elif self.kind is TestKind.LOGISTIC:
            out = logit(p) / self.lam
        else:
            out = -np.log1p(-p) / self.lam
        return out[()] if out.ndim == 0 else out

    def sample(self, n: int, rng: np.random.Generator) -> Sample:
        """Draw ``n`` i.i.d. observations by inverse-c.d.f. transform."""
        if n < 1:
            raise DomainError("sample size must be at least 1")
        u = _open_uniform(rng, n)
        return Sample(self.quantile(u))


def _open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    # Generator.random() is on [0, 1); shift by half a step to stay off 0
    return rng.random(n) + 2.0**-54


class Alternative(enum.Enum):
    MIXTURE = "mixture"
    LEY_PAINDAVEINE = "ley-paindaveine"
    SHIFTED_LOGISTIC = "shifted"
    GLD = "gld"
    MAKEHAM = "makeham"
    WEIBULL = "weibull"

    @classmethod
    def parse(cls, name: str | Alternative) -> Alternative:
        if isinstance(name, Alternative):
            return name
        key = name.strip().lower().replace("_", "-")
        aliases = {
            "mixture": cls.MIXTURE, "mix": cls.MIXTURE,
            "ley-paindaveine": cls.LEY_PAINDAVEINE, "lp": cls.LEY_PAINDAVEINE, "ley": cls.LEY_PAINDAVEINE,
            "shifted": cls.SHIFTED_LOGISTIC, "shifted-logistic": cls.SHIFTED_LOGISTIC, "shift": cls.SHIFTED_LOGISTIC,
            "gld": cls.GLD, "generalized-logistic": cls.GLD,
            "makeham": cls.MAKEHAM,
            "weibull": cls.WEIBULL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown alternative {name!r}") from None


_NULL_OF = {
    Alternative.MIXTURE: TestKind.PARETO,
    Alternative.LEY_PAINDAVEINE: TestKind.PARETO,
    Alternative.SHIFTED_LOGISTIC: TestKind.LOGISTIC,
    Alternative.GLD: TestKind.LOGISTIC,
    Alternative.MAKEHAM: TestKind.EXPONENTIAL,
    Alternative.WEIBULL: TestKind.EXPONENTIAL,
}


@dataclass(frozen=True)
class AlternativeFamily:
    """A one-parameter perturbation ``g(x, theta)`` of a unit-scale null.

    ``theta = 0`` recovers the null density.  ``beta`` is only used by the
    mixture alternative.
    """

    name: Alternative
    beta: float = 6.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", Alternative.parse(self.name))
        if self.name is Alternative.MIXTURE and not self.beta > 1.0:
            raise DomainError("mixture beta must exceed 1")

    @property
    def null_kind(self) -> TestKind:
        return _NULL_OF[self.name]

    @property
    def null(self) -> NullFamily:
        return NullFamily(self.null_kind, 1.0)

    @property
    def theta_domain(self) -> tuple[float, float]:
        """Admissible ``[0, hi)``; ``theta = 0`` is the null itself."""
        if self.name is Alternative.LEY_PAINDAVEINE:
            return (0.0, 1.0 / math.pi)
        if self.name in (Alternative.MAKEHAM, Alternative.WEIBULL):
            return (0.0, math.inf)
        return (0.0, 1.0)

    @property
    def label(self) -> str:
        if self.name is Alternative.MIXTURE:
            return f"mixture(beta={self.beta:g})"
        return self.name.value

    @property
    def natural_domain(self) -> tuple[float, float]:
        """Open interval of ``theta`` for which the density stays valid, negatives included."""
        _, hi = self.theta_domain
        if self.name is Alternative.MIXTURE:
            return (-1.0 / (self.beta - 1.0), hi)
        if self.name is Alternative.LEY_PAINDAVEINE:
            return (-hi, hi)
        return (-1.0, hi)

    def check_theta(self, theta: float, signed: bool = False) -> float:
        lo, hi = self.theta_domain
        theta = float(theta)
        if signed:
            lo, hi = self.natural_domain
            if not (lo < theta < hi):
                raise DomainError(f"theta={theta} outside ({lo}, {hi}) for {self.label}")
            return theta
        if not (lo <= theta < hi):
            raise DomainError(f"theta={theta} outside [{lo}, {hi}) for {self.label}")
        return theta

    # -- densities -----------------------------------------------------

    def pdf(self, x, theta: float, signed: bool = False):
        theta = self.check_theta(theta, signed)
        x = np.asarray(x, dtype=float)
        out = np.exp(self.logpdf(x, theta, signed))
        return out[()] if out.ndim == 0 else out

    def logpdf(self, x, theta: float, signed: bool = False):
        """Log density; ``signed=True`` admits negative ``theta`` in :attr:`natural_domain`."""
        theta = self.check_theta(theta, signed)
        x = np.asarray(x, dtype=float)
        name = self.name
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if name is Alternative.MIXTURE:
                b = self.beta
                xs = np.where(x > 1.0, x, 2.0)
                val = np.log((1.0 - theta) * xs**-2.0 + b * theta * xs ** (-b - 1.0))
                out = np.where(x > 1.0, val, -np.inf)
            elif name is Alternative.LEY_PAINDAVEINE:
                xs = np.where(x > 1.0, x, 2.0)
                val = -2.0 * np.log(xs) + np.log1p(-math.pi * theta * np.cos(math.pi * (1.0 - 1.0 / xs)))
                out = np.where(x > 1.0, val, -np.inf)
            elif name is Alternative.SHIFTED_LOGISTIC:
                z = x - theta
                out = -_softplus(-z) - _softplus(z)
            elif name is Alternative.GLD:
                out = math.log1p(theta) - x - (2.0 + theta) * _softplus(-x)
            elif name is Alternative.MAKEHAM:
                xs = np.maximum(x, 0.0)
                val = np.log1p(-theta * np.expm1(-xs)) - xs - theta * (np.expm1(-xs) + xs)
                out = np.where(x >= 0.0, val, -np.inf)
            else:  # WEIBULL
                xs = np.where(x > 0.0, x, 1.0)
                val = math.log1p(theta) + theta * np.log(xs) - xs ** (1.0 + theta)
                out = np.where(x > 0.0, val, -np.inf)
                if theta == 0.0:
                    out = np.where(x == 0.0, 0.0, out)
        return out[()] if np.ndim(out) == 0 else out

    def cdf(self, x, theta: float):
        theta = self.check_theta(theta)
        x = np.asarray(x, dtype=float)
        name = self.name
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if name is Alternative.MIXTURE:
                xs = np.maximum(x, 1.0)
                out = (1.0 - theta) * (1.0 - 1.0 / xs) + theta * (1.0 - xs**-self.beta)
            elif name is Alternative.LEY_PAINDAVEINE:
                v = 1.0 - 1.0 / np.maximum(x, 1.0)
                out = v - theta * np.sin(math.pi * v)
            elif name is Alternative.SHIFTED_LOGISTIC:
                out = expit(x - theta)
            elif name is Alternative.GLD:
                out = np.exp(-(1.0 + theta) * _softplus(-x))
            elif name is Alternative.MAKEHAM:
                xs = np.maximum(x, 0.0)
                out = -np.expm1(-xs - theta * (np.expm1(-xs) + xs))
            else:
                xs = np.maximum(x, 0.0)
                out = -np.expm1(-(xs ** (1.0 + theta)))
        return out[()] if np.ndim(out) == 0 else out

    # -- score -----------------------------------------------------------

    def score(self, x):
        """``h(x)``: derivative of the density in ``theta`` at ``theta = 0``."""
        x = np.asarray(x, dtype=float)
        name = self.name
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if name is Alternative.MIXTURE:
                xs = np.where(x > 1.0, x, 2.0)
                out = np.where(x > 1.0, -(xs**-2.0) + self.beta * xs ** (-self.beta - 1.0), 0.0)
            elif name is Alternative.LEY_PAINDAVEINE:
                xs = np.where(x > 1.0, x, 2.0)
                out = np.where(x > 1.0, -math.pi * np.cos(math.pi * (1.0 - 1.0 / xs)) / xs**2, 0.0)
            elif name is Alternative.SHIFTED_LOGISTIC:
                out = expit(x) * expit(-x) * np.tanh(x / 2.0)
            elif name is Alternative.GLD:
                out = expit(x) * expit(-x) * (1.0 - _softplus(-x))
            elif name is Alternative.MAKEHAM:
                e = np.exp(-np.maximum(x, 0.0))
                out = np.where(x >= 0.0, e * (2.0 - 2.0 * e - x), 0.0)
            else:
                xs = np.where(x > 0.0, x, 1.0)
                lx = np.log(xs)
                out = np.where(x > 0.0, np.exp(-xs) * (1.0 + lx - xs * lx), np.where(x == 0.0, -np.inf, 0.0))
        return out[()] if np.ndim(out) == 0 else out

    def score_cdf(self, x):
        """Antiderivative of :meth:`score` vanishing at the lower support end.

        Equals the ``theta``-derivative of the c.d.f. at ``theta = 0``.
        """
        x = np.asarray(x, dtype=float)
        name = self.name
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if name is Alternative.MIXTURE:
                xs = np.maximum(x, 1.0)
                out = 1.0 / xs - xs**-self.beta
            elif name is Alternative.LEY_PAINDAVEINE:
                v = 1.0 - 1.0 / np.maximum(x, 1.0)
                out = -np.sin(math.pi * v)
            elif name is Alternative.SHIFTED_LOGISTIC:
                out = -expit(x) * expit(-x)
            elif name is Alternative.GLD:
                out = -expit(x) * _softplus(-x)
            elif name is Alternative.MAKEHAM:
                xs = np.maximum(x, 0.0)
                out = (np.expm1(-xs) + xs) * np.exp(-xs)
            else:
                xs = np.where(x > 0.0, x, 1.0)
                out = np.where(x > 0.0, xs * np.log(xs) * np.exp(-xs), 0.0)
            out = np.where(np.isinf(x), 0.0, out)
        return out[()] if np.ndim(out) == 0 else out

    # -- sampling --------------------------------------------------------

    def quantile(self, u, theta: float):
        theta = self.check_theta(theta)
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0.0) | (u >= 1.0)):
            raise DomainError("quantile level must lie in (0, 1)")
        name = self.name
        if name is Alternative.SHIFTED_LOGISTIC:
            out = theta + logit(u)
        elif name is Alternative.GLD:
            out = -np.log(u ** (-1.0 / (1.0 + theta)) - 1.0)
        elif name is Alternative.WEIBULL:
            out = (-np.log1p(-u)) ** (1.0 / (1.0 + theta))
        elif name is Alternative.MAKEHAM:
            out = _makeham_quantile(u, theta)
        elif name is Alternative.LEY_PAINDAVEINE:
            out = _ley_paindaveine_quantile(u, theta)
        else:
            out = _mixture_quantile(u, theta, self.beta)
        return out[()] if np.ndim(out) == 0 else out

    def sample(self, theta: float, n: int, rng: np.random.Generator) -> Sample:
        theta = self.check_theta(theta)
        if n < 1:
            raise DomainError("sample size must be at least 1")
        if self.name in (Alternative.MAKEHAM, Alternative.WEIBULL) and theta > SAMPLER_THETA_CAP:
            raise DomainError(f"sampler supports theta <= {SAMPLER_THETA_CAP}")
        u = _open_uniform(rng, n)
        if self.name is Alternative.MIXTURE:
            # component selection: Pareto(beta) with probability theta, else Pareto(1)
            pick = rng.random(n) < theta
            x = np.where(pick, (1.0 - u) ** (-1.0 / self.beta), 1.0 / (1.0 - u))
            return Sample(x)
        return Sample(self.quantile(u, theta))


def _mixture_quantile(u, theta, beta):
    # no closed form for the mixture c.d.f.; invert on v = 1 - 1/x in (0, 1)
    def cdf(v):
        x = 1.0 / (1.0 - v)
        return (1.0 - theta) * v + theta * (1.0 - x**-beta)

    def dcdf(v):
        x = 1.0 / (1.0 - v)
        return (1.0 - theta) + theta * beta * x ** (1.0 - beta)

    v = _invert_increasing(cdf, dcdf, u, np.zeros_like(u), np.ones_like(u))
    return 1.0 / (1.0 - v)


def _ley_paindaveine_quantile(u, theta):
    # F = v - theta sin(pi v) with v = 1 - 1/x; increasing because pi theta < 1
    def cdf(v):
        return v - theta * np.sin(math.pi * v)

    def dcdf(v):
        return 1.0 - math.pi * theta * np.cos(math.pi * v)

    v = _invert_increasing(cdf, dcdf, u, np.zeros_like(u), np.ones_like(u))
    return 1.0 / (1.0 - v)


def _makeham_quantile(u, theta):
    # solve x + theta (e^-x - 1 + x) = y with y = -log(1 - u); e^-x - 1 + x lies in [0, x]
    y = -np.log1p(-u)

    def hazard(x):
        return x + theta * (np.expm1(-x) + x)

    def dhazard(x):
        return 1.0 - theta * np.expm1(-x)

    x = _invert_increasing(hazard, dhazard, y, y / (1.0 + theta), y.copy())
    return x


def _invert_increasing(fun, dfun, target, lo, hi, bisections: int = 45, newton_steps: int = 6):
    """Solve ``fun(x) = target`` for increasing ``fun`` bracketed by ``[lo, hi]``.

    Bisection narrows the bracket, Newton steps polish; a Newton step that
    leaves the bracket falls back to the midpoint.
    """
    target = np.asarray(target, dtype=float)
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        below = fun(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(newton_steps):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (fun(x) - target) / dfun(x)
        cand = x - step
        ok = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        x = np.where(ok, cand, x)
    resid = np.abs(fun(x) - target)
    bad = resid > INVERSION_TOL
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NumericalError(
            f"c.d.f. inversion did not converge: target={target.flat[i]!r}, "
            f"x={x.flat[i]!r}, residual={resid.flat[i]:.3g}"
        )
    return x
