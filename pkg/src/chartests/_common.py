"""Shared enums and exceptions."""

from __future__ import annotations

import enum

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced garbage."""


class ExactModeRefused(DomainError):
    """Exact supremum evaluation requested for a sample above the size cap."""


class TestKind(enum.Enum):
    """The three characterization tests.

    The value is ``(name, kernel degree)``.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    PARETO = ("pareto", 2)
    LOGISTIC = ("logistic", 3)
    EXPONENTIAL = ("exponential", 4)

    @property
    def label(self) -> str:
        return self.value[0]

    @property
    def degree(self) -> int:
        return self.value[1]

    @property
    def short(self) -> str:
        return {"pareto": "pa", "logistic": "lo", "exponential": "ex"}[self.label]

    @classmethod
    def parse(cls, name: str | TestKind) -> TestKind:
        if isinstance(name, TestKind):
            return name
        key = name.strip().lower()
        aliases = {
            "pareto": cls.PARETO, "pa": cls.PARETO,
            "logistic": cls.LOGISTIC, "lo": cls.LOGISTIC, "log": cls.LOGISTIC,
            "exponential": cls.EXPONENTIAL, "ex": cls.EXPONENTIAL, "exp": cls.EXPONENTIAL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown test kind {name!r}") from None

    def in_domain(self, t1, t2):
        """Boolean mask: is ``(t1, t2)`` inside the parameter region?"""
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        if self is TestKind.PARETO:
            return (t1 > 1.0) & (t2 > 1.0)
        if self is TestKind.EXPONENTIAL:
            return (t1 > 0.0) & (t2 > 0.0)
        return np.isfinite(t1) & np.isfinite(t2)


class Mode(enum.Enum):
    """How the supremum of the empirical field is evaluated."""

    EXACT = "exact"
    GRID = "grid"

    @classmethod
    def parse(cls, name: str | Mode) -> Mode:
        if isinstance(name, Mode):
            return name
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DomainError(f"unknown mode {name!r}") from None
