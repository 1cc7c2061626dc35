"""The ``Sample`` container and the plain-text sample format."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._common import DomainError


@dataclass(frozen=True, eq=False)
class Sample:
    """An immutable collection of real observations.

    ``order`` is the permutation that sorts ``values``; ``sorted`` is the
    sorted copy that all count-based evaluators work on.
    """

    values: np.ndarray
    order: np.ndarray = field(init=False, repr=False)
    sorted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float).ravel()
        if v.size == 0:
            raise DomainError("sample is empty")
        if not np.all(np.isfinite(v)):
            raise DomainError("sample contains non-finite values")
        order = np.argsort(v, kind="stable")
        srt = v[order]
        for arr in (v, order, srt):
            arr.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "sorted", srt)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def has_ties(self) -> bool:
        return bool(np.any(np.diff(self.sorted) == 0.0))

    def map(self, fn) -> Sample:
        return Sample(fn(self.values))

    def __len__(self) -> int:
        return self.n

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


SampleLike = Union[Sample, np.ndarray, list, tuple]


def as_sample(x: SampleLike) -> Sample:
    return x if isinstance(x, Sample) else Sample(np.asarray(x, dtype=float))


def parse_sample(text: str) -> Sample:
    """Parse newline-delimited floats; ``#`` starts a comment."""
    values = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise DomainError(f"line {lineno}: cannot parse {line!r} as a number") from None
    if not values:
        raise DomainError("no observations found")
    return Sample(np.array(values))


def read_sample(path: str | os.PathLike) -> Sample:
    with open(path, encoding="utf-8") as fh:
        return parse_sample(fh.read())


def format_sample(sample: SampleLike) -> str:
    return "".join(f"{v!r}\n" for v in np.asarray(as_sample(sample).values).tolist())
