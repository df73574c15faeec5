"""Validated integer step laws.

A :class:`StepSpec` stores the law of one increment ``X`` exactly: offsets
with rational probabilities, the mean, the variance ``V``, and two
periodicity diagnostics.

``one_period_gcd`` is the gcd of the step counts ``n`` at which ``S_n = 1``
is possible, and ``aperiodic`` means that gcd is 1.  That condition is
weaker than what the local limit theorem at the origin needs: the +-1 walk
passes it yet only returns at even times.  ``span`` is the gcd of the
pairwise differences of the support; the origin-return asymptotics hold
exactly when ``span == 1`` (``|phi(theta)| < 1`` away from 0).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError

__all__ = [
    "StepSpec",
    "validate_step",
    "named_law",
    "load_law",
    "law_from_json",
    "law_to_json",
    "NAMED_LAWS",
]


@dataclass(frozen=True)
class StepSpec:
    support: tuple[tuple[int, Fraction], ...]
    mean: Fraction
    variance: Fraction
    aperiodic: bool
    one_period_gcd: int
    span: int
    name: str = ""

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.support)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.support)

    @property
    def lo(self) -> int:
        return self.support[0][0]

    @property
    def hi(self) -> int:
        return self.support[-1][0]

    @property
    def denominator(self) -> int:
        """Least common denominator ``D`` of the step probabilities."""
        return reduce(math.lcm, (p.denominator for p in self.probs), 1)

    def integer_kernel(self) -> list[int]:
        """Weights ``D * P(X = lo + i)`` for ``i = 0 .. hi - lo``."""
        d = self.denominator
        w = [0] * (self.hi - self.lo + 1)
        for s, p in self.support:
            w[s - self.lo] = p.numerator * (d // p.denominator)
        return w

    def float_kernel(self) -> np.ndarray:
        """Probabilities ``P(X = lo + i)`` as float64."""
        w = np.zeros(self.hi - self.lo + 1)
        for s, p in self.support:
            w[s - self.lo] = float(p)
        return w

    @property
    def symmetric(self) -> bool:
        d = dict(self.support)
        return all(d.get(-s) == p for s, p in self.support)

    @property
    def strongly_aperiodic(self) -> bool:
        return self.span == 1

    def charfun(self, theta: np.ndarray) -> np.ndarray:
        """``phi(theta) = E exp(i theta X)``."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for s, p in self.support:
            out += float(p) * np.exp(1j * s * theta)
        return out


def _one_period_gcd(offsets: Sequence[int]) -> int:
    """gcd of the step counts at which position 1 is reachable (0 if never).

    Reachable sums are tracked as a bitset over ``[n*lo, n*hi]``.  Every
    reachable time lies in one residue class mod the span, and all large
    members of that class are reachable once ``n`` passes a
    Frobenius-type bound, so ``(hi - lo + 1)^2 + 2 (hi - lo) + span + 2``
    steps cover two consecutive members and fix the gcd.
    """
    lo, hi = min(offsets), max(offsets)
    width = hi - lo
    step_mask = 0
    for s in offsets:
        step_mask |= 1 << (s - lo)
    if lo >= 1 and hi >= 1:
        # position only grows: n*lo > 1 ends any chance
        horizon = 1
    elif hi <= 0:
        return 0
    else:
        span = reduce(math.gcd, (s - lo for s in offsets), 0) or 1
        horizon = (width + 1) ** 2 + 2 * width + span + 2
    reach = 1  # bit i <-> position n*lo + i, at n = 0
    g = 0
    for n in range(1, horizon + 1):
        nxt = 0
        bits = step_mask
        shift = 0
        while bits:
            if bits & 1:
                nxt |= reach << shift
            bits >>= 1
            shift += 1
        reach = nxt
        idx = 1 - n * lo
        if 0 <= idx <= n * width and (reach >> idx) & 1:
            g = math.gcd(g, n)
            if g == 1:
                break
    return g


def validate_step(raw: Iterable, name: str = "") -> StepSpec:
    """Build a :class:`StepSpec` from ``(offset, prob)`` pairs or ``{"offset", "prob"}`` dicts.

    Probabilities may be ints, Fractions or ``"num/den"`` strings and must
    be positive and sum to exactly 1.  Repeated offsets are merged.
    A nonzero mean is allowed here; asymptotic comparisons refuse it.
    """
    merged: dict[int, Fraction] = {}
    for item in raw:
        if isinstance(item, dict):
            try:
                s, p = item["offset"], item["prob"]
            except KeyError as exc:
                raise ValidationError(f"support entry missing key {exc}") from None
            extra = set(item) - {"offset", "prob"}
            if extra:
                raise ValidationError(f"unknown keys in support entry: {sorted(extra)}")
        else:
            s, p = item
        if isinstance(s, bool) or not isinstance(s, (int, np.integer)):
            raise ValidationError(f"offset must be an integer, got {s!r}")
        if isinstance(p, (float, np.floating)):
            raise ValidationError(f"probability {p!r} must be an exact rational, not a float")
        try:
            p = Fraction(p)
        except (TypeError, ValueError, ZeroDivisionError):
            raise ValidationError(f"probability {p!r} is not an exact rational") from None
        if p <= 0:
            raise ValidationError(f"probability for offset {s} must be positive, got {p}")
        merged[int(s)] = merged.get(int(s), Fraction(0)) + p
    if not merged:
        raise ValidationError("support is empty")
    total = sum(merged.values(), Fraction(0))
    if total != 1:
        raise ValidationError(f"probabilities sum to {total}, not 1")
    if set(merged) == {0}:
        raise ValidationError("degenerate walk: every step is 0")
    support = tuple(sorted(merged.items()))
    mean = sum((s * p for s, p in support), Fraction(0))
    variance = sum((s * s * p for s, p in support), Fraction(0)) - mean * mean
    offsets = [s for s, _ in support]
    span = reduce(math.gcd, (s - offsets[0] for s in offsets), 0)
    g = _one_period_gcd(offsets)
    return StepSpec(
        support=support,
        mean=mean,
        variance=variance,
        aperiodic=(g == 1),
        one_period_gcd=g,
        span=span,
        name=name,
    )


def _geom2_diff(bound: int) -> list[tuple[int, Fraction]]:
    # P(X = i) = 2^{-|i|} / 3 for the difference of two Geometric(1/2) parts
    if bound < 1:
        raise DomainError(f"geom2-diff truncation bound must be >= 1, got {bound}")
    w = {i: Fraction(1, 2 ** abs(i)) for i in range(-bound, bound + 1)}
    z = sum(w.values())
    return [(i, v / z) for i, v in w.items()]


def _dice_diff(faces: int) -> list[tuple[int, Fraction]]:
    if faces < 2:
        raise DomainError(f"need at least 2 faces, got {faces}")
    f2 = faces * faces
    return [(i, Fraction(faces - abs(i), f2)) for i in range(-(faces - 1), faces)]


NAMED_LAWS = ("pm1", "dice-diff", "dice-diff:F", "geom2-diff:B", "uniform:A:B")


def named_law(name: str) -> StepSpec:
    """Resolve a built-in law.

    ``pm1`` (fair +-1), ``dice-diff`` (difference of two fair six-sided
    dice; ``dice-diff:F`` for F faces), ``geom2-diff:B`` (difference of two
    Geometric(1/2) parts truncated at ``|i| <= B`` and renormalized),
    ``uniform:A:B`` (uniform on the integers ``A..B``).
    """
    head, _, rest = name.partition(":")
    try:
        if head == "pm1" and not rest:
            raw = [(-1, Fraction(1, 2)), (1, Fraction(1, 2))]
        elif head == "dice-diff":
            raw = _dice_diff(int(rest) if rest else 6)
        elif head == "geom2-diff":
            if not rest:
                raise DomainError("geom2-diff needs a truncation bound, e.g. geom2-diff:30")
            raw = _geom2_diff(int(rest))
        elif head == "uniform":
            a, b = (int(v) for v in rest.split(":"))
            if b < a:
                raise DomainError(f"empty range {a}..{b}")
            raw = [(i, Fraction(1, b - a + 1)) for i in range(a, b + 1)]
        else:
            raise DomainError(f"unknown law {name!r}; built-ins: {', '.join(NAMED_LAWS)}")
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed law name {name!r}") from None
    return validate_step(raw, name=name)


def law_from_json(doc: dict, name: str = "") -> StepSpec:
    if not isinstance(doc, dict) or set(doc) != {"support"}:
        raise ValidationError('law file must be an object with exactly one key, "support"')
    return validate_step(doc["support"], name=name)


def law_to_json(spec: StepSpec) -> dict:
    return {
        "support": [
            {"offset": s, "prob": f"{p.numerator}/{p.denominator}"} for s, p in spec.support
        ]
    }


def load_law(ref: str) -> StepSpec:
    """A built-in law name, or a path to a JSON law file."""
    path = Path(ref)
    if ref.endswith(".json") or path.is_file():
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read law file {ref}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"law file {ref} is not valid JSON: {exc}") from None
        return law_from_json(doc, name=path.stem)
    return named_law(ref)
