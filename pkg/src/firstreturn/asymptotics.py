"""Scaled sequences, one-term extrapolation, and comparison with limit constants.

Limits for a mean-zero walk with variance ``V`` and lattice span 1::

    n^{3/2} a_n   -> sqrt(V / (2 pi))     first return
    n^{1/2} a'_n  -> 1 / sqrt(2 pi V)     return
    n^{1/2} Q_n   -> sqrt(2 V / pi)       survival

and for irreducible composition pairs ``n p_n -> 8`` and
``n^{3/2} f(n) / 4^n -> 2 / sqrt(pi)``.

The tolerances used by the acceptance suite are engineering choices:
no convergence rates are known for these limits.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

from .compositions import irreducible_counts1
from .errors import DomainError, HypothesisError
from .laws import StepSpec
from .walk import return_table

__all__ = [
    "AsymptoticReport",
    "Extrapolation",
    "QUANTITIES",
    "scaled_sequence",
    "extrapolate",
    "target_constant",
    "check_hypotheses",
    "report",
    "geometric_points",
]

QUANTITIES = ("first-return", "return-prob", "survival", "irreducible-prob", "count-f")
WALK_QUANTITIES = QUANTITIES[:3]

_EXPONENT = {
    "first-return": 1.5,
    "return-prob": 0.5,
    "survival": 0.5,
    "irreducible-prob": 1.0,
    "count-f": 1.5,
}


def scaled_sequence(values: Sequence, alpha: float, n_range: Sequence[int]) -> list[tuple[int, float]]:
    """``[(n, n**alpha * values[n]) for n in n_range]``; exact values are scaled before rounding."""
    out = []
    for n in n_range:
        if n < 1 or n >= len(values):
            raise DomainError(f"n={n} outside values (length {len(values)})")
        v = values[n]
        if isinstance(v, (Fraction, int)) and float(alpha).is_integer():
            out.append((n, float(v * n ** int(alpha))))
        else:
            out.append((n, n**alpha * float(v)))
    return out


@dataclass(frozen=True)
class Extrapolation:
    raw: float
    limit: float
    n_small: int
    n_large: int


def extrapolate(scaled: Sequence[tuple[int, float]], correction: float = 0.5) -> Extrapolation:
    """Remove a ``c n^{-beta}`` correction using the two largest ``n``.

    With ``s(n) = L + c n^{-1/2}`` and ``r = n_2 / n_1``,
    ``L = (sqrt(r) s(n_2) - s(n_1)) / (sqrt(r) - 1)``; for ``r = 2`` this
    is ``(sqrt(2) s(2n) - s(n)) / (sqrt(2) - 1)``.  ``correction`` sets
    ``beta`` (default 1/2); the composition sequences converge like
    ``1/n``, for which ``correction=1`` is the better model.
    """
    if correction <= 0:
        raise DomainError("correction exponent must be positive")
    pts = sorted((int(n), float(v)) for n, v in scaled if n > 0 and math.isfinite(v))
    if len(pts) < 2:
        raise DomainError("extrapolation needs at least two usable points")
    (n1, s1), (n2, s2) = pts[-2], pts[-1]
    if n1 == n2:
        raise DomainError("extrapolation needs two distinct n")
    rr = (n2 / n1) ** correction
    return Extrapolation(raw=s2, limit=(rr * s2 - s1) / (rr - 1), n_small=n1, n_large=n2)


def target_constant(quantity: str, variance=None) -> tuple[float, str]:
    """Limit constant and a human-readable formula for it."""
    if quantity in WALK_QUANTITIES:
        if variance is None:
            raise DomainError(f"{quantity} needs the step variance")
        v = float(variance)
        if quantity == "first-return":
            return math.sqrt(v / (2 * math.pi)), f"sqrt(V/(2 pi)), V={variance}"
        if quantity == "return-prob":
            return 1 / math.sqrt(2 * math.pi * v), f"1/sqrt(2 pi V), V={variance}"
        return math.sqrt(2 * v / math.pi), f"sqrt(2V/pi), V={variance}"
    if quantity == "irreducible-prob":
        return 8.0, "8"
    if quantity == "count-f":
        return 2 / math.sqrt(math.pi), "2/sqrt(pi)"
    raise DomainError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")


def check_hypotheses(spec: StepSpec) -> None:
    """Refuse laws outside mean zero, finite positive variance, lattice span 1."""
    why = []
    if spec.mean != 0:
        why.append(f"mean is {spec.mean}, not zero")
    if spec.variance <= 0:
        why.append("variance is not positive")
    if spec.span != 1:
        why.append(
            f"the walk is periodic: steps share the lattice span {spec.span}, so returns "
            f"to 0 only occur along a residue class of n"
        )
    if why:
        raise HypothesisError(
            "asymptotic comparison requires steps with mean zero, finite variance V, "
            "and no periodicity; " + "; ".join(why)
        )


def geometric_points(n_max: int, count: int = 8) -> list[int]:
    """``n_max, n_max/2, n_max/4, ...`` (at most ``count`` points, all >= 1), ascending."""
    pts = []
    n = n_max
    while n >= 1 and len(pts) < count:
        pts.append(n)
        n //= 2
    return sorted(pts)


@dataclass(frozen=True)
class AsymptoticReport:
    quantity: str
    exponent: float
    scaled_values: tuple[tuple[int, float], ...]
    target_constant: float
    target_formula: str
    raw_last: float
    extrapolated_limit: float
    rel_err: float
    law: str = ""
    mode: str = ""
    correction: float = 0.5

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scaled_values"] = [list(p) for p in self.scaled_values]
        return d


def report(quantity: str, law: StepSpec | None = None, n_max: int = 100_000,
           mode: str = "float", table=None, correction: float = 0.5) -> AsymptoticReport:
    """Scale, extrapolate and compare one quantity with its limit constant.

    Walk quantities require ``law`` and refuse it when
    :func:`check_hypotheses` fails.  ``table`` may pass a precomputed
    :class:`~firstreturn.walk.ReturnTable` or
    :class:`~firstreturn.compositions.CountTable`.  ``correction`` is
    the exponent handed to :func:`extrapolate`.
    """
    if quantity not in QUANTITIES:
        raise DomainError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    alpha = _EXPONENT[quantity]
    pts = geometric_points(n_max)
    if quantity in WALK_QUANTITIES:
        if law is None:
            raise DomainError(f"{quantity} needs a step law")
        check_hypotheses(law)
        rt = table if table is not None else return_table(law, n_max, mode)
        values = {"first-return": rt.a, "return-prob": rt.a_prime, "survival": rt.Q}[quantity]
        target, formula = target_constant(quantity, law.variance)
        scaled = scaled_sequence(values, alpha, pts)
        name, used_mode = law.name, rt.mode
    else:
        ct = table if table is not None else irreducible_counts1(n_max)
        target, formula = target_constant(quantity)
        if quantity == "irreducible-prob":
            scaled = scaled_sequence(ct.p_exact, alpha, pts)
        else:
            # n^{3/2} f(n) / 4^n, with the power of 4 divided out exactly
            scaled = [(n, n**1.5 * float(Fraction(ct.f1[n], 4**n))) for n in pts]
        name, used_mode = "", "exact"
    ex = extrapolate(scaled, correction)
    return AsymptoticReport(
        quantity=quantity,
        exponent=alpha,
        scaled_values=tuple(scaled),
        target_constant=target,
        target_formula=formula,
        raw_last=ex.raw,
        extrapolated_limit=ex.limit,
        rel_err=abs(ex.limit - target) / target,
        law=name,
        mode=used_mode,
        correction=correction,
    )
