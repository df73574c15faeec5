"""Exact counts of irreducible pairs of compositions.

A pair of compositions ``n = b_1 + ... + b_k = b'_1 + ... + b'_k`` is
irreducible when no proper prefix sums agree at the same index ``j < k``.
``f(n, k)`` counts irreducible ordered pairs with ``k`` parts and ``f(n)``
sums over ``k``.  Both are recovered exactly from the binomial-square
totals by inverting the renewal (first-agreement) decomposition.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DomainError, ResourceError

__all__ = [
    "CountTable",
    "total_pairs2",
    "total_pairs1",
    "irreducible_counts2",
    "irreducible_counts1",
    "brute_force_irreducible",
    "irreducible_probability",
    "BRUTE_FORCE_MAX_N",
]

BRUTE_FORCE_MAX_N = 14


def total_pairs2(n: int, k: int) -> int:
    """Number of ordered pairs of compositions of ``n`` into ``k`` parts, C(n-1, k-1)**2."""
    if n < 1 or k < 1 or k > n:
        raise DomainError(f"total_pairs2 needs 1 <= k <= n, got n={n}, k={k}")
    return math.comb(n - 1, k - 1) ** 2


def total_pairs1(n: int) -> int:
    """Number of ordered pairs of compositions of ``n`` with equal part counts.

    Equals ``sum_k C(n-1, k-1)**2 = C(2n-2, n-1)``.
    """
    if n < 1:
        raise DomainError(f"total_pairs1 needs n >= 1, got n={n}")
    return math.comb(2 * n - 2, n - 1)


@dataclass(frozen=True)
class CountTable:
    """Exact table of irreducible pair counts.

    ``f1``, ``totals1`` and ``p_exact`` are indexed by ``n`` with a dummy
    zero at index 0.  ``f2`` and ``totals2`` are keyed by ``(n, k)``.  A
    table built by :func:`irreducible_counts1` has an empty ``f2`` and
    ``k_max`` of ``None``; a two-variable table only carries ``f1`` when
    it covers every ``k <= n``.
    """

    n_max: int
    k_max: int | None
    f2: Mapping[tuple[int, int], int] = field(default_factory=dict)
    f1: tuple[int, ...] = ()
    totals2: Mapping[tuple[int, int], int] = field(default_factory=dict)
    totals1: tuple[int, ...] = ()
    p_exact: tuple[Fraction, ...] = ()

    def f(self, n: int) -> int:
        if not self.f1 or not 1 <= n < len(self.f1):
            raise DomainError(f"f({n}) not in table (n_max={self.n_max})")
        return self.f1[n]

    def p(self, n: int) -> Fraction:
        if not self.p_exact or not 1 <= n < len(self.p_exact):
            raise DomainError(f"p({n}) not in table (n_max={self.n_max})")
        return self.p_exact[n]

    def row(self, n: int) -> dict[int, int]:
        """The ``k -> f(n, k)`` row for one ``n`` of a two-variable table."""
        if not self.f2 or not 1 <= n <= self.n_max:
            raise DomainError(f"row {n} not in two-variable table")
        return {k: v for (m, k), v in self.f2.items() if m == n}

    def verify(self) -> list[str]:
        """Check the table's invariants; returns a list of violations (empty if clean)."""
        bad = []
        for (n, k), v in self.f2.items():
            t = self.totals2[(n, k)]
            if t != math.comb(n - 1, k - 1) ** 2:
                bad.append(f"totals2({n},{k}) is not C(n-1,k-1)^2")
            if not 0 <= v <= t:
                bad.append(f"f2({n},{k})={v} outside [0, {t}]")
            if k == 1 and v != 1:
                bad.append(f"f2({n},1)={v} != 1")
            if k == n and n >= 2 and v != 0:
                bad.append(f"f2({n},{n})={v} != 0")
        for n in range(1, len(self.f1)):
            if self.totals1[n] != math.comb(2 * n - 2, n - 1):
                bad.append(f"totals1({n}) is not C(2n-2,n-1)")
            if self.p_exact[n] != Fraction(self.f1[n], self.totals1[n]):
                bad.append(f"p({n}) != f({n})/total({n})")
            if self.f2 and self.k_max is not None and self.k_max >= n:
                if sum(self.f2[(n, k)] for k in range(1, n + 1)) != self.f1[n]:
                    bad.append(f"sum_k f2({n},k) != f1({n})")
        return bad


def _check_sizes(n_max: int, k_max: int | None = None) -> None:
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    if k_max is not None and not 1 <= k_max <= n_max:
        raise DomainError(f"k_max must satisfy 1 <= k_max <= n_max, got {k_max}")


def irreducible_counts2(n_max: int, k_max: int | None = None) -> CountTable:
    """Two-variable table ``f(n, k)`` for ``n <= n_max``, ``k <= k_max``.

    Removes from ``T(n, k)`` every pair whose first agreement happens at a
    proper prefix ``(m, j)``: ``T(n,k) = f(n,k) + sum f(m,j) T(n-m, k-j)``.
    """
    if k_max is None:
        k_max = n_max
    _check_sizes(n_max, k_max)
    totals: dict[tuple[int, int], int] = {}
    f: dict[tuple[int, int], int] = {}
    for n in range(1, n_max + 1):
        for k in range(1, min(n, k_max) + 1):
            totals[(n, k)] = math.comb(n - 1, k - 1) ** 2
    for n in range(1, n_max + 1):
        for k in range(1, min(n, k_max) + 1):
            acc = totals[(n, k)]
            for m in range(1, n):
                # the tail (n-m, k-j) must itself have at least as many units as parts
                for j in range(max(1, k - (n - m)), min(k - 1, m) + 1):
                    fm = f[(m, j)]
                    if fm:
                        acc -= fm * totals[(n - m, k - j)]
            f[(n, k)] = acc

    f1: tuple[int, ...] = ()
    totals1: tuple[int, ...] = ()
    p: tuple[Fraction, ...] = ()
    if k_max == n_max:
        f1 = (0,) + tuple(sum(f[(n, k)] for k in range(1, n + 1)) for n in range(1, n_max + 1))
        totals1 = (0,) + tuple(math.comb(2 * n - 2, n - 1) for n in range(1, n_max + 1))
        p = (Fraction(0),) + tuple(Fraction(f1[n], totals1[n]) for n in range(1, n_max + 1))
    return CountTable(
        n_max=n_max,
        k_max=k_max,
        f2=MappingProxyType(f),
        f1=f1,
        totals2=MappingProxyType(totals),
        totals1=totals1,
        p_exact=p,
    )


def irreducible_counts1(n_max: int) -> CountTable:
    """One-variable table ``f(n)`` for ``n <= n_max``.

    Setting ``y = 1`` in the two-variable renewal gives
    ``C(2n-2, n-1) = f(n) + sum_{m<n} f(m) C(2(n-m)-2, n-m-1)``.
    Quadratic in ``n`` big-integer multiplications; ``n_max = 2048`` takes
    a few seconds.
    """
    _check_sizes(n_max)
    totals = [0] + [math.comb(2 * n - 2, n - 1) for n in range(1, n_max + 1)]
    f = [0] * (n_max + 1)
    for n in range(1, n_max + 1):
        # f[1:n] against totals[n-1], ..., totals[1]
        f[n] = totals[n] - sum(map(int.__mul__, f[1:n], totals[n - 1:0:-1]))
    p = [Fraction(0)] + [Fraction(f[n], totals[n]) for n in range(1, n_max + 1)]
    return CountTable(
        n_max=n_max,
        k_max=None,
        f1=tuple(f),
        totals1=tuple(totals),
        p_exact=tuple(p),
    )


def _cut_sets(n: int, k: int) -> np.ndarray:
    """All compositions of ``n`` into ``k`` parts, as rows of sorted cut points.

    Row ``(c_1, ..., c_{k-1})`` is the composition whose j-th prefix sum is
    ``c_j``.  Shape ``(C(n-1, k-1), k-1)``.
    """
    combos = list(itertools.combinations(range(1, n), k - 1))
    return np.array(combos, dtype=np.int64).reshape(len(combos), k - 1)


def brute_force_irreducible(n: int) -> tuple[int, dict[int, int]]:
    """Count irreducible pairs of compositions of ``n`` by direct enumeration.

    Every pair is tested against the definition: the j-th prefix sums must
    differ for each ``j = 1, ..., k-1``.  Returns ``(f(n), {k: f(n, k)})``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n > BRUTE_FORCE_MAX_N:
        raise ResourceError(
            f"brute force limited to n <= {BRUTE_FORCE_MAX_N} "
            f"({math.comb(2 * n - 2, n - 1)} pairs requested)"
        )
    row = {}
    for k in range(1, n + 1):
        cuts = _cut_sets(n, k)
        if k == 1:
            row[k] = 1
            continue
        count = 0
        for c in cuts:
            # prefix sums differing at every proper index j
            count += int(np.count_nonzero((cuts != c).all(axis=1)))
        row[k] = count
    return sum(row.values()), row


def irreducible_probability(table: CountTable, n: int) -> Fraction:
    """Exact probability that a uniform equal-part-count pair of compositions of ``n`` is irreducible."""
    return table.p(n)
