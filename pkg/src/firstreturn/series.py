"""Truncated formal power series with exact rational coefficients.

:class:`Series1` holds coefficients of ``z^0 .. z^order``; :class:`Series2`
holds a rectangular block ``x^n y^k`` for ``n <= order_x``, ``k <= order_y``.
Results of binary operations are truncated to the smaller order.
Coefficients are :class:`fractions.Fraction`, always in lowest terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DomainError, SingularityError

__all__ = [
    "Series1",
    "Series2",
    "mul",
    "div",
    "sqrt",
    "legendre",
    "thm1_series",
    "thm1_series_2d",
    "legendre_identity_check",
    "master_gf_check",
]

Number = Union[int, Fraction]


def _rational_sqrt(q: Fraction) -> Fraction:
    if q <= 0:
        raise SingularityError(f"square root needs a positive constant term, got {q}")
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn != q.numerator or rd * rd != q.denominator:
        raise SingularityError(f"constant term {q} is not the square of a rational")
    return Fraction(rn, rd)


@dataclass(frozen=True)
class Series1:
    """A univariate series truncated after ``z^order``."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable[Number], order: int | None = None):
        c = [Fraction(v) for v in coeffs]
        if order is None:
            order = len(c) - 1
        if order < 0:
            raise DomainError("series order must be non-negative")
        c = (c + [Fraction(0)] * (order + 1 - len(c)))[: order + 1]
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def z(cls, order: int) -> "Series1":
        return cls([0, 1], order)

    @classmethod
    def const(cls, c: Number, order: int) -> "Series1":
        return cls([c], order)

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)

    def truncate(self, order: int) -> "Series1":
        return Series1(self.coeffs, min(order, self.order))

    def _coerce(self, other) -> "Series1":
        if isinstance(other, Series1):
            return other
        return Series1.const(other, self.order)

    def __add__(self, other) -> "Series1":
        other = self._coerce(other)
        n = min(self.order, other.order)
        return Series1([self[i] + other[i] for i in range(n + 1)])

    __radd__ = __add__

    def __neg__(self) -> "Series1":
        return Series1([-c for c in self.coeffs])

    def __sub__(self, other) -> "Series1":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Series1":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Series1":
        if not isinstance(other, Series1):
            c = Fraction(other)
            return Series1([c * v for v in self.coeffs])
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Series1":
        if not isinstance(other, Series1):
            c = Fraction(other)
            return Series1([v / c for v in self.coeffs])
        return div(self, other)

    def __rtruediv__(self, other) -> "Series1":
        return div(self._coerce(other), self)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)


@dataclass(frozen=True)
class Series2:
    """A bivariate series truncated to ``n <= order_x``, ``k <= order_y``."""

    coeffs: tuple[tuple[Fraction, ...], ...]

    def __init__(self, coeffs: Sequence[Sequence[Number]], order_x: int | None = None,
                 order_y: int | None = None):
        rows = [[Fraction(v) for v in r] for r in coeffs]
        if order_x is None:
            order_x = len(rows) - 1
        if order_y is None:
            order_y = max((len(r) for r in rows), default=1) - 1
        if order_x < 0 or order_y < 0:
            raise DomainError("series orders must be non-negative")
        out = []
        for i in range(order_x + 1):
            r = rows[i] if i < len(rows) else []
            out.append(tuple((r + [Fraction(0)] * (order_y + 1 - len(r)))[: order_y + 1]))
        object.__setattr__(self, "coeffs", tuple(out))

    @property
    def order_x(self) -> int:
        return len(self.coeffs) - 1

    @property
    def order_y(self) -> int:
        return len(self.coeffs[0]) - 1

    @classmethod
    def from_terms(cls, terms: dict[tuple[int, int], Number], order_x: int,
                   order_y: int) -> "Series2":
        rows = [[0] * (order_y + 1) for _ in range(order_x + 1)]
        for (i, j), v in terms.items():
            if i <= order_x and j <= order_y:
                rows[i][j] += v
        return cls(rows, order_x, order_y)

    def __getitem__(self, nk: tuple[int, int]) -> Fraction:
        n, k = nk
        return self.coeffs[n][k]

    def _coerce(self, other) -> "Series2":
        if isinstance(other, Series2):
            return other
        return Series2.from_terms({(0, 0): other}, self.order_x, self.order_y)

    def _shape(self, other: "Series2") -> tuple[int, int]:
        return min(self.order_x, other.order_x), min(self.order_y, other.order_y)

    def __add__(self, other) -> "Series2":
        other = self._coerce(other)
        nx, ny = self._shape(other)
        return Series2([[self[i, j] + other[i, j] for j in range(ny + 1)] for i in range(nx + 1)])

    __radd__ = __add__

    def __neg__(self) -> "Series2":
        return Series2([[-v for v in r] for r in self.coeffs])

    def __sub__(self, other) -> "Series2":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Series2":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Series2":
        if not isinstance(other, Series2):
            c = Fraction(other)
            return Series2([[c * v for v in r] for r in self.coeffs])
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Series2":
        if not isinstance(other, Series2):
            c = Fraction(other)
            return Series2([[v / c for v in r] for r in self.coeffs])
        return div(self, other)

    def __rtruediv__(self, other) -> "Series2":
        return div(self._coerce(other), self)

    def at_y_equals_1(self) -> Series1:
        """Row sums; meaningful only when every row's y-degree is within ``order_y``."""
        return Series1([sum(r, Fraction(0)) for r in self.coeffs])

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for r in self.coeffs for v in r)


def _nonzero_terms2(s: Series2, nx: int, ny: int) -> list[tuple[int, int, Fraction]]:
    return [(i, j, s[i, j]) for i in range(nx + 1) for j in range(ny + 1) if s[i, j]]


def mul(a, b):
    """Product of two series of the same kind, truncated to the smaller order."""
    if isinstance(a, Series1) and isinstance(b, Series1):
        n = min(a.order, b.order)
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            ai = a[i]
            if not ai:
                continue
            for j in range(n + 1 - i):
                if b[j]:
                    out[i + j] += ai * b[j]
        return Series1(out)
    if isinstance(a, Series2) and isinstance(b, Series2):
        nx, ny = a._shape(b)
        out = [[Fraction(0)] * (ny + 1) for _ in range(nx + 1)]
        bt = _nonzero_terms2(b, nx, ny)
        for i, j, av in _nonzero_terms2(a, nx, ny):
            for p, q, bv in bt:
                if i + p <= nx and j + q <= ny:
                    out[i + p][j + q] += av * bv
        return Series2(out)
    raise TypeError("mul needs two Series1 or two Series2")


def div(a, b):
    """Quotient ``a / b``; ``b`` must have a nonzero constant term."""
    if isinstance(a, Series1) and isinstance(b, Series1):
        if b[0] == 0:
            raise SingularityError("division by a series with zero constant term")
        n = min(a.order, b.order)
        inv0 = 1 / b[0]
        bs = [(j, b[j]) for j in range(1, n + 1) if b[j]]
        c = [Fraction(0)] * (n + 1)
        for m in range(n + 1):
            acc = a[m]
            for j, bj in bs:
                if j > m:
                    break
                acc -= bj * c[m - j]
            c[m] = acc * inv0
        return Series1(c)
    if isinstance(a, Series2) and isinstance(b, Series2):
        if b[0, 0] == 0:
            raise SingularityError("division by a series with zero constant term")
        nx, ny = a._shape(b)
        inv0 = 1 / b[0, 0]
        bt = [t for t in _nonzero_terms2(b, nx, ny) if t[:2] != (0, 0)]
        c = [[Fraction(0)] * (ny + 1) for _ in range(nx + 1)]
        for n in range(nx + 1):
            for k in range(ny + 1):
                acc = a[n, k]
                for i, j, bv in bt:
                    if i <= n and j <= k:
                        cv = c[n - i][k - j]
                        if cv:
                            acc -= bv * cv
                c[n][k] = acc * inv0
        return Series2(c)
    raise TypeError("div needs two Series1 or two Series2")


def sqrt(a):
    """Square root with positive constant term.

    Coefficients come from the convolution recurrence for ``s * s = a``:
    ``2 s_0 s_n = a_n - sum_{0<j<n} s_j s_{n-j}``.
    """
    if isinstance(a, Series1):
        s0 = _rational_sqrt(a[0])
        n = a.order
        s = [Fraction(0)] * (n + 1)
        s[0] = s0
        half = 1 / (2 * s0)
        for m in range(1, n + 1):
            acc = a[m]
            for j in range(1, (m + 1) // 2):
                acc -= 2 * s[j] * s[m - j]
            if m % 2 == 0:
                acc -= s[m // 2] ** 2
            s[m] = acc * half
        return Series1(s)
    if isinstance(a, Series2):
        s0 = _rational_sqrt(a[0, 0])
        nx, ny = a.order_x, a.order_y
        s = [[Fraction(0)] * (ny + 1) for _ in range(nx + 1)]
        s[0][0] = s0
        half = 1 / (2 * s0)
        known: list[tuple[int, int, Fraction]] = []
        for n in range(nx + 1):
            for k in range(ny + 1):
                if n == 0 and k == 0:
                    continue
                acc = a[n, k]
                # every pair of non-constant indices summing to (n, k)
                for i, j, sv in known:
                    if i <= n and j <= k and (i, j) != (n, k):
                        other = s[n - i][k - j]
                        if other and (n - i, k - j) != (0, 0):
                            acc -= sv * other
                s[n][k] = acc * half
                if s[n][k]:
                    known.append((n, k, s[n][k]))
        return Series2(s)
    raise TypeError("sqrt needs a Series1 or Series2")


def legendre(n: int, x: Number) -> Fraction:
    """Legendre polynomial ``P_n(x)`` at a rational point, by the three-term recurrence."""
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    x = Fraction(x)
    p_prev, p = Fraction(1), x
    if n == 0:
        return p_prev
    for m in range(1, n):
        p_prev, p = p, ((2 * m + 1) * x * p - m * p_prev) / (m + 1)
    return p


def thm1_series(order: int) -> Series1:
    """Expansion of ``z / (sqrt(1 - 4z) + z)``; coefficient ``n`` is ``f(n)``."""
    if order < 1:
        raise DomainError(f"order must be >= 1, got {order}")
    z = Series1.z(order)
    return div(z, sqrt(1 - 4 * z) + z)


def _xy(order_x: int, order_y: int) -> tuple[Series2, Series2]:
    x = Series2.from_terms({(1, 0): 1}, order_x, order_y)
    y = Series2.from_terms({(0, 1): 1}, order_x, order_y)
    return x, y


def thm1_series_2d(order_x: int, order_y: int) -> Series2:
    """Expansion of the two-variable irreducible-pair generating function.

    ``xy (sqrt(1 + x^2 (1-y)^2 - 2x(1+y)) - xy) / (1 - 2x(1+y) + x^2 (1-2y))``;
    coefficient ``(n, k)`` is ``f(n, k)``.
    """
    if order_x < 1 or order_y < 1:
        raise DomainError("orders must be >= 1")
    x, y = _xy(order_x, order_y)
    one_minus_y = 1 - y
    radicand = 1 + x * x * one_minus_y * one_minus_y - 2 * x * (1 + y)
    numer = x * y * (sqrt(radicand) - x * y)
    denom = 1 - 2 * x * (1 + y) + x * x * (1 - 2 * y)
    return div(numer, denom)


def legendre_identity_check(n: int, y: Number) -> tuple[bool, Fraction, Fraction]:
    """Compare ``sum_k C(n,k)^2 y^k`` with ``(1-y)^n P_n((1+y)/(1-y))`` exactly.

    At ``y = 1`` the argument has a pole; the limiting identity
    ``sum_k C(n,k)^2 = C(2n, n)`` is checked instead.  Returns
    ``(equal, lhs, rhs)``.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    y = Fraction(y)
    lhs = sum((math.comb(n, k) ** 2 * y**k for k in range(n + 1)), Fraction(0))
    if y == 1:
        rhs = Fraction(math.comb(2 * n, n))
    else:
        rhs = (1 - y) ** n * legendre(n, (1 + y) / (1 - y))
    return lhs == rhs, lhs, rhs


def master_gf_check(order_x: int, order_y: int) -> tuple[bool, list[str]]:
    """Check ``F/(1-F) = xy / sqrt(1 - 2x(1+y) + x^2 (1-y)^2)`` coefficientwise.

    ``F`` is :func:`thm1_series_2d`.  Both sides must also have coefficient
    ``C(n-1, k-1)^2`` at ``(n, k)`` (zero when ``n`` or ``k`` is 0).
    Returns ``(ok, mismatches)``.
    """
    F = thm1_series_2d(order_x, order_y)
    lhs = div(F, 1 - F)
    x, y = _xy(order_x, order_y)
    radicand = 1 - 2 * x * (1 + y) + x * x * (1 - y) * (1 - y)
    rhs = div(x * y, sqrt(radicand))
    bad = []
    for n in range(order_x + 1):
        for k in range(order_y + 1):
            want = math.comb(n - 1, k - 1) ** 2 if n >= 1 and k >= 1 else 0
            if lhs[n, k] != rhs[n, k] or rhs[n, k] != want:
                bad.append(f"({n},{k}): F/(1-F)={lhs[n, k]} rhs={rhs[n, k]} binomial={want}")
    return not bad, bad
