"""Return, first-return, survival and taboo probabilities of lattice walks.

Two arithmetic modes share every routine:

``exact``
    Probabilities are carried as integers over ``D**n`` where ``D`` is the
    common denominator of the step law, and surfaced as ``Fraction``.
    Identities hold with ``==``.
``float``
    float64 convolution with the window trimmed at both ends while the
    dropped tail stays below ``tail_threshold`` per step; the dropped mass
    is reported, never discarded silently.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Literal

import numpy as np

from .errors import DomainError, ResourceError
from .laws import StepSpec

__all__ = [
    "LatticeSlice",
    "ReturnTable",
    "KilledTable",
    "RegularityReport",
    "step_power",
    "return_table",
    "killed_table",
    "charfun_return",
    "regularity_check",
    "TAIL_THRESHOLD",
    "EXACT_OP_BUDGET",
]

Mode = Literal["exact", "float"]

TAIL_THRESHOLD = 1e-18
# big-integer multiply-adds allowed for one exact convolution run
EXACT_OP_BUDGET = 3 * 10**8


def _check_mode(mode: str) -> None:
    if mode not in ("exact", "float"):
        raise DomainError(f"mode must be 'exact' or 'float', got {mode!r}")


@dataclass(frozen=True)
class LatticeSlice:
    """Law of ``S_n`` on the window ``[lo, hi]``.

    ``weights[i]`` is ``P(S_n = lo + i)`` times ``scale`` (``D**n`` in exact
    mode, 1 in float mode).
    """

    n: int
    lo: int
    weights: np.ndarray
    scale: int
    truncated_mass: float
    mode: str

    @property
    def hi(self) -> int:
        return self.lo + len(self.weights) - 1

    @property
    def probs(self):
        if self.mode == "exact":
            return tuple(Fraction(int(w), self.scale) for w in self.weights)
        return self.weights

    def prob(self, x: int):
        i = x - self.lo
        if not 0 <= i < len(self.weights):
            return Fraction(0) if self.mode == "exact" else 0.0
        if self.mode == "exact":
            return Fraction(int(self.weights[i]), self.scale)
        return float(self.weights[i])

    def window(self, radius: int):
        """``P(S_n = x)`` for ``x = -radius .. radius``, zeros outside the stored window."""
        if self.mode == "exact":
            out = np.zeros(2 * radius + 1, dtype=object)
            out[:] = Fraction(0)
        else:
            out = np.zeros(2 * radius + 1)
        a, b = max(self.lo, -radius), min(self.hi, radius)
        if a <= b:
            seg = self.weights[a - self.lo : b - self.lo + 1]
            if self.mode == "exact":
                seg = np.array([Fraction(int(w), self.scale) for w in seg], dtype=object)
            out[a + radius : b + radius + 1] = seg
        return out


def _convolve_exact(w: np.ndarray, kernel: list[int]) -> np.ndarray:
    out = np.zeros(len(w) + len(kernel) - 1, dtype=object)
    for i, k in enumerate(kernel):
        if k:
            out[i : i + len(w)] += k * w
    return out


def _trim(w: np.ndarray, lo: int, threshold: float) -> tuple[np.ndarray, int, float]:
    """Drop end cells while each end's cumulative mass stays within ``threshold``."""
    if threshold <= 0 or len(w) <= 1:
        return w, lo, 0.0
    # the window gains at most one kernel width per step, so scan the edges first
    edge = min(len(w), 256)
    left = np.cumsum(w[:edge])
    if left[-1] <= threshold:
        left = np.cumsum(w)
    i = int(np.searchsorted(left, threshold, side="right"))
    right = np.cumsum(w[: -edge - 1 : -1])
    if right[-1] <= threshold:
        right = np.cumsum(w[::-1])
    j = int(np.searchsorted(right, threshold, side="right"))
    i = min(i, len(w) - 1)
    j = min(j, len(w) - 1 - i)
    dropped = (left[i - 1] if i else 0.0) + (right[j - 1] if j else 0.0)
    return w[i : len(w) - j], lo + i, float(dropped)


def _check_exact_budget(spec: StepSpec, n_max: int, passes: int = 1) -> None:
    width = spec.hi - spec.lo
    ops = passes * len(spec.support) * (width * n_max * n_max // 2 + n_max)
    if ops > EXACT_OP_BUDGET:
        raise ResourceError(
            f"exact convolution to n={n_max} needs ~{ops:.2e} big-integer operations "
            f"(budget {EXACT_OP_BUDGET:.0e}); use mode='float'"
        )


def step_power(spec: StepSpec, n_max: int, mode: Mode = "exact",
               tail_threshold: float = TAIL_THRESHOLD) -> Iterator[LatticeSlice]:
    """Yield the law of ``S_n`` for ``n = 0 .. n_max`` by repeated convolution."""
    _check_mode(mode)
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    if mode == "exact":
        _check_exact_budget(spec, n_max)
        kernel = spec.integer_kernel()
        d = spec.denominator
        w = np.array([1], dtype=object)
        scale = 1
        yield LatticeSlice(0, 0, w, 1, 0.0, mode)
        for n in range(1, n_max + 1):
            w = _convolve_exact(w, kernel)
            scale *= d
            yield LatticeSlice(n, n * spec.lo, w, scale, 0.0, mode)
        return

    kernel = spec.float_kernel()
    w = np.ones(1)
    lo = 0
    dropped = 0.0
    yield LatticeSlice(0, 0, w, 1, 0.0, mode)
    for n in range(1, n_max + 1):
        w = np.convolve(w, kernel)
        lo += spec.lo
        w, lo, cut = _trim(w, lo, tail_threshold)
        dropped += cut
        yield LatticeSlice(n, lo, w, 1, dropped, mode)


@dataclass(frozen=True)
class ReturnTable:
    """``a'_n = P(S_n = 0)``, ``a_n = P(tau = n)`` and ``Q_n = P(tau > n)`` for ``n <= n_max``."""

    n_max: int
    a_prime: tuple | np.ndarray
    a: tuple | np.ndarray
    Q: tuple | np.ndarray
    mode: str
    truncated_mass: float = 0.0
    law: str = ""

    def verify(self, atol: float = 1e-12) -> list[str]:
        bad = []
        exact = self.mode == "exact"
        ap, a, Q = self.a_prime, self.a, self.Q
        if ap[0] != 1 or a[0] != 0 or Q[0] != 1:
            bad.append("boundary values a'_0=1, a_0=0, Q_0=1 violated")
        if exact:
            for n in range(1, self.n_max + 1):
                if ap[n] != sum(a[k] * ap[n - k] for k in range(1, n + 1)):
                    bad.append(f"renewal identity fails at n={n}")
                if not 0 <= a[n] <= ap[n]:
                    bad.append(f"0 <= a_n <= a'_n fails at n={n}")
                if Q[n] > Q[n - 1]:
                    bad.append(f"Q increases at n={n}")
        else:
            ap, a, Q = (np.asarray(v) for v in (ap, a, Q))
            n = self.n_max
            recon = np.array([np.dot(a[1 : m + 1], ap[m - 1 :: -1][:m]) for m in range(1, n + 1)])
            err = np.abs(recon - ap[1:])
            if err.size and err.max() > atol:
                bad.append(f"renewal identity residual {err.max():.3e} > {atol}")
            if (a < -atol).any() or (a > ap + atol).any():
                bad.append("0 <= a_n <= a'_n violated")
            if (np.diff(Q) > atol).any():
                bad.append("Q is not non-increasing")
        return bad


def return_table(spec: StepSpec, n_max: int, mode: Mode = "exact",
                 tail_threshold: float = TAIL_THRESHOLD) -> ReturnTable:
    """Return, first-return and survival sequences through ``n_max``.

    ``a'_n`` is read off :func:`step_power` at the origin; ``a_n`` follows
    from ``a_n = a'_n - sum_{k<n} a_k a'_{n-k}``; ``Q_n = 1 - sum_{k<=n} a_k``.
    """
    _check_mode(mode)
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    if mode == "exact":
        d = spec.denominator
        # integer numerators over D**n
        ap = [int(s.weights[-s.lo]) if s.lo <= 0 <= s.hi else 0
              for s in step_power(spec, n_max, "exact")]
        a = [0] * (n_max + 1)
        for n in range(1, n_max + 1):
            a[n] = ap[n] - sum(map(int.__mul__, a[1:n], ap[n - 1 : 0 : -1]))
        q = [1] * (n_max + 1)
        for n in range(1, n_max + 1):
            q[n] = d * q[n - 1] - a[n]
        scales = [d**n for n in range(n_max + 1)]
        return ReturnTable(
            n_max=n_max,
            a_prime=tuple(Fraction(v, s) for v, s in zip(ap, scales)),
            a=tuple(Fraction(v, s) for v, s in zip(a, scales)),
            Q=tuple(Fraction(v, s) for v, s in zip(q, scales)),
            mode=mode,
            law=spec.name,
        )

    ap = np.zeros(n_max + 1)
    dropped = 0.0
    for s in step_power(spec, n_max, "float", tail_threshold):
        ap[s.n] = s.prob(0)
        dropped = s.truncated_mass
    a = np.zeros(n_max + 1)
    rev = ap[::-1].copy()  # rev[n_max - m] == ap[m]
    for n in range(1, n_max + 1):
        # sum_{k=1}^{n-1} a_k ap_{n-k}; ap_{n-1} .. ap_1 is rev[n_max-n+1 : n_max]
        a[n] = ap[n] - np.dot(a[1:n], rev[n_max - n + 1 : n_max])
    Q = 1.0 - np.cumsum(a)
    return ReturnTable(n_max=n_max, a_prime=ap, a=a, Q=Q, mode=mode,
                       truncated_mass=dropped, law=spec.name)


@dataclass(frozen=True)
class KilledTable:
    """Taboo quantities on ``|x| <= radius``.

    ``q[n, x + radius] = q_n(0, x)``: reach ``x`` at time ``n`` without
    visiting 0 at times ``1 .. n-1``.  ``mass[n]`` is ``sum_x q_n(0, x)``
    over the whole lattice.  ``Qx[m, x + radius]`` is the probability,
    started from ``x``, of avoiding 0 at times ``1 .. m``.
    ``delta[n, x + radius] = |p_n(0, x) - p_{n+1}(0, x)|``.
    """

    n_max: int
    radius: int
    q: np.ndarray
    mass: np.ndarray
    Qx: np.ndarray
    delta: np.ndarray
    mode: str
    truncated_mass: float = 0.0
    law: str = ""

    def _idx(self, n: int, x: int) -> tuple[int, int]:
        if not 0 <= n <= self.n_max or abs(x) > self.radius:
            raise DomainError(f"(n={n}, x={x}) outside table (n_max={self.n_max}, radius={self.radius})")
        return n, x + self.radius

    def q_at(self, n: int, x: int):
        return self.q[self._idx(n, x)]

    def Qx_at(self, m: int, x: int):
        return self.Qx[self._idx(m, x)]

    def delta_at(self, n: int, x: int):
        return self.delta[self._idx(n, x)]

    def verify(self, returns: ReturnTable | None = None, atol: float = 1e-12) -> list[str]:
        bad = []
        r = self.radius
        exact = self.mode == "exact"

        def differ(u, v):
            return u != v if exact else abs(float(u) - float(v)) > atol

        if returns is not None:
            upto = min(self.n_max, returns.n_max)
            for n in range(1, upto + 1):
                if differ(self.q[n, r], returns.a[n]):
                    bad.append(f"q_{n}(0,0) != a_{n}")
                if differ(self.mass[n], returns.Q[n - 1]):
                    bad.append(f"sum_x q_{n}(0,x) != Q_{n - 1}")
            for m in range(upto + 1):
                if differ(self.Qx[m, r], returns.Q[m]):
                    bad.append(f"Q_{m}(0) != Q_{m}")
        for m in range(1, self.n_max + 1):
            step = self.Qx[m] - self.Qx[m - 1]
            if exact:
                if any(v > 0 for v in step):
                    bad.append(f"Q_m(x) increases at m={m}")
            elif (np.asarray(step, dtype=float) > atol).any():
                bad.append(f"Q_m(x) increases at m={m}")
        return bad


def _survival_from(spec: StepSpec, n_max: int, radius: int, mode: str) -> np.ndarray:
    """``Q_m(x)`` for ``m <= n_max``, ``|x| <= radius``, by backward recursion.

    ``Q_m(x) = sum_s P(X=s) [x+s != 0] Q_{m-1}(x+s)``.  Points beyond the
    working window get ``Q = 1``; the window is wide enough that 0 is out
    of reach from there (exact), or only reachable with Gaussian-tail
    probability below 1e-30 (float).
    """
    reach = n_max * max(abs(spec.lo), abs(spec.hi))
    if mode == "float":
        reach = min(reach, math.ceil(12 * math.sqrt(float(spec.variance) * n_max)) + (spec.hi - spec.lo))
    big = radius + reach
    width = 2 * big + 1
    pad_left, pad_right = max(0, -spec.lo), max(0, spec.hi)
    # ext index e <-> position e - pad_left - big
    out_shape = (n_max + 1, 2 * radius + 1)
    centre = slice(big - radius, big + radius + 1)
    if mode == "exact":
        d = spec.denominator
        ik = spec.integer_kernel()
        kernel = [(s, ik[s - spec.lo]) for s in spec.offsets]
        cur = np.empty(width, dtype=object)
        cur[:] = 1
        scale = 1
        Qx = np.empty(out_shape, dtype=object)
        Qx[0] = [Fraction(1)] * (2 * radius + 1)
        for m in range(1, n_max + 1):
            ext = np.empty(width + pad_left + pad_right, dtype=object)
            ext[:] = scale
            ext[pad_left : pad_left + width] = cur
            ext[pad_left + big] = 0
            nxt = np.zeros(width, dtype=object)
            for s, w in kernel:
                nxt += w * ext[pad_left + s : pad_left + s + width]
            cur = nxt
            scale *= d
            Qx[m] = [Fraction(int(v), scale) for v in cur[centre]]
        return Qx

    kernel = [(s, float(p)) for s, p in spec.support]
    cur = np.ones(width)
    Qx = np.empty(out_shape)
    Qx[0] = 1.0
    ext = np.ones(width + pad_left + pad_right)
    for m in range(1, n_max + 1):
        ext[pad_left : pad_left + width] = cur
        ext[pad_left + big] = 0.0
        nxt = np.zeros(width)
        for s, p in kernel:
            nxt += p * ext[pad_left + s : pad_left + s + width]
        cur = nxt
        Qx[m] = cur[centre]
    return Qx


def killed_table(spec: StepSpec, n_max: int, window_radius: int = 50, mode: Mode = "exact",
                 tail_threshold: float = TAIL_THRESHOLD) -> KilledTable:
    """Taboo DP: convolve, record, then zero the origin before the next step.

    The endpoint may be 0 (so ``q_n(0,0) = a_n``); only intermediate visits
    are killed.  ``delta`` comes from the unkilled :func:`step_power`.
    """
    _check_mode(mode)
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    if window_radius < 0:
        raise DomainError(f"window_radius must be >= 0, got {window_radius}")
    r = window_radius
    if mode == "exact":
        _check_exact_budget(spec, n_max + 1, passes=3)
    dtype = object if mode == "exact" else float

    def fill_zero(shape):
        arr = np.zeros(shape, dtype=dtype)
        if mode == "exact":
            arr[...] = Fraction(0)
        return arr

    q = fill_zero((n_max + 1, 2 * r + 1))
    mass = fill_zero(n_max + 1)
    q[0, r] = Fraction(1) if mode == "exact" else 1.0
    mass[0] = q[0, r]
    dropped = 0.0
    if mode == "exact":
        kernel = spec.integer_kernel()
        d = spec.denominator
        w = np.array([1], dtype=object)
        lo, scale = 0, 1
        for n in range(1, n_max + 1):
            w = _convolve_exact(w, kernel)
            lo += spec.lo
            scale *= d
            a, b = max(lo, -r), min(lo + len(w) - 1, r)
            for x in range(a, b + 1):
                q[n, x + r] = Fraction(int(w[x - lo]), scale)
            mass[n] = Fraction(int(sum(w)), scale)
            if lo <= 0 <= lo + len(w) - 1:
                w[-lo] = 0
    else:
        kernel = spec.float_kernel()
        w = np.ones(1)
        lo = 0
        for n in range(1, n_max + 1):
            w = np.convolve(w, kernel)
            lo += spec.lo
            w, lo, cut = _trim(w, lo, tail_threshold)
            dropped += cut
            a, b = max(lo, -r), min(lo + len(w) - 1, r)
            if a <= b:
                q[n, a + r : b + r + 1] = w[a - lo : b - lo + 1]
            mass[n] = w.sum()
            if lo <= 0 <= lo + len(w) - 1:
                w[-lo] = 0.0

    p_prev = None
    delta = fill_zero((n_max + 1, 2 * r + 1))
    for s in step_power(spec, n_max + 1, mode, tail_threshold):
        p = s.window(r)
        if p_prev is not None:
            delta[s.n - 1] = abs(p_prev - p) if mode == "float" else np.array(
                [abs(u - v) for u, v in zip(p_prev, p)], dtype=object)
        p_prev = p

    Qx = _survival_from(spec, n_max, r, mode)
    return KilledTable(n_max=n_max, radius=r, q=q, mass=mass, Qx=Qx, delta=delta,
                       mode=mode, truncated_mass=dropped, law=spec.name)


def charfun_return(spec: StepSpec, n: int, x: int = 0, quadrature_points: int | None = None) -> float:
    """``P(S_n = x)`` from the inversion integral of the characteristic function.

    ``(1/2 pi) int_{-pi}^{pi} phi(theta)^n exp(-i theta x) d theta`` by the
    periodic trapezoid rule on ``M`` nodes.  The rule sums ``P(S_n = y)``
    over ``y = x mod M``, so it is exact up to rounding once ``M`` exceeds
    the distance from ``x`` to either end of the range of ``S_n``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    need = max(n * (spec.hi - spec.lo), abs(x - n * spec.lo), abs(x - n * spec.hi)) + 1
    m = need if quadrature_points is None else int(quadrature_points)
    if m < 1:
        raise DomainError("quadrature_points must be positive")
    if m < need:
        warnings.warn(
            f"{m} quadrature points alias the range of S_{n}; need >= {need} for full accuracy",
            RuntimeWarning,
            stacklevel=2,
        )
    theta = -np.pi + 2 * np.pi * np.arange(m) / m
    vals = spec.charfun(theta) ** n * np.exp(-1j * theta * x)
    return float(vals.mean().real)


@dataclass(frozen=True)
class RegularityReport:
    """Scaled increments and taboo bounds.

    ``first_return[i]`` is ``n^{5/2} |a_{n+1} - a_n|`` at ``n = n[i]``.  The
    2-D arrays have rows ``n`` and columns ``x = -radius .. radius``:
    ``small_p = n^{3/2} delta_n(x)``, ``large_p = (1+x^2) sqrt(n) delta_n(x)``,
    ``small_q = n^{3/2} q_n(0,x) / sqrt(1+|x|)``, ``large_q = n q_n(0,x)``.
    """

    n: np.ndarray
    first_return: np.ndarray
    small_p: np.ndarray
    large_p: np.ndarray
    small_q: np.ndarray
    large_q: np.ndarray
    radius: int

    QUANTITIES = ("first_return", "small_p", "large_p", "small_q", "large_q")

    def window_sup(self, quantity: str, lo: int, hi: int | None = None) -> float:
        """Supremum over ``lo <= n <= hi`` (default ``hi = 2 lo``) and all stored ``x``."""
        if quantity not in self.QUANTITIES:
            raise DomainError(f"unknown quantity {quantity!r}")
        hi = 2 * lo if hi is None else hi
        sel = (self.n >= lo) & (self.n <= hi)
        if not sel.any():
            raise DomainError(f"no rows with {lo} <= n <= {hi}")
        return float(np.max(getattr(self, quantity)[sel]))


def regularity_check(spec: StepSpec, n_max: int, radius: int = 50,
                     returns: ReturnTable | None = None,
                     killed: KilledTable | None = None) -> RegularityReport:
    """Scaled sequences whose boundedness expresses the regularity estimates.

    Computed in float mode for ``1 <= n <= n_max - 1``.
    """
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    if returns is None:
        returns = return_table(spec, n_max, "float")
    if killed is None:
        killed = killed_table(spec, n_max, radius, "float")
    radius = killed.radius
    n = np.arange(1, n_max, dtype=float)
    a = np.asarray(returns.a, dtype=float)
    first = n**2.5 * np.abs(a[2 : n_max + 1] - a[1:n_max])
    x = np.arange(-radius, radius + 1, dtype=float)
    delta = np.asarray(killed.delta, dtype=float)[1:n_max]
    q = np.asarray(killed.q, dtype=float)[1:n_max]
    nn = n[:, None]
    return RegularityReport(
        n=n.astype(int),
        first_return=first,
        small_p=nn**1.5 * delta,
        large_p=(1 + x**2) * np.sqrt(nn) * delta,
        small_q=nn**1.5 * q / np.sqrt(1 + np.abs(x)),
        large_q=nn * q,
        radius=radius,
    )
