"""Seeded simulation of first-return times and random composition pairs.

Trials are cut into fixed-size blocks.  Block ``b`` draws from its own
Philox stream keyed by ``SeedSequence(seed, spawn_key=(b,))``, so a result
depends only on ``(seed, trials, horizon, block_size, first_block)`` and
not on how many workers ran the blocks.  Histograms from disjoint block
ranges add up to the histogram of the combined range.
"""
from __future__ import annotations

import bisect
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import stats

from .errors import DomainError
from .laws import StepSpec, named_law

__all__ = [
    "SimResult",
    "PairSample",
    "FiniteSampler",
    "GeometricDiffSampler",
    "simulate_game",
    "simulate_walk",
    "sample_pair",
    "sample_pairs",
    "poissonized_composition",
    "poissonized_batch",
    "chi_square_vs_exact",
    "two_sample_chi_square",
    "block_rng",
    "effective_workers",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 1 << 18
THREADS_ENV = "FIRST_RETURN_THREADS"


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent Philox stream for one block of trials."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def effective_workers(workers: int) -> int:
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return workers


@dataclass(frozen=True)
class SimResult:
    """First-return histogram: ``tau_histogram[n]`` trials returned first at time ``n``."""

    trials: int
    tau_histogram: np.ndarray
    censored: int
    horizon: int
    seed: int
    workers: int
    block_size: int = BLOCK_SIZE
    first_block: int = 0

    def freq(self) -> np.ndarray:
        return self.tau_histogram / self.trials

    def std_err(self) -> np.ndarray:
        p = self.freq()
        return np.sqrt(p * (1 - p) / self.trials)

    def tail(self, n: int) -> int:
        """Trials with ``tau > n`` (censored ones included)."""
        return int(self.tau_histogram[n + 1 :].sum()) + self.censored

    def merge(self, other: "SimResult") -> "SimResult":
        if self.horizon != other.horizon or self.seed != other.seed:
            raise DomainError("can only merge results with equal seed and horizon")
        return SimResult(
            trials=self.trials + other.trials,
            tau_histogram=self.tau_histogram + other.tau_histogram,
            censored=self.censored + other.censored,
            horizon=self.horizon,
            seed=self.seed,
            workers=max(self.workers, other.workers),
            block_size=self.block_size,
            first_block=min(self.first_block, other.first_block),
        )


@dataclass(frozen=True)
class FiniteSampler:
    """Exact sampler for a finite-support law: integer inversion over ``D``."""

    offsets: np.ndarray
    cum: np.ndarray
    denominator: int

    @classmethod
    def from_spec(cls, spec: StepSpec) -> "FiniteSampler":
        d = spec.denominator
        if d >= 2**63:
            raise DomainError(f"law denominator {d} too large for the integer sampler")
        w = [p.numerator * (d // p.denominator) for p in spec.probs]
        return cls(np.array(spec.offsets, dtype=np.int64), np.cumsum(w, dtype=np.int64), d)

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.integers(0, self.denominator, size=size, dtype=np.int64)
        return self.offsets[np.searchsorted(self.cum, u, side="right")]


def _geometric_half(rng: np.random.Generator, size) -> np.ndarray:
    # inversion of P(Y >= i) = 2^{-(i-1)}: Y = 1 + floor(-log2(1 - U)), 1 - U in (0, 1]
    u = rng.random(size)
    return 1 + np.floor(-np.log2(1.0 - u)).astype(np.int64)


@dataclass(frozen=True)
class GeometricDiffSampler:
    """``X = Y - Y'`` for independent ``P(Y = i) = 2^{-i}``, untruncated."""

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return _geometric_half(rng, size) - _geometric_half(rng, size)


Sampler = Union[FiniteSampler, GeometricDiffSampler]


def _first_return_block(draw, rng: np.random.Generator, trials: int, horizon: int):
    """Run ``trials`` walks until the first return or ``horizon``; ``draw(m)`` gives m steps."""
    hist = np.zeros(horizon + 1, dtype=np.int64)
    pos = np.zeros(trials, dtype=np.int64)
    for t in range(1, horizon + 1):
        if pos.size == 0:
            break
        pos += draw(rng, pos.size)
        hit = pos == 0
        nhit = int(np.count_nonzero(hit))
        if nhit:
            hist[t] = nhit
            pos = pos[~hit]
    return hist, int(pos.size)


def _game_block(faces: int, rng: np.random.Generator, trials: int, horizon: int):
    """Two tokens advance by independent die rolls until they land on the same square."""
    hist = np.zeros(horizon + 1, dtype=np.int64)
    p1 = np.zeros(trials, dtype=np.int64)
    p2 = np.zeros(trials, dtype=np.int64)
    for t in range(1, horizon + 1):
        if p1.size == 0:
            break
        p1 += rng.integers(1, faces + 1, size=p1.size)
        p2 += rng.integers(1, faces + 1, size=p2.size)
        hit = p1 == p2
        nhit = int(np.count_nonzero(hit))
        if nhit:
            hist[t] = nhit
            keep = ~hit
            p1, p2 = p1[keep], p2[keep]
    return hist, int(p1.size)


def _run_block(job):
    kind, param, seed, block, trials, horizon = job
    rng = block_rng(seed, block)
    if kind == "game":
        return _game_block(param, rng, trials, horizon)
    return _first_return_block(param, rng, trials, horizon)


def _run(kind, param, trials, horizon, seed, workers, block_size, first_block) -> SimResult:
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    if block_size < 1:
        raise DomainError(f"block_size must be >= 1, got {block_size}")
    workers = effective_workers(workers)
    jobs = []
    b = first_block
    left = trials
    while left:
        m = min(block_size, left)
        jobs.append((kind, param, seed, b, m, horizon))
        left -= m
        b += 1
    if workers == 1 or len(jobs) == 1:
        parts = [_run_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            parts = list(pool.map(_run_block, jobs))
    hist = np.zeros(horizon + 1, dtype=np.int64)
    censored = 0
    for h, c in parts:
        hist += h
        censored += c
    return SimResult(trials, hist, censored, horizon, seed, workers, block_size, first_block)


def simulate_game(faces: int, trials: int, horizon: int, seed: int, workers: int = 1,
                  block_size: int = BLOCK_SIZE, first_block: int = 0) -> SimResult:
    """Collision times of two tokens moved by independent fair ``faces``-sided dice.

    Each trial stops at the first collision; trials still apart after
    ``horizon`` rolls are counted as censored.
    """
    if faces < 2:
        raise DomainError(f"faces must be >= 2, got {faces}")
    return _run("game", faces, trials, horizon, seed, workers, block_size, first_block)


def sampler_for(law: Union[str, StepSpec]) -> Sampler:
    """``"geom2-diff"`` without a bound is the untruncated geometric difference."""
    if isinstance(law, str):
        if law == "geom2-diff":
            return GeometricDiffSampler()
        law = named_law(law)
    return FiniteSampler.from_spec(law)


def simulate_walk(law: Union[str, StepSpec], trials: int, horizon: int, seed: int,
                  workers: int = 1, block_size: int = BLOCK_SIZE, first_block: int = 0) -> SimResult:
    """First-return histogram of the walk with i.i.d. steps from ``law``."""
    return _run("walk", sampler_for(law), trials, horizon, seed, workers, block_size, first_block)


@dataclass(frozen=True)
class PairSample:
    n: int
    k: int
    parts: tuple[int, ...]
    parts_prime: tuple[int, ...]
    irreducible: bool


def _randbelow(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in ``[0, bound)`` for arbitrary-size ``bound``, by rejection."""
    if bound <= 0:
        raise DomainError("bound must be positive")
    bits = (bound - 1).bit_length()
    if bits == 0:
        return 0
    words = -(-bits // 64)
    while True:
        raw = rng.bit_generator.random_raw(words)
        v = int.from_bytes(np.asarray(raw, dtype="<u8").tobytes(), "little") >> (64 * words - bits)
        if v < bound:
            return v


@dataclass(frozen=True)
class _PairLaw:
    n: int
    cum: tuple[int, ...]
    total: int

    @classmethod
    def build(cls, n: int) -> "_PairLaw":
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        acc, cum = 0, []
        for k in range(1, n + 1):
            acc += math.comb(n - 1, k - 1) ** 2
            cum.append(acc)
        return cls(n, tuple(cum), acc)

    def draw(self, rng: np.random.Generator) -> PairSample:
        n = self.n
        k = bisect.bisect_right(self.cum, _randbelow(rng, self.total)) + 1
        c1 = np.sort(rng.choice(n - 1, size=k - 1, replace=False)) + 1
        c2 = np.sort(rng.choice(n - 1, size=k - 1, replace=False)) + 1
        irreducible = bool(np.all(c1 != c2))
        return PairSample(n, k, _parts(c1, n), _parts(c2, n), irreducible)


def _parts(cuts: np.ndarray, n: int) -> tuple[int, ...]:
    edges = np.concatenate(([0], cuts, [n]))
    return tuple(int(v) for v in np.diff(edges))


def sample_pair(n: int, seed: int) -> PairSample:
    """One uniform pair of compositions of ``n`` with equal part counts.

    ``k`` is drawn with probability ``C(n-1,k-1)^2 / C(2n-2,n-1)`` using
    exact integer weights, then each composition is a uniform
    ``(k-1)``-subset of the ``n-1`` cut positions.
    """
    return _PairLaw.build(n).draw(block_rng(seed, 0))


def sample_pairs(n: int, samples: int, seed: int) -> tuple[int, np.ndarray]:
    """Draw ``samples`` pairs; returns ``(irreducible count, histogram of k)``."""
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    law = _PairLaw.build(n)
    rng = block_rng(seed, 0)
    k_hist = np.zeros(n + 1, dtype=np.int64)
    irr = 0
    for _ in range(samples):
        s = law.draw(rng)
        k_hist[s.k] += 1
        irr += s.irreducible
    return irr, k_hist


def poissonized_composition(n: int, seed: int) -> tuple[int, ...]:
    """Uniform composition of ``n`` from Geometric(1/2) parts stopped once the sum reaches ``n``.

    The parts are ``Y_1, ..., Y_{T-1}`` followed by ``n - W_{T-1}``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = block_rng(seed, 0)
    y = _geometric_half(rng, n)
    w = np.cumsum(y)
    t = int(np.searchsorted(w, n, side="left")) + 1  # first index with W_t >= n
    head = [int(v) for v in y[: t - 1]]
    return tuple(head + [n - int(sum(head))])


def poissonized_batch(n: int, samples: int, seed: int, chunk: int = 1 << 16):
    """Vectorised poissonisation.

    Returns ``(part_counts, cut_masks)``: the number of parts ``T`` of each
    draw and, for ``n <= 62``, the composition encoded as the bitmask of
    its proper prefix sums (bit ``j - 1`` set when ``j`` is a prefix sum).
    ``cut_masks`` is ``None`` for larger ``n``.
    """
    if n < 1 or samples < 1:
        raise DomainError("n and samples must be >= 1")
    rng = block_rng(seed, 0)
    counts = np.empty(samples, dtype=np.int64)
    masks = np.empty(samples, dtype=np.int64) if n <= 62 else None
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        w = np.cumsum(_geometric_half(rng, (m, n)), axis=1)
        proper = w < n
        counts[done : done + m] = proper.sum(axis=1) + 1
        if masks is not None:
            bits = np.where(proper, np.left_shift(1, np.minimum(w, n) - 1), 0)
            masks[done : done + m] = bits.sum(axis=1)
        done += m
    return counts, masks


def chi_square_vs_exact(result: SimResult, exact: Sequence, n_bins: int):
    """Pearson test of bins ``tau = 1..n_bins`` plus one lumped ``tau > n_bins`` bin.

    ``exact[n]`` are the probabilities ``a_n``.  Returns
    ``scipy.stats.chisquare`` output.
    """
    p = np.array([float(exact[n]) for n in range(1, n_bins + 1)])
    tail = 1.0 - p.sum()
    observed = np.append(result.tau_histogram[1 : n_bins + 1], result.tail(n_bins))
    expected = np.append(p, tail) * result.trials
    return stats.chisquare(observed, expected)


def two_sample_chi_square(r1: SimResult, r2: SimResult, n_bins: int):
    """Homogeneity test on bins ``1..n_bins`` and the lumped tail."""
    rows = [np.append(r.tau_histogram[1 : n_bins + 1], r.tail(n_bins)) for r in (r1, r2)]
    table = np.array(rows)
    table = table[:, table.sum(axis=0) > 0]
    return stats.chi2_contingency(table, correction=False)
