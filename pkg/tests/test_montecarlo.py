from math import comb

import numpy as np
import pytest

from firstreturn import montecarlo as mc
from firstreturn.errors import DomainError
from firstreturn.laws import named_law
from firstreturn.walk import return_table


def _within(count, trials, p, k=4.0):
    se = np.sqrt(p * (1 - p) / trials)
    return abs(count / trials - p) <= k * se


def test_game_first_two_times():
    r = mc.simulate_game(6, 1_000_000, 30, seed=11)
    assert r.tau_histogram.sum() + r.censored == r.trials
    assert _within(r.tau_histogram[1], r.trials, 1 / 6)
    assert _within(r.tau_histogram[2], r.trials, 55 / 648)


def test_two_faced_game():
    r = mc.simulate_game(2, 200_000, 10, seed=3)
    assert _within(r.tau_histogram[1], r.trials, 0.5)


def test_walk_samplers():
    r = mc.simulate_walk("geom2-diff", 300_000, 5, seed=5)
    assert _within(r.tau_histogram[1], r.trials, 1 / 3)
    r = mc.simulate_walk(named_law("pm1"), 200_000, 4, seed=5)
    assert r.tau_histogram[1] == 0 and r.tau_histogram[3] == 0
    assert _within(r.tau_histogram[2], r.trials, 0.5)


def test_geometric_sampler_law():
    rng = mc.block_rng(9, 0)
    y = mc._geometric_half(rng, 400_000)
    assert y.min() >= 1
    for i in range(1, 6):
        assert _within((y == i).sum(), y.size, 2.0**-i)


def test_dice_histogram_chi_square():
    exact = return_table(named_law("dice-diff"), 30, "float").a
    r = mc.simulate_walk(named_law("dice-diff"), 500_000, 30, seed=21)
    assert mc.chi_square_vs_exact(r, exact, 30).pvalue > 0.001


def test_game_and_walk_same_law():
    g = mc.simulate_game(6, 300_000, 30, seed=1)
    w = mc.simulate_walk(named_law("dice-diff"), 300_000, 30, seed=2)
    assert mc.two_sample_chi_square(g, w, 30).pvalue > 0.001


def test_tail_matches_survival():
    rt = return_table(named_law("dice-diff"), 50, "float")
    r = mc.simulate_game(6, 300_000, 50, seed=4)
    for n in (5, 20, 50):
        assert _within(r.tail(n), r.trials, rt.Q[n])


def test_reproducible_and_worker_independent():
    a = mc.simulate_game(6, 70_000, 40, seed=99, workers=1, block_size=10_000)
    b = mc.simulate_game(6, 70_000, 40, seed=99, workers=1, block_size=10_000)
    c = mc.simulate_game(6, 70_000, 40, seed=99, workers=3, block_size=10_000)
    assert np.array_equal(a.tau_histogram, b.tau_histogram) and a.censored == b.censored
    assert np.array_equal(a.tau_histogram, c.tau_histogram) and a.censored == c.censored
    d = mc.simulate_game(6, 70_000, 40, seed=100, workers=1, block_size=10_000)
    assert not np.array_equal(a.tau_histogram, d.tau_histogram)


def test_merge_additivity():
    whole = mc.simulate_game(6, 50_000, 20, seed=8, block_size=10_000)
    head = mc.simulate_game(6, 30_000, 20, seed=8, block_size=10_000)
    rest = mc.simulate_game(6, 20_000, 20, seed=8, block_size=10_000, first_block=3)
    merged = head.merge(rest)
    assert np.array_equal(merged.tau_histogram, whole.tau_histogram)
    assert merged.censored == whole.censored and merged.trials == whole.trials


def test_thread_cap(monkeypatch):
    monkeypatch.setenv(mc.THREADS_ENV, "2")
    assert mc.effective_workers(8) == 2
    monkeypatch.setenv(mc.THREADS_ENV, "x")
    with pytest.raises(DomainError):
        mc.effective_workers(2)


def test_domain_errors():
    with pytest.raises(DomainError):
        mc.simulate_game(1, 10, 10, seed=0)
    with pytest.raises(DomainError):
        mc.simulate_walk(named_law("pm1"), 10, 0, seed=0)
    with pytest.raises(DomainError):
        mc.simulate_game(6, 0, 10, seed=0)


def test_randbelow_uniform():
    rng = mc.block_rng(1, 0)
    big = 3 * 2**70 + 1
    draws = [mc._randbelow(rng, big) for _ in range(2000)]
    assert all(0 <= d < big for d in draws)
    assert 0.4 < np.mean([d / big for d in draws]) < 0.6
    small = [mc._randbelow(rng, 3) for _ in range(6000)]
    assert all(_within(small.count(v), 6000, 1 / 3) for v in range(3))


def test_sample_pair_basic():
    s = mc.sample_pair(1, seed=0)
    assert s.k == 1 and s.irreducible and s.parts == s.parts_prime == (1,)
    for seed in range(20):
        s = mc.sample_pair(9, seed)
        assert len(s.parts) == len(s.parts_prime) == s.k
        assert sum(s.parts) == sum(s.parts_prime) == 9
        assert min(s.parts) >= 1 and min(s.parts_prime) >= 1
        assert s.irreducible == (not any(
            a == b for a, b in zip(np.cumsum(s.parts)[:-1], np.cumsum(s.parts_prime)[:-1])))


def test_pairs_irreducible_frequency():
    count, _ = mc.sample_pairs(3, 40_000, seed=2)
    assert _within(count, 40_000, 0.5)


def test_pairs_k_marginal():
    from scipy import stats

    n, samples = 10, 40_000
    _, k_hist = mc.sample_pairs(n, samples, seed=3)
    w = np.array([comb(n - 1, k - 1) ** 2 for k in range(1, n + 1)], dtype=float)
    expected = w / w.sum() * samples
    keep = expected > 5
    obs = k_hist[1:][keep]
    exp = expected[keep] * obs.sum() / expected[keep].sum()
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_poissonized_uniform():
    from scipy import stats

    n = 3
    counts, masks = mc.poissonized_batch(n, 400_000, seed=6)
    freq = np.bincount(masks, minlength=2 ** (n - 1))
    assert freq.sum() == 400_000
    assert all(_within(c, 400_000, 0.25) for c in freq)
    n = 6
    _, masks = mc.poissonized_batch(n, 300_000, seed=7)
    obs = np.bincount(masks, minlength=2 ** (n - 1))
    assert stats.chisquare(obs).pvalue > 0.001


def test_poissonized_single():
    assert mc.poissonized_composition(1, seed=0) == (1,)
    for seed in range(10):
        c = mc.poissonized_composition(12, seed)
        assert sum(c) == 12 and min(c) >= 1


def test_poissonized_part_count_mean():
    # for a uniform composition of n the part count is 1 + Binomial(n - 1, 1/2)
    n, samples = 50, 200_000
    counts, masks = mc.poissonized_batch(n, samples, seed=12)
    assert masks is not None
    se = np.sqrt((n - 1) / 4 / samples)
    assert abs(counts.mean() - (n + 1) / 2) < 4 * se
    assert abs(counts.mean() - n / 2) < 0.03 * n


def test_pair_k_weights_are_exact_integers():
    law = mc._PairLaw.build(5)
    assert law.total == comb(8, 4)
    steps = np.diff((0,) + law.cum)
    assert [int(w) for w in steps] == [comb(4, k - 1) ** 2 for k in range(1, 6)]
