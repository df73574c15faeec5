import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from firstreturn.errors import DomainError, ValidationError
from firstreturn.laws import law_from_json, law_to_json, load_law, named_law, validate_step


def test_pm1():
    s = named_law("pm1")
    assert s.mean == 0 and s.variance == 1
    assert s.aperiodic and s.one_period_gcd == 1
    assert s.span == 2 and not s.strongly_aperiodic


def test_dice_diff():
    s = named_law("dice-diff")
    assert s.support == tuple((i, Fraction(6 - abs(i), 36)) for i in range(-5, 6))
    assert s.mean == 0 and s.variance == Fraction(35, 6)
    assert s.aperiodic and s.span == 1 and s.symmetric


def test_geom2_diff_truncated():
    s = named_law("geom2-diff:30")
    assert s.mean == 0
    assert abs(float(s.variance) - 4) < 1e-6
    assert named_law("geom2-diff:3").variance < 4
    with pytest.raises(DomainError):
        named_law("geom2-diff")


def test_uniform_and_asymmetric():
    assert named_law("uniform:-2:2").variance == 2
    s = validate_step([(-1, Fraction(2, 3)), (2, Fraction(1, 3))])
    assert s.mean == 0 and s.variance == 2
    assert s.aperiodic  # position 1 is reachable at n = 2 and n = 3
    assert s.span == 3 and not s.symmetric


def test_periodic_one_period_gcd():
    # steps {+2, -2}: position 1 is never reachable
    s = validate_step([(2, Fraction(1, 2)), (-2, Fraction(1, 2))])
    assert s.one_period_gcd == 0 and not s.aperiodic
    # steps {+1, -3}: position 1 at n = 1, 5, 9, ... so the gcd is 1 despite span 4
    s = validate_step([(1, Fraction(3, 4)), (-3, Fraction(1, 4))])
    assert s.one_period_gcd == 1 and s.span == 4


def test_mean_nonzero_accepted():
    s = validate_step([(1, Fraction(2, 3)), (-1, Fraction(1, 3))])
    assert s.mean == Fraction(1, 3)


@pytest.mark.parametrize("raw", [
    [],
    [(0, 1)],
    [(1, Fraction(1, 2))],
    [(1, 0.5), (-1, 0.5)],
    [(1, Fraction(3, 2)), (-1, Fraction(-1, 2))],
    [(1.0, 1)],
    [{"offset": 1, "prob": "1/2", "extra": 1}, {"offset": -1, "prob": "1/2"}],
    [{"offset": 1}],
    [(1, "abc")],
])
def test_validate_rejects(raw):
    with pytest.raises(ValidationError):
        validate_step(raw)


def test_duplicates_merged():
    s = validate_step([(1, "1/4"), (1, "1/4"), (-1, "1/2")])
    assert s.support == ((-1, Fraction(1, 2)), (1, Fraction(1, 2)))


def test_unknown_name():
    with pytest.raises(DomainError):
        named_law("bogus")
    with pytest.raises(DomainError):
        named_law("uniform:3:1")


def test_json_round_trip(tmp_path):
    s = named_law("dice-diff")
    doc = law_to_json(s)
    assert law_from_json(json.loads(json.dumps(doc))).support == s.support
    p = tmp_path / "law.json"
    p.write_text(json.dumps({"support": [{"offset": -1, "prob": "2/3"}, {"offset": 2, "prob": "1/3"}]}))
    assert load_law(str(p)).variance == 2
    with pytest.raises(ValidationError):
        law_from_json({"support": [], "x": 1})


def test_kernels_and_charfun():
    s = named_law("dice-diff")
    assert sum(s.integer_kernel()) == s.denominator
    assert np.isclose(s.float_kernel().sum(), 1.0)
    theta = np.linspace(-np.pi, np.pi, 7)
    assert np.allclose(s.charfun(theta).imag, 0, atol=1e-15)
    assert np.isclose(s.charfun(np.array([0.0]))[0], 1)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.integers(-6, 6), st.integers(1, 9), min_size=1, max_size=6))
def test_random_laws(weights):
    if set(weights) == {0}:
        return
    tot = sum(weights.values())
    s = validate_step([(k, Fraction(v, tot)) for k, v in weights.items()])
    assert sum(s.probs) == 1
    assert s.mean == sum(k * Fraction(v, tot) for k, v in weights.items())
    assert s.variance >= 0
    assert s.aperiodic == (s.one_period_gcd == 1)
    # reachable times for position 1 form a full residue class coprime to the span
    assert s.one_period_gcd in (0, 1)
    g = math.gcd(*s.offsets)
    both_signs = s.lo < 0 < s.hi
    if both_signs:
        assert s.aperiodic == (g == 1)
    elif s.lo > 0:
        assert s.aperiodic == (1 in s.offsets)
