from fractions import Fraction
from pathlib import Path

import pytest

import bigmatch

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


def test_matching_pennies():
    v, x, y = bigmatch.solve([[1, -1], [-1, 1]])
    assert v == 0
    assert x == [Fraction(1, 2), Fraction(1, 2)]
    assert y == [Fraction(1, 2), Fraction(1, 2)]


def test_big_match_value():
    g = bigmatch.load_game(str(DATA / "bigmatch.game"))
    assert g == bigmatch.big_match()
    v = bigmatch.value(g, Fraction(1, 1024))
    assert abs(v - Fraction(1, 2)) <= Fraction(1, 1024)


def test_marginal():
    assert bigmatch.marginal([[1, -1], [-1, 1]], [[1, 0], [0, 0]]) == Fraction(1, 4)


def test_parse_round_trip_and_errors():
    g = bigmatch.big_match()
    assert bigmatch.parse_game(g.render()) == g
    with pytest.raises(ValueError):
        bigmatch.parse_game("1 0\n0 x\n")


def test_reduce_record():
    text = bigmatch.reduce(bigmatch.big_match(), 2, fast_thresholds=True)
    assert text.startswith("reduction 1\n")
    assert "\nu " in text


def test_simulate_is_deterministic():
    g = bigmatch.big_match()
    a = bigmatch.simulate(g, "full:eps=1/5,sched=loglog", "constL", 4096, replicas=4, seed=5)
    b = bigmatch.simulate(g, "full:eps=1/5,sched=loglog", "constL", 4096, replicas=4, seed=5, threads=2)
    assert a == b
    assert len(a["payoffs"]) == 4
    assert 0 <= a["stop_rate"] <= 1
    with pytest.raises(ValueError):
        bigmatch.simulate(g, "nothing", "constL", 8)
