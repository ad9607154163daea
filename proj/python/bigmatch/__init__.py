"""Exact matrix-game solvers, the epsilon-optimal Big Match strategy and its simulator."""

from fractions import Fraction

from . import _core
from ._core import Error, Game, big_match, load_game, parse_game

__all__ = ["Error", "Game", "big_match", "load_game", "parse_game", "value", "solve", "marginal", "reduce", "simulate"]


def _rows(matrix):
    return [[str(Fraction(x)) for x in row] for row in matrix]


def value(game, eps):
    """Approximate value of an absorbing game, within eps from below."""
    return Fraction(_core.value(game, str(Fraction(eps))))


def solve(matrix):
    """Exact value and optimal strategies (x, y) of a zero-sum matrix game."""
    v, x, y = _core.solve(_rows(matrix))
    return Fraction(v), [Fraction(p) for p in x], [Fraction(p) for p in y]


def marginal(a, b):
    """Marginal value of A in the direction B."""
    return Fraction(_core.marginal(_rows(a), _rows(b)))


def reduce(game, ell, fast_thresholds=False):
    """Rendered reduction record for eps = 2**-ell."""
    return _core.reduce(game, ell, fast_thresholds)


def simulate(game, p1, p2, horizon, replicas=1, seed=0, threads=1):
    r = _core.simulate(game, p1, p2, horizon, replicas, seed, threads)
    for k in ("mean_payoff", "stop_rate", "conditional_outcome"):
        if r[k] is not None:
            r[k] = Fraction(r[k])
    r["payoffs"] = [Fraction(p) for p in r["payoffs"]]
    return r
