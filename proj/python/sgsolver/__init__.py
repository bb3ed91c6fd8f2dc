"""Anytime value-bound solvers for turn-based stochastic games."""

from ._core import (
    StochasticGame,
    bvi_global,
    bvi_local,
    exact_value,
    generate_random_game,
    mecs,
    parse_game,
    si_anytime,
)

__all__ = [
    "StochasticGame",
    "bvi_global",
    "bvi_local",
    "exact_value",
    "generate_random_game",
    "mecs",
    "parse_game",
    "si_anytime",
]
