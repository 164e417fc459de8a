"""Exact (alpha, beta)-game engine with friendly-family strategies and
Q-Cantor series normality statistics."""

from .exact import Interval, frac_part, interval_distance, interval_relate, make_rational
from .game import GameParams, GameTranscript, enclosure, gamma_of, run_game, validate_move

__all__ = [
    "Interval", "frac_part", "interval_distance", "interval_relate", "make_rational",
    "GameParams", "GameTranscript", "enclosure", "gamma_of", "run_game", "validate_move",
]
__version__ = "0.1.0"
