"""Tournament arena for game-playing strategy services."""

from .kernel import Game, GameId, Mode, RawOutcome, Termination, get_engine

__all__ = ["Game", "GameId", "Mode", "RawOutcome", "Termination", "get_engine"]
__version__ = "0.1.0"
