"""Built-in scripted agents of graded strength.

``random`` picks a uniformly random legal move, ``greedy`` maximises a
one-ply heuristic and ``search2`` looks one reply deeper (or, for the card
games, samples hidden cards). Every decision draws from an RNG derived from
the bot seed and the serialized position, so a bot answers the same position
the same way no matter how many games run around it. Only ``random`` also
mixes in the per-game salt: the heuristic bots are deterministic policies and
break ties the same way in every game.
"""

from __future__ import annotations

import importlib
from typing import Any, Callable, Sequence

from ..kernel import ArenaError, Game, GameId, get_engine
from ..rng import SeededRng, derive_seed

BOT_IDS = ("random", "greedy", "search2")


class UnknownBot(ArenaError):
    pass


class Bot:
    """A policy callable as ``bot(state, legal, seat)`` or ``bot.choose(state)``."""

    def __init__(self, bot_id: str, game_id: GameId, seed: int,
                 decide: Callable[[Any, Any, Sequence[str], SeededRng], str]):
        self.bot_id = bot_id
        self.game_id = game_id
        self.seed = seed
        self.engine = get_engine(game_id)
        self._decide = decide

    def rng_for(self, state: Any, salt: object = None) -> SeededRng:
        if self.bot_id != "random":
            salt = None
        return SeededRng(derive_seed(self.seed, self.bot_id, salt, self.engine.serialize(state)))

    def choose(self, state: Any, legal: Sequence[str] | None = None, salt: object = None) -> str:
        if legal is None:
            legal = self.engine.legal_moves(state)
        return self._decide(self.engine, state, legal, self.rng_for(state, salt))

    def __call__(self, state: Any, legal: Sequence[str] | None = None, seat: int | None = None) -> str:
        return self.choose(state, legal)

    def __repr__(self) -> str:
        return f"Bot({self.bot_id!r}, {self.game_id}, seed={self.seed})"


def random_move(engine, state, legal: Sequence[str], rng: SeededRng) -> str:
    return legal[rng.randbelow(len(legal))]


def builtin_bot(bot_id: str, game_id: GameId | str, seed: int = 0, mode: str | None = None) -> Bot:
    if isinstance(game_id, str):
        game_id = GameId.parse(game_id, mode or "standard")
    if bot_id not in BOT_IDS:
        raise UnknownBot(f"unknown bot {bot_id!r}; choose from {', '.join(BOT_IDS)}")
    if bot_id == "random" and game_id.game is not Game.HOLDEM:
        return Bot(bot_id, game_id, seed, random_move)
    policies = importlib.import_module(f".{game_id.game.value}", __name__).POLICIES
    return Bot(bot_id, game_id, seed, policies[bot_id])
