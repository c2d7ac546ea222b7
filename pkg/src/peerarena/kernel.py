"""Uniform engine interface, outcomes and the engine registry.

Every engine works on immutable state values that remember which game they
belong to, so the module-level helpers (``legal_moves``, ``apply_move``, ...)
dispatch on the state itself.
"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Sequence


class ArenaError(Exception):
    """Base class for all domain errors raised by the arena."""


class UnknownGame(ArenaError):
    pass


class InvalidSetup(ArenaError):
    pass


class TerminalState(ArenaError):
    pass


class NotTerminal(ArenaError):
    pass


class IllegalMove(ArenaError):
    def __init__(self, payload: str, reason: str = ""):
        self.payload = payload
        self.reason = reason
        super().__init__(f"illegal move {payload!r}" + (f": {reason}" if reason else ""))


class AgentFailure(ArenaError):
    """An agent crashed, stopped answering or exhausted its retries."""

    def __init__(self, seat: int | None = None, reason: str = ""):
        self.seat = seat
        self.reason = reason
        super().__init__(f"agent failure at seat {seat}" + (f": {reason}" if reason else ""))


class Game(str, enum.Enum):
    GOMOKU = "gomoku"
    CHESS = "chess"
    HOLDEM = "holdem"
    BRIDGE = "bridge"


class Mode(str, enum.Enum):
    STANDARD = "standard"
    VARIANT = "variant"


@dataclass(frozen=True, order=True)
class GameId:
    game: Game
    mode: Mode = Mode.STANDARD

    def __str__(self) -> str:
        return f"{self.game.value}_{self.mode.value}"

    @classmethod
    def parse(cls, game: str | Game, mode: str | Mode = Mode.STANDARD) -> GameId:
        try:
            return cls(Game(game), Mode(mode))
        except ValueError as exc:
            raise UnknownGame(f"unknown game/mode {game!r}/{mode!r}") from exc

    @property
    def symmetric(self) -> bool:
        return self.game is not Game.HOLDEM


@dataclass(frozen=True)
class Seat:
    index: int
    label: str


class Termination(str, enum.Enum):
    NORMAL = "normal"
    MOVE_CAP = "move_cap"
    TIMEOUT = "timeout"
    ILLEGAL_MOVE = "illegal_move"
    AGENT_FAILURE = "agent_failure"


@dataclass(frozen=True)
class RawOutcome:
    """Per-seat raw results plus their normalized scores in [0, 1].

    ``results`` holds "win"/"draw"/"loss" flags for board games, final chip
    counts for Hold'em and signed duplicate points for a Bridge board.
    """

    results: tuple
    scores: tuple[float, ...]
    termination: Termination = Termination.NORMAL
    detail: str = ""
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "results": list(self.results),
            "scores": list(self.scores),
            "termination": self.termination.value,
            "detail": self.detail,
        }
        if self.extra:
            d["extra"] = self.extra
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RawOutcome:
        return cls(
            tuple(d["results"]),
            tuple(float(s) for s in d["scores"]),
            Termination(d["termination"]),
            d.get("detail", ""),
            d.get("extra", {}),
        )


def wdl_outcome(winner: int | None, termination: Termination = Termination.NORMAL,
                detail: str = "") -> RawOutcome:
    """Two-seat win/draw/loss outcome (win 1, draw 0.5, loss 0)."""
    if winner is None:
        return RawOutcome(("draw", "draw"), (0.5, 0.5), termination, detail)
    results = ["loss", "loss"]
    scores = [0.0, 0.0]
    results[winner] = "win"
    scores[winner] = 1.0
    return RawOutcome(tuple(results), tuple(scores), termination, detail)


class Engine(ABC):
    """Rules for one (game, mode) pair. Engines hold no mutable state."""

    game_id: GameId
    seat_labels: tuple[str, ...]

    @abstractmethod
    def initial_state(self, seed: int = 0, **params: Any) -> Any: ...

    @abstractmethod
    def legal_moves(self, state: Any) -> Sequence[str]: ...

    @abstractmethod
    def apply_move(self, state: Any, move: str) -> Any: ...

    @abstractmethod
    def is_terminal(self, state: Any) -> bool: ...

    @abstractmethod
    def to_move(self, state: Any) -> int:
        """Seat whose agent must decide next."""

    @abstractmethod
    def outcome(self, state: Any) -> RawOutcome: ...

    @abstractmethod
    def serialize(self, state: Any, seat: int | None = None) -> str:
        """Canonical text form; ``seat`` restricts to that seat's view."""

    @abstractmethod
    def default_move(self, state: Any) -> str:
        """Move substituted when an agent times out or answers illegally."""

    @abstractmethod
    def forfeit(self, state: Any, seat: int, termination: Termination) -> RawOutcome:
        """Outcome when ``seat`` is removed from the game by the referee."""

    def num_seats(self, state: Any) -> int:
        return len(self.seat_labels)

    def seat(self, index: int) -> Seat:
        return Seat(index, self.seat_labels[index])

    def check_move(self, state: Any, move: str) -> None:
        if self.is_terminal(state):
            raise TerminalState(f"{self.game_id} state is terminal")
        if move not in self.legal_moves(state):
            raise IllegalMove(move)


_REGISTRY: dict[GameId, Engine] = {}


def register(engine: Engine) -> Engine:
    _REGISTRY[engine.game_id] = engine
    return engine


def get_engine(game_id: GameId | str, mode: str | Mode | None = None) -> Engine:
    if isinstance(game_id, str):
        game_id = GameId.parse(game_id, mode or Mode.STANDARD)
    _load_engines()
    try:
        return _REGISTRY[game_id]
    except KeyError:
        raise UnknownGame(str(game_id)) from None


def registered_games() -> list[GameId]:
    _load_engines()
    return sorted(_REGISTRY)


def _load_engines() -> None:
    if len(_REGISTRY) < 8:
        from .games import bridge, chess, gomoku, holdem  # noqa: F401


def initial_state(game_id: GameId, seed: int = 0, **params: Any) -> Any:
    return get_engine(game_id).initial_state(seed, **params)


def legal_moves(state: Any) -> Sequence[str]:
    return get_engine(state.game_id).legal_moves(state)


def apply_move(state: Any, move: str) -> Any:
    return get_engine(state.game_id).apply_move(state, move)


def outcome(state: Any) -> RawOutcome:
    return get_engine(state.game_id).outcome(state)


def is_terminal(state: Any) -> bool:
    return get_engine(state.game_id).is_terminal(state)
