"""15x15 Gomoku, freestyle (standard) and with renju restrictions on Black (variant).

Variant rules: Black may not play a point that creates an overline, two
fours or two open threes, unless the same stone makes exactly five. White is
unrestricted and wins with five or more. Depending on ``forbidden_policy``
a forbidden point is either absent from the legal moves ("illegal", the
default) or playable but an immediate loss for Black ("loss").
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from ..kernel import (
    Engine,
    Game,
    GameId,
    IllegalMove,
    InvalidSetup,
    Mode,
    NotTerminal,
    RawOutcome,
    TerminalState,
    Termination,
    register,
    wdl_outcome,
)

SIZE = 15
CELLS = SIZE * SIZE
EMPTY, BLACK, WHITE = 0, 1, 2
DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1))
_SYMBOL = ".BW"
# a forbidden check nested deeper than this treats the point as playable
MAX_RECURSION = 3
_WIN = 6  # half-width of the line window examined around a point


class OutOfBounds(ValueError):
    pass


class ForbiddenReason(str, enum.Enum):
    DOUBLE_THREE = "double_three"
    DOUBLE_FOUR = "double_four"
    OVERLINE = "overline"


@dataclass(frozen=True)
class ForbiddenAnalysis:
    point: tuple[int, int]
    reasons: frozenset[ForbiddenReason]


def _build_lines() -> list[list[list[int]]]:
    # LINES[p][d] = board indices at offsets -_WIN.._WIN from p (-1 off board)
    lines = []
    for p in range(CELLS):
        x, y = p % SIZE, p // SIZE
        per_dir = []
        for dx, dy in DIRECTIONS:
            cells = []
            for k in range(-_WIN, _WIN + 1):
                cx, cy = x + k * dx, y + k * dy
                cells.append(cy * SIZE + cx if 0 <= cx < SIZE and 0 <= cy < SIZE else -1)
            per_dir.append(cells)
        lines.append(per_dir)
    return lines


LINES = _build_lines()
MOVE_STR = [f"{p % SIZE},{p // SIZE}" for p in range(CELLS)]


def index_of(x: int, y: int) -> int:
    if not (0 <= x < SIZE and 0 <= y < SIZE):
        raise OutOfBounds(f"({x},{y}) outside {SIZE}x{SIZE} board")
    return y * SIZE + x


def parse_move(move: str) -> int:
    try:
        xs, ys = move.split(",")
        return index_of(int(xs), int(ys))
    except (ValueError, OutOfBounds) as exc:
        raise IllegalMove(move, "expected 'x,y' on the board") from exc


def run_length(board, p: int, d: int, color: int) -> int:
    """Length of the run of ``color`` through ``p`` along direction ``d``."""
    cells = LINES[p][d]
    n = 1
    k = _WIN + 1
    while k <= 2 * _WIN and cells[k] >= 0 and board[cells[k]] == color:
        n += 1
        k += 1
    k = _WIN - 1
    while k >= 0 and cells[k] >= 0 and board[cells[k]] == color:
        n += 1
        k -= 1
    return n


def detect_five(board, point: tuple[int, int] | int, color: int, exact: bool = False) -> bool:
    """True if the stone at ``point`` is part of five in a row.

    With ``exact`` (Black under renju rules) only a run of exactly five
    counts; longer runs are overlines.
    """
    p = index_of(*point) if isinstance(point, tuple) else point
    if not 0 <= p < CELLS:
        raise OutOfBounds(str(point))
    if board[p] != color:
        return False
    for d in range(4):
        n = run_length(board, p, d, color)
        if n == 5 or (n > 5 and not exact):
            return True
    return False


def _line_values(board, p: int, d: int) -> tuple[int, ...]:
    return tuple([board[i] if i >= 0 else -1 for i in LINES[p][d]])


def _run_bounds(line: list[int], center: int) -> tuple[int, int]:
    lo = hi = center
    while lo - 1 >= 0 and line[lo - 1] == BLACK:
        lo -= 1
    while hi + 1 < len(line) and line[hi + 1] == BLACK:
        hi += 1
    return lo, hi


def _makes_exact_five(line: list[int], k: int) -> bool:
    if k < 0 or k >= len(line) or line[k] != EMPTY:
        return False
    line[k] = BLACK
    lo, hi = _run_bounds(line, k)
    line[k] = EMPTY
    return hi - lo + 1 == 5


@lru_cache(maxsize=1 << 17)
def _line_info(values: tuple[int, ...]) -> tuple[int, int, tuple[int, ...]]:
    """Analyse one line window whose center holds a black stone.

    Returns the run length through the center, the number of distinct fours
    (sets of four stones that one more stone turns into exactly five) and the
    offsets of empty points that would turn the center's line into a straight
    four (an open three's completion points).
    """
    line = list(values)
    c = _WIN
    lo, hi = _run_bounds(line, c)
    length = hi - lo + 1
    groups = set()
    for k in range(c - 4, c + 5):
        if k == c or line[k] != EMPTY:
            continue
        line[k] = BLACK
        lo, hi = _run_bounds(line, c)
        if hi - lo + 1 == 5 and lo <= k <= hi:
            groups.add(frozenset(range(lo, hi + 1)) - {k})
        line[k] = EMPTY
    straight = []
    for k in range(c - 3, c + 4):
        if k == c or line[k] != EMPTY:
            continue
        line[k] = BLACK
        lo, hi = _run_bounds(line, c)
        if (
            hi - lo + 1 == 4
            and lo <= k <= hi
            and _makes_exact_five(line, lo - 1)
            and _makes_exact_five(line, hi + 1)
        ):
            straight.append(k)
        line[k] = EMPTY
    return length, len(groups), tuple(straight)


def _forbidden_reasons(board: list[int], p: int, depth: int = 0) -> frozenset[ForbiddenReason]:
    """Renju restrictions violated by Black playing empty point ``p``."""
    board[p] = BLACK
    try:
        infos = [_line_info(_line_values(board, p, d)) for d in range(4)]
        if any(info[0] == 5 for info in infos):
            return frozenset()
        reasons = set()
        if max(info[0] for info in infos) > 5:
            reasons.add(ForbiddenReason.OVERLINE)
        if sum(info[1] for info in infos) >= 2:
            reasons.add(ForbiddenReason.DOUBLE_FOUR)
        threes = 0
        for d, info in enumerate(infos):
            for k in info[2]:
                q = LINES[p][d][k]
                # the three only counts if its completion point is itself playable
                if depth >= MAX_RECURSION or not _forbidden_reasons(board, q, depth + 1):
                    threes += 1
                    break
            if threes >= 2:
                reasons.add(ForbiddenReason.DOUBLE_THREE)
                break
        return frozenset(reasons)
    finally:
        board[p] = EMPTY


def _candidates(board) -> list[int]:
    """Empty points that could possibly be forbidden.

    Necessary condition: two lines each with two black stones within five
    points, or a single line with four (overline, or two fours on one line).
    """
    black = np.zeros((SIZE + 10, SIZE + 10), dtype=np.int8)
    black[5:-5, 5:-5] = (np.asarray(board, dtype=np.int8) == BLACK).reshape(SIZE, SIZE)
    busy = np.zeros((SIZE, SIZE), dtype=np.int8)
    dense = np.zeros((SIZE, SIZE), dtype=bool)
    for dx, dy in DIRECTIONS:
        count = np.zeros((SIZE, SIZE), dtype=np.int8)
        for k in range(-5, 6):
            if k:
                count += black[5 + k * dy:5 + k * dy + SIZE, 5 + k * dx:5 + k * dx + SIZE]
        busy += count >= 2
        dense |= count >= 4
    empty = (np.asarray(board) == EMPTY).reshape(SIZE, SIZE)
    mask = empty & ((busy >= 2) | dense)
    return np.flatnonzero(mask).tolist()


def forbidden_map(board) -> dict[int, frozenset[ForbiddenReason]]:
    work = list(board)
    out = {}
    for p in _candidates(work):
        reasons = _forbidden_reasons(work, p)
        if reasons:
            out[p] = reasons
    return out


@dataclass(frozen=True, eq=False)
class GomokuState:
    game_id: GameId
    board: tuple[int, ...]
    to_move: int = 0  # seat 0 is Black
    move_count: int = 0
    last_move: int | None = None
    winner: int | None = None
    full: bool = False
    forbidden_loss: bool = False  # variant policy "loss" was triggered
    forbidden_policy: str = "illegal"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def color_to_move(self) -> int:
        return BLACK if self.to_move == 0 else WHITE

    @property
    def terminal(self) -> bool:
        return self.winner is not None or self.full

    def forbidden(self) -> dict[int, frozenset[ForbiddenReason]]:
        if self.game_id.mode is not Mode.VARIANT or self.to_move != 0 or self.terminal:
            return {}
        if "forbidden" not in self._cache:
            self._cache["forbidden"] = forbidden_map(self.board)
        return self._cache["forbidden"]

    def key(self) -> tuple:
        return (self.board, self.to_move, self.winner, self.full)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GomokuState) and self.game_id == other.game_id and self.key() == other.key()

    def __hash__(self) -> int:
        return hash((self.game_id, self.key()))


class GomokuEngine(Engine):
    seat_labels = ("Black", "White")

    def __init__(self, mode: Mode):
        self.game_id = GameId(Game.GOMOKU, mode)

    def initial_state(self, seed: int = 0, **params: Any) -> GomokuState:
        policy = params.pop("forbidden_policy", "illegal")
        if params:
            raise InvalidSetup(f"unknown gomoku params {sorted(params)}")
        if policy not in ("illegal", "loss"):
            raise InvalidSetup(f"forbidden_policy must be 'illegal' or 'loss', got {policy!r}")
        return GomokuState(self.game_id, (EMPTY,) * CELLS, forbidden_policy=policy)

    def legal_moves(self, state: GomokuState) -> list[str]:
        if state.terminal:
            raise TerminalState("gomoku game is over")
        if "legal" not in state._cache:
            banned = state.forbidden() if state.forbidden_policy == "illegal" else {}
            board = state.board
            state._cache["legal"] = [
                MOVE_STR[p] for p in range(CELLS) if board[p] == EMPTY and p not in banned
            ]
        return state._cache["legal"]

    def apply_move(self, state: GomokuState, move: str) -> GomokuState:
        if state.terminal:
            raise TerminalState("gomoku game is over")
        p = parse_move(move)
        if state.board[p] != EMPTY:
            raise IllegalMove(move, "point occupied")
        forbidden = p in state.forbidden()
        if forbidden and state.forbidden_policy == "illegal":
            raise IllegalMove(move, "forbidden point for Black")
        color = state.color_to_move
        board = list(state.board)
        board[p] = color
        count = state.move_count + 1
        winner = None
        if forbidden:
            winner = 1
        elif detect_five(board, p, color, exact=(self.game_id.mode is Mode.VARIANT and color == BLACK)):
            winner = state.to_move
        return GomokuState(
            self.game_id,
            tuple(board),
            1 - state.to_move,
            count,
            p,
            winner,
            winner is None and count == CELLS,
            forbidden,
            state.forbidden_policy,
        )

    def is_terminal(self, state: GomokuState) -> bool:
        return state.terminal

    def to_move(self, state: GomokuState) -> int:
        return state.to_move

    def outcome(self, state: GomokuState) -> RawOutcome:
        if not state.terminal:
            raise NotTerminal("gomoku game still running")
        if state.winner is None:
            return wdl_outcome(None, detail="board full")
        detail = "forbidden point" if state.forbidden_loss else "five in a row"
        return wdl_outcome(state.winner, detail=detail)

    def forfeit(self, state: GomokuState, seat: int, termination: Termination) -> RawOutcome:
        return wdl_outcome(1 - seat, termination, f"{self.seat_labels[seat]} forfeits")

    def default_move(self, state: GomokuState) -> str:
        return self.legal_moves(state)[0]

    def serialize(self, state: GomokuState, seat: int | None = None) -> str:
        rows = [
            "".join(_SYMBOL[v] for v in state.board[y * SIZE:(y + 1) * SIZE]) for y in range(SIZE)
        ]
        rows.append("B" if state.to_move == 0 else "W")
        return "\n".join(rows)

    def forbidden_points(self, state: GomokuState) -> list[ForbiddenAnalysis]:
        return [
            ForbiddenAnalysis((p % SIZE, p // SIZE), reasons)
            for p, reasons in sorted(state.forbidden().items())
        ]

    def from_text(self, text: str, forbidden_policy: str = "illegal") -> GomokuState:
        """Inverse of ``serialize`` (move counters are rebuilt from stone counts)."""
        lines = text.strip().splitlines()
        if len(lines) != SIZE + 1 or any(len(r) != SIZE for r in lines[:SIZE]):
            raise InvalidSetup("expected 15 rows of 15 cells plus side to move")
        board = tuple(_SYMBOL.index(ch) for row in lines[:SIZE] for ch in row)
        side = lines[SIZE].strip()
        if side not in ("B", "W"):
            raise InvalidSetup("side to move must be B or W")
        count = sum(1 for v in board if v)
        return GomokuState(self.game_id, board, 0 if side == "B" else 1, count,
                           forbidden_policy=forbidden_policy)


for _mode in Mode:
    register(GomokuEngine(_mode))
