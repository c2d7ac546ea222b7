"""Gomoku heuristics: run length and open ends along the four lines."""

from __future__ import annotations

from ..games.gomoku import BLACK, CELLS, EMPTY, LINES, MOVE_STR, SIZE, WHITE, _WIN

# (run length, open ends) -> value
_PATTERN = {
    (4, 2): 10_000, (4, 1): 1_000,
    (3, 2): 1_000, (3, 1): 100,
    (2, 2): 100, (2, 1): 10,
    (1, 2): 2, (1, 1): 1,
}
FIVE = 1_000_000
_INDEX = {m: i for i, m in enumerate(MOVE_STR)}


def point_value(board, p: int, color: int) -> int:
    """Value of ``color`` placing a stone on empty point ``p``."""
    total = 0
    for d in range(4):
        cells = LINES[p][d]
        run, ends = 1, 0
        k = _WIN + 1
        while k <= 2 * _WIN and cells[k] >= 0 and board[cells[k]] == color:
            run += 1
            k += 1
        if k <= 2 * _WIN and cells[k] >= 0 and board[cells[k]] == EMPTY:
            ends += 1
        k = _WIN - 1
        while k >= 0 and cells[k] >= 0 and board[cells[k]] == color:
            run += 1
            k -= 1
        if k >= 0 and cells[k] >= 0 and board[cells[k]] == EMPTY:
            ends += 1
        if run >= 5:
            total += FIVE
        else:
            total += _PATTERN.get((run, ends), 0)
    return total


def _neighbours(p: int) -> tuple[int, ...]:
    x, y = p % SIZE, p // SIZE
    return tuple(
        (y + dy) * SIZE + x + dx
        for dy in range(-2, 3) for dx in range(-2, 3)
        if (dx or dy) and 0 <= x + dx < SIZE and 0 <= y + dy < SIZE
    )


NEIGHBOURS = [_neighbours(p) for p in range(CELLS)]
CENTRE = (SIZE // 2) * SIZE + SIZE // 2


def candidates(board, legal_set: set[int]) -> list[int]:
    """Legal points within two cells of a stone (the centre on an empty board)."""
    near: set[int] = set()
    for p in range(CELLS):
        if board[p] != EMPTY:
            near.update(NEIGHBOURS[p])
    near &= legal_set
    if not near:
        return [CENTRE] if CENTRE in legal_set else sorted(legal_set)[:1]
    return sorted(near)


def score_moves(board, color: int, legal_set: set[int]) -> list[tuple[float, int]]:
    other = WHITE if color == BLACK else BLACK
    return [
        (point_value(board, p, color) + 0.9 * point_value(board, p, other), p)
        for p in candidates(board, legal_set)
    ]


def _pick(scored: list[tuple[float, int]], rng) -> int:
    best = max(s for s, _ in scored)
    top = [p for s, p in scored if s == best]
    return top[rng.randbelow(len(top))]


def greedy(engine, state, legal, rng) -> str:
    legal_set = {_INDEX[m] for m in legal}
    return MOVE_STR[_pick(score_moves(state.board, state.color_to_move, legal_set), rng)]


def search2(engine, state, legal, rng, width: int = 8) -> str:
    legal_set = {_INDEX[m] for m in legal}
    color = state.color_to_move
    scored = sorted(score_moves(state.board, color, legal_set), reverse=True)[:width]
    results = []
    for own, p in scored:
        after = engine.apply_move(state, MOVE_STR[p])
        if engine.is_terminal(after):
            value = FIVE * 10 * (after.winner == state.to_move) - FIVE * 10 * (after.winner not in (None, state.to_move))
        else:
            replies = {_INDEX[m] for m in engine.legal_moves(after)}
            opp = after.color_to_move
            threat = max((point_value(after.board, q, opp) for q in candidates(after.board, replies)), default=0)
            value = own - threat
        results.append((value, p))
    return MOVE_STR[_pick(results, rng)]


POLICIES = {"greedy": greedy, "search2": search2}
