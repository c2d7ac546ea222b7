"""Chess bots that count material."""

from __future__ import annotations

from ..games.chess import OFF

PIECE_VALUE = (0, 100, 320, 330, 500, 900, 0)
MATE = 100_000


def material(board, white: bool) -> int:
    total = 0
    for piece in board:
        if piece and piece != OFF:
            total += PIECE_VALUE[piece] if piece > 0 else -PIECE_VALUE[-piece]
    return total if white else -total


def _terminal_value(engine, st, seat: int) -> int | None:
    result = engine.adjudicate(st)
    if result is None:
        return None
    return round((result.scores[seat] - 0.5) * 2 * MATE)


def _best(scored: list[tuple[float, str]], rng) -> str:
    best = max(v for v, _ in scored)
    top = [m for v, m in scored if v == best]
    return top[rng.randbelow(len(top))]


def greedy(engine, st, legal, rng) -> str:
    seat = st.side
    scored = []
    for move in legal:
        after = engine.apply_move(st, move)
        value = _terminal_value(engine, after, seat)
        if value is None:
            value = material(after.board, seat == 0)
        scored.append((value, move))
    return _best(scored, rng)


def search2(engine, st, legal, rng) -> str:
    seat = st.side
    scored = []
    for move in legal:
        after = engine.apply_move(st, move)
        value = _terminal_value(engine, after, seat)
        if value is None:
            # the opponent answers with the reply that hurts us most
            value = min(
                material(engine._play(after, mv).board, seat == 0)
                for mv in engine._moves(after).values()
            )
        scored.append((value, move))
    return _best(scored, rng)


POLICIES = {"greedy": greedy, "search2": search2}
