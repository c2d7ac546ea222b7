from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from peerarena.games.gomoku import (
    BLACK,
    CELLS,
    EMPTY,
    SIZE,
    WHITE,
    ForbiddenReason,
    OutOfBounds,
    detect_five,
    forbidden_map,
)
from peerarena.kernel import GameId, IllegalMove, get_engine

STD = get_engine(GameId.parse("gomoku", "standard"))
VAR = get_engine(GameId.parse("gomoku", "variant"))


def board_with(black=(), white=()):
    b = [EMPTY] * CELLS
    for x, y in black:
        b[y * SIZE + x] = BLACK
    for x, y in white:
        b[y * SIZE + x] = WHITE
    return b


def play(engine, moves):
    state = engine.initial_state(0)
    for m in moves:
        state = engine.apply_move(state, m)
    return state


def test_empty_board():
    s = STD.initial_state(123)
    assert len(STD.legal_moves(s)) == 225
    assert STD.to_move(s) == 0
    assert STD.serialize(s).splitlines()[-1] == "B"
    assert VAR.forbidden_points(s) == []


def test_centre_move():
    s = STD.apply_move(STD.initial_state(0), "7,7")
    assert STD.serialize(s).splitlines()[7][7] == "B"
    assert STD.to_move(s) == 1
    with pytest.raises(IllegalMove):
        STD.apply_move(s, "7,7")
    with pytest.raises(IllegalMove):
        STD.apply_move(s, "15,0")


def test_serialize_round_trip():
    s = play(STD, ["7,7", "8,8", "0,14"])
    assert STD.from_text(STD.serialize(s)) == s


def test_five_in_a_row_wins_for_black():
    moves = []
    for i in range(4):
        moves += [f"{i},7", f"{i},0"]
    state = play(STD, moves + ["4,7"])
    out = STD.outcome(state)
    assert out.scores == (1.0, 0.0)


def test_detect_five_lengths():
    five = board_with(black=[(x, 7) for x in range(5)])
    four = board_with(black=[(x, 7) for x in range(4)])
    six = board_with(black=[(x, 7) for x in range(6)])
    assert detect_five(five, (2, 7), BLACK)
    assert not detect_five(four, (2, 7), BLACK)
    assert detect_five(six, (2, 7), BLACK)
    assert not detect_five(six, (2, 7), BLACK, exact=True)
    with pytest.raises(OutOfBounds):
        detect_five(five, (15, 0), BLACK)


def test_overline_is_forbidden_for_black_in_variant():
    # black x=0..2 and x=4..5 on row 7: filling x=3 makes six
    black = [(0, 7), (1, 7), (2, 7), (4, 7), (5, 7)]
    white = [(0, 0), (2, 0), (4, 0), (6, 0), (8, 0)]
    moves = []
    for b, w in zip(black, white):
        moves += [f"{b[0]},{b[1]}", f"{w[0]},{w[1]}"]
    std_state = play(STD, moves)
    var_state = play(VAR, moves)
    assert "3,7" in STD.legal_moves(std_state)
    assert STD.outcome(STD.apply_move(std_state, "3,7")).scores == (1.0, 0.0)
    reasons = {a.point: a.reasons for a in VAR.forbidden_points(var_state)}
    assert ForbiddenReason.OVERLINE in reasons[(3, 7)]
    assert "3,7" not in VAR.legal_moves(var_state)
    with pytest.raises(IllegalMove):
        VAR.apply_move(var_state, "3,7")
    # under the alternative policy playing it loses at once
    lossy = VAR.initial_state(0, forbidden_policy="loss")
    for m in moves:
        lossy = VAR.apply_move(lossy, m)
    end = VAR.apply_move(lossy, "3,7")
    assert VAR.outcome(end).scores == (0.0, 1.0)


def test_double_three_from_crossing_open_twos():
    # open twos on row 7 and column 7 meeting at (7,7)
    b = board_with(black=[(5, 7), (6, 7), (7, 5), (7, 6)])
    fm = forbidden_map(b)
    assert fm[7 * SIZE + 7] == frozenset({ForbiddenReason.DOUBLE_THREE})


def test_double_four():
    b = board_with(black=[(4, 7), (5, 7), (6, 7), (7, 4), (7, 5), (7, 6)], white=[(3, 7), (7, 3)])
    fm = forbidden_map(b)
    assert ForbiddenReason.DOUBLE_FOUR in fm[7 * SIZE + 7]


def test_white_is_never_restricted():
    moves = ["5,7", "0,0", "6,7", "0,2", "7,5", "0,4", "7,6"]
    state = play(VAR, moves)
    assert VAR.to_move(state) == 1
    assert VAR.forbidden_points(state) == []
    assert "7,7" in VAR.legal_moves(state)


def test_five_beats_a_forbidden_shape():
    # exactly five wins for black even if it also forms a double four elsewhere
    b = board_with(black=[(3, 7), (4, 7), (5, 7), (6, 7), (7, 3), (7, 4), (7, 5), (7, 6)])
    assert 7 * SIZE + 7 not in forbidden_map(b)


# -- independent double-three oracle --------------------------------------------


def _line(board, p, dx, dy, reach=6):
    x0, y0 = p % SIZE, p // SIZE
    out = []
    for k in range(-reach, reach + 1):
        x, y = x0 + k * dx, y0 + k * dy
        out.append("BW."[[BLACK, WHITE, EMPTY].index(board[y * SIZE + x])] if 0 <= x < SIZE and 0 <= y < SIZE else "#")
    return "".join(out)


def _open_three_in(line: str, centre: int) -> bool:
    """A three through ``centre`` that one more stone turns into ``.BBBB.`` with no
    black on either outer side (so both completions give exactly five)."""
    for q in range(len(line)):
        if line[q] != ".":
            continue
        t = line[:q] + "B" + line[q + 1:]
        for s in range(len(t) - 5):
            if t[s:s + 6] == ".BBBB." and s < centre < s + 5 and s < q < s + 5:
                left = t[s - 1] if s >= 1 else "#"
                right = t[s + 6] if s + 6 < len(t) else "#"
                if left != "B" and right != "B":
                    return True
    return False


def oracle_double_three(board, p) -> bool:
    b = list(board)
    b[p] = BLACK
    if any(_has_five(b, p, d) for d in ((1, 0), (0, 1), (1, 1), (1, -1))):
        return False
    return sum(_open_three_in(_line(b, p, dx, dy), 6) for dx, dy in ((1, 0), (0, 1), (1, 1), (1, -1))) >= 2


def _has_five(b, p, d):
    return "BBBBB" in _line(b, p, *d) and "BBBBBB" not in _line(b, p, *d)


@given(st.lists(st.tuples(st.integers(4, 10), st.integers(4, 10)), min_size=3, max_size=7, unique=True),
       st.lists(st.tuples(st.integers(4, 10), st.integers(4, 10)), max_size=3, unique=True))
@settings(max_examples=300, deadline=None)
def test_double_three_agrees_with_oracle(black, white):
    white = [w for w in white if w not in black]
    b = board_with(black, white)
    fm = forbidden_map(b)
    for p in range(CELLS):
        if b[p] != EMPTY:
            continue
        engine_dt = ForbiddenReason.DOUBLE_THREE in fm.get(p, ())
        # the engine also discounts threes whose completion point is forbidden,
        # so it can only report fewer double threes than the plain oracle
        if engine_dt:
            assert oracle_double_three(b, p)
        elif oracle_double_three(b, p) and not fm.get(p):
            # disagreement must come from a forbidden completion point
            assert any(forbidden_map(_with(b, p)).values())


def _with(b, p):
    c = list(b)
    c[p] = BLACK
    return c


# -- symmetry -------------------------------------------------------------------

_TRANSFORMS = [
    lambda x, y: (x, y), lambda x, y: (SIZE - 1 - x, y), lambda x, y: (x, SIZE - 1 - y),
    lambda x, y: (SIZE - 1 - x, SIZE - 1 - y), lambda x, y: (y, x), lambda x, y: (SIZE - 1 - y, x),
    lambda x, y: (y, SIZE - 1 - x), lambda x, y: (SIZE - 1 - y, SIZE - 1 - x),
]


@given(st.lists(st.tuples(st.integers(0, 14), st.integers(0, 14)), min_size=1, max_size=40, unique=True),
       st.booleans())
@settings(max_examples=200, deadline=None)
def test_detect_five_is_dihedral_invariant(stones, exact):
    results = set()
    for t in _TRANSFORMS:
        moved = [t(x, y) for x, y in stones]
        b = board_with(black=moved)
        results.add(detect_five(b, moved[0], BLACK, exact))
    assert len(results) == 1


def test_full_board_is_a_draw(playout):
    # random games either end with five or fill the board; drawn games score 0.5 each
    for seed in range(20):
        moves, final = playout(STD, seed)
        out = STD.outcome(final)
        assert len(moves) <= 225
        if out.results == ("draw", "draw"):
            assert len(moves) == 225 and out.scores == (0.5, 0.5)
