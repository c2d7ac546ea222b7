from __future__ import annotations

import itertools

import pytest

from peerarena.games.chess import IndexOutOfRange, attacked, chess960_back_rank
from peerarena.kernel import GameId, InvalidSetup, Termination, get_engine

from conftest import random_playout
from oracles.chess_oracle import legal as oracle_legal
from oracles.chess_oracle import parse_fen, perft as oracle_perft

STD = get_engine(GameId.parse("chess", "standard"))
C960 = get_engine(GameId.parse("chess", "variant"))
START_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

# positions with castling, en passant, promotions and pins
TRICKY = [
    "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
    "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
    "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
    "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
]


def test_start_position():
    s = STD.initial_state(99)
    assert STD.serialize(s) == START_FEN
    assert len(STD.legal_moves(s)) == 20
    after = STD.apply_move(s, "e2e4")
    assert STD.to_move(after) == 1
    assert STD.serialize(after).startswith("rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b")


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_perft_from_start_matches_brute_force(depth):
    expected = oracle_perft(parse_fen(START_FEN), depth)
    assert STD.perft(STD.initial_state(), depth) == expected


def test_perft_depth_zero():
    assert STD.perft(STD.initial_state(), 0) == 1


@pytest.mark.parametrize("fen", TRICKY)
def test_perft_tricky_positions(fen):
    st = STD.initial_state(fen=fen)
    for depth in (1, 2):
        assert STD.perft(st, depth) == oracle_perft(parse_fen(fen), depth)


def _oracle_tokens(fen):
    names = "abcdefgh"
    out = set()
    for fr, to, pr in oracle_legal(*parse_fen(fen)):
        promo = pr.lower() if pr and pr != "castle" else ""
        out.add(f"{names[fr[0]]}{fr[1] + 1}{names[to[0]]}{to[1] + 1}{promo}")
    return out


@pytest.mark.parametrize("seed", range(6))
def test_legal_moves_match_oracle_along_random_games(seed):
    moves, _ = random_playout(STD, seed)
    st = STD.initial_state(seed)
    for m in moves[:120]:
        assert set(STD.legal_moves(st)) == _oracle_tokens(STD.serialize(st))
        st = STD.apply_move(st, m)


def test_fen_round_trip():
    for fen in TRICKY + [START_FEN]:
        assert STD.to_fen(STD.from_fen(fen)) == fen


# -- Chess960 --------------------------------------------------------------------


def _valid_back_rank(rank: str) -> bool:
    b = [i for i, c in enumerate(rank) if c == "B"]
    r = [i for i, c in enumerate(rank) if c == "R"]
    k = rank.index("K")
    return (b[0] + b[1]) % 2 == 1 and r[0] < k < r[1]


def test_960_generator_is_a_bijection_onto_valid_ranks():
    brute = {"".join(p) for p in itertools.permutations("RNBQKBNR") if _valid_back_rank("".join(p))}
    assert len(brute) == 960
    generated = [chess960_back_rank(i) for i in range(960)]
    assert len(set(generated)) == 960
    assert set(generated) == brute
    assert generated.count("RNBQKBNR") == 1 and generated.index("RNBQKBNR") == 518


def test_960_index_range():
    with pytest.raises(IndexOutOfRange):
        chess960_back_rank(960)
    with pytest.raises(InvalidSetup):
        C960.initial_state(start_index=-1)


def test_960_start_is_reproducible_per_seed():
    assert C960.serialize(C960.initial_state(5)) == C960.serialize(C960.initial_state(5))
    ranks = {C960.serialize(C960.initial_state(s)).split("/")[7].split()[0] for s in range(40)}
    assert len(ranks) > 30


def test_960_castling_lands_on_standard_squares():
    # king on b1, rooks on a1 and h1, nothing in between on the kingside
    st = C960.initial_state(fen="1k6/8/8/8/8/8/8/RK5R w AH - 0 1")
    assert "b1h1" in C960.legal_moves(st) and "b1a1" in C960.legal_moves(st)
    short = C960.serialize(C960.apply_move(st, "b1h1"))
    assert short.startswith("1k6/8/8/8/8/8/8/R4RK1 b - ")
    long_ = C960.serialize(C960.apply_move(st, "b1a1"))
    assert long_.startswith("1k6/8/8/8/8/8/8/2KR3R b - ")


def test_960_rook_move_drops_only_its_right():
    st = C960.initial_state(fen="1k6/8/8/8/8/8/8/RK5R w AH - 0 1")
    after = C960.apply_move(st, "h1h2")
    assert after.castling == frozenset({21})  # a1 rook keeps its right


# -- adjudication ---------------------------------------------------------------


def test_back_rank_mate():
    st = STD.initial_state(fen="6k1/5ppp/8/8/8/8/8/R5K1 w - - 0 1")
    mated = STD.apply_move(st, "a1a8")
    out = STD.outcome(mated)
    assert out.scores == (1.0, 0.0) and out.detail == "checkmate"


def test_stalemate_is_a_draw():
    st = STD.initial_state(fen="k7/8/1Q6/8/8/8/8/7K w - - 0 1")
    out = STD.outcome(STD.apply_move(st, "b6c7"))
    assert out.scores == (0.5, 0.5) and out.detail == "stalemate"


def test_bare_kings_are_a_draw():
    st = STD.initial_state(fen="8/8/3k4/8/8/3K4/8/8 w - - 0 1")
    assert STD.outcome(st).detail == "insufficient material"


def test_threefold_repetition():
    st = STD.initial_state()
    for m in ["g1f3", "g8f6", "f3g1", "f6g8"] * 2:
        st = STD.apply_move(st, m)
    assert STD.outcome(st).detail == "threefold repetition"


def test_move_cap_draw():
    capped = []
    for seed in range(30):
        _, final = random_playout(STD, seed)
        out = STD.outcome(final)
        if out.termination is Termination.MOVE_CAP:
            capped.append(final)
            assert out.scores == (0.5, 0.5)
            assert final.ply == 400
    assert capped


def test_king_never_left_in_check():
    for seed in range(5):
        moves, _ = random_playout(C960, seed)
        st = C960.initial_state(seed)
        for m in moves:
            st = C960.apply_move(st, m)
            # the side that just moved must not be in check
            mover_white = not st.white
            assert not attacked(st.board, st.king_square(mover_white), not mover_white)
