from __future__ import annotations

import json
from collections import Counter
from itertools import combinations_with_replacement

import pytest

from peerarena.bots import builtin_bot
from peerarena.cards import card_str, full_deck, parse_card
from peerarena.games.holdem import (
    CardNotInDeck,
    DuplicateCard,
    HandRankClass,
    NoParticipation,
    build_deck,
    evaluate_cards,
    evaluate_hand,
    run_tournament,
    tournament_score,
)
from peerarena.kernel import AgentFailure, GameId, IllegalMove, InvalidSetup, get_engine
from peerarena.rng import SeededRng

from oracles.poker_oracle import best_of_seven

STD = get_engine(GameId.parse("holdem", "standard"))
VAR = get_engine(GameId.parse("holdem", "variant"))


def cards(text):
    return [parse_card(t) for t in text.split()]


def test_decks():
    assert len(build_deck("standard")) == 52
    variant = build_deck("variant")
    assert len(variant) == 36
    assert not any(card_str(c)[0] in "2345" for c in variant)


def test_royal_flush():
    v = evaluate_hand(["AH", "KH"], ["QH", "JH", "TH", "2C", "3D"])
    assert v.category is HandRankClass.ROYAL_FLUSH


def test_flush_and_full_house_swap_in_variant():
    flush = cards("AH 9H 7H 6H JH")
    board_free_full = cards("AS AD AC KS KD")
    for variant, flush_wins in ((False, False), (True, True)):
        f = evaluate_cards(flush + cards("6C 7S"), variant)
        fh = evaluate_cards(board_free_full + cards("6C 7S"), variant)
        assert f.category is HandRankClass.FLUSH and fh.category is HandRankClass.FULL_HOUSE
        assert (f > fh) is flush_wins


def test_trips_straight_order_is_configurable():
    trips = cards("9S 9D 9C KS 7D 6C QH")
    straight = cards("6S 7D 8C 9H TS KD QC")
    assert evaluate_cards(straight, True) > evaluate_cards(trips, True)
    assert evaluate_cards(trips, True, trips_beat_straight=True) > evaluate_cards(straight, True, trips_beat_straight=True)


def test_ace_six_straight_in_variant():
    v = evaluate_hand(["AS", "6D"], ["7C", "8H", "9S", "KD", "JC"], "variant")
    assert v.category is HandRankClass.STRAIGHT and v.tiebreak == (9,)
    # every non-straight, non-flush hand of a pair class or below in the 36-card deck loses to it
    suits = "SDCH"
    ranks = "6789TJQKA"
    for combo in combinations_with_replacement(ranks, 5):
        if max(Counter(combo).values()) > 2:
            continue
        hand = [parse_card(r + suits[i % 4]) for i, r in enumerate(combo)]
        if len({c for c in hand}) < 5:
            continue
        other = evaluate_cards(hand, True)
        if other.category in (HandRankClass.HIGH_CARD, HandRankClass.PAIR, HandRankClass.TWO_PAIR):
            assert other < evaluate_cards(cards("AS 6D 7C 8H 9S"), True)


def test_wheel_is_not_a_variant_straight():
    # 2-5 do not exist in the variant deck; A-2-3-4-5 is a standard straight
    v = evaluate_hand(["AS", "2D"], ["3C", "4H", "5S", "KD", "JC"])
    assert v.category is HandRankClass.STRAIGHT and v.tiebreak == (5,)


def test_card_validation():
    with pytest.raises(DuplicateCard):
        evaluate_hand(["AS", "AS"], ["3C", "4H", "5S", "KD", "JC"])
    with pytest.raises(CardNotInDeck):
        evaluate_hand(["AS", "2D"], ["7C", "8H", "9S", "KD", "JC"], "variant")
    with pytest.raises(InvalidSetup):
        evaluate_hand(["AS"], ["7C", "8H", "9S", "KD", "JC"])


@pytest.mark.parametrize("variant", [False, True])
def test_evaluator_matches_seven_choose_five(variant):
    deck = full_deck(6 if variant else 2)
    rng = SeededRng(2024 + variant)
    for _ in range(1500):
        dealt = rng.sample(deck, 9)
        board = dealt[4:]
        a = evaluate_cards(dealt[:2] + board, variant)
        b = evaluate_cards(dealt[2:4] + board, variant)
        oa = best_of_seven([card_str(c) for c in dealt[:2] + board], variant)
        ob = best_of_seven([card_str(c) for c in dealt[2:4] + board], variant)
        assert a.category.name.lower() == _name(oa[1])
        assert (a > b) == ((oa[0], oa[2]) > (ob[0], ob[2]))
        assert (a == b) == ((oa[0], oa[2]) == (ob[0], ob[2]))


def _name(oracle_cat: str) -> str:
    return {"high": "high_card"}.get(oracle_cat, oracle_cat)


# -- betting ----------------------------------------------------------------------


def test_short_stack_facing_a_raise_can_only_fold_or_call():
    # seat 1 is the big blind with 30 chips; the button raises to 100
    st = STD.initial_state(1, stacks=[2000, 30], button=0)
    assert st.to_act == 0
    st = STD.apply_move(st, "raise:100")
    legal = STD.legal_moves(st)
    assert list(legal) == ["fold", "call"]


def test_fold_awards_the_pot():
    st = STD.initial_state(1)
    sb = st.to_act
    after = STD.apply_move(st, "fold")
    assert after.hand_no == 2
    assert after.last_hand[1][sb] == -10 and after.last_hand[1][1 - sb] == 10


def test_min_raise_rules():
    st = STD.initial_state(3)
    legal = STD.legal_moves(st)
    assert "raise:40" in legal and "raise:39" not in legal
    with pytest.raises(IllegalMove):
        STD.apply_move(st, "raise:39")
    st = STD.apply_move(st, "raise:100")  # raise of 80
    legal = STD.legal_moves(st)
    assert "raise:180" in legal and "raise:179" not in legal


def test_check_only_without_outstanding_bet():
    st = STD.initial_state(3)
    assert "check" not in STD.legal_moves(st)
    st = STD.apply_move(st, "call")
    assert "check" in STD.legal_moves(st)  # big blind option


def test_side_pots_against_oracle():
    for seed in range(60):
        rng = SeededRng(seed)
        stacks = [rng.randint(50, 3000) for _ in range(3)]
        st = STD.initial_state(seed, seats=3, stacks=stacks, button=0)
        hand = st.hand_no
        while st.hand_no == hand and not st.finished:
            legal = STD.legal_moves(st)
            st = STD.apply_move(st, "allin" if "allin" in legal else "call")
        no, net, board, shown = st.last_hand
        assert sum(net) == 0
        board_s = [card_str(c) for c in board]
        values = {s: best_of_seven(h.split() + board_s) for s, h in shown}
        expected = _oracle_payout(stacks, values, button=0)
        assert list(net) == [expected[s] - stacks[s] for s in range(3)], seed


def _oracle_payout(contrib, values, button):
    n = len(contrib)
    pay = [0] * n
    order = [(button + k) % n for k in range(1, n + 1)]
    prev = 0
    for level in sorted(set(contrib)):
        layer = sum(min(c, level) - min(c, prev) for c in contrib)
        eligible = [s for s in values if contrib[s] >= level]
        top = max((values[s][0], values[s][2]) for s in eligible)
        winners = [s for s in order if s in eligible and (values[s][0], values[s][2]) == top]
        for i, s in enumerate(winners):
            pay[s] += layer // len(winners) + (1 if i < layer % len(winners) else 0)
        prev = level
    return pay


# -- tournaments --------------------------------------------------------------------


def _always(move_pref):
    def policy(state, legal, seat):
        for m in move_pref:
            if m in legal:
                return m
        return legal[0]
    return policy


def test_folder_loses_to_caller():
    st = STD.initial_state(5)
    res = run_tournament(st, [_always(["fold", "check"]), _always(["call", "check"])])
    assert res.winner == 1
    assert res.outcome.detail == "sole survivor"


def test_chip_conservation_after_every_hand():
    for seed in range(10):
        n = 2 + seed % 5
        st = STD.initial_state(seed, seats=n)
        bots = [builtin_bot("random", "holdem", seed * 31 + s) for s in range(n)]
        checks = []
        res = run_tournament(st, bots, on_hand=lambda s: checks.append(sum(s.stacks) + s.pot))
        assert all(c == n * 2000 for c in checks) and checks
        assert sum(res.outcome.results) == n * 2000


def test_hand_cap_ranks_by_stack():
    st = STD.initial_state(8, seats=3, max_hands=6)
    res = run_tournament(st, [_always(["check", "call"])] * 3)
    chips = res.outcome.results
    assert res.outcome.extra["hands"] == 6
    assert [chips[s] for s in res.ranking] == sorted(chips, reverse=True)
    assert "hand cap" in res.outcome.detail


def test_blinds_double_every_24_hands():
    st = STD.initial_state(8, seats=2)
    seen = {}
    res = run_tournament(st, [_always(["check", "call"])] * 2,
                         on_hand=lambda s: seen.setdefault(s.hand_no, (s.sb, s.bb)))
    assert seen.get(2) == (10, 20)
    if 25 in seen:
        assert seen[25] == (20, 40)
    assert res.outcome.extra["hands"] <= 720


def test_failed_agent_folds_out():
    def crash(state, legal, seat):
        raise AgentFailure(seat, "gone")

    st = STD.initial_state(4, seats=3)
    res = run_tournament(st, [crash, _always(["call", "check"]), _always(["call", "check"])])
    assert 0 in res.failed
    assert res.winner != 0


def test_seat_view_hides_other_hole_cards():
    st = STD.initial_state(4, seats=3)
    view = json.loads(STD.serialize(st, 1))
    assert list(view["hole"]) == ["1"]
    assert len(json.loads(STD.serialize(st))["hole"]) == 3


def test_tournament_score():
    results = [{"participants": ["a", "b"], "scores": {"a": 1.0 if i < 3 else 0.0}} for i in range(10)]
    assert tournament_score(results, "a") == pytest.approx(0.3)
    assert tournament_score(results[:3], "a") == 1.0
    with pytest.raises(NoParticipation):
        tournament_score(results, "z")


def test_equal_random_bots_split_wins_evenly():
    wins = Counter()
    rounds = 240
    for t in range(rounds):
        st = STD.initial_state(t, seats=12, initial_chips=200, small_blind=10, blind_period=6)
        bots = [builtin_bot("random", "holdem", t * 100 + s) for s in range(12)]
        res = run_tournament(st, bots)
        for s, v in enumerate(res.outcome.scores):
            wins[s] += v
    for s in range(12):
        assert abs(wins[s] / rounds - 1 / 12) <= 0.05
