"""Hold'em bots: uniform action kinds, a hand-strength rule and Monte-Carlo equity."""

from __future__ import annotations

from ..cards import rank_of, suit_of
from ..games.holdem import HandRankClass, build_deck, evaluate_cards

SAMPLES = 48


def _raise_to(st, legal, target: int) -> str:
    if legal.n_raises:
        return f"raise:{min(max(target, legal.raise_lo), legal.raise_hi)}"
    if "allin" in legal:
        return "allin"
    return "call" if "call" in legal else "check"


def _passive(legal) -> str:
    return "check" if "check" in legal else "fold"


def random_policy(engine, st, legal, rng) -> str:
    kinds = legal.kinds()
    kind = kinds[rng.randbelow(len(kinds))]
    if kind == "raise":
        hi = min(legal.raise_hi, 3 * legal.raise_lo)
        return f"raise:{rng.randint(legal.raise_lo, hi)}"
    return kind


def preflop_strength(hole) -> float:
    a, b = sorted((rank_of(c) for c in hole), reverse=True)
    if a == b:
        return 0.5 + a / 28
    s = (a + b) / 28 * 0.7
    if suit_of(hole[0]) == suit_of(hole[1]):
        s += 0.05
    if a - b == 1:
        s += 0.03
    return s


_MADE = {
    HandRankClass.HIGH_CARD: 0.15,
    HandRankClass.PAIR: 0.45,
    HandRankClass.TWO_PAIR: 0.65,
    HandRankClass.TRIPS: 0.75,
}


def made_strength(hole, board, variant: bool) -> float:
    value = evaluate_cards(tuple(hole) + tuple(board), variant)
    base = _MADE.get(value.category, 0.9)
    if value.category is HandRankClass.PAIR and value.tiebreak[0] >= max(rank_of(c) for c in board):
        base += 0.1  # top pair or an overpair
    return base


def _act(st, legal, strength: float, raise_at: float, call_at: float) -> str:
    seat = st.to_act
    to_call = st.current_bet - st.bets[seat]
    if strength >= raise_at and ("allin" in legal or legal.n_raises):
        return _raise_to(st, legal, st.current_bet + max(st.min_raise, st.pot))
    if to_call == 0:
        return "check"
    if strength >= call_at:
        return "call"
    return "fold"


def greedy(engine, st, legal, rng) -> str:
    hole = st.hole[st.to_act]
    if st.board:
        strength = made_strength(hole, st.board, st.variant)
    else:
        strength = preflop_strength(hole)
    to_call = st.current_bet - st.bets[st.to_act]
    call_at = 0.4 if to_call <= 4 * st.bb else 0.6
    return _act(st, legal, strength, 0.75, call_at)


def equity(st, seat: int, rng, samples: int = SAMPLES) -> float:
    """Share of the pot won against random hands of the live opponents."""
    opponents = min(3, sum(st.in_hand) - 1)
    known = set(st.hole[seat]) | set(st.board)
    unseen = [c for c in build_deck(st.game_id.mode) if c not in known]
    need = 5 - len(st.board)
    won = 0.0
    for _ in range(samples):
        draw = rng.sample(unseen, need + 2 * opponents)
        board = tuple(st.board) + tuple(draw[:need])
        mine = evaluate_cards(st.hole[seat] + board, st.variant)
        theirs = [evaluate_cards(tuple(draw[need + 2 * k: need + 2 * k + 2]) + board, st.variant)
                  for k in range(opponents)]
        best = max(theirs) if theirs else None
        if best is None or mine > best:
            won += 1
        elif mine == best:
            won += 1 / (1 + sum(1 for t in theirs if t == best))
    return won / samples


def search2(engine, st, legal, rng) -> str:
    seat = st.to_act
    eq = equity(st, seat, rng)
    to_call = st.current_bet - st.bets[seat]
    players = sum(st.in_hand)
    pot_odds = to_call / (st.pot + to_call) if to_call else 0.0
    if eq >= min(0.85, 1.6 / players) and ("allin" in legal or legal.n_raises):
        return _raise_to(st, legal, st.current_bet + max(st.min_raise, st.pot))
    if to_call == 0:
        return "check"
    return "call" if eq >= pot_odds else "fold"


POLICIES = {"random": random_policy, "greedy": greedy, "search2": search2}
