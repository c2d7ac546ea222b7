"""Bridge bots: a point-count auction and simple card-play rules.

Bots only look at what their seat may see: their own hand, dummy after the
opening lead and the cards already played.
"""

from __future__ import annotations

from ..cards import card_str, parse_card, rank_of, suit_of
from ..games.bridge import (
    NOTRUMP,
    _BID_INDEX,
    _trick_winner,
    exchange_token,
    partner,
    side_of,
)

SAMPLES = 16


def hcp(hand) -> int:
    return sum(max(0, rank_of(c) - 10) for c in hand)


def _suit_lengths(hand) -> list[int]:
    lengths = [0] * 4
    for c in hand:
        lengths[suit_of(c)] += 1
    return lengths


def _exchange(st, rng) -> str:
    # pass the lowest cards of the shortest suit
    hand = st.deal.hands[st.player]
    lengths = _suit_lengths(hand)
    ordered = sorted(hand, key=lambda c: (lengths[suit_of(c)], rank_of(c)))
    return exchange_token(ordered[: st.exchange_k])


def auction_call(st, legal) -> str:
    me = st.player
    hand = st.deal.hands[me]
    lengths = _suit_lengths(hand)
    points = hcp(hand) + max(0, max(lengths) - 4)
    partner_strain = None
    for i, call in enumerate(st.calls):
        if call in _BID_INDEX and (st.deal.dealer + i) % 4 == partner(me):
            partner_strain = _BID_INDEX[call] % 5
    combined = points + (12 if partner_strain is not None else 0)
    if partner_strain is not None and (partner_strain == NOTRUMP or lengths[partner_strain] >= 3):
        strain = partner_strain
    else:
        strain = max(range(4), key=lambda s: (lengths[s], s))
        if max(lengths) <= 4 and min(lengths) >= 2:
            strain = NOTRUMP
    # the deepest level the combined points support: 20 for the one level, 3 more per level
    level = (combined - 20) // 3 + 1
    if combined < 12:
        return "P"
    level = max(1, min(level, 7))
    for bid in legal:
        if bid in _BID_INDEX and _BID_INDEX[bid] % 5 == strain:
            return bid if int(bid[0]) <= level else "P"
    return "P"


def _follow_rule(trick, playable, trump, mine_side, leader) -> int:
    """Win cheaply unless partner already holds the trick; otherwise discard low."""
    pos = len(trick)
    if pos == 0:
        return max(playable, key=lambda c: (rank_of(c), suit_of(c)))
    current = _partial_winner(trick, trump)
    winner_seat = (leader + current) % 4
    if side_of(winner_seat) == mine_side and pos >= 2:
        return min(playable, key=lambda c: (rank_of(c), suit_of(c)))
    winners = [c for c in playable if _beats(c, trick[current], trick[0], trump)]
    if winners:
        return min(winners, key=lambda c: (rank_of(c), suit_of(c)))
    return min(playable, key=lambda c: (rank_of(c), suit_of(c)))


def _beats(card: int, best: int, lead: int, trump: int) -> bool:
    if suit_of(card) == suit_of(best):
        return rank_of(card) > rank_of(best)
    return trump != NOTRUMP and suit_of(card) == trump


def _partial_winner(trick, trump) -> int:
    best = 0
    for i in range(1, len(trick)):
        if _beats(trick[i], trick[best], trick[0], trump):
            best = i
    return best


def _playable(hand, trick) -> list[int]:
    if trick:
        follow = [c for c in hand if suit_of(c) == suit_of(trick[0])]
        if follow:
            return follow
    return list(hand)


def greedy(engine, st, legal, rng) -> str:
    if st.phase == "exchange":
        return _exchange(st, rng)
    if st.phase == "auction":
        return auction_call(st, legal)
    playable = [parse_card(m) for m in legal]
    card = _follow_rule(st.trick, playable, st.contract.strain, side_of(st.player), st.leader)
    return card_str(card)


def search2(engine, st, legal, rng) -> str:
    if st.phase != "play" or len(legal) == 1:
        return greedy(engine, st, legal, rng)
    me = st.player
    trump = st.contract.strain
    dummy = partner(st.declarer)
    dummy_visible = bool(st.tricks or st.trick) or me == dummy
    # hidden cards are dealt at random to the seats we cannot see
    visible = {me} | ({dummy} if dummy_visible else set())
    if me == dummy:
        visible.add(st.declarer)
    hidden_seats = [d for d in range(4) if d not in visible]
    pool = [c for d in hidden_seats for c in st.hands[d]]
    order = [(st.leader + k) % 4 for k in range(len(st.trick), 4)]
    playable = [parse_card(m) for m in legal]
    best_value, best = None, []
    for card in playable:
        value = 0.0
        for _ in range(SAMPLES):
            shuffled = list(pool)
            rng.shuffle(shuffled)
            hands = {d: list(st.hands[d]) for d in visible}
            pos = 0
            for d in hidden_seats:
                hands[d] = shuffled[pos:pos + len(st.hands[d])]
                pos += len(st.hands[d])
            trick = list(st.trick) + [card]
            for seat in order[1:]:
                options = _playable(hands[seat], trick)
                trick.append(_follow_rule(trick, options, trump, side_of(seat), st.leader))
            winner = (st.leader + _trick_winner(trick, trump)) % 4
            value += 1.0 if side_of(winner) == side_of(me) else 0.0
        value = value / SAMPLES - rank_of(card) / 100
        if best_value is None or value > best_value:
            best_value, best = value, [card]
        elif value == best_value:
            best.append(card)
    return card_str(best[rng.randbelow(len(best))])


POLICIES = {"greedy": greedy, "search2": search2}
