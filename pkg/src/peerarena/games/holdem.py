"""No-limit Texas Hold'em freeze-out tournaments for 2 to 12 seats.

One game state is a whole tournament: hands are dealt from a counter-based
RNG stored in the state, so ``apply_move`` stays a pure function. Blinds start
at 10/20 and double every 24 hands; play stops at a sole survivor or after
720 hands, when seats are ranked by chips.

The variant ("six-plus") strips ranks 2-5 from the deck, counts A-6-7-8-9 as
the lowest straight and ranks a flush above a full house.

Move tokens: ``fold``, ``check``, ``call``, ``raise:<to>`` where ``<to>`` is the
seat's total bet on the current street after raising, and ``allin``. A call
for the whole remaining stack is spelled ``call``; ``allin`` is only offered
when it puts in more than a call.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterator, NamedTuple, Sequence

from ..cards import CardError, card_str, full_deck, parse_card, rank_of, suit_of
from ..kernel import (
    Engine,
    Game,
    GameId,
    IllegalMove,
    InvalidSetup,
    AgentFailure,
    Mode,
    NotTerminal,
    RawOutcome,
    TerminalState,
    Termination,
    get_engine,
    register,
)
from ..rng import SeededRng

INITIAL_CHIPS = 2000
SMALL_BLIND = 10
BLIND_PERIOD = 24
MAX_HANDS = 720
MAX_SEATS = 12
STREETS = ("preflop", "flop", "turn", "river")


class DuplicateCard(CardError):
    pass


class CardNotInDeck(CardError):
    pass


class HandRankClass(enum.IntEnum):
    HIGH_CARD = 0
    PAIR = 1
    TWO_PAIR = 2
    TRIPS = 3
    STRAIGHT = 4
    FLUSH = 5
    FULL_HOUSE = 6
    QUADS = 7
    STRAIGHT_FLUSH = 8
    ROYAL_FLUSH = 9


def class_order(variant: bool, trips_beat_straight: bool = False) -> list[HandRankClass]:
    """Hand classes from weakest to strongest under the given rules."""
    order = list(HandRankClass)
    if variant:
        i, j = order.index(HandRankClass.FLUSH), order.index(HandRankClass.FULL_HOUSE)
        order[i], order[j] = order[j], order[i]
    if trips_beat_straight:
        i, j = order.index(HandRankClass.TRIPS), order.index(HandRankClass.STRAIGHT)
        order[i], order[j] = order[j], order[i]
    return order


class HandValue(NamedTuple):
    """Comparable hand value: higher tuples win."""

    strength: int
    category: HandRankClass
    tiebreak: tuple[int, ...]


def build_deck(mode: Mode | str) -> list[int]:
    return full_deck(6 if Mode(mode) is Mode.VARIANT else 2)


def _straight_high(ranks: set[int], variant: bool) -> int:
    for high in range(14, 5, -1):
        if all(r in ranks for r in range(high - 4, high + 1)):
            return high
    if 14 in ranks:
        low = (6, 7, 8, 9) if variant else (2, 3, 4, 5)
        if all(r in ranks for r in low):
            return low[-1]
    return 0


def evaluate_cards(cards: Sequence[int], variant: bool = False,
                   trips_beat_straight: bool = False) -> HandValue:
    """Best five-card value among ``cards`` (5 to 7 distinct cards)."""
    order = class_order(variant, trips_beat_straight)
    strength = {c: i for i, c in enumerate(order)}
    counts = Counter(rank_of(c) for c in cards)
    by_suit: dict[int, list[int]] = {}
    for c in cards:
        by_suit.setdefault(suit_of(c), []).append(rank_of(c))
    options: list[tuple[HandRankClass, tuple[int, ...]]] = []

    for ranks in by_suit.values():
        if len(ranks) >= 5:
            high = _straight_high(set(ranks), variant)
            if high:
                cat = HandRankClass.ROYAL_FLUSH if high == 14 else HandRankClass.STRAIGHT_FLUSH
                options.append((cat, (high,)))
            options.append((HandRankClass.FLUSH, tuple(sorted(ranks, reverse=True)[:5])))
    high = _straight_high(set(counts), variant)
    if high:
        options.append((HandRankClass.STRAIGHT, (high,)))

    # rank groups sorted by (count, rank) descending
    groups = sorted(counts.items(), key=lambda kv: (kv[1], kv[0]), reverse=True)
    distinct = sorted(counts, reverse=True)

    def kickers(exclude: set[int], n: int) -> tuple[int, ...]:
        return tuple(r for r in distinct if r not in exclude)[:n]

    quads = [r for r, n in groups if n == 4]
    trips = sorted((r for r, n in groups if n == 3), reverse=True)
    pairs = sorted((r for r, n in groups if n == 2), reverse=True)
    if quads:
        options.append((HandRankClass.QUADS, (quads[0],) + kickers({quads[0]}, 1)))
    if trips and (len(trips) > 1 or pairs):
        t = trips[0]
        p = max([r for r in trips[1:]] + pairs)
        options.append((HandRankClass.FULL_HOUSE, (t, p)))
    if trips:
        options.append((HandRankClass.TRIPS, (trips[0],) + kickers({trips[0]}, 2)))
    if len(pairs) >= 2:
        a, b = pairs[0], pairs[1]
        options.append((HandRankClass.TWO_PAIR, (a, b) + kickers({a, b}, 1)))
    if pairs:
        options.append((HandRankClass.PAIR, (pairs[0],) + kickers({pairs[0]}, 3)))
    options.append((HandRankClass.HIGH_CARD, tuple(distinct[:5])))
    cat, tb = max(options, key=lambda o: (strength[o[0]], o[1]))
    return HandValue(strength[cat], cat, tb)


def evaluate_hand(hole: Sequence[int | str], board: Sequence[int | str],
                  mode: Mode | str = Mode.STANDARD, trips_beat_straight: bool = False) -> HandValue:
    """Evaluate two hole cards plus a five-card board, validating the cards."""
    cards = [parse_card(c) if isinstance(c, str) else c for c in [*hole, *board]]
    if len(hole) != 2 or len(board) != 5:
        raise InvalidSetup("need 2 hole cards and 5 board cards")
    if len(set(cards)) != len(cards):
        raise DuplicateCard("duplicate card in hand")
    deck = set(build_deck(mode))
    for c in cards:
        if c not in deck:
            raise CardNotInDeck(f"{card_str(c)} not in the {Mode(mode).value} deck")
    return evaluate_cards(cards, Mode(mode) is Mode.VARIANT, trips_beat_straight)


class HoldemMoves(Sequence[str]):
    """Exhaustive legal-move list with O(1) membership.

    No-limit raises make the list as long as the stack, so raise targets are
    materialised lazily.
    """

    def __init__(self, head: list[str], raise_lo: int, raise_hi: int, tail: list[str]):
        self.head = head
        self.raise_lo = raise_lo
        self.raise_hi = raise_hi  # inclusive; empty range when lo > hi
        self.tail = tail

    @property
    def n_raises(self) -> int:
        return max(0, self.raise_hi - self.raise_lo + 1)

    def __len__(self) -> int:
        return len(self.head) + self.n_raises + len(self.tail)

    def __getitem__(self, i):  # type: ignore[override]
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        if i < len(self.head):
            return self.head[i]
        i -= len(self.head)
        if i < self.n_raises:
            return f"raise:{self.raise_lo + i}"
        return self.tail[i - self.n_raises]

    def __iter__(self) -> Iterator[str]:
        yield from self.head
        for amount in range(self.raise_lo, self.raise_hi + 1):
            yield f"raise:{amount}"
        yield from self.tail

    def __contains__(self, move: object) -> bool:
        if not isinstance(move, str):
            return False
        if move in self.head or move in self.tail:
            return True
        if move.startswith("raise:"):
            amount = move[6:]
            if amount.isdigit() and str(int(amount)) == amount:
                return self.raise_lo <= int(amount) <= self.raise_hi
        return False

    def kinds(self) -> list[str]:
        return self.head + (["raise"] if self.n_raises else []) + self.tail


@dataclass(frozen=True, eq=False)
class HoldemState:
    game_id: GameId
    n: int
    seed: int
    rng_pos: int
    stacks: tuple[int, ...]
    button: int
    hand_no: int
    sb: int
    bb: int
    hole: tuple[tuple[int, ...], ...]
    board: tuple[int, ...]
    deck: tuple[int, ...]
    street: int
    bets: tuple[int, ...]
    contrib: tuple[int, ...]
    in_hand: tuple[bool, ...]
    all_in: tuple[bool, ...]
    pending: tuple[bool, ...]
    can_raise: tuple[bool, ...]
    current_bet: int
    min_raise: int
    to_act: int
    eliminated: tuple[int, ...] = ()
    finished: bool = False
    last_hand: tuple = ()  # (hand_no, net chip change per seat, board, shown hands)
    config: tuple = ()  # (initial_chips, small_blind, blind_period, max_hands, trips_beat_straight)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def pot(self) -> int:
        return sum(self.contrib)

    @property
    def variant(self) -> bool:
        return self.game_id.mode is Mode.VARIANT

    def total_chips(self) -> int:
        return sum(self.stacks) + self.pot

    def key(self) -> tuple:
        return tuple(getattr(self, f) for f in self.__dataclass_fields__ if f != "_cache")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, HoldemState) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


class _Work:
    """Mutable scratch copy of a state used while applying one action."""

    def __init__(self, st: HoldemState):
        self.st = st
        self.stacks = list(st.stacks)
        self.hole = list(st.hole)
        self.board = list(st.board)
        self.deck = list(st.deck)
        self.bets = list(st.bets)
        self.contrib = list(st.contrib)
        self.in_hand = list(st.in_hand)
        self.all_in = list(st.all_in)
        self.pending = list(st.pending)
        self.can_raise = list(st.can_raise)
        self.current_bet = st.current_bet
        self.min_raise = st.min_raise
        self.to_act = st.to_act
        self.street = st.street
        self.button = st.button
        self.hand_no = st.hand_no
        self.sb, self.bb = st.sb, st.bb
        self.rng_pos = st.rng_pos
        self.eliminated = list(st.eliminated)
        self.finished = st.finished
        self.last_hand = st.last_hand
        self.start_stacks = None

    def freeze(self) -> HoldemState:
        st = self.st
        return HoldemState(
            st.game_id, st.n, st.seed, self.rng_pos, tuple(self.stacks), self.button, self.hand_no,
            self.sb, self.bb, tuple(self.hole), tuple(self.board), tuple(self.deck), self.street,
            tuple(self.bets), tuple(self.contrib), tuple(self.in_hand), tuple(self.all_in),
            tuple(self.pending), tuple(self.can_raise), self.current_bet, self.min_raise,
            self.to_act, tuple(self.eliminated), self.finished, self.last_hand, st.config,
        )

    def pay(self, seat: int, amount: int) -> None:
        amount = min(amount, self.stacks[seat])
        self.stacks[seat] -= amount
        self.bets[seat] += amount
        self.contrib[seat] += amount
        if self.stacks[seat] == 0:
            self.all_in[seat] = True


def _next_seat(n: int, start: int, ok) -> int | None:
    for k in range(1, n + 1):
        s = (start + k) % n
        if ok(s):
            return s
    return None


class HoldemEngine(Engine):
    def __init__(self, mode: Mode):
        self.game_id = GameId(Game.HOLDEM, mode)
        self.seat_labels = tuple(f"Seat{i}" for i in range(MAX_SEATS))

    def num_seats(self, st: HoldemState) -> int:
        return st.n

    # -- setup ---------------------------------------------------------
    def initial_state(self, seed: int = 0, **params: Any) -> HoldemState:
        n = int(params.pop("seats", 2))
        chips = int(params.pop("initial_chips", INITIAL_CHIPS))
        small = int(params.pop("small_blind", SMALL_BLIND))
        period = int(params.pop("blind_period", BLIND_PERIOD))
        max_hands = int(params.pop("max_hands", MAX_HANDS))
        tbs = bool(params.pop("trips_beat_straight", False))
        stacks = params.pop("stacks", None)
        button = int(params.pop("button", 0))
        if params:
            raise InvalidSetup(f"unknown holdem params {sorted(params)}")
        if not 2 <= n <= MAX_SEATS:
            raise InvalidSetup(f"holdem needs 2..{MAX_SEATS} seats, got {n}")
        if chips <= 0 or small <= 0 or period <= 0 or max_hands <= 0:
            raise InvalidSetup("chips, blinds, blind period and hand cap must be positive")
        stacks = tuple(int(x) for x in stacks) if stacks is not None else (chips,) * n
        if len(stacks) != n or any(x < 0 for x in stacks) or sum(1 for x in stacks if x) < 2:
            raise InvalidSetup("need a stack per seat and at least two funded seats")
        empty = (0,) * n
        flags = (False,) * n
        st = HoldemState(
            self.game_id, n, seed, 0, stacks, (button - 1) % n, 0, 0, 0, ((),) * n, (), (), 0,
            empty, empty, flags, flags, flags, flags, 0, 0, 0,
            config=(chips, small, period, max_hands, tbs),
        )
        w = _Work(st)
        self._start_hand(w)
        return w.freeze()

    # -- hand flow -----------------------------------------------------
    def _start_hand(self, w: _Work) -> None:
        st = w.st
        n = st.n
        _, small, period, max_hands, _ = st.config
        live = [s for s in range(n) if w.stacks[s] > 0]
        if len(live) <= 1 or w.hand_no >= max_hands:
            w.finished = True
            w.hole = [()] * n
            w.in_hand = [False] * n
            w.pending = [False] * n
            return
        w.hand_no += 1
        level = (w.hand_no - 1) // period
        w.sb, w.bb = small * 2 ** level, 2 * small * 2 ** level
        w.button = _next_seat(n, w.button, lambda s: w.stacks[s] > 0)
        w.bets = [0] * n
        w.contrib = [0] * n
        w.in_hand = [w.stacks[s] > 0 for s in range(n)]
        w.all_in = [False] * n
        w.board = []
        w.street = 0
        w.start_stacks = list(w.stacks)

        rng = SeededRng(st.seed, w.rng_pos)
        deck = build_deck(st.game_id.mode)
        rng.shuffle(deck)
        w.rng_pos = rng.position
        hole: list[tuple[int, ...]] = [()] * n
        order = [(w.button + k) % n for k in range(1, n + 1)]
        dealt = [s for s in order if w.in_hand[s]]
        for s in dealt:
            hole[s] = (deck.pop(), deck.pop())
        w.hole = hole
        w.deck = deck

        if len(live) == 2:
            sb_seat = w.button
            bb_seat = _next_seat(n, w.button, lambda s: w.in_hand[s])
        else:
            sb_seat = _next_seat(n, w.button, lambda s: w.in_hand[s])
            bb_seat = _next_seat(n, sb_seat, lambda s: w.in_hand[s])
        w.pay(sb_seat, w.sb)
        w.pay(bb_seat, w.bb)
        w.current_bet = w.bb
        w.min_raise = w.bb
        w.can_raise = [True] * n
        w.pending = [w.in_hand[s] and not w.all_in[s] for s in range(n)]
        w.to_act = bb_seat
        self._advance(w, bb_seat)

    def _advance(self, w: _Work, last: int) -> None:
        """Find the next seat to act, moving through streets and hands as needed."""
        n = w.st.n
        while True:
            if sum(w.in_hand) == 1:
                self._award_uncontested(w)
                self._start_hand(w)
                return
            nxt = _next_seat(
                n, last,
                lambda s: w.in_hand[s] and not w.all_in[s] and (w.pending[s] or w.bets[s] < w.current_bet),
            )
            if nxt is not None:
                w.to_act = nxt
                return
            # betting round closed
            can_act = sum(1 for s in range(n) if w.in_hand[s] and not w.all_in[s])
            if w.street == 3 or (can_act <= 1 and len(w.board) == 5):
                self._showdown(w)
                self._start_hand(w)
                return
            self._next_street(w)
            if can_act <= 1:
                continue  # run the board out without betting
            w.pending = [w.in_hand[s] and not w.all_in[s] for s in range(n)]
            last = w.button

    def _next_street(self, w: _Work) -> None:
        w.street += 1
        need = 3 if w.street == 1 else 1
        for _ in range(need):
            w.board.append(w.deck.pop())
        w.bets = [0] * w.st.n
        w.current_bet = 0
        w.min_raise = w.bb
        w.can_raise = [True] * w.st.n
        w.pending = [False] * w.st.n

    def _award_uncontested(self, w: _Work) -> None:
        winner = w.in_hand.index(True)
        w.stacks[winner] += sum(w.contrib)
        self._finish_hand(w, {})

    def _showdown(self, w: _Work) -> None:
        st = w.st
        n = st.n
        while len(w.board) < 5:
            w.board.append(w.deck.pop())
        tbs = st.config[4]
        values = {
            s: evaluate_cards(w.hole[s] + tuple(w.board), st.variant, tbs)
            for s in range(n) if w.in_hand[s]
        }
        contrib = w.contrib
        levels = sorted({contrib[s] for s in values})
        prev = 0
        awarded = 0
        # odd chips go to the first winner left of the button
        seat_order = [(w.button + k) % n for k in range(1, n + 1)]
        for level in levels:
            amount = sum(min(c, level) - min(c, prev) for c in contrib)
            eligible = [s for s in values if contrib[s] >= level]
            best = max(values[s] for s in eligible)
            winners = [s for s in seat_order if s in eligible and values[s] == best]
            share, odd = divmod(amount, len(winners))
            for i, s in enumerate(winners):
                w.stacks[s] += share + (1 if i < odd else 0)
            awarded += amount
            prev = level
        assert awarded == sum(contrib), "side pots must distribute the whole pot"
        self._finish_hand(w, {s: card_str(w.hole[s][0]) + " " + card_str(w.hole[s][1]) for s in values})

    def _finish_hand(self, w: _Work, shown: dict[int, str]) -> None:
        start = w.start_stacks or [w.stacks[s] + w.contrib[s] for s in range(w.st.n)]
        net = tuple(w.stacks[s] - start[s] for s in range(w.st.n))
        w.last_hand = (w.hand_no, net, tuple(w.board), tuple(sorted(shown.items())))
        busted = [s for s in range(w.st.n) if w.hole[s] and w.stacks[s] == 0]
        busted.sort(key=lambda s: (start[s], s))
        w.eliminated.extend(busted)
        w.contrib = [0] * w.st.n
        w.bets = [0] * w.st.n
        w.start_stacks = None

    # -- core interface ------------------------------------------------
    def legal_moves(self, st: HoldemState) -> HoldemMoves:
        if st.finished:
            raise TerminalState("tournament is over")
        moves = st._cache.get("moves")
        if moves is not None:
            return moves
        s = st.to_act
        to_call = st.current_bet - st.bets[s]
        stack = st.stacks[s]
        head = []
        if to_call > 0:
            head = ["fold", "call"]
        else:
            head = ["check"]
        lo, hi = 1, 0
        tail = []
        if stack > to_call and st.can_raise[s]:
            lo = st.current_bet + st.min_raise
            hi = st.bets[s] + stack - 1
            tail = ["allin"]
        moves = HoldemMoves(head, lo, hi, tail)
        st._cache["moves"] = moves
        return moves

    def apply_move(self, st: HoldemState, move: str) -> HoldemState:
        if st.finished:
            raise TerminalState("tournament is over")
        if move not in self.legal_moves(st):
            raise IllegalMove(move)
        w = _Work(st)
        w.start_stacks = [st.stacks[i] + st.contrib[i] for i in range(st.n)]
        s = st.to_act
        n = st.n
        if move == "fold":
            w.in_hand[s] = False
        elif move == "call":
            w.pay(s, st.current_bet - st.bets[s])
        elif move != "check":
            target = st.bets[s] + st.stacks[s] if move == "allin" else int(move[6:])
            w.pay(s, target - st.bets[s])
            increase = target - st.current_bet
            if increase > 0:
                if increase >= st.min_raise:
                    w.min_raise = increase
                    for o in range(n):
                        w.can_raise[o] = True
                for o in range(n):
                    if o != s and w.in_hand[o] and not w.all_in[o]:
                        w.pending[o] = True
                w.current_bet = target
        w.pending[s] = False
        w.can_raise[s] = False
        self._advance(w, s)
        return w.freeze()

    def is_terminal(self, st: HoldemState) -> bool:
        return st.finished

    def to_move(self, st: HoldemState) -> int:
        return st.to_act

    def standings(self, st: HoldemState, loser: int | None = None) -> list[int]:
        """Seats from first place to last."""
        alive = [s for s in range(st.n) if s not in st.eliminated and s != loser]
        alive.sort(key=lambda s: (-(st.stacks[s] + st.contrib[s]), s))
        out = alive + list(reversed(st.eliminated))
        if loser is not None:
            out.append(loser)
        return out

    def outcome(self, st: HoldemState) -> RawOutcome:
        if not st.finished:
            raise NotTerminal("tournament still running")
        return self._outcome(st, Termination.NORMAL)

    def _outcome(self, st: HoldemState, termination: Termination, loser: int | None = None) -> RawOutcome:
        chips = [st.stacks[s] + st.contrib[s] for s in range(st.n)]
        ranked = list(chips)
        if loser is not None:
            ranked[loser] = -1
        top = max(ranked)
        leaders = [s for s in range(st.n) if ranked[s] == top]
        scores = tuple(1.0 / len(leaders) if s in leaders else 0.0 for s in range(st.n))
        if loser is not None:
            detail = f"{self.seat_labels[loser]} forfeits"
        elif sum(1 for c in chips if c > 0) == 1:
            detail = "sole survivor"
        else:
            detail = f"hand cap {st.config[3]} reached, ranked by chips"
        extra = {"ranking": self.standings(st, loser), "hands": st.hand_no, "eliminated": list(st.eliminated)}
        return RawOutcome(tuple(chips), scores, termination, detail, extra)

    def forfeit(self, st: HoldemState, seat: int, termination: Termination) -> RawOutcome:
        return self._outcome(st, termination, loser=seat)

    def default_move(self, st: HoldemState) -> str:
        moves = self.legal_moves(st)
        return "check" if "check" in moves else "fold"

    def serialize(self, st: HoldemState, seat: int | None = None) -> str:
        view = {
            "hand": st.hand_no,
            "button": st.button,
            "blinds": [st.sb, st.bb],
            "stacks": list(st.stacks),
            "bets": list(st.bets),
            "pot": st.pot,
            "street": STREETS[st.street],
            "board": [card_str(c) for c in st.board],
            "in_hand": list(st.in_hand),
            "all_in": list(st.all_in),
            "to_act": st.to_act,
            "current_bet": st.current_bet,
            "min_raise": st.min_raise,
            "finished": st.finished,
            "eliminated": list(st.eliminated),
        }
        if seat is None:
            view["hole"] = {str(s): [card_str(c) for c in h] for s, h in enumerate(st.hole) if h}
        else:
            view["seat"] = seat
            view["hole"] = {str(seat): [card_str(c) for c in st.hole[seat]]} if st.hole[seat] else {}
        if st.last_hand:
            no, net, board, shown = st.last_hand
            view["last_hand"] = {
                "hand": no, "net": list(net), "board": [card_str(c) for c in board],
                "shown": {str(k): v for k, v in shown},
            }
        return json.dumps(view, sort_keys=True, separators=(",", ":"))


class NoParticipation(ValueError):
    pass


@dataclass
class TournamentResult:
    winner: int | None  # None when the hand cap leaves tied chip leaders
    ranking: list[int]
    eliminated: list[int]
    outcome: RawOutcome
    moves: list[str]
    failed: dict[int, str]


def run_tournament(state: HoldemState, policies: Sequence[Any], on_hand=None) -> TournamentResult:
    """Play ``state`` to the end. ``policies[seat](state, legal, seat)`` returns a move.

    A policy raising :class:`AgentFailure` is replaced by check-or-fold for the
    rest of the tournament. ``on_hand(state)`` runs after every completed hand.
    """
    engine = get_engine(state.game_id)
    failed: dict[int, str] = {}
    moves: list[str] = []
    hand = state.hand_no
    while not state.finished:
        seat = state.to_act
        legal = engine.legal_moves(state)
        move = None
        if seat not in failed:
            try:
                move = policies[seat](state, legal, seat)
            except AgentFailure as exc:
                failed[seat] = exc.reason or "agent failure"
        if seat in failed or move not in legal:
            move = engine.default_move(state)
        moves.append(move)
        state = engine.apply_move(state, move)
        if on_hand is not None and (state.hand_no != hand or state.finished):
            on_hand(state)
            hand = state.hand_no
    out = engine.outcome(state)
    leaders = [s for s, v in enumerate(out.scores) if v == 1.0]
    return TournamentResult(
        leaders[0] if leaders else None, out.extra["ranking"], list(state.eliminated), out, moves, failed
    )


def tournament_score(results: Sequence[dict[str, Any]], slot: str) -> float:
    """Share of the tournaments ``slot`` entered that it won.

    Each result is ``{"participants": [...], "scores": {slot: score}}`` where a
    win scores 1 (chip leaders tied at the hand cap split the point).
    """
    played = [r for r in results if slot in r["participants"]]
    if not played:
        raise NoParticipation(slot)
    return sum(r["scores"].get(slot, 0.0) for r in played) / len(played)


for _mode in Mode:
    register(HoldemEngine(_mode))
