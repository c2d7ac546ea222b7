"""Duplicate contract bridge: one table of one board per game state.

A state covers the optional card exchange (variant), the auction and the play
of one deal. Duplicate comparison happens above the engine: the same deal is
played twice with the pairs' directions swapped, the two table scores are
turned into IMPs and a 12-board match is converted to victory points.

Tokens: calls are ``P``, ``X``, ``XX`` and bids ``1C`` .. ``7N``; cards are
rank+suit like ``AS`` or ``TD``; the exchange move is ``give:AS,2C``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Mapping, Sequence

from ..cards import CardError, card_str, full_deck, parse_card, rank_of, suit_of
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
)
from ..rng import SeededRng

NORTH, EAST, SOUTH, WEST = range(4)
DIRECTIONS = "NESW"
STRAINS = "CDHSN"  # N is notrump
NOTRUMP = 4
EXCHANGE_K = 2
BOARDS_PER_MATCH = 12

BIDS = tuple(f"{level}{s}" for level in range(1, 8) for s in STRAINS)
_BID_INDEX = {b: i for i, b in enumerate(BIDS)}

# Standard vulnerability over a 16-board cycle: (NS vulnerable, EW vulnerable).
_VUL_CYCLE = "-NEBNEB-EB-NB-NE"
_VUL = {"-": (False, False), "N": (True, False), "E": (False, True), "B": (True, True)}

# Upper bound of each IMP band: a difference above the k-th bound is worth k+1 IMPs.
IMP_BOUNDS = (10, 40, 80, 120, 160, 210, 260, 310, 360, 420, 490, 590, 740, 890,
              1090, 1290, 1490, 1740, 1990, 2240, 2490, 2990, 3490, 3990)


class InvalidContract(ValueError):
    pass


class CardNotHeld(CardError):
    pass


class WrongCount(ValueError):
    pass


def partner(d: int) -> int:
    return (d + 2) % 4


def side_of(d: int) -> int:
    """0 for North/South, 1 for East/West."""
    return d % 2


def board_dealer(board: int) -> int:
    return (board - 1) % 4


def board_vulnerability(board: int) -> tuple[bool, bool]:
    return _VUL[_VUL_CYCLE[(board - 1) % 16]]


@dataclass(frozen=True)
class Contract:
    level: int
    strain: int
    doubled: int = 0  # 0, 1 (doubled) or 2 (redoubled)

    def __post_init__(self) -> None:
        if not 1 <= self.level <= 7 or not 0 <= self.strain <= 4 or self.doubled not in (0, 1, 2):
            raise InvalidContract(repr(self))

    def __str__(self) -> str:
        return f"{self.level}{STRAINS[self.strain]}" + "X" * self.doubled

    @classmethod
    def parse(cls, text: str) -> Contract:
        text = text.strip().upper()
        doubled = len(text) - len(text.rstrip("X"))
        body = text.rstrip("X")
        if body == "":
            raise InvalidContract(text)
        body = body.replace("NT", "N")
        if len(body) != 2 or not body[0].isdigit() or body[1] not in STRAINS or doubled > 2:
            raise InvalidContract(text)
        return cls(int(body[0]), STRAINS.index(body[1]), doubled)


def duplicate_score(contract: Contract | str | None, vulnerable: bool, tricks: int) -> int:
    """Score for the declaring side; ``None`` means the board was passed out."""
    if contract is None:
        return 0
    if isinstance(contract, str):
        contract = Contract.parse(contract)
    if not 0 <= tricks <= 13:
        raise InvalidContract(f"tricks {tricks} out of range")
    level, strain, dbl = contract.level, contract.strain, contract.doubled
    need = level + 6
    if tricks < need:
        down = need - tricks
        if dbl == 0:
            return -down * (100 if vulnerable else 50)
        if vulnerable:
            pen = 200 + 300 * (down - 1)
        else:
            pen = 100 + 200 * min(down - 1, 2) + 300 * max(down - 3, 0)
        return -pen * dbl
    per_trick = 20 if strain < 2 else 30
    trick_score = per_trick * level + (10 if strain == NOTRUMP else 0)
    trick_score *= 2 ** dbl
    score = trick_score
    score += (500 if vulnerable else 300) if trick_score >= 100 else 50
    if level == 6:
        score += 750 if vulnerable else 500
    elif level == 7:
        score += 1500 if vulnerable else 1000
    score += 50 * dbl
    over = tricks - need
    if dbl == 0:
        score += over * per_trick
    else:
        score += over * (200 if vulnerable else 100) * dbl
    return score


def imps(score_open: int, score_closed: int) -> int:
    """IMPs for the pair sitting North/South in the open room.

    Both arguments are North/South-signed table scores of the same deal.
    """
    diff = score_open - score_closed
    value = sum(1 for bound in IMP_BOUNDS if abs(diff) > bound)
    return value if diff >= 0 else -value


def _vp_hundredths(margin: int, boards: int) -> int:
    tau = (math.sqrt(5) - 1) / 2
    blitz = 15 * math.sqrt(boards)
    if margin >= blitz:
        return 2000
    vp = 10 + 10 * (1 - tau ** (3 * margin / blitz)) / (1 - tau ** 3)
    return min(2000, int(math.floor(vp * 100 + 0.5)))


def vp_scale(boards: int = BOARDS_PER_MATCH) -> tuple[int, ...]:
    """Winner's VP (in hundredths) for IMP margins 0, 1, ... up to the blitz."""
    out = []
    margin = 0
    while True:
        v = _vp_hundredths(margin, boards)
        out.append(v)
        if v == 2000:
            break
        margin += 1
    # rounding can leave a step larger than the one before it; move a
    # hundredth down the scale until the steps never grow
    changed = True
    while changed:
        changed = False
        for i in range(1, len(out) - 1):
            if out[i + 1] - out[i] > out[i] - out[i - 1]:
                out[i] += 1
                changed = True
    return tuple(out)


VP_SCALE = vp_scale()


def vp20(imp_diff: int, boards: int = BOARDS_PER_MATCH) -> tuple[float, float]:
    """Convert a match IMP difference into (VP for A, VP for B), summing to 20."""
    scale = VP_SCALE if boards == BOARDS_PER_MATCH else vp_scale(boards)
    margin = abs(int(imp_diff))
    win = scale[min(margin, len(scale) - 1)]
    a, b = (win, 2000 - win) if imp_diff >= 0 else (2000 - win, win)
    return a / 100, b / 100


@dataclass(frozen=True)
class Deal:
    hands: tuple[tuple[int, ...], ...]  # by direction N, E, S, W
    dealer: int = NORTH
    vulnerability: tuple[bool, bool] = (False, False)
    board: int = 1

    def __post_init__(self) -> None:
        cards = [c for h in self.hands for c in h]
        if len(self.hands) != 4 or any(len(h) != 13 for h in self.hands) or sorted(cards) != list(range(52)):
            raise InvalidSetup("a deal must partition the 52 cards into four 13-card hands")

    @classmethod
    def random(cls, seed: int, board: int = 1) -> Deal:
        deck = full_deck()
        SeededRng(seed).shuffle(deck)
        hands = tuple(tuple(sort_hand(deck[13 * i:13 * i + 13])) for i in range(4))
        return cls(hands, board_dealer(board), board_vulnerability(board), board)

    def to_dict(self) -> dict[str, Any]:
        return {
            "hands": {DIRECTIONS[d]: [card_str(c) for c in h] for d, h in enumerate(self.hands)},
            "dealer": DIRECTIONS[self.dealer],
            "vulnerability": list(self.vulnerability),
            "board": self.board,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Deal:
        hands = tuple(tuple(sort_hand(parse_card(c) for c in d["hands"][x])) for x in DIRECTIONS)
        return cls(hands, DIRECTIONS.index(d["dealer"]), tuple(d["vulnerability"]), int(d.get("board", 1)))


def sort_hand(cards) -> list[int]:
    """Display order: spades first, high cards first."""
    return sorted(cards, key=lambda c: (suit_of(c), rank_of(c)), reverse=True)


def exchange_cards(deal: Deal, spec: Mapping[int, Sequence[int]], k: int = EXCHANGE_K) -> Deal:
    """Partners swap the chosen cards simultaneously.

    ``spec`` maps direction to the k cards that player passes to partner;
    directions absent from ``spec`` must have k == 0.
    """
    given = {}
    for d in range(4):
        cards = list(spec.get(d, ()))
        if len(cards) != k or len(set(cards)) != k:
            raise WrongCount(f"{DIRECTIONS[d]} must pass exactly {k} distinct cards")
        for c in cards:
            if c not in deal.hands[d]:
                raise CardNotHeld(f"{DIRECTIONS[d]} does not hold {card_str(c)}")
        given[d] = set(cards)
    hands = []
    for d in range(4):
        kept = [c for c in deal.hands[d] if c not in given[d]]
        hands.append(tuple(sort_hand(kept + sorted(given[partner(d)]))))
    return Deal(tuple(hands), deal.dealer, deal.vulnerability, deal.board)


def exchange_token(cards: Sequence[int]) -> str:
    return "give:" + ",".join(card_str(c) for c in sort_hand(cards))


@dataclass(frozen=True)
class BoardResult:
    contract: Contract | None
    declarer: int | None
    tricks: int
    score_ns: int  # signed points for North/South

    def to_dict(self) -> dict[str, Any]:
        return {
            "contract": str(self.contract) if self.contract else "passed out",
            "declarer": DIRECTIONS[self.declarer] if self.declarer is not None else None,
            "tricks": self.tricks,
            "score_ns": self.score_ns,
        }


@dataclass(frozen=True, eq=False)
class BridgeState:
    game_id: GameId
    deal: Deal  # hands after any exchange
    original: Deal
    exchange_k: int
    selections: tuple  # per direction: tuple of cards or None while choosing
    calls: tuple[str, ...] = ()
    contract: Contract | None = None
    declarer: int | None = None
    hands: tuple[tuple[int, ...], ...] = ()  # cards still held during play
    tricks: tuple[tuple[int, tuple[int, ...]], ...] = ()  # (leader, cards) per completed trick
    trick: tuple[int, ...] = ()
    leader: int = 0
    won: tuple[int, int] = (0, 0)  # tricks by NS, EW
    done: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def phase(self) -> str:
        if self.done:
            return "done"
        if any(s is None for s in self.selections):
            return "exchange"
        if self.contract is None:
            return "auction"
        return "play"

    @property
    def player(self) -> int:
        """Direction whose turn it is (may be dummy)."""
        phase = self.phase
        if phase == "exchange":
            return self.selections.index(None)
        if phase == "auction":
            return (self.deal.dealer + len(self.calls)) % 4
        return (self.leader + len(self.trick)) % 4

    def key(self) -> tuple:
        return (self.game_id, self.deal, self.original, self.exchange_k, self.selections, self.calls,
                self.contract, self.declarer, self.hands, self.tricks, self.trick, self.leader,
                self.won, self.done)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BridgeState) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def result(self) -> BoardResult:
        if not self.done:
            raise NotTerminal("board still in play")
        if self.contract is None:
            return BoardResult(None, None, 0, 0)
        decl_side = side_of(self.declarer)
        tricks = self.won[decl_side]
        vul = self.deal.vulnerability[decl_side]
        score = duplicate_score(self.contract, vul, tricks)
        return BoardResult(self.contract, self.declarer, tricks, score if decl_side == 0 else -score)


def _auction_state(calls: Sequence[str], dealer: int):
    """(index of the last bid, who made it, double level) for a call sequence."""
    last_bid = -1
    bidder = None
    doubled = 0
    for i, c in enumerate(calls):
        who = (dealer + i) % 4
        if c in _BID_INDEX:
            last_bid, bidder, doubled = _BID_INDEX[c], who, 0
        elif c == "X":
            doubled = 1
        elif c == "XX":
            doubled = 2
    return last_bid, bidder, doubled


def _auction_over(calls: Sequence[str]) -> bool:
    if len(calls) >= 4 and all(c == "P" for c in calls):
        return True
    return len(calls) >= 4 and calls[-3:] == ("P", "P", "P") and any(c != "P" for c in calls)


class BridgeEngine(Engine):
    def __init__(self, mode: Mode):
        self.game_id = GameId(Game.BRIDGE, mode)
        self.seat_labels = ("N", "E", "S", "W")

    def initial_state(self, seed: int = 0, **params: Any) -> BridgeState:
        board = int(params.pop("board", 1))
        deal = params.pop("deal", None)
        k = int(params.pop("exchange_k", EXCHANGE_K if self.game_id.mode is Mode.VARIANT else 0))
        if params:
            raise InvalidSetup(f"unknown bridge params {sorted(params)}")
        if self.game_id.mode is Mode.STANDARD and k:
            raise InvalidSetup("card exchange is only available in the variant")
        if not 0 <= k <= 13:
            raise InvalidSetup("exchange_k must be in 0..13")
        if deal is None:
            deal = Deal.random(seed, board)
        elif isinstance(deal, Mapping):
            deal = Deal.from_dict(deal)
        selections = (None,) * 4 if k else ((),) * 4
        return BridgeState(self.game_id, deal, deal, k, selections)

    def legal_moves(self, st: BridgeState) -> list[str]:
        if st.done:
            raise TerminalState("board is over")
        cached = st._cache.get("moves")
        if cached is not None:
            return cached
        phase = st.phase
        me = st.player
        if phase == "exchange":
            hand = st.deal.hands[me]
            moves = [exchange_token(c) for c in combinations(hand, st.exchange_k)]
        elif phase == "auction":
            last_bid, bidder, doubled = _auction_state(st.calls, st.deal.dealer)
            moves = ["P"]
            opponent_bid = bidder is not None and side_of(bidder) != side_of(me)
            if opponent_bid and doubled == 0:
                moves.append("X")
            if bidder is not None and not opponent_bid and doubled == 1:
                moves.append("XX")
            moves.extend(BIDS[last_bid + 1:])
        else:
            hand = st.hands[me]
            if st.trick:
                led = suit_of(st.trick[0])
                follow = [c for c in hand if suit_of(c) == led]
                playable = follow or list(hand)
            else:
                playable = list(hand)
            moves = [card_str(c) for c in sort_hand(playable)]
        st._cache["moves"] = moves
        st._cache["move_set"] = frozenset(moves)
        return moves

    def apply_move(self, st: BridgeState, move: str) -> BridgeState:
        self.legal_moves(st)
        if move not in st._cache["move_set"]:
            raise IllegalMove(move)
        phase = st.phase
        me = st.player
        if phase == "exchange":
            cards = tuple(parse_card(t) for t in move[5:].split(","))
            sel = list(st.selections)
            sel[me] = cards
            if all(s is not None for s in sel):
                deal = exchange_cards(st.original, dict(enumerate(sel)), st.exchange_k)
                return BridgeState(st.game_id, deal, st.original, st.exchange_k, tuple(sel))
            return BridgeState(st.game_id, st.deal, st.original, st.exchange_k, tuple(sel))
        if phase == "auction":
            calls = st.calls + (move,)
            if not _auction_over(calls):
                return BridgeState(st.game_id, st.deal, st.original, st.exchange_k, st.selections, calls)
            last_bid, bidder, doubled = _auction_state(calls, st.deal.dealer)
            if bidder is None:
                return BridgeState(st.game_id, st.deal, st.original, st.exchange_k, st.selections, calls,
                                   done=True)
            strain = last_bid % 5
            contract = Contract(last_bid // 5 + 1, strain, doubled)
            declarer = next(
                (st.deal.dealer + i) % 4 for i, c in enumerate(calls)
                if c in _BID_INDEX and _BID_INDEX[c] % 5 == strain
                and side_of((st.deal.dealer + i) % 4) == side_of(bidder)
            )
            return BridgeState(st.game_id, st.deal, st.original, st.exchange_k, st.selections, calls,
                               contract, declarer, st.deal.hands, leader=(declarer + 1) % 4)
        card = parse_card(move)
        hands = list(st.hands)
        hands[me] = tuple(c for c in hands[me] if c != card)
        trick = st.trick + (card,)
        tricks, leader, won, done = st.tricks, st.leader, st.won, False
        if len(trick) == 4:
            winner = (st.leader + _trick_winner(trick, st.contract.strain)) % 4
            tricks = tricks + ((st.leader, trick),)
            won = (won[0] + (side_of(winner) == 0), won[1] + (side_of(winner) == 1))
            trick, leader = (), winner
            done = len(tricks) == 13
        return BridgeState(st.game_id, st.deal, st.original, st.exchange_k, st.selections, st.calls,
                           st.contract, st.declarer, tuple(hands), tricks, trick, leader, won, done)

    def is_terminal(self, st: BridgeState) -> bool:
        return st.done

    def dummy(self, st: BridgeState) -> int | None:
        return partner(st.declarer) if st.declarer is not None else None

    def to_move(self, st: BridgeState) -> int:
        p = st.player
        if st.phase == "play" and p == self.dummy(st):
            return st.declarer
        return p

    def outcome(self, st: BridgeState) -> RawOutcome:
        res = st.result()
        ns = vp20(imps(res.score_ns, 0))[0] / 20
        scores = (ns, 1 - ns, ns, 1 - ns)
        results = (res.score_ns, -res.score_ns, res.score_ns, -res.score_ns)
        return RawOutcome(results, scores, Termination.NORMAL,
                          str(res.contract) if res.contract else "passed out", res.to_dict())

    def forfeit(self, st: BridgeState, seat: int, termination: Termination) -> RawOutcome:
        lose = side_of(seat)
        scores = tuple(0.0 if side_of(d) == lose else 1.0 for d in range(4))
        return RawOutcome((0, 0, 0, 0), scores, termination, f"{DIRECTIONS[seat]} forfeits",
                          {"forfeit_side": "NS" if lose == 0 else "EW"})

    def default_move(self, st: BridgeState) -> str:
        phase = st.phase
        if phase == "auction":
            return "P"
        if phase == "exchange":
            hand = st.deal.hands[st.player]
            return exchange_token(sorted(hand)[: st.exchange_k])
        legal = [parse_card(m) for m in self.legal_moves(st)]
        return card_str(min(legal))

    def serialize(self, st: BridgeState, seat: int | None = None) -> str:
        view: dict[str, Any] = {
            "board": st.deal.board,
            "dealer": DIRECTIONS[st.deal.dealer],
            "vulnerability": {"NS": st.deal.vulnerability[0], "EW": st.deal.vulnerability[1]},
            "phase": st.phase,
            "exchange_k": st.exchange_k,
            "calls": list(st.calls),
            "contract": str(st.contract) if st.contract else None,
            "declarer": DIRECTIONS[st.declarer] if st.declarer is not None else None,
            "tricks": [[DIRECTIONS[ld], [card_str(c) for c in cs]] for ld, cs in st.tricks],
            "current_trick": [card_str(c) for c in st.trick],
            "leader": DIRECTIONS[st.leader],
            "tricks_won": {"NS": st.won[0], "EW": st.won[1]},
        }
        if not st.done:
            view["to_play"] = DIRECTIONS[st.player]
        in_play = st.contract is not None
        hands = st.hands if in_play else st.deal.hands
        visible = range(4) if seat is None else [seat]
        shown = {}
        for d in visible:
            shown[DIRECTIONS[d]] = [card_str(c) for c in hands[d]] if hands else []
        dummy = self.dummy(st)
        if in_play and dummy is not None and (st.tricks or st.trick) and not st.done:
            shown[DIRECTIONS[dummy]] = [card_str(c) for c in hands[dummy]]
        view["hands"] = shown
        if seat is not None:
            view["seat"] = DIRECTIONS[seat]
            view["playing_for"] = DIRECTIONS[st.player] if not st.done else None
            if st.exchange_k and st.selections[seat] is not None:
                view["passed"] = [card_str(c) for c in st.selections[seat]]
        return json.dumps(view, sort_keys=True, separators=(",", ":"))


def _trick_winner(trick: Sequence[int], trump: int) -> int:
    """Index within ``trick`` of the winning card."""
    suit = trump if trump != NOTRUMP and any(suit_of(c) == trump for c in trick) else suit_of(trick[0])
    return max((i for i in range(4) if suit_of(trick[i]) == suit), key=lambda i: rank_of(trick[i]))


def match_vp(open_ns: Sequence[int], closed_ns: Sequence[int]) -> tuple[int, tuple[float, float]]:
    """IMP total and VPs for the pair that sat North/South in the open room."""
    if len(open_ns) != len(closed_ns):
        raise InvalidSetup("both rooms must play the same boards")
    total = sum(imps(a, b) for a, b in zip(open_ns, closed_ns))
    return total, vp20(total, len(open_ns))


for _mode in Mode:
    register(BridgeEngine(_mode))
