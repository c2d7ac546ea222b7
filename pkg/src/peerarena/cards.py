"""Shared playing-card primitives.

Cards are plain ints ``(rank - 2) * 4 + suit`` with ranks 2..14 (ace high)
and suits ordered clubs < diamonds < hearts < spades, which is also the
bridge strain order. The text form is rank then suit, e.g. ``"AS"``, ``"TD"``.
"""

from __future__ import annotations

from typing import Iterable

RANK_CHARS = "23456789TJQKA"
SUIT_CHARS = "CDHS"
CLUBS, DIAMONDS, HEARTS, SPADES = range(4)


class CardError(ValueError):
    pass


def make_card(rank: int, suit: int) -> int:
    return (rank - 2) * 4 + suit


def rank_of(card: int) -> int:
    return (card >> 2) + 2


def suit_of(card: int) -> int:
    return card & 3


def card_str(card: int) -> str:
    return RANK_CHARS[card >> 2] + SUIT_CHARS[card & 3]


def parse_card(text: str) -> int:
    text = text.strip().upper()
    if text.startswith("10"):
        text = "T" + text[2:]
    if len(text) != 2 or text[0] not in RANK_CHARS or text[1] not in SUIT_CHARS:
        raise CardError(f"bad card {text!r}")
    return RANK_CHARS.index(text[0]) * 4 + SUIT_CHARS.index(text[1])


def cards_str(cards: Iterable[int]) -> str:
    return " ".join(card_str(c) for c in cards)


def parse_cards(text: str) -> list[int]:
    return [parse_card(t) for t in text.split()]


def full_deck(min_rank: int = 2) -> list[int]:
    return [c for c in range(52) if rank_of(c) >= min_rank]
