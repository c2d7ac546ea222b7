"""Strategy slots and the scoring matrix W.

Rows and columns are strategy slots ``agent@round``. ``W[a][b]`` is slot a's
mean normalized score against slot b; missing cells, including the diagonal,
are NaN.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .kernel import ArenaError

MATRIX_SCHEMA_VERSION = 1


class MissingCell(ArenaError):
    pass


@dataclass(frozen=True, order=True)
class StrategySlot:
    agent: str
    round: int

    def __str__(self) -> str:
        return f"{self.agent}@{self.round}"

    @classmethod
    def parse(cls, label: str) -> StrategySlot:
        agent, sep, rnd = label.rpartition("@")
        if not sep or not agent or not rnd.isdigit():
            raise ValueError(f"bad slot label {label!r}; expected agent@round")
        return cls(agent, int(rnd))


def make_slots(agents: Sequence[str], rounds: Iterable[int]) -> list[StrategySlot]:
    rounds = list(rounds)
    if len(set(agents)) != len(agents):
        raise ValueError("agent ids must be unique")
    return [StrategySlot(a, n) for a in agents for n in rounds]


class ScoreMatrix:
    """Square matrix over slots; agent and round order follow ``slots``."""

    def __init__(self, slots: Sequence[StrategySlot | str], values: Any = None):
        self.slots = [s if isinstance(s, StrategySlot) else StrategySlot.parse(s) for s in slots]
        self.index = {s: i for i, s in enumerate(self.slots)}
        if len(self.index) != len(self.slots):
            raise ValueError("duplicate slot")
        n = len(self.slots)
        self.values = np.full((n, n), np.nan) if values is None else np.array(values, dtype=float)
        if self.values.shape != (n, n):
            raise ValueError(f"matrix shape {self.values.shape} does not match {n} slots")
        np.fill_diagonal(self.values, np.nan)

    @property
    def agents(self) -> list[str]:
        seen: dict[str, None] = {}
        for s in self.slots:
            seen.setdefault(s.agent, None)
        return list(seen)

    @property
    def rounds(self) -> list[int]:
        return sorted({s.round for s in self.slots})

    def _key(self, slot: StrategySlot | str) -> int:
        if isinstance(slot, str):
            slot = StrategySlot.parse(slot)
        return self.index[slot]

    def __getitem__(self, pair: tuple) -> float:
        a, b = pair
        return float(self.values[self._key(a), self._key(b)])

    def __setitem__(self, pair: tuple, value: float) -> None:
        a, b = pair
        i, j = self._key(a), self._key(b)
        if i == j:
            raise ValueError("diagonal cells are ignored")
        self.values[i, j] = value

    def cell(self, a, b) -> float:
        """Like indexing but raises MissingCell for an empty cell."""
        v = self[a, b]
        if math.isnan(v):
            raise MissingCell(f"W[{a}][{b}] is missing")
        return v

    def has(self, agent: str, rnd: int) -> bool:
        return StrategySlot(agent, rnd) in self.index

    def complement_violations(self, tol: float = 1e-9) -> list[tuple[str, str, float]]:
        out = []
        n = len(self.slots)
        for i in range(n):
            for j in range(i + 1, n):
                a, b = self.values[i, j], self.values[j, i]
                if not (math.isnan(a) or math.isnan(b)) and abs(a + b - 1) > tol:
                    out.append((str(self.slots[i]), str(self.slots[j]), float(a + b)))
        return out

    def missing_cells(self) -> list[tuple[str, str]]:
        n = len(self.slots)
        return [(str(self.slots[i]), str(self.slots[j]))
                for i in range(n) for j in range(n) if i != j and math.isnan(self.values[i, j])]

    def restrict(self, slots: Sequence[StrategySlot]) -> ScoreMatrix:
        idx = [self.index[s] for s in slots]
        return ScoreMatrix(slots, self.values[np.ix_(idx, idx)])

    def to_dict(self, game: str | None = None, mode: str | None = None) -> dict[str, Any]:
        rows = [[None if math.isnan(v) else float(v) for v in row] for row in self.values]
        d: dict[str, Any] = {"schema_version": MATRIX_SCHEMA_VERSION}
        if game is not None:
            d["game"] = game
            d["mode"] = mode
        d["slots"] = [str(s) for s in self.slots]
        d["values"] = rows
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ScoreMatrix:
        if d.get("schema_version") != MATRIX_SCHEMA_VERSION:
            raise ValueError(f"unsupported matrix schema version {d.get('schema_version')!r}")
        values = [[np.nan if v is None else v for v in row] for row in d["values"]]
        return cls(d["slots"], values)

    def to_json(self, **meta: Any) -> str:
        return json.dumps(self.to_dict(**meta), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_pairs(cls, slots: Sequence[StrategySlot | str],
                   cells: dict[tuple[str, str], float], symmetric: bool = True) -> ScoreMatrix:
        """Build from ``{(a, b): W[a][b]}``; with ``symmetric`` fill complements."""
        m = cls(slots)
        for (a, b), v in cells.items():
            m[a, b] = v
            if symmetric and (b, a) not in cells:
                m[b, a] = 1 - v
        return m

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, ScoreMatrix) and self.slots == other.slots
                and np.array_equal(self.values, other.values, equal_nan=True))

    def __repr__(self) -> str:
        return f"ScoreMatrix({[str(s) for s in self.slots]})"
