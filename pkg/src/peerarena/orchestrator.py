"""Planning and running tournaments, and folding results into score estimates.

Symmetric games (Gomoku, Chess, Bridge) use a round robin: every slot pair
meets in both seat orientations. Hold'em uses batch tournaments of three
experiment types plus an optional dedicated field for the advance score.

Each plan entry is one match bundle written as ``match_<k>.json``. Seeds are
fixed when the plan is built, so the number of worker threads never changes
a result. Repeat blocks are added until the estimate stops moving.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .gateway import AgentEndpoint, Gateway
from .games.bridge import imps, vp20
from .kernel import (
    AgentFailure,
    ArenaError,
    Game,
    GameId,
    RawOutcome,
    Termination,
    get_engine,
)
from .matrix import MissingCell, ScoreMatrix, StrategySlot
from .rng import SeededRng, derive_seed

RECORD_SCHEMA_VERSION = 1
STABILITY_THRESHOLD = 0.05
EPSILON = 1e-9
MAX_BLOCKS = 4

# games per orientation per pair (Bridge: boards per match, each played in two rooms)
DEFAULT_REPEATS = {Game.GOMOKU: 4, Game.CHESS: 8, Game.BRIDGE: 12, Game.HOLDEM: 4}
BATCH_SIZE = 12

SELF_ACROSS_ROUNDS = 1
SAME_ROUND_ALL = 2
GLOBAL_SHUFFLE = 3
ADVANCE_FIELD = 4  # dedicated tables for the advance score
EXPERIMENT_NAMES = {1: "self_across_rounds", 2: "same_round_all", 3: "global_shuffle", 4: "advance_field"}


class TooFewSlots(ArenaError):
    pass


class EmptySlots(ArenaError):
    pass


# -- plans --------------------------------------------------------------------


@dataclass(frozen=True)
class PlanEntry:
    entry_id: int
    slots: tuple[str, ...]  # pair entries: (a, b); batch entries: seat order
    seed: int
    block: int = 1
    games: int = 1
    experiment: int | None = None
    focus: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self) | {"slots": list(self.slots)}


@dataclass
class SchedulePlan:
    game_id: GameId
    slots: list[StrategySlot]
    entries: list[PlanEntry] = field(default_factory=list)

    @property
    def symmetric(self) -> bool:
        return self.game_id.symmetric


def plan_round_robin(slots: Sequence[StrategySlot], game_id: GameId, seed: int = 0, block: int = 1,
                     repeats: int | None = None, start_id: int = 0) -> SchedulePlan:
    """All slot pairs; each entry plays ``repeats`` games per seat orientation."""
    if not game_id.symmetric:
        raise ArenaError(f"{game_id} is not a symmetric game")
    if len(slots) < 2:
        raise TooFewSlots("a round robin needs at least two slots")
    repeats = repeats or DEFAULT_REPEATS[game_id.game]
    plan = SchedulePlan(game_id, list(slots))
    k = start_id
    for i, a in enumerate(slots):
        for b in slots[i + 1:]:
            entry_seed = derive_seed(seed, str(game_id), block, a, b)
            plan.entries.append(PlanEntry(k, (str(a), str(b)), entry_seed, block, repeats))
            k += 1
    return plan


def _balanced_partition(items: list, size: int) -> list[list]:
    count = math.ceil(len(items) / size)
    base, extra = divmod(len(items), count)
    out, pos = [], 0
    for i in range(count):
        n = base + (1 if i < extra else 0)
        out.append(items[pos:pos + n])
        pos += n
    return out


def plan_batches(slots: Sequence[StrategySlot], experiment: int, batch_size: int = BATCH_SIZE,
                 rng: SeededRng | None = None, game_id: GameId | None = None, repeats: int = 1,
                 block: int = 1, start_id: int = 0, seed: int = 0) -> SchedulePlan:
    """Batch tournaments for an asymmetric game.

    Type 1 seats each agent's strategies from all rounds together, type 2 seats
    all agents of one round together, type 3 shuffles every slot into batches
    of at most ``batch_size`` (reshuffled for each repeat). Type 4 gives each
    slot of round n >= 2 a table against the other agents' round n-1 slots.
    """
    if not slots:
        raise EmptySlots("no slots to schedule")
    game_id = game_id or GameId(Game.HOLDEM)
    rng = rng or SeededRng(derive_seed(seed, str(game_id), "batches", experiment, block))
    plan = SchedulePlan(game_id, list(slots))
    tables: list[tuple[list[StrategySlot], str | None]] = []
    if experiment == SELF_ACROSS_ROUNDS:
        by_agent: dict[str, list[StrategySlot]] = defaultdict(list)
        for s in slots:
            by_agent[s.agent].append(s)
        tables = [(group, None) for group in by_agent.values() if len(group) >= 2]
    elif experiment == SAME_ROUND_ALL:
        by_round: dict[int, list[StrategySlot]] = defaultdict(list)
        for s in slots:
            by_round[s.round].append(s)
        tables = [(by_round[r], None) for r in sorted(by_round) if len(by_round[r]) >= 2]
    elif experiment == GLOBAL_SHUFFLE:
        tables = []
    elif experiment == ADVANCE_FIELD:
        for s in slots:
            field_ = [o for o in slots if o.agent != s.agent and o.round == s.round - 1]
            if field_:
                tables.append(([s] + field_, str(s)))
    else:
        raise ArenaError(f"unknown experiment type {experiment}")

    k = start_id
    for rep in range(repeats):
        if experiment == GLOBAL_SHUFFLE:
            pool = list(slots)
            rng.shuffle(pool)
            tables = [(group, None) for group in _balanced_partition(pool, batch_size) if len(group) >= 2]
        for t, (group, focus) in enumerate(tables):
            if len(group) > batch_size:
                raise ArenaError(f"table of {len(group)} exceeds batch size {batch_size}")
            entry_seed = rng.fork("table", rep, t).next_u64()
            seating = [str(s) for s in group]
            SeededRng(entry_seed).shuffle(seating)
            plan.entries.append(PlanEntry(k, tuple(seating), entry_seed, block, 1, experiment, focus))
            k += 1
    return plan


# -- playing ------------------------------------------------------------------


@dataclass
class GameLog:
    seed: int
    params: dict[str, Any]
    seats: list[str]
    moves: list[str] = field(default_factory=list)
    events: list[dict[str, Any]] = field(default_factory=list)
    forfeit: dict[str, Any] | None = None
    outcome: RawOutcome | None = None
    wire: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "seed": self.seed,
            "params": self.params,
            "seats": self.seats,
            "moves": self.moves,
            "events": self.events,
            "forfeit": self.forfeit,
            "outcome": self.outcome.to_dict() if self.outcome else None,
        }
        if self.wire:
            d["wire"] = self.wire
        return d


def play_game(game_id: GameId, seed: int, params: Mapping[str, Any], seats: Sequence[str],
              endpoints: Mapping[str, AgentEndpoint | None], gateway: Gateway) -> GameLog:
    """Referee one game. ``endpoints[slot]`` is None for a slot that never came up.

    Gomoku and Chess substitute the first legal move for a first offense
    (timeout or illegal answer) and forfeit the offender on the second.
    Hold'em and Bridge substitute their default action every time. An
    unreachable agent forfeits, except in Hold'em where it folds out.
    """
    engine = get_engine(game_id)
    state = engine.initial_state(seed, **params)
    glog = GameLog(seed, dict(params), list(seats))
    strict = game_id.game in (Game.GOMOKU, Game.CHESS)
    offenses: dict[int, int] = defaultdict(int)
    failed = {i for i, slot in enumerate(seats) if endpoints.get(slot) is None}
    bridge = game_id.game is Game.BRIDGE
    seat_slot = (lambda s: seats[s % 2]) if bridge else (lambda s: seats[s])

    def forfeit(seat: int, termination: Termination, detail: str) -> GameLog:
        glog.forfeit = {"seat": seat, "termination": termination.value, "detail": detail}
        glog.outcome = engine.forfeit(state, seat, termination)
        return glog

    if failed and game_id.game is not Game.HOLDEM:
        bad = min(failed)
        return forfeit(bad, Termination.AGENT_FAILURE, f"{seats[bad]} unavailable")
    for seat in sorted(failed):
        glog.events.append({"ply": 0, "seat": seat, "kind": "agent_failure", "detail": "unavailable"})

    while not engine.is_terminal(state):
        seat = engine.to_move(state)
        table_seat = seat % 2 if bridge else seat
        if table_seat in failed:
            move = engine.default_move(state)
        else:
            endpoint = endpoints[seat_slot(seat)]
            try:
                result = gateway.request_move(endpoint, state, glog.moves, seat, salt=seed)
            except AgentFailure as exc:
                glog.events.append({"ply": len(glog.moves), "seat": seat, "kind": "agent_failure",
                                    "detail": exc.reason})
                if game_id.game is Game.HOLDEM:
                    failed.add(seat)
                    move = engine.default_move(state)
                else:
                    return forfeit(seat, Termination.AGENT_FAILURE, exc.reason)
            else:
                if result.wire is not None:
                    glog.wire.append(dict(result.wire, seat=seat, ply=len(glog.moves)))
                move = result.move
                if result.event:
                    glog.events.append({"ply": len(glog.moves), "seat": seat, "kind": result.event,
                                        "detail": result.detail})
                    if strict:
                        offenses[seat] += 1
                        if offenses[seat] >= 2:
                            term = Termination.TIMEOUT if result.event == "timeout" else Termination.ILLEGAL_MOVE
                            return forfeit(seat, term, f"second offense: {result.event}")
        state = engine.apply_move(state, move)
        glog.moves.append(move)
    glog.outcome = engine.outcome(state)
    return glog


@dataclass
class MatchRecord:
    entry: PlanEntry
    game_id: GameId
    scope: str
    games: list[GameLog]
    scores: dict[str, float]
    contributions: list[tuple[str, str, float, float]]  # (a, b, score of a, weight)
    summary: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": RECORD_SCHEMA_VERSION,
            "game": self.game_id.game.value,
            "mode": self.game_id.mode.value,
            "scope": self.scope,
            "entry": self.entry.to_dict(),
            "scores": self.scores,
            "contributions": [list(c) for c in self.contributions],
            "summary": self.summary,
            "games": [g.to_dict() for g in self.games],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> MatchRecord:
        if d.get("schema_version") != RECORD_SCHEMA_VERSION:
            raise ArenaError(f"unsupported record schema version {d.get('schema_version')!r}")
        e = d["entry"]
        entry = PlanEntry(e["entry_id"], tuple(e["slots"]), e["seed"], e["block"], e["games"],
                          e["experiment"], e["focus"])
        games = []
        for g in d["games"]:
            gl = GameLog(g["seed"], g["params"], g["seats"], g["moves"], g["events"], g["forfeit"],
                         RawOutcome.from_dict(g["outcome"]) if g["outcome"] else None, g.get("wire", []))
            games.append(gl)
        return cls(entry, GameId.parse(d["game"], d["mode"]), d["scope"], games, d["scores"],
                   [tuple(c) for c in d["contributions"]], d.get("summary", {}))


def _play_pair(entry: PlanEntry, game_id: GameId, scope: str, endpoints, gateway, params) -> MatchRecord:
    a, b = entry.slots
    games: list[GameLog] = []
    contributions = []
    if game_id.game is Game.BRIDGE:
        open_ns, closed_ns = [], []
        for board in range(1, entry.games + 1):
            deal_seed = derive_seed(entry.seed, "board", board)
            p = dict(params, board=board)
            # open room: a sits North/South; closed room: b does
            g_open = play_game(game_id, deal_seed, p, [a, b], endpoints, gateway)
            g_closed = play_game(game_id, deal_seed, p, [b, a], endpoints, gateway)
            games += [g_open, g_closed]
            if g_open.forfeit or g_closed.forfeit:
                continue
            open_ns.append(g_open.outcome.results[0])
            closed_ns.append(g_closed.outcome.results[0])
        forfeits = [g for g in games if g.forfeit]
        if forfeits:
            # a forfeited table decides the whole match against the offender's side
            g = forfeits[0]
            loser = g.seats[g.forfeit["seat"] % 2]
            score_a = 0.0 if loser == a else 1.0
            if all(endpoints.get(s) is None for s in (a, b)):
                score_a = 0.5
            summary = {"forfeit": loser}
        else:
            total = sum(imps(x, y) for x, y in zip(open_ns, closed_ns))
            vp_a, vp_b = vp20(total)
            score_a = vp_a / 20
            summary = {"imps": total, "vp": [vp_a, vp_b]}
        contributions = [(a, b, score_a, 1.0), (b, a, 1.0 - score_a, 1.0)]
        return MatchRecord(entry, game_id, scope, games, {a: score_a, b: 1.0 - score_a}, contributions, summary)

    both_missing = endpoints.get(a) is None and endpoints.get(b) is None
    totals = {a: 0.0, b: 0.0}
    for rep in range(entry.games):
        game_seed = derive_seed(entry.seed, "game", rep)
        for seats in ((a, b), (b, a)):
            g = play_game(game_id, game_seed, params, list(seats), endpoints, gateway)
            games.append(g)
            s0, s1 = g.outcome.scores
            if both_missing:
                s0 = s1 = 0.5
            contributions += [(seats[0], seats[1], s0, 1.0), (seats[1], seats[0], s1, 1.0)]
            totals[seats[0]] += s0
            totals[seats[1]] += s1
    n = 2 * entry.games
    return MatchRecord(entry, game_id, scope, games, {s: v / n for s, v in totals.items()}, contributions)


def _play_batch(entry: PlanEntry, game_id: GameId, scope: str, endpoints, gateway, params) -> MatchRecord:
    seats = list(entry.slots)
    g = play_game(game_id, entry.seed, dict(params, seats=len(seats)), seats, endpoints, gateway)
    scores = {slot: float(g.outcome.scores[i]) for i, slot in enumerate(seats)}
    contributions = [(a, b, scores[a], 1.0) for a in seats for b in seats if a != b]
    summary = {"experiment": EXPERIMENT_NAMES[entry.experiment], "winner_seats": [
        s for s, v in scores.items() if v > 0]}
    return MatchRecord(entry, game_id, scope, [g], scores, contributions, summary)


def execute_entry(entry: PlanEntry, game_id: GameId, scope: str, endpoints: Mapping[str, AgentEndpoint | None],
                  gateway: Gateway, params: Mapping[str, Any] | None = None) -> MatchRecord:
    params = dict(params or {})
    if game_id.symmetric:
        return _play_pair(entry, game_id, scope, endpoints, gateway, params)
    return _play_batch(entry, game_id, scope, endpoints, gateway, params)


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def execute_plan(plan: SchedulePlan, endpoints: Mapping[str, AgentEndpoint | None], gateway: Gateway,
                 workers: int = 1, log_dir: Path | None = None, scope: str = "round",
                 params: Mapping[str, Any] | None = None) -> list[MatchRecord]:
    """Run every entry; each record is written to ``log_dir/match_<k>.json`` when done."""

    def run(entry: PlanEntry) -> MatchRecord:
        record = execute_entry(entry, plan.game_id, scope, endpoints, gateway, params)
        if log_dir is not None:
            _write_atomic(Path(log_dir) / f"match_{entry.entry_id}.json", record.to_json())
        return record

    if workers <= 1:
        records = [run(e) for e in plan.entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, plan.entries))
    return sorted(records, key=lambda r: r.entry.entry_id)


# -- estimates ----------------------------------------------------------------


def accumulate_matrix(records: Sequence[MatchRecord], slots: Sequence[StrategySlot],
                      required: Sequence[tuple[str, str]] | None = None,
                      experiments: Sequence[int] | None = None) -> ScoreMatrix:
    """Weighted mean score per ordered slot pair.

    For batch records only the experiment types in ``experiments`` count
    (default: global shuffle), giving co-participation win rates.
    """
    sums: dict[tuple[str, str], float] = defaultdict(float)
    weights: dict[tuple[str, str], float] = defaultdict(float)
    experiments = experiments or (GLOBAL_SHUFFLE,)
    for rec in records:
        if rec.entry.experiment is not None and rec.entry.experiment not in experiments:
            continue
        for a, b, s, w in rec.contributions:
            sums[a, b] += s * w
            weights[a, b] += w
    m = ScoreMatrix(slots)
    for (a, b), w in weights.items():
        if w > 0 and StrategySlot.parse(a) in m.index and StrategySlot.parse(b) in m.index:
            m[a, b] = sums[a, b] / w
    for a, b in required or ():
        if math.isnan(m[a, b]):
            raise MissingCell(f"no record covers W[{a}][{b}]")
    return m


@dataclass
class BatchRates:
    """Per-slot mean tournament score for each batch experiment type."""

    rates: dict[int, dict[str, float]]
    counts: dict[int, dict[str, int]]

    def rate(self, experiment: int, slot: StrategySlot | str) -> float:
        return self.rates.get(experiment, {}).get(str(slot), math.nan)

    def vector(self, slots: Sequence[StrategySlot]) -> np.ndarray:
        return np.array([[self.rate(t, s) for s in slots] for t in (1, 2, 3, 4)])

    def to_dict(self) -> dict[str, Any]:
        return {EXPERIMENT_NAMES[t]: dict(sorted(v.items())) for t, v in sorted(self.rates.items())}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> BatchRates:
        names = {v: k for k, v in EXPERIMENT_NAMES.items()}
        rates = {names[k]: dict(v) for k, v in d.items()}
        return cls(rates, {t: {s: 1 for s in v} for t, v in rates.items()})


def accumulate_rates(records: Sequence[MatchRecord]) -> BatchRates:
    sums: dict[int, dict[str, float]] = defaultdict(lambda: defaultdict(float))
    counts: dict[int, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for rec in records:
        t = rec.entry.experiment
        if t is None:
            continue
        targets = [rec.entry.focus] if t == ADVANCE_FIELD else list(rec.scores)
        for slot in targets:
            sums[t][slot] += rec.scores[slot]
            counts[t][slot] += 1
    rates = {t: {s: sums[t][s] / counts[t][s] for s in counts[t]} for t in counts}
    return BatchRates(rates, {t: dict(c) for t, c in counts.items()})


@dataclass
class StabilityResult:
    stable: bool
    change: float


def stability_check(history: Sequence[Any], threshold: float = STABILITY_THRESHOLD,
                    eps: float = EPSILON) -> StabilityResult:
    """Relative L1 change between the last two estimates (missing cells count as 0)."""
    if len(history) < 2:
        raise ArenaError("stability needs at least two successive estimates")
    prev, cur = (np.nan_to_num(np.asarray(getattr(h, "values", h), dtype=float)) for h in history[-2:])
    change = float(np.abs(cur - prev).sum() / max(np.abs(prev).sum(), eps))
    return StabilityResult(change < threshold, change)


# -- running a whole scope ----------------------------------------------------


@dataclass
class ScopeResult:
    game_id: GameId
    slots: list[StrategySlot]
    records: list[MatchRecord]
    matrix: ScoreMatrix
    rates: BatchRates | None
    history: list[float]
    stable: bool
    blocks: int


def plan_block(game_id: GameId, slots: Sequence[StrategySlot], seed: int, block: int, start_id: int,
               repeats: int | None = None, batch_size: int = BATCH_SIZE, final: bool = False,
               advance_estimator: str = "type3") -> SchedulePlan:
    """Entries for one repeat block. Block k >= 2 doubles the games played so far."""
    base = repeats or DEFAULT_REPEATS[game_id.game]
    factor = 1 if block == 1 else 2 ** (block - 2)
    if game_id.symmetric:
        if game_id.game is Game.BRIDGE:
            # a bridge match is a fixed set of boards; more blocks add more matches
            plan = SchedulePlan(game_id, list(slots))
            for m in range(factor):
                sub = plan_round_robin(slots, game_id, derive_seed(seed, "match", m), block, base,
                                       start_id + len(plan.entries))
                plan.entries += sub.entries
            return plan
        return plan_round_robin(slots, game_id, seed, block, base * factor, start_id)
    plan = SchedulePlan(game_id, list(slots))
    types = [SAME_ROUND_ALL] if not final else [SELF_ACROSS_ROUNDS, SAME_ROUND_ALL, GLOBAL_SHUFFLE]
    if final and advance_estimator == "dedicated":
        types.append(ADVANCE_FIELD)
    for t in types:
        sub = plan_batches(slots, t, batch_size, game_id=game_id, repeats=base * factor, block=block,
                           start_id=start_id + len(plan.entries), seed=seed)
        plan.entries += sub.entries
    return plan


def run_scope(game_id: GameId, slots: Sequence[StrategySlot], endpoints: Mapping[str, AgentEndpoint | None],
              gateway: Gateway, seed: int = 0, log_dir: Path | None = None, workers: int = 1,
              repeats: int | None = None, max_blocks: int = MAX_BLOCKS, threshold: float = STABILITY_THRESHOLD,
              final: bool = False, params: Mapping[str, Any] | None = None, batch_size: int = BATCH_SIZE,
              advance_estimator: str = "type3",
              on_block: Callable[[int, float | None], None] | None = None) -> ScopeResult:
    """Play repeat blocks until the estimate is stable or ``max_blocks`` is reached."""
    records: list[MatchRecord] = []
    estimates: list[np.ndarray] = []
    changes: list[float] = []
    stable = False
    block = 0
    scope = "final" if final else f"round_{max(s.round for s in slots)}"
    for block in range(1, max_blocks + 1):
        plan = plan_block(game_id, slots, seed, block, len(records), repeats, batch_size, final, advance_estimator)
        records += execute_plan(plan, endpoints, gateway, workers, log_dir, scope, params)
        estimates.append(_estimate(game_id, records, slots))
        change = None
        if len(estimates) >= 2:
            result = stability_check(estimates, threshold)
            change = result.change
            changes.append(change)
            stable = result.stable
        if on_block:
            on_block(block, change)
        if stable:
            break
    rates = None if game_id.symmetric else accumulate_rates(records)
    matrix = accumulate_matrix(records, slots)
    return ScopeResult(game_id, list(slots), records, matrix, rates, changes, stable, block)


def _estimate(game_id: GameId, records, slots) -> np.ndarray:
    if game_id.symmetric:
        return accumulate_matrix(records, slots).values
    return accumulate_rates(records).vector(slots)


# -- replay -------------------------------------------------------------------


def replay_game(game_id: GameId, g: GameLog) -> RawOutcome:
    engine = get_engine(game_id)
    state = engine.initial_state(g.seed, **g.params)
    for move in g.moves:
        state = engine.apply_move(state, move)
    if g.forfeit:
        return engine.forfeit(state, g.forfeit["seat"], Termination(g.forfeit["termination"]))
    return engine.outcome(state)


def replay_record(record: MatchRecord) -> list[tuple[int, bool, RawOutcome]]:
    """Re-derive each game's outcome from its seed and moves: (index, matches, outcome)."""
    out = []
    for i, g in enumerate(record.games):
        again = replay_game(record.game_id, g)
        out.append((i, _same(again, g.outcome), again))
    return out


def _same(a: RawOutcome, b: RawOutcome | None) -> bool:
    if b is None:
        return False
    # compare through JSON so tuples and lists line up
    return json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def load_record(path: Path | str) -> MatchRecord:
    return MatchRecord.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
