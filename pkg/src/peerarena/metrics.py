"""Learning, coding and generalization metrics over a scoring matrix.

Notation: slot ``(i, n)`` is agent i's strategy from round n and ``W`` the
scoring matrix. Per agent:

* strategy coding ``S_i``: mean of ``W[(i,1)][(j,1)]`` over other agents j
* global performance ``G_i^n``: mean of row ``(i,n)`` over every other slot
* global learning ``L_i``: mean over n >= 2 of ``G_i^n - G_i^1``
* advance score ``A_i^n``: mean of ``W[(i,n)][(j,n-1)]`` over j != i
* base score ``B_i^n``: mean of ``W[(i,n)][(j,n)]`` over j != i
* counter-adaptation ``C_i``: mean over n >= 2 of ``A_i^n - B_i^{n-1}``
* self score ``S_i^n``: mean of ``W[(i,n)][(i,m)]`` over m != n
* self-improvement ``SI_i``: Pearson correlation of round index and ``S_i^n``
* generalizability ``U_i``: ``B_i^1`` under variant rules minus standard rules

Hold'em has no pairwise W; its components come from batch tournament win
rates instead (see :func:`components_from_rates`).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .kernel import ArenaError, GameId, get_engine
from .matrix import MissingCell, ScoreMatrix, StrategySlot

REPORT_SCHEMA_VERSION = 1


class LengthMismatch(ArenaError):
    pass


class TooShort(ArenaError):
    pass


class MissingMatrix(ArenaError):
    pass


class TooFewRepetitions(ArenaError):
    pass


class EmptyProbes(ArenaError):
    pass


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation; 0 when either series is constant."""
    if len(xs) != len(ys):
        raise LengthMismatch(f"{len(xs)} vs {len(ys)} values")
    if len(xs) < 2:
        raise TooShort("need at least two points")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    # relative tolerance keeps float noise in a constant series from reading as signal
    if sxx <= 1e-24 * max(1.0, float(x @ x)) or syy <= 1e-24 * max(1.0, float(y @ y)):
        return 0.0
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _mean(values: list[float], what: str) -> float:
    if not values:
        raise MissingCell(f"no cells for {what}")
    return sum(values) / len(values)


def strategy_coding(w: ScoreMatrix, agent: str) -> float:
    return base_score(w, agent, 1)


def global_performance(w: ScoreMatrix, agent: str, rnd: int) -> float:
    me = StrategySlot(agent, rnd)
    return _mean([w.cell(me, s) for s in w.slots if s != me], f"G of {me}")


def base_score(w: ScoreMatrix, agent: str, rnd: int) -> float:
    me = StrategySlot(agent, rnd)
    return _mean([w.cell(me, StrategySlot(j, rnd)) for j in w.agents if j != agent], f"B of {me}")


def advance_score(w: ScoreMatrix, agent: str, rnd: int) -> float:
    me = StrategySlot(agent, rnd)
    return _mean([w.cell(me, StrategySlot(j, rnd - 1)) for j in w.agents if j != agent], f"A of {me}")


def self_score(w: ScoreMatrix, agent: str, rnd: int) -> float:
    me = StrategySlot(agent, rnd)
    return _mean([w.cell(me, StrategySlot(agent, m)) for m in w.rounds if m != rnd], f"S^n of {me}")


def global_learning(w: ScoreMatrix, agent: str) -> float:
    g = {n: global_performance(w, agent, n) for n in w.rounds}
    return _learning(g)


def counter_adaptation(w: ScoreMatrix, agent: str) -> float:
    rounds = w.rounds
    if len(rounds) < 2:
        raise TooShort("counter-adaptation needs two rounds")
    a = {n: advance_score(w, agent, n) for n in rounds[1:]}
    b = {n: base_score(w, agent, n) for n in rounds[:-1]}
    return _counter(a, b)


def self_improvement(w: ScoreMatrix, agent: str) -> float:
    return pearson(w.rounds, [self_score(w, agent, n) for n in w.rounds])


def generalizability(base_standard: float, base_variant: float) -> float:
    return base_variant - base_standard


def _learning(g: Mapping[int, float]) -> float:
    rounds = sorted(g)
    if len(rounds) < 2:
        raise TooShort("learning needs two rounds")
    first = g[rounds[0]]
    return sum(g[n] - first for n in rounds[1:]) / (len(rounds) - 1)


def _counter(a: Mapping[int, float], b: Mapping[int, float]) -> float:
    return sum(a[n] - b[n - 1] for n in sorted(a)) / len(a)


# -- per-agent components -----------------------------------------------------


@dataclass
class AgentComponents:
    """Round-indexed building blocks from which every per-agent metric follows."""

    G: dict[int, float]
    B: dict[int, float]
    A: dict[int, float]
    S: dict[int, float]  # self scores S^n


def components_from_matrix(w: ScoreMatrix) -> dict[str, AgentComponents]:
    rounds = w.rounds
    out = {}
    for agent in w.agents:
        out[agent] = AgentComponents(
            G={n: global_performance(w, agent, n) for n in rounds},
            B={n: base_score(w, agent, n) for n in rounds},
            A={n: advance_score(w, agent, n) for n in rounds[1:]},
            S={n: self_score(w, agent, n) for n in rounds} if len(rounds) >= 2 else {},
        )
    return out


def components_from_rates(rates: Any, slots: Sequence[StrategySlot]) -> dict[str, AgentComponents]:
    """Batch win rates: type 1 gives S^n, type 2 gives B, type 3 gives G.

    A comes from the dedicated advance tables when they were played and is
    otherwise estimated from the global-shuffle rate, as only type-3 data
    mixes rounds.
    """
    agents = list(dict.fromkeys(s.agent for s in slots))
    rounds = sorted({s.round for s in slots})
    out = {}
    for agent in agents:
        def get(t: int, n: int) -> float:
            v = rates.rate(t, StrategySlot(agent, n))
            if math.isnan(v):
                raise MissingCell(f"no type-{t} tournaments for {agent}@{n}")
            return v

        advance = {}
        for n in rounds[1:]:
            v = rates.rate(4, StrategySlot(agent, n))
            advance[n] = v if not math.isnan(v) else get(3, n)
        out[agent] = AgentComponents(
            G={n: get(3, n) for n in rounds},
            B={n: get(2, n) for n in rounds},
            A=advance,
            S={n: get(1, n) for n in rounds} if len(rounds) >= 2 else {},
        )
    return out


# -- reports ------------------------------------------------------------------


@dataclass
class AgentMetrics:
    S: float
    G: dict[int, float]
    L: float | None
    A: dict[int, float]
    B: dict[int, float]
    C: float | None
    S_rounds: dict[int, float]
    SI: float | None
    U: float | None = None

    def to_dict(self) -> dict[str, Any]:
        def rk(d: Mapping[int, float]) -> dict[str, float]:
            return {str(k): v for k, v in sorted(d.items())}

        return {"S": self.S, "G": rk(self.G), "L": self.L, "A": rk(self.A), "B": rk(self.B),
                "C": self.C, "S_rounds": rk(self.S_rounds), "SI": self.SI, "U": self.U}


def agent_metrics(c: AgentComponents) -> AgentMetrics:
    rounds = sorted(c.G)
    multi = len(rounds) >= 2
    return AgentMetrics(
        S=c.B[rounds[0]],
        G=dict(c.G),
        L=_learning(c.G) if multi else None,
        A=dict(c.A),
        B=dict(c.B),
        C=_counter(c.A, c.B) if multi else None,
        S_rounds=dict(c.S),
        SI=pearson(rounds, [c.S[n] for n in rounds]) if multi else None,
    )


@dataclass
class GroupStats:
    dis_std: float
    dis_range: float
    trend_mean: float


def group_statistics(b_series: Mapping[str, Sequence[float]], g_series: Mapping[str, Sequence[float]]) -> GroupStats:
    """Dispersion trends of per-round base scores and the trend of mean G."""
    if len(b_series) < 2:
        raise TooShort("group statistics need at least two agents")
    b = np.array([list(v) for v in b_series.values()], dtype=float)
    g = np.array([list(v) for v in g_series.values()], dtype=float)
    if b.shape[1] < 2:
        raise TooShort("group statistics need at least two rounds")
    rounds = list(range(1, b.shape[1] + 1))
    return GroupStats(
        dis_std=pearson(rounds, b.std(axis=0)),
        dis_range=pearson(rounds, b.max(axis=0) - b.min(axis=0)),
        trend_mean=pearson(rounds, g.mean(axis=0)),
    )


def fractional_ranks(values: Mapping[str, float], higher_is_better: bool = True) -> dict[str, float]:
    """1 for the best; tied agents share the mean of their positions."""
    items = sorted(values.items(), key=lambda kv: -kv[1] if higher_is_better else kv[1])
    ranks: dict[str, float] = {}
    i = 0
    while i < len(items):
        j = i
        while j + 1 < len(items) and items[j + 1][1] == items[i][1]:
            j += 1
        for k in range(i, j + 1):
            ranks[items[k][0]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def ranking_std(runs: Sequence[Mapping[str, float]], agent: str, higher_is_better: bool = True) -> float:
    """Population std of ``agent``'s fractional rank across repeated tournaments."""
    if len(runs) < 2:
        raise TooFewRepetitions("need at least two repetitions")
    ranks = [fractional_ranks(r, higher_is_better)[agent] for r in runs]
    return float(np.std(ranks))


def action_consistency(policy_a: Callable[[Any], str], policy_b: Callable[[Any], str],
                       probes: Sequence[Any]) -> float:
    """Fraction of probe states where both policies choose the same move."""
    if not probes:
        raise EmptyProbes("no probe states")
    same = sum(1 for st in probes if policy_a(st) == policy_b(st))
    return same / len(probes)


def sample_probes(game_id: GameId, count: int, seed: int = 0, from_fraction: float = 0.5,
                  params: Mapping[str, Any] | None = None) -> list[Any]:
    """Non-terminal states from the later part of uniformly random playouts.

    Each probe comes from its own playout: the game is played out at random,
    then one ply is drawn from the last ``1 - from_fraction`` of it.
    """
    from .rng import SeededRng, derive_seed

    engine = get_engine(game_id)
    probes = []
    for k in range(count):
        rng = SeededRng(derive_seed(seed, "probe", k))
        state = engine.initial_state(rng.next_u64(), **dict(params or {}))
        path = []
        while not engine.is_terminal(state):
            path.append(state)
            state = engine.apply_move(state, rng.choice(engine.legal_moves(state)))
        if not path:
            continue
        lo = min(int(len(path) * from_fraction), len(path) - 1)
        probes.append(path[lo + rng.randbelow(len(path) - lo)])
    return probes


@dataclass
class GameMetrics:
    game: str
    mode: str
    agents: dict[str, AgentMetrics]
    group: GroupStats | None
    rankings: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "game": self.game,
            "mode": self.mode,
            "agents": {a: m.to_dict() for a, m in self.agents.items()},
            "group": None if self.group is None else {
                "DIS_std": self.group.dis_std, "DIS_range": self.group.dis_range,
                "Trend_mean": self.group.trend_mean},
            "rankings": self.rankings,
        }


def game_metrics(game: str, mode: str, components: Mapping[str, AgentComponents]) -> GameMetrics:
    agents = {a: agent_metrics(c) for a, c in components.items()}
    rounds = sorted(next(iter(components.values())).G)
    group = None
    if len(agents) >= 2 and len(rounds) >= 2:
        group = group_statistics(
            {a: [c.B[n] for n in rounds] for a, c in components.items()},
            {a: [c.G[n] for n in rounds] for a, c in components.items()},
        )
    rankings = {}
    for name in ("S", "L", "C", "SI"):
        vals = {a: getattr(m, name) for a, m in agents.items() if getattr(m, name) is not None}
        if vals:
            rankings[name] = fractional_ranks(vals)
    return GameMetrics(game, mode, agents, group, rankings)


@dataclass
class MetricReport:
    games: list[GameMetrics]

    def by_key(self) -> dict[tuple[str, str], GameMetrics]:
        return {(g.game, g.mode): g for g in self.games}

    def fill_generalizability(self) -> None:
        """Set U wherever both modes of a game are present."""
        index = self.by_key()
        for (game, mode), gm in index.items():
            if mode != "variant" or (game, "standard") not in index:
                continue
            std = index[(game, "standard")]
            u = {}
            for agent, m in gm.agents.items():
                if agent in std.agents:
                    m.U = generalizability(std.agents[agent].S, m.S)
                    std.agents[agent].U = m.U
                    u[agent] = m.U
            if u:
                gm.rankings["U"] = fractional_ranks(u)
                std.rankings["U"] = dict(gm.rankings["U"])

    def to_dict(self) -> dict[str, Any]:
        return {"schema_version": REPORT_SCHEMA_VERSION, "games": [g.to_dict() for g in self.games]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def leaderboard_csv(self) -> str:
        """Agents x {S.C., G.L., G.A.} per game, mirroring the published leaderboard."""
        games = sorted({g.game for g in self.games})
        index = self.by_key()
        agents = sorted({a for g in self.games for a in g.agents})
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["agent"] + [f"{g}_{col}" for g in games for col in ("S.C.", "G.L.", "G.A.")])
        for agent in agents:
            row = [agent]
            for game in games:
                gm = index.get((game, "standard")) or index.get((game, "variant"))
                m = gm.agents.get(agent) if gm else None
                row += [_fmt(m.S if m else None), _fmt(m.L if m else None), _fmt(m.U if m else None)]
            writer.writerow(row)
        return out.getvalue()


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.3f}"


def metric_report(matrices: Mapping[tuple[str, str], Any], slots_for: Mapping[tuple[str, str], Sequence[StrategySlot]] | None = None) -> MetricReport:
    """Build a report from ``{(game, mode): ScoreMatrix or BatchRates}``."""
    games = []
    for (game, mode), data in sorted(matrices.items()):
        if isinstance(data, ScoreMatrix):
            comps = components_from_matrix(data)
        else:
            if not slots_for or (game, mode) not in slots_for:
                raise MissingMatrix(f"slots unknown for {game}_{mode}")
            comps = components_from_rates(data, slots_for[(game, mode)])
        games.append(game_metrics(game, mode, comps))
    report = MetricReport(games)
    report.fill_generalizability()
    return report
