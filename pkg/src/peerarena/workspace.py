"""Workspace layout, tournament configuration, agent manifests and round reports.

Layout::

    ws/config.json
    ws/code/round_<n>/<agent>/
    ws/logs/round_<n>/<game>_<mode>/match_<k>.json
    ws/logs/round_<n>/report.json          (+ summary.md)
    ws/final/logs/<game>_<mode>/match_<k>.json
    ws/final/matrix_<game>_<mode>.json
    ws/final/metrics.json                  (+ leaderboard.csv)

Round n only ever writes below its own ``round_<n>`` directories, so earlier
rounds stay untouched.
"""

from __future__ import annotations

import json
import math
import shutil
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import jsonschema

from .gateway import TIME_BUDGET_MS, AgentEndpoint, Gateway
from .kernel import ArenaError, Game, GameId
from .matrix import ScoreMatrix, StrategySlot, make_slots
from .metrics import MetricReport, fractional_ranks, metric_report
from .orchestrator import (
    BATCH_SIZE,
    MAX_BLOCKS,
    SAME_ROUND_ALL,
    STABILITY_THRESHOLD,
    BatchRates,
    MatchRecord,
    ScopeResult,
    _write_atomic,
    accumulate_matrix,
    accumulate_rates,
    load_record,
    run_scope,
)
from .rng import derive_seed

CONFIG_SCHEMA_VERSION = 1
MANIFEST_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1
DEFAULT_ROUNDS = 4


class WorkspaceUnwritable(ArenaError):
    pass


class SchemaMismatch(ArenaError):
    pass


class Corrupt(ArenaError):
    pass


class ConfigConflict(ArenaError):
    pass


class RoundMissing(ArenaError):
    pass


# -- agents -------------------------------------------------------------------


@dataclass
class AgentSpec:
    """One participant. ``rounds`` overrides fields per development round."""

    id: str
    kind: str = "builtin"
    bot: str | None = None
    seed: int | None = None
    script: str | None = None
    rounds: dict[str, dict[str, Any]] = field(default_factory=dict)

    def for_round(self, n: int) -> AgentSpec:
        over = self.rounds.get(str(n), {})
        d = asdict(self) | over
        d["rounds"] = {}
        return AgentSpec(**d)

    def to_dict(self) -> dict[str, Any]:
        d = {k: v for k, v in asdict(self).items() if v not in (None, {})}
        d["kind"] = self.kind
        return d


def load_manifest(path: Path | str) -> list[AgentSpec]:
    """Read ``agents.json``; relative script paths resolve against its directory."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise Corrupt(f"cannot read agent manifest {path}: {exc}") from exc
    return parse_manifest(data, path.parent)


def parse_manifest(data: Mapping[str, Any], base: Path | None = None) -> list[AgentSpec]:
    if data.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise SchemaMismatch(f"unsupported manifest schema version {data.get('schema_version')!r}")
    specs = []
    for raw in data.get("agents", []):
        spec = AgentSpec(**raw)
        if spec.kind not in ("builtin", "http"):
            raise Corrupt(f"agent {spec.id}: unknown kind {spec.kind!r}")
        if "@" in spec.id or not spec.id:
            raise Corrupt(f"bad agent id {spec.id!r}")
        for over in spec.rounds.values():
            if over.get("script") and base is not None and not Path(over["script"]).is_absolute():
                over["script"] = str((base / over["script"]).resolve())
        if spec.script and base is not None and not Path(spec.script).is_absolute():
            spec.script = str((base / spec.script).resolve())
        specs.append(spec)
    ids = [s.id for s in specs]
    if len(set(ids)) != len(ids) or len(ids) < 2:
        raise Corrupt("manifest needs at least two agents with unique ids")
    return specs


def manifest_dict(specs: Sequence[AgentSpec]) -> dict[str, Any]:
    return {"schema_version": MANIFEST_SCHEMA_VERSION, "agents": [s.to_dict() for s in specs]}


# -- config -------------------------------------------------------------------


@dataclass
class TournamentConfig:
    """Everything a run needs; defaults follow the published setup (four rounds)."""

    agents: list[AgentSpec]
    games: list[str] = field(default_factory=lambda: ["gomoku_standard"])
    rounds: int = DEFAULT_ROUNDS
    seed: int = 0
    repeats: dict[str, int] = field(default_factory=dict)  # keyed by game name
    time_budgets_ms: dict[str, int] = field(default_factory=dict)
    batch_size: int = BATCH_SIZE
    workers: int = 1
    max_blocks: int = MAX_BLOCKS
    stability_threshold: float = STABILITY_THRESHOLD
    advance_estimator: str = "type3"
    params: dict[str, dict[str, Any]] = field(default_factory=dict)  # keyed by game_mode

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if any(v <= 0 for v in self.time_budgets_ms.values()):
            raise ValueError("time budgets must be positive")
        if any(v < 1 for v in self.repeats.values()):
            raise ValueError("repeats must be at least 1")
        if self.advance_estimator not in ("type3", "dedicated"):
            raise ValueError(f"unknown advance estimator {self.advance_estimator!r}")
        for g in self.games:
            game_id_of(g)

    @property
    def game_ids(self) -> list[GameId]:
        return [game_id_of(g) for g in self.games]

    def budgets(self) -> dict[Game, int]:
        out = dict(TIME_BUDGET_MS)
        for name, ms in self.time_budgets_ms.items():
            out[Game(name)] = ms
        return out

    def repeats_for(self, game_id: GameId) -> int | None:
        return self.repeats.get(game_id.game.value)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["agents"] = manifest_dict(self.agents)["agents"]
        return {"schema_version": CONFIG_SCHEMA_VERSION} | d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> TournamentConfig:
        if d.get("schema_version") != CONFIG_SCHEMA_VERSION:
            raise SchemaMismatch(f"unsupported config schema version {d.get('schema_version')!r}")
        body = {k: v for k, v in d.items() if k != "schema_version"}
        body["agents"] = parse_manifest({"schema_version": MANIFEST_SCHEMA_VERSION, "agents": body["agents"]})
        return cls(**body)


def game_id_of(label: str) -> GameId:
    game, sep, mode = label.partition("_")
    return GameId.parse(game, mode if sep else "standard")


def label_of(game_id: GameId) -> str:
    return f"{game_id.game.value}_{game_id.mode.value}"


# -- reports ------------------------------------------------------------------

_TALLY = {
    "type": "object",
    "required": ["wins", "draws", "losses"],
    "properties": {k: {"type": "integer", "minimum": 0} for k in ("wins", "draws", "losses")},
}

REPORT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema_version", "round", "games", "strategies"],
    "properties": {
        "schema_version": {"type": "integer"},
        "round": {"type": "integer", "minimum": 1},
        "strategies": {"type": "object", "additionalProperties": {"type": "string"}},
        "games": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["unit", "played", "scores", "rankings", "tallies", "matches", "matrix"],
                "properties": {
                    "unit": {"enum": ["games", "matches", "tournaments"]},
                    "played": {"type": "integer", "minimum": 0},
                    "scores": {"type": "object", "additionalProperties": {"type": "number"}},
                    "rankings": {"type": "object", "additionalProperties": {"type": "number"}},
                    "tallies": {"type": "object", "additionalProperties": _TALLY},
                    "matches": {"type": "array", "items": {"type": "string"}},
                    "matrix": {"type": "object"},
                    "stable": {"type": "boolean"},
                    "blocks": {"type": "integer"},
                },
            },
        },
    },
}


@dataclass
class GameSummary:
    unit: str
    played: int
    scores: dict[str, float]
    rankings: dict[str, float]
    tallies: dict[str, dict[str, int]]
    matches: list[str]
    matrix: dict[str, Any]
    stable: bool = False
    blocks: int = 0


@dataclass
class RoundReport:
    round: int
    games: dict[str, GameSummary]
    strategies: dict[str, str]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "round": self.round,
            "games": {k: asdict(v) for k, v in sorted(self.games.items())},
            "strategies": dict(sorted(self.strategies.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> RoundReport:
        if d.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise SchemaMismatch(f"unsupported report schema version {d.get('schema_version')!r}")
        try:
            jsonschema.validate(d, REPORT_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise Corrupt(f"report does not match its schema: {exc.message}") from exc
        return cls(d["round"], {k: GameSummary(**v) for k, v in d["games"].items()}, dict(d["strategies"]))

    def summary_text(self) -> str:
        lines = [f"# Round {self.round} report", ""]
        for label, g in sorted(self.games.items()):
            lines.append(f"## {label} ({g.played} {g.unit})")
            lines.append("")
            lines.append("| rank | slot | score | W | D | L |")
            lines.append("|---|---|---|---|---|---|")
            for slot, rank in sorted(g.rankings.items(), key=lambda kv: (kv[1], kv[0])):
                t = g.tallies[slot]
                lines.append(f"| {rank:g} | {slot} | {g.scores[slot]:.3f} | {t['wins']} | {t['draws']} | {t['losses']} |")
            lines.append("")
        lines.append("Strategy snapshots:")
        for agent, path in sorted(self.strategies.items()):
            lines.append(f"- {agent}: {path}")
        return "\n".join(lines) + "\n"


def tally(records: Sequence[MatchRecord], slots: Sequence[str]) -> tuple[str, int, dict[str, dict[str, int]]]:
    """Wins, draws and losses per slot.

    The counted unit is a game for Gomoku and Chess, a whole match for Bridge
    and a tournament for Hold'em. A Hold'em tournament shared by tied leaders
    is a draw for each of them.
    """
    out = {s: {"wins": 0, "draws": 0, "losses": 0} for s in slots}

    def add(slot: str, key: str) -> None:
        if slot in out:
            out[slot][key] += 1

    played = 0
    unit = "games"
    for rec in records:
        game = rec.game_id.game
        if game is Game.BRIDGE:
            unit = "matches"
            played += 1
            for slot, score in rec.scores.items():
                add(slot, "wins" if score > 0.5 else "losses" if score < 0.5 else "draws")
        elif game is Game.HOLDEM:
            unit = "tournaments"
            played += 1
            for slot, score in rec.scores.items():
                add(slot, "wins" if score == 1 else "draws" if score > 0 else "losses")
        else:
            for g in rec.games:
                played += 1
                for slot, score in zip(g.seats, g.outcome.scores):
                    add(slot, "wins" if score == 1 else "losses" if score == 0 else "draws")
    return unit, played, out


def round_scores(result: ScopeResult) -> dict[str, float]:
    """Each slot's same-round average: row mean of W, or the same-round batch rate."""
    if result.rates is not None:
        return {str(s): result.rates.rate(SAME_ROUND_ALL, s) for s in result.slots}
    w = result.matrix
    out = {}
    for s in result.slots:
        row = [w[s, o] for o in result.slots if o != s and not math.isnan(w[s, o])]
        out[str(s)] = sum(row) / len(row) if row else math.nan
    return out


# -- workspace ----------------------------------------------------------------


class Workspace:
    def __init__(self, root: Path | str):
        self.root = Path(root)

    # paths
    @property
    def config_path(self) -> Path:
        return self.root / "config.json"

    def code_dir(self, n: int, agent: str | None = None) -> Path:
        d = self.root / "code" / f"round_{n}"
        return d / agent if agent else d

    def round_dir(self, n: int) -> Path:
        return self.root / "logs" / f"round_{n}"

    def round_logs(self, n: int, game_id: GameId) -> Path:
        return self.round_dir(n) / label_of(game_id)

    def report_path(self, n: int) -> Path:
        return self.round_dir(n) / "report.json"

    @property
    def final_dir(self) -> Path:
        return self.root / "final"

    def final_logs(self, game_id: GameId) -> Path:
        return self.final_dir / "logs" / label_of(game_id)

    def matrix_path(self, game_id: GameId) -> Path:
        return self.final_dir / f"matrix_{label_of(game_id)}.json"

    @property
    def metrics_path(self) -> Path:
        return self.final_dir / "metrics.json"

    def rel(self, path: Path) -> str:
        return path.relative_to(self.root).as_posix()

    # writing
    def write(self, path: Path, text: str) -> None:
        try:
            _write_atomic(path, text)
        except OSError as exc:
            raise WorkspaceUnwritable(f"cannot write {path}: {exc}") from exc

    def init(self, config: TournamentConfig) -> TournamentConfig:
        """Store ``config`` or check it against the stored one.

        Games may be added later; anything else differing is a conflict.
        """
        if not self.config_path.exists():
            self.write(self.config_path, config.to_json())
            return config
        stored = self.load_config()
        a, b = stored.to_dict(), config.to_dict()
        for key in ("games", "workers"):
            a.pop(key), b.pop(key)
        if a != b:
            raise ConfigConflict(f"{self.config_path} holds a different configuration")
        merged = stored.games + [g for g in config.games if g not in stored.games]
        if merged != stored.games:
            stored.games = merged
            self.write(self.config_path, stored.to_json())
        return stored

    def load_config(self) -> TournamentConfig:
        try:
            data = json.loads(self.config_path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise RoundMissing(f"no configuration at {self.config_path}") from exc
        except json.JSONDecodeError as exc:
            raise Corrupt(f"{self.config_path}: {exc}") from exc
        return TournamentConfig.from_dict(data)

    def snapshot(self, n: int, spec: AgentSpec) -> Path:
        """Archive the agent's round-n strategy; an existing snapshot is kept as is."""
        dest = self.code_dir(n, spec.id)
        if dest.exists():
            return dest
        try:
            if spec.kind == "http" and spec.script:
                src = Path(spec.script).parent
                shutil.copytree(src, dest, ignore=shutil.ignore_patterns("__pycache__", "*.pyc"))
            else:
                dest.mkdir(parents=True)
                (dest / "strategy.json").write_text(
                    json.dumps({"kind": "builtin", "bot": spec.bot, "seed": spec.seed}, indent=1, sort_keys=True) + "\n",
                    encoding="utf-8")
        except OSError as exc:
            raise WorkspaceUnwritable(f"cannot archive {spec.id} round {n}: {exc}") from exc
        return dest

    def endpoint(self, config: TournamentConfig, slot: StrategySlot) -> AgentEndpoint:
        spec = next(s for s in config.agents if s.id == slot.agent).for_round(slot.round)
        seed = spec.seed if spec.seed is not None else derive_seed(config.seed, "agent", str(slot))
        if spec.kind == "builtin":
            return AgentEndpoint(str(slot), "builtin", spec.bot, seed)
        script = spec.script
        snap = self.code_dir(slot.round, slot.agent)
        if script and (snap / Path(script).name).exists():
            script = str(snap / Path(script).name)
        return AgentEndpoint(str(slot), "http", seed=seed, script=script)

    # rounds
    def run_round(self, config: TournamentConfig, n: int, games: Sequence[GameId] | None = None,
                  gateway: Gateway | None = None, workers: int | None = None) -> RoundReport:
        """Play round ``n`` among the agents' round-n strategies and write its report."""
        if not 1 <= n <= config.rounds:
            raise ValueError(f"round {n} outside 1..{config.rounds}")
        strategies = {spec.id: self.rel(self.snapshot(n, spec.for_round(n))) for spec in config.agents}
        slots = [StrategySlot(spec.id, n) for spec in config.agents]
        endpoints = {str(s): self.endpoint(config, s) for s in slots}
        results = {}
        own = gateway is None
        gateway = gateway or Gateway(budgets_ms=config.budgets())
        try:
            for gid in games or config.game_ids:
                results[label_of(gid)] = self._scope(config, gid, slots, endpoints, gateway,
                                                     self.round_logs(n, gid), f"round_{n}", workers)
        finally:
            if own:
                gateway.shutdown()
        previous = self.read_report(n) if self.report_path(n).exists() else None
        report = self.write_round_report(n, results, strategies, previous)
        return report

    def _scope(self, config, gid, slots, endpoints, gateway, log_dir, scope, workers) -> ScopeResult:
        with_http = [e for e in endpoints.values() if e is not None and e.kind == "http"]
        ready = dict(endpoints)
        for e in with_http:
            try:
                gateway.launch_and_health(e)
            except ArenaError:
                ready[e.agent_id] = None  # forfeits every game it is seated in
        return run_scope(
            gid, slots, ready, gateway, seed=derive_seed(config.seed, label_of(gid), scope),
            log_dir=log_dir, workers=workers or config.workers, repeats=config.repeats_for(gid),
            max_blocks=config.max_blocks, threshold=config.stability_threshold, final=scope == "final",
            params=config.params.get(label_of(gid)), batch_size=config.batch_size,
            advance_estimator=config.advance_estimator,
        )

    def write_round_report(self, n: int, results: Mapping[str, ScopeResult], strategies: Mapping[str, str],
                           previous: RoundReport | None = None) -> RoundReport:
        games = dict(previous.games) if previous else {}
        for label, res in results.items():
            slots = [str(s) for s in res.slots]
            scores = round_scores(res)
            unit, played, tallies = tally(res.records, slots)
            log_dir = self.round_logs(n, res.game_id)
            games[label] = GameSummary(
                unit=unit, played=played, scores=scores,
                rankings=fractional_ranks(scores),
                tallies=tallies,
                matches=[self.rel(log_dir / f"match_{r.entry.entry_id}.json") for r in res.records],
                matrix=res.matrix.to_dict(),
                stable=res.stable, blocks=res.blocks,
            )
        report = RoundReport(n, games, dict(strategies))
        self.write(self.report_path(n), report.to_json())
        self.write(self.round_dir(n) / "summary.md", report.summary_text())
        return report

    def read_report(self, n: int) -> RoundReport:
        return read_round_report(self.report_path(n), self.root)

    # final tournament
    def run_final(self, config: TournamentConfig, games: Sequence[GameId] | None = None,
                  gateway: Gateway | None = None, workers: int | None = None) -> MetricReport:
        """All T x N strategies against each other, then the metric report."""
        for n in range(1, config.rounds + 1):
            for spec in config.agents:
                if not self.code_dir(n, spec.id).exists():
                    raise RoundMissing(f"round {n} has no snapshot for {spec.id}; run the round first")
        slots = make_slots([s.id for s in config.agents], range(1, config.rounds + 1))
        endpoints = {str(s): self.endpoint(config, s) for s in slots}
        own = gateway is None
        gateway = gateway or Gateway(budgets_ms=config.budgets())
        try:
            for gid in games or config.game_ids:
                res = self._scope(config, gid, slots, endpoints, gateway, self.final_logs(gid), "final", workers)
                self.write_final_matrix(gid, res.matrix, res.rates, res.stable, res.blocks)
        finally:
            if own:
                gateway.shutdown()
        return self.compute_metrics(config)

    def write_final_matrix(self, gid: GameId, matrix: ScoreMatrix, rates: BatchRates | None,
                           stable: bool | None = None, blocks: int | None = None) -> None:
        d = matrix.to_dict(gid.game.value, gid.mode.value)
        if stable is not None:
            d["stable"] = stable
            d["blocks"] = blocks
        if rates is not None:
            d["rates"] = rates.to_dict()
        self.write(self.matrix_path(gid), json.dumps(d, indent=1, sort_keys=True) + "\n")

    def final_data(self, config: TournamentConfig, gid: GameId) -> ScoreMatrix | BatchRates:
        """Estimate for one game from the final logs, else from the stored matrix file."""
        slots = make_slots([s.id for s in config.agents], range(1, config.rounds + 1))
        logs = sorted(self.final_logs(gid).glob("match_*.json")) if self.final_logs(gid).is_dir() else []
        if logs:
            records = [load_record(p) for p in logs]
            return accumulate_matrix(records, slots) if gid.symmetric else accumulate_rates(records)
        if not self.matrix_path(gid).exists():
            raise RoundMissing(f"no final logs or matrix for {label_of(gid)}")
        d = json.loads(self.matrix_path(gid).read_text(encoding="utf-8"))
        if not gid.symmetric:
            return BatchRates.from_dict(d["rates"])
        return ScoreMatrix.from_dict(d)

    def compute_metrics(self, config: TournamentConfig | None = None) -> MetricReport:
        config = config or self.load_config()
        slots = make_slots([s.id for s in config.agents], range(1, config.rounds + 1))
        data, slots_for = {}, {}
        for gid in config.game_ids:
            key = (gid.game.value, gid.mode.value)
            data[key] = self.final_data(config, gid)
            slots_for[key] = slots
        report = metric_report(data, slots_for)
        self.write(self.metrics_path, report.to_json())
        self.write(self.final_dir / "leaderboard.csv", report.leaderboard_csv())
        return report


def read_round_report(path: Path | str, workspace: Path | str | None = None) -> RoundReport:
    """Load and validate a report; with ``workspace`` also check that pointers resolve."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise Corrupt(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise Corrupt(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise Corrupt(f"{path} is not a JSON object")
    report = RoundReport.from_dict(data)
    if workspace is not None:
        root = Path(workspace).resolve()
        pointers = list(report.strategies.values()) + [m for g in report.games.values() for m in g.matches]
        for p in pointers:
            target = (root / p).resolve()
            if root not in target.parents or not target.exists():
                raise Corrupt(f"report pointer {p!r} does not resolve inside the workspace")
    return report
