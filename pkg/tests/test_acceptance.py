"""The eight acceptance criteria, each reporting one PASS/FAIL line."""

from __future__ import annotations

import json
import random
import tempfile
import time
from pathlib import Path

import pytest

from acceptance_log import record
from conftest import random_playout
from metric_helpers import compare_all
from oracles import bridge_oracle
from oracles.chess_oracle import parse_fen, perft as oracle_perft
from oracles.metrics_oracle import m1_table, random_table
from oracles.poker_oracle import best_of_seven
from peerarena.bots import builtin_bot
from peerarena.cards import card_str, full_deck
from peerarena.gateway import AgentEndpoint, Gateway
from peerarena.games.bridge import (
    Deal,
    VP_SCALE,
    duplicate_score,
    imps,
    match_vp,
    vp20,
)
from peerarena.games.chess import chess960_back_rank
from peerarena.games.holdem import evaluate_cards, run_tournament
from peerarena.kernel import GameId, get_engine
from peerarena.matrix import ScoreMatrix, StrategySlot, make_slots
from peerarena.metrics import metric_report
from peerarena.orchestrator import BatchRates, execute_plan, load_record, plan_round_robin, replay_record
from peerarena.rng import SeededRng
from peerarena.testing.conformance import run_suite
from peerarena.workspace import AgentSpec, TournamentConfig, Workspace

START = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"


def _verdict(number, title, ok, started, detail="", limit=None):
    elapsed = time.perf_counter() - started
    if limit is not None and elapsed >= limit:
        detail = f"{detail}; over the {limit:.0f} s budget".lstrip("; ")
        ok = False
    record(number, title, ok, elapsed, detail)
    assert ok, detail


def test_criterion_1_metric_oracle():
    started = time.perf_counter()
    mismatches = compare_all(m1_table())
    rng = random.Random(20240601)
    for _ in range(50):
        mismatches += compare_all(random_table(rng, rng.randint(2, 5), rng.randint(2, 4)))
    _verdict(1, "metric ops match brute force on M1 and 50 random matrices (1e-12)", not mismatches, started,
             f"{len(mismatches)} mismatches", limit=1.0)


def test_criterion_2_generalizability_paper_value():
    started = time.perf_counter()
    slots = make_slots(["gpt5", "other"], [1])
    std = BatchRates({2: {"gpt5@1": 0.16, "other@1": 0.84}, 3: {"gpt5@1": 0.16, "other@1": 0.84}}, {})
    var = BatchRates({2: {"gpt5@1": 0.87, "other@1": 0.13}, 3: {"gpt5@1": 0.87, "other@1": 0.13}}, {})
    report = metric_report({("holdem", "standard"): std, ("holdem", "variant"): var},
                           {("holdem", "standard"): slots, ("holdem", "variant"): slots})
    u = report.by_key()[("holdem", "variant")].agents["gpt5"].U
    _verdict(2, "generalizability 0.87 - 0.16 reproduces G.A. 0.71", u == 0.71, started, f"U = {u!r}")


def test_criterion_3_engine_correctness():
    started = time.perf_counter()
    problems = []
    chess = get_engine(GameId.parse("chess", "standard"))
    start = chess.initial_state(0)
    for depth in (1, 2, 3):
        ours, theirs = chess.perft(start, depth), oracle_perft(parse_fen(START), depth)
        if ours != theirs:
            problems.append(f"perft {depth}: {ours} vs {theirs}")
    ranks = {chess960_back_rank(i) for i in range(960)}
    if len(ranks) != 960:
        problems.append(f"{len(ranks)} distinct 960 arrays")
    for variant in (False, True):
        deck = full_deck(6 if variant else 2)
        rng = SeededRng(77 + variant)
        for _ in range(10_000):
            dealt = rng.sample(deck, 7)
            ours = evaluate_cards(dealt, variant)
            strength, category, _ = best_of_seven([card_str(c) for c in dealt], variant)
            name = {"high": "high_card"}.get(category, category)
            if ours.category.name.lower() != name:
                problems.append(f"{[card_str(c) for c in dealt]}: {ours.category.name} vs {category}")
                break
        # ordering on paired deals
        for _ in range(2_000):
            dealt = rng.sample(deck, 9)
            a, b = dealt[:2] + dealt[4:], dealt[2:4] + dealt[4:]
            oa = best_of_seven([card_str(c) for c in a], variant)
            ob = best_of_seven([card_str(c) for c in b], variant)
            if (evaluate_cards(a, variant) > evaluate_cards(b, variant)) != ((oa[0], oa[2]) > (ob[0], ob[2])):
                problems.append("hand ordering differs from the comparator")
                break
    rng = SeededRng(200)
    for _ in range(200):
        level, strain = rng.randint(1, 7), rng.choice("CDHSN")
        dbl, vul, tricks = rng.randint(0, 2), rng.random() < 0.5, rng.randint(0, 13)
        ours = duplicate_score(f"{level}{strain}" + "X" * dbl, vul, tricks)
        if ours != bridge_oracle.score(level, strain, dbl, vul, tricks):
            problems.append(f"bridge {level}{strain}{'X' * dbl} vul={vul} tricks={tricks}")
        diff = 10 * rng.randint(-500, 500)
        if imps(diff, 0) != bridge_oracle.imp(diff):
            problems.append(f"imps({diff})")
        margin = rng.randint(0, 60)
        if abs(vp20(margin)[0] - bridge_oracle.vp_continuous(margin, 12)) > 0.0151:
            problems.append(f"vp({margin})")
    _verdict(3, "perft 1-3, 960 arrays, 10,000 deals per mode, 200 bridge contracts", not problems, started,
             "; ".join(problems[:3]), limit=60.0)


def test_criterion_4_conservation_invariants():
    started = time.perf_counter()
    problems = []
    for game in ("gomoku", "chess"):
        for k in range(1000):
            mode = "standard" if k % 2 == 0 else "variant"
            engine = get_engine(GameId.parse(game, mode))
            _, final = random_playout(engine, 10_000 + k)
            scores = engine.outcome(final).scores
            if abs(sum(scores) - 1) > 1e-12 or not all(0 <= s <= 1 for s in scores):
                problems.append(f"{game} {mode} seed {k}: {scores}")
    holdem = get_engine(GameId.parse("holdem", "standard"))
    for k in range(100):
        seats = 2 + k % 11
        state = holdem.initial_state(k, seats=seats)
        bots = [builtin_bot("random", "holdem", k * 100 + s) for s in range(seats)]
        totals = []
        run_tournament(state, bots, on_hand=lambda st: totals.append(sum(st.stacks) + st.pot))
        if not totals or any(t != seats * 2000 for t in totals):
            problems.append(f"holdem tournament {k} leaked chips")
    bridge = get_engine(GameId.parse("bridge", "standard"))
    for k in range(30):
        open_ns, closed_ns = [], []
        for board in range(1, 13):
            deal = Deal.random(k * 100 + board, board)
            for rooms, seed in ((open_ns, 1), (closed_ns, 2)):
                _, final = random_playout(bridge, k * 1000 + board * 10 + seed, deal=deal)
                rooms.append(final.result().score_ns)
        _, (a, b) = match_vp(open_ns, closed_ns)
        if a + b != 20 or abs(a / 20 + b / 20 - 1) > 1e-12:
            problems.append(f"bridge set {k}: {a} + {b}")
    _verdict(4, "2,000 fuzzed playouts complement, 100 hold'em tournaments conserve chips, bridge VP sum 20",
             not problems, started, "; ".join(problems[:3]), limit=120.0)


def _pipeline(root: Path, workers: int, games: list[str], repeats: dict[str, int]):
    agents = [AgentSpec("rnd", bot="random"), AgentSpec("grd", bot="greedy"), AgentSpec("srch", bot="search2")]
    ws = Workspace(root)
    config = ws.init(TournamentConfig(agents=agents, games=games, rounds=2, seed=11, repeats=repeats, workers=workers))
    reports = [ws.run_round(config, n) for n in (1, 2)]
    ws.run_final(config)
    return ws, config, reports


def test_criterion_5_pipeline_end_to_end(tmp_path):
    started = time.perf_counter()
    ws, config, reports = _pipeline(tmp_path / "ws", 1, ["gomoku_standard"], {})
    problems = []
    gid = GameId.parse("gomoku", "standard")
    final = json.loads(ws.matrix_path(gid).read_text())
    matrix = ScoreMatrix.from_dict(final)
    if matrix.complement_violations():
        problems.append(f"complement violations {matrix.complement_violations()[:2]}")
    if matrix.missing_cells():
        problems.append(f"missing cells {matrix.missing_cells()[:2]}")
    if not final["stable"]:
        problems.append(f"final matrix not stable after {final['blocks']} blocks")
    for rep in reports:
        summary = rep.games["gomoku_standard"]
        if not summary.stable:
            problems.append(f"round {rep.round} not stable")
    metrics = json.loads(ws.metrics_path.read_text())
    if set(metrics["games"][0]["agents"]) != {"rnd", "grd", "srch"}:
        problems.append("metric report is missing agents")
    records = sorted(ws.root.rglob("match_*.json"))
    mismatches = sum(1 for p in records for _, ok, _ in replay_record(load_record(p)) if not ok)
    if mismatches:
        problems.append(f"{mismatches} replay mismatches")
    _verdict(5, "3 bots x 2 rounds: plan, execute, matrix, metrics, report", not problems, started,
             "; ".join([f"{len(records)} match records, final blocks {final['blocks']}"] + problems), limit=300.0)


def test_criterion_6_bot_strength_ordering():
    started = time.perf_counter()
    gid = GameId.parse("gomoku", "standard")
    slots = [StrategySlot("bot", 1), StrategySlot("random", 1)]
    scores = {}
    for bot in ("search2", "greedy"):
        endpoints = {"bot@1": AgentEndpoint("bot@1", bot=bot, seed=1),
                     "random@1": AgentEndpoint("random@1", bot="random", seed=2)}
        plan = plan_round_robin(slots, gid, seed=6, repeats=25)  # 50 games, 25 per colour
        (rec,) = execute_plan(plan, endpoints, Gateway())
        scores[bot] = rec.scores["bot@1"]
        assert len(rec.games) == 50
    ok = scores["search2"] >= 0.9 and scores["greedy"] >= 0.7
    _verdict(6, "search2 >= 0.9 and greedy >= 0.7 against random over 50 Gomoku games", ok, started,
             f"search2 {scores['search2']:.3f}, greedy {scores['greedy']:.3f}")


def test_criterion_7_determinism_across_workers(tmp_path):
    started = time.perf_counter()
    outputs = []
    games = ["gomoku_standard", "holdem_standard"]
    for workers in (1, 3):
        ws, config, _ = _pipeline(tmp_path / f"w{workers}", workers, games, {"gomoku": 1, "holdem": 2})
        files = [ws.matrix_path(GameId.parse(*g.split("_"))) for g in games] + [ws.metrics_path]
        outputs.append([p.read_bytes() for p in files])
    same = outputs[0] == outputs[1]
    _verdict(7, "matrices and metric report byte-identical with 1 and 3 workers", same, started)


def test_criterion_8_protocol_conformance():
    started = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        rows = run_suite(Path(tmp))
    ok = all(r["passed"] and r["plan_completed"] for r in rows)
    detail = ", ".join(f"{r['behavior']}={'ok' if r['passed'] else 'FAILED'}" for r in rows)
    _verdict(8, "test doubles: launch, health, move, timeout, illegal, crash, no-bind", ok, started, detail)
