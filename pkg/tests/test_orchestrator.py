from __future__ import annotations

import json
from collections import Counter

import numpy as np
import pytest

from peerarena.gateway import AgentEndpoint, Gateway, MoveResult
from peerarena.kernel import AgentFailure, GameId, get_engine
from peerarena.matrix import MissingCell, ScoreMatrix, StrategySlot, make_slots
from peerarena.orchestrator import (
    ADVANCE_FIELD,
    GLOBAL_SHUFFLE,
    SAME_ROUND_ALL,
    SELF_ACROSS_ROUNDS,
    EmptySlots,
    TooFewSlots,
    accumulate_matrix,
    accumulate_rates,
    execute_plan,
    load_record,
    plan_batches,
    plan_block,
    plan_round_robin,
    play_game,
    replay_record,
    run_scope,
    stability_check,
)

GOMOKU = GameId.parse("gomoku", "standard")
CHESS = GameId.parse("chess", "standard")
HOLDEM = GameId.parse("holdem", "standard")
BRIDGE = GameId.parse("bridge", "standard")


def builtin(slots, bots):
    return {str(s): AgentEndpoint(str(s), bot=b, seed=i) for i, (s, b) in enumerate(zip(slots, bots))}


# -- matrix ---------------------------------------------------------------


def test_slot_labels():
    assert str(StrategySlot("gpt", 2)) == "gpt@2"
    assert StrategySlot.parse("a@b@3") == StrategySlot("a@b", 3)
    with pytest.raises(ValueError):
        StrategySlot.parse("nope")
    with pytest.raises(ValueError):
        make_slots(["a", "a"], [1])


def test_matrix_round_trip_and_missing_cells():
    m = ScoreMatrix.from_pairs(["a@1", "b@1", "c@1"], {("a@1", "b@1"): 0.75})
    assert m["b@1", "a@1"] == 0.25
    again = ScoreMatrix.from_dict(json.loads(m.to_json(game="gomoku", mode="standard")))
    assert again == m
    assert ("a@1", "c@1") in m.missing_cells()
    with pytest.raises(MissingCell):
        m.cell("a@1", "c@1")
    with pytest.raises(ValueError):
        m["a@1", "a@1"] = 1.0
    with pytest.raises(ValueError):
        ScoreMatrix.from_dict({"schema_version": 99, "slots": [], "values": []})


def test_complement_violations_detected():
    m = ScoreMatrix(["a@1", "b@1"], [[np.nan, 0.7], [0.4, np.nan]])
    assert m.complement_violations() == [("a@1", "b@1", pytest.approx(1.1))]


# -- plans ----------------------------------------------------------------


def test_round_robin_counts_and_orientation():
    slots = make_slots(["a", "b", "c"], [1])
    plan = plan_round_robin(slots, GOMOKU, seed=3)
    assert len(plan.entries) == 3
    assert all(e.games == 4 for e in plan.entries)
    assert sum(2 * e.games for e in plan.entries) == 24
    pairs = {frozenset(e.slots) for e in plan.entries}
    assert len(pairs) == 3
    with pytest.raises(TooFewSlots):
        plan_round_robin(slots[:1], GOMOKU)
    with pytest.raises(Exception):
        plan_round_robin(slots, HOLDEM)


def test_orientation_balance_in_played_games():
    slots = make_slots(["a", "b"], [1])
    plan = plan_round_robin(slots, GOMOKU, seed=1, repeats=3)
    records = execute_plan(plan, builtin(slots, ["random", "random"]), Gateway())
    first = Counter(g.seats[0] for g in records[0].games)
    assert first == {"a@1": 3, "b@1": 3}


def test_plan_seeds_do_not_depend_on_slot_count_elsewhere():
    slots = make_slots(["a", "b", "c"], [1, 2])
    one = plan_round_robin(slots, CHESS, seed=5)
    two = plan_round_robin(slots, CHESS, seed=5)
    assert [e.seed for e in one.entries] == [e.seed for e in two.entries]
    assert len({e.seed for e in one.entries}) == len(one.entries)


def test_batch_types():
    slots = make_slots(["a", "b", "c"], [1, 2])
    t1 = plan_batches(slots, SELF_ACROSS_ROUNDS)
    assert sorted(sorted(e.slots) for e in t1.entries) == [["a@1", "a@2"], ["b@1", "b@2"], ["c@1", "c@2"]]
    t2 = plan_batches(slots, SAME_ROUND_ALL)
    assert sorted(sorted(e.slots) for e in t2.entries) == [["a@1", "b@1", "c@1"], ["a@2", "b@2", "c@2"]]
    t3 = plan_batches(slots, GLOBAL_SHUFFLE, batch_size=4, repeats=2)
    assert len(t3.entries) == 4
    for rep in (t3.entries[:2], t3.entries[2:]):
        assert sorted(s for e in rep for s in e.slots) == sorted(str(s) for s in slots)
        assert sorted(len(e.slots) for e in rep) == [3, 3]
    t4 = plan_batches(slots, ADVANCE_FIELD)
    focus = {e.focus: sorted(e.slots) for e in t4.entries}
    assert focus["a@2"] == ["a@2", "b@1", "c@1"]
    assert set(focus) == {"a@2", "b@2", "c@2"}
    with pytest.raises(EmptySlots):
        plan_batches([], GLOBAL_SHUFFLE)


def test_block_growth():
    slots = make_slots(["a", "b"], [1])
    games = [plan_block(GOMOKU, slots, 0, k, 0).entries[0].games for k in (1, 2, 3, 4)]
    assert games == [4, 4, 8, 16]
    # bridge keeps 12-board matches and adds matches instead
    assert [len(plan_block(BRIDGE, slots, 0, k, 0).entries) for k in (1, 2, 3)] == [1, 1, 2]


# -- playing --------------------------------------------------------------


class ScriptedGateway:
    """Returns canned MoveResults for one slot and defers to builtins for others."""

    def __init__(self, victim: str, event: str | None = None, fail_at: int | None = None):
        self.victim, self.event, self.fail_at = victim, event, fail_at
        self.real = Gateway()
        self.calls = 0

    def request_move(self, endpoint, state, history, seat=None, salt=None):
        if endpoint.agent_id != self.victim:
            return self.real.request_move(endpoint, state, history, seat, salt)
        self.calls += 1
        engine = get_engine(state.game_id)
        if self.fail_at is not None and self.calls >= self.fail_at:
            raise AgentFailure(seat, "connection refused")
        if self.event:
            return MoveResult(engine.default_move(state), self.event, "scripted")
        return MoveResult(engine.legal_moves(state)[0])


@pytest.mark.parametrize("gid", [GOMOKU, CHESS])
@pytest.mark.parametrize("event,termination", [("timeout", "timeout"), ("illegal", "illegal_move")])
def test_second_offense_forfeits(gid, event, termination):
    slots = ["bad@1", "ok@1"]
    endpoints = {"bad@1": AgentEndpoint("bad@1", bot="random"), "ok@1": AgentEndpoint("ok@1", bot="random")}
    g = play_game(gid, 7, {}, slots, endpoints, ScriptedGateway("bad@1", event))
    assert [e["kind"] for e in g.events] == [event, event]
    assert g.outcome.termination.value == termination
    assert g.outcome.scores == (0.0, 1.0)
    assert len(g.moves) == 2  # first offense was substituted, second ended the game


def test_unreachable_agent_forfeits_symmetric_game():
    endpoints = {"a@1": AgentEndpoint("a@1", bot="random"), "b@1": AgentEndpoint("b@1", bot="random")}
    g = play_game(GOMOKU, 1, {}, ["a@1", "b@1"], endpoints, ScriptedGateway("b@1", fail_at=1))
    assert g.outcome.termination.value == "agent_failure"
    assert g.outcome.scores == (1.0, 0.0)


def test_missing_slot_forfeits_at_ply_zero():
    endpoints = {"a@1": None, "b@1": AgentEndpoint("b@1", bot="random")}
    g = play_game(CHESS, 1, {}, ["a@1", "b@1"], endpoints, Gateway())
    assert g.moves == [] and g.outcome.scores == (0.0, 1.0)


def test_holdem_failure_folds_out_and_play_continues():
    seats = [f"p{i}@1" for i in range(4)]
    endpoints = {s: AgentEndpoint(s, bot="random", seed=i) for i, s in enumerate(seats)}
    g = play_game(HOLDEM, 3, {"seats": 4}, seats, endpoints, ScriptedGateway("p1@1", fail_at=2))
    assert g.forfeit is None
    assert any(e["kind"] == "agent_failure" for e in g.events)
    assert g.outcome.scores[1] == 0


def test_bridge_offenses_substitute_and_continue():
    endpoints = {"a@1": AgentEndpoint("a@1", bot="random"), "b@1": AgentEndpoint("b@1", bot="random")}
    g = play_game(BRIDGE, 2, {}, ["a@1", "b@1"], endpoints, ScriptedGateway("a@1", "timeout"))
    assert g.forfeit is None and get_engine(BRIDGE)
    assert all(e["kind"] == "timeout" for e in g.events) and len(g.events) > 3


def test_bridge_rooms_share_deals_and_vps_sum():
    slots = make_slots(["a", "b"], [1])
    plan = plan_round_robin(slots, BRIDGE, seed=2, repeats=3)
    (rec,) = execute_plan(plan, builtin(slots, ["random", "greedy"]), Gateway())
    assert len(rec.games) == 6
    for g_open, g_closed in zip(rec.games[::2], rec.games[1::2]):
        assert g_open.seed == g_closed.seed and g_open.seats == g_closed.seats[::-1]
    assert sum(rec.summary["vp"]) == pytest.approx(20)
    assert rec.scores["a@1"] + rec.scores["b@1"] == pytest.approx(1)


def test_bridge_forfeit_decides_match():
    slots = make_slots(["a", "b"], [1])
    endpoints = {"a@1": None, "b@1": AgentEndpoint("b@1", bot="random")}
    (rec,) = execute_plan(plan_round_robin(slots, BRIDGE, repeats=1), endpoints, Gateway())
    assert rec.scores == {"a@1": 0.0, "b@1": 1.0}


# -- estimates ------------------------------------------------------------


def test_accumulate_all_wins():
    slots = make_slots(["a", "b"], [1])
    plan = plan_round_robin(slots, GOMOKU, seed=0, repeats=4)
    records = execute_plan(plan, builtin(slots, ["search2", "random"]), Gateway())
    m = accumulate_matrix(records, slots, required=[("a@1", "b@1")])
    assert m["a@1", "b@1"] + m["b@1", "a@1"] == pytest.approx(1)
    with pytest.raises(MissingCell):
        accumulate_matrix([], slots, required=[("a@1", "b@1")])


def test_stability_check():
    prev = np.array([[np.nan, 0.6], [0.4, np.nan]])
    assert stability_check([prev, prev]).stable
    res = stability_check([prev, prev + 0.1])
    assert not res.stable and res.change == pytest.approx(0.2)
    with pytest.raises(Exception):
        stability_check([prev])


def test_batch_rates():
    slots = make_slots(["a", "b", "c"], [1, 2])
    endpoints = builtin(slots, ["random"] * 6)
    plan = plan_block(HOLDEM, slots, 0, 1, 0, repeats=1, final=True)
    records = execute_plan(plan, endpoints, Gateway())
    rates = accumulate_rates(records)
    assert set(rates.rates) == {1, 2, 3}
    for t in (2, 3):
        total = sum(rates.rates[t].values())
        groups = sum(1 for r in records if r.entry.experiment == t)
        assert total == pytest.approx(groups)


def test_run_scope_records_replay(tmp_path):
    slots = make_slots(["a", "b", "c"], [1])
    endpoints = builtin(slots, ["random", "greedy", "search2"])
    res = run_scope(GOMOKU, slots, endpoints, Gateway(), seed=1, log_dir=tmp_path, repeats=2, max_blocks=2)
    assert res.blocks in (1, 2) and len(res.history) == res.blocks - 1
    assert res.matrix.complement_violations() == []
    files = sorted(tmp_path.glob("match_*.json"))
    assert len(files) == len(res.records)
    for f in files:
        assert all(ok for _, ok, _ in replay_record(load_record(f)))


def test_worker_count_does_not_change_results():
    slots = make_slots(["a", "b", "c"], [1])
    endpoints = builtin(slots, ["random", "greedy", "random"])
    plan = plan_round_robin(slots, CHESS, seed=4, repeats=1)
    one = execute_plan(plan, endpoints, Gateway(), workers=1)
    three = execute_plan(plan, endpoints, Gateway(), workers=3)
    assert [r.to_json() for r in one] == [r.to_json() for r in three]
