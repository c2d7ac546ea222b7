"""Command-line entry point: ``peerarena <run|metrics|consistency|conformance|replay>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from .gateway import AgentEndpoint, Gateway, conformance_check
from .kernel import ArenaError, GameId
from .metrics import action_consistency, sample_probes
from .orchestrator import load_record, replay_record
from .workspace import TournamentConfig, Workspace, load_manifest


class UsageError(ArenaError):
    pass


def _game_id(args) -> GameId:
    return GameId.parse(args.game, args.mode)


def cmd_run(args) -> int:
    ws = Workspace(args.workspace)
    games = [f"{args.game}_{args.mode}"] if args.game else None
    if args.agents:
        config = TournamentConfig(
            agents=load_manifest(args.agents),
            games=games or ["gomoku_standard"],
            rounds=args.rounds,
            seed=args.seed,
            repeats={args.game: args.repeats} if args.repeats and args.game else {},
            workers=args.workers,
            max_blocks=args.max_blocks,
        )
        config = ws.init(config)
    else:
        config = ws.load_config()
        if games and games[0] not in config.games:
            config.games.append(games[0])
            config = ws.init(config)
    selected = [_game_id(args)] if args.game else None
    if args.final:
        report = ws.run_final(config, selected, workers=args.workers)
        print(f"wrote {ws.metrics_path}")
        if args.print:
            print(report.leaderboard_csv(), end="")
        return 0
    if args.round is None:
        raise UsageError("run needs --round N or --final")
    report = ws.run_round(config, args.round, selected, workers=args.workers)
    print(f"wrote {ws.report_path(args.round)}")
    if args.print:
        print(report.summary_text(), end="")
    return 0


def cmd_metrics(args) -> int:
    ws = Workspace(args.workspace)
    report = ws.compute_metrics()
    print(report.leaderboard_csv() if args.csv else report.to_json(), end="")
    return 0


def _endpoint(name: str, seed: int) -> AgentEndpoint:
    if name.endswith(".sh"):
        return AgentEndpoint(Path(name).parent.name or name, "http", seed=seed, script=name)
    return AgentEndpoint(name, "builtin", bot=name, seed=seed)


def cmd_consistency(args) -> int:
    gid = _game_id(args)
    probes = sample_probes(gid, args.probes, args.seed, args.from_fraction)
    a, b = _endpoint(args.a, args.seed), _endpoint(args.b, args.seed)
    if a.agent_id == b.agent_id:
        b = AgentEndpoint(b.agent_id + "#2", b.kind, b.bot, b.seed, b.host, b.port, b.script)
    with Gateway() as gateway:
        for e in (a, b):
            gateway.launch_and_health(e)

        def policy(endpoint):
            return lambda st: gateway.request_move(endpoint, st, [], salt=args.seed).move

        value = action_consistency(policy(a), policy(b), probes)
    print(json.dumps({"game": str(gid), "a": args.a, "b": args.b, "probes": len(probes),
                      "consistency": value}, sort_keys=True))
    return 0


def cmd_conformance(args) -> int:
    if args.doubles:
        from .testing.conformance import run_suite

        with tempfile.TemporaryDirectory() as tmp:
            rows = run_suite(Path(tmp), _game_id(args))
        for row in rows:
            print(json.dumps(row, sort_keys=True))
        return 0 if all(r["passed"] for r in rows) else 1
    if not args.script:
        raise UsageError("conformance needs --script PATH or --doubles")
    endpoint = AgentEndpoint(Path(args.script).parent.name or "agent", "http", script=args.script)
    with Gateway() as gateway:
        result = conformance_check(gateway, endpoint, _game_id(args), moves=args.moves)
    print(json.dumps(result, sort_keys=True))
    return 0 if result["ok"] else 1


def cmd_replay(args) -> int:
    paths: list[Path] = []
    for p in map(Path, args.paths):
        paths += sorted(p.rglob("match_*.json")) if p.is_dir() else [p]
    if not paths:
        raise UsageError("no match records found")
    bad = 0
    for path in paths:
        record = load_record(path)
        for i, ok, _ in replay_record(record):
            if not ok:
                bad += 1
                print(f"MISMATCH {path} game {i}")
    print(f"replayed {len(paths)} records, {bad} mismatches")
    return 0 if bad == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peerarena", description="Tournament arena for game-playing strategies.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def game_args(p, required=True):
        p.add_argument("--game", required=required, choices=["gomoku", "chess", "holdem", "bridge"])
        p.add_argument("--mode", default="standard", choices=["standard", "variant"])

    run = sub.add_parser("run", help="play one development round or the final tournament")
    run.add_argument("--workspace", required=True)
    game_args(run, required=False)
    run.add_argument("--agents", help="agents.json manifest (first run only)")
    group = run.add_mutually_exclusive_group()
    group.add_argument("--round", type=int)
    group.add_argument("--final", action="store_true")
    run.add_argument("--rounds", type=int, default=4)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--repeats", type=int)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--max-blocks", type=int, default=4)
    run.add_argument("--print", action="store_true", help="print the summary")
    run.set_defaults(func=cmd_run)

    met = sub.add_parser("metrics", help="compute the metric report from the final logs")
    met.add_argument("--workspace", required=True)
    met.add_argument("--csv", action="store_true", help="print the leaderboard instead of JSON")
    met.set_defaults(func=cmd_metrics)

    con = sub.add_parser("consistency", help="share of endgame probes where two policies agree")
    game_args(con)
    con.add_argument("--a", required=True, help="builtin bot id or path to start_ai.sh")
    con.add_argument("--b", required=True)
    con.add_argument("--probes", type=int, default=50)
    con.add_argument("--seed", type=int, default=0)
    con.add_argument("--from-fraction", type=float, default=0.5)
    con.set_defaults(func=cmd_consistency)

    conf = sub.add_parser("conformance", help="check an agent service against the protocol")
    game_args(conf, required=False)
    conf.add_argument("--script", help="path to the agent's start_ai.sh")
    conf.add_argument("--doubles", action="store_true", help="run the bundled misbehaving doubles")
    conf.add_argument("--moves", type=int, default=3)
    conf.set_defaults(func=cmd_conformance, game="gomoku")

    rep = sub.add_parser("replay", help="re-derive outcomes from match records")
    rep.add_argument("paths", nargs="+", help="match_<k>.json files or directories")
    rep.set_defaults(func=cmd_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ArenaError, ValueError, OSError) as exc:
        print(f"peerarena: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
