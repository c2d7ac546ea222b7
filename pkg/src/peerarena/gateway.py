"""Strategy-service protocol client and in-process bot dispatch.

An agent is either a builtin bot or an HTTP service started with
``bash start_ai.sh <port>``. Services answer ``GET /health`` with 200 and
``POST /move`` with ``{"move": "<token>"}``.

``Gateway.request_move`` always hands back a legal move: timeouts and
illegal answers are replaced by the game's default action and reported in
the returned :class:`MoveResult`. Only a service that stays unreachable
after the retry budget raises :class:`AgentFailure`.
"""

from __future__ import annotations

import contextlib
import json
import logging
import os
import signal
import socket
import subprocess
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .bots import Bot, builtin_bot
from .kernel import AgentFailure, ArenaError, Game, GameId, get_engine

log = logging.getLogger(__name__)

# per-move budgets in milliseconds
TIME_BUDGET_MS = {Game.GOMOKU: 10_000, Game.CHESS: 10_000, Game.HOLDEM: 3_000, Game.BRIDGE: 10_000}
RETRIES = 3
BACKOFF_S = 0.05


class LaunchFailure(ArenaError):
    pass


class HealthTimeout(ArenaError):
    pass


@dataclass(frozen=True)
class AgentEndpoint:
    agent_id: str
    kind: str = "builtin"  # "builtin" or "http"
    bot: str | None = None
    seed: int = 0
    host: str = "127.0.0.1"
    port: int | None = None
    script: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("builtin", "http"):
            raise ValueError(f"unknown endpoint kind {self.kind!r}")
        if self.kind == "builtin" and not self.bot:
            raise ValueError("builtin endpoints need a bot id")
        if self.kind == "http" and self.port is None and self.script is None:
            raise ValueError("http endpoints need a port or a launch script")

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"


@dataclass
class MoveRequest:
    game: str
    mode: str
    state: str
    legal_moves: Sequence[str]
    history: list[str]
    time_budget_ms: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "game": self.game,
                "mode": self.mode,
                "state": self.state,
                "legal_moves": list(self.legal_moves),
                "history": list(self.history),
                "time_budget_ms": self.time_budget_ms,
            },
            separators=(",", ":"),
        )


@dataclass
class MoveResult:
    move: str
    event: str | None = None  # None, "timeout" or "illegal"
    detail: str = ""
    wire: dict[str, Any] | None = None


@dataclass
class WireEntry:
    agent_id: str
    request: str
    response: str | None
    status: str


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def http_get(url: str, timeout: float) -> int:
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.status


class Gateway:
    """Routes move requests to endpoints; one request at a time per endpoint."""

    def __init__(self, retries: int = RETRIES, backoff_s: float = BACKOFF_S,
                 budgets_ms: dict[Game, int] | None = None):
        self.retries = retries
        self.backoff_s = backoff_s
        self.budgets_ms = dict(TIME_BUDGET_MS, **(budgets_ms or {}))
        self.wire_log: list[WireEntry] = []
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()
        self._procs: dict[str, subprocess.Popen] = {}
        self._ports: dict[str, int] = {}
        self._bots: dict[tuple[str, GameId], Bot] = {}

    # -- lifecycle -------------------------------------------------------
    def _lock(self, agent_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(agent_id, threading.Lock())

    def launch_and_health(self, endpoint: AgentEndpoint, timeout: float = 10.0) -> str:
        """Start the endpoint's service if needed and wait for ``/health``.

        Returns "ready"; raises LaunchFailure or HealthTimeout.
        """
        if endpoint.kind == "builtin":
            return "ready"
        port = self.port_of(endpoint)
        proc = None
        if endpoint.script is not None and endpoint.agent_id not in self._procs:
            script = Path(endpoint.script)
            if not script.is_file():
                raise LaunchFailure(f"launch script {script} not found")
            try:
                proc = subprocess.Popen(
                    ["bash", script.name, str(port)], cwd=script.parent,
                    stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL, start_new_session=True,
                )
            except OSError as exc:
                raise LaunchFailure(str(exc)) from exc
            self._procs[endpoint.agent_id] = proc
        proc = self._procs.get(endpoint.agent_id)
        deadline = time.monotonic() + timeout
        url = f"http://{endpoint.host}:{port}/health"
        while time.monotonic() < deadline:
            try:
                if http_get(url, timeout=0.5) == 200:
                    return "ready"
            except (OSError, urllib.error.URLError):
                pass
            if proc is not None and proc.poll() is not None:
                raise LaunchFailure(f"{endpoint.agent_id} exited with status {proc.returncode}")
            time.sleep(0.05)
        raise HealthTimeout(f"{endpoint.agent_id} not healthy after {timeout}s")

    def port_of(self, endpoint: AgentEndpoint) -> int:
        if endpoint.port is not None:
            return endpoint.port
        with self._guard:
            if endpoint.agent_id not in self._ports:
                self._ports[endpoint.agent_id] = free_port()
            return self._ports[endpoint.agent_id]

    def shutdown(self) -> None:
        for proc in self._procs.values():
            if proc.poll() is None:
                try:
                    os.killpg(proc.pid, signal.SIGTERM)
                    proc.wait(timeout=2)
                except (ProcessLookupError, subprocess.TimeoutExpired):
                    with contextlib.suppress(ProcessLookupError):
                        os.killpg(proc.pid, signal.SIGKILL)
            with contextlib.suppress(subprocess.TimeoutExpired):
                proc.wait(timeout=2)
        self._procs.clear()

    def __enter__(self) -> Gateway:
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()

    # -- moves -----------------------------------------------------------
    def bot(self, endpoint: AgentEndpoint, game_id: GameId) -> Bot:
        key = (endpoint.agent_id, game_id)
        with self._guard:
            if key not in self._bots:
                self._bots[key] = builtin_bot(endpoint.bot, game_id, endpoint.seed)
            return self._bots[key]

    def request_move(self, endpoint: AgentEndpoint, state: Any, history: Sequence[str],
                     seat: int | None = None, salt: object = None) -> MoveResult:
        """Ask ``endpoint`` for a move; ``salt`` varies the builtin random bot between games."""
        engine = get_engine(state.game_id)
        legal = engine.legal_moves(state)
        if endpoint.kind == "builtin":
            move = self.bot(endpoint, state.game_id).choose(state, legal, salt)
            if move in legal:
                return MoveResult(move)
            return MoveResult(engine.default_move(state), "illegal", f"bot answered {move!r}")
        if seat is None:
            seat = engine.to_move(state)
        budget = self.budgets_ms[state.game_id.game]
        request = MoveRequest(
            state.game_id.game.value, state.game_id.mode.value,
            engine.serialize(state, seat), legal, list(history), budget,
        )
        body = request.to_json()
        with self._lock(endpoint.agent_id):
            status, text = self._post(endpoint, body, budget / 1000)
        wire = {"request": body, "response": text, "status": status}
        self.wire_log.append(WireEntry(endpoint.agent_id, body, text, status))
        if status == "timeout":
            return MoveResult(engine.default_move(state), "timeout", f"no answer within {budget} ms", wire)
        move = _parse_move(text)
        if move is None or move not in legal:
            return MoveResult(engine.default_move(state), "illegal", f"answered {move if move is not None else text!r}", wire)
        return MoveResult(move, None, "", wire)

    def _post(self, endpoint: AgentEndpoint, body: str, timeout: float) -> tuple[str, str | None]:
        url = f"http://{endpoint.host}:{self.port_of(endpoint)}/move"
        last_error = ""
        for attempt in range(self.retries):
            req = urllib.request.Request(
                url, data=body.encode("utf-8"), method="POST",
                headers={"Content-Type": "application/json; charset=utf-8"},
            )
            try:
                with urllib.request.urlopen(req, timeout=timeout) as resp:
                    return "ok", resp.read().decode("utf-8", errors="replace")
            except urllib.error.HTTPError as exc:
                return "ok", exc.read().decode("utf-8", errors="replace")
            except (socket.timeout, TimeoutError):
                return "timeout", None
            except (urllib.error.URLError, ConnectionError, OSError) as exc:
                reason = getattr(exc, "reason", exc)
                if isinstance(reason, (socket.timeout, TimeoutError)):
                    return "timeout", None
                last_error = str(reason)
                log.warning("move request to %s failed (%s), attempt %d", endpoint.agent_id, reason, attempt + 1)
                time.sleep(self.backoff_s * 2 ** attempt)
        raise AgentFailure(None, f"{endpoint.agent_id} unreachable after {self.retries} attempts: {last_error}")


def _parse_move(text: str | None) -> str | None:
    if text is None:
        return None
    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        return None
    move = payload.get("move") if isinstance(payload, dict) else None
    return move if isinstance(move, str) else None


def conformance_check(gateway: Gateway, endpoint: AgentEndpoint, game_id: GameId,
                      moves: int = 3, health_timeout: float = 10.0) -> dict[str, Any]:
    """Launch, probe ``/health`` and ask for a few moves from the initial position.

    Returns ``{"launch": ..., "moves": [...], "ok": bool}``; never raises for
    agent misbehaviour.
    """
    report: dict[str, Any] = {"agent": endpoint.agent_id, "game": str(game_id), "moves": []}
    try:
        report["launch"] = gateway.launch_and_health(endpoint, health_timeout)
    except ArenaError as exc:
        report["launch"] = f"{type(exc).__name__}: {exc}"
        report["ok"] = False
        return report
    engine = get_engine(game_id)
    state = engine.initial_state(0)
    ok = True
    for _ in range(moves):
        if engine.is_terminal(state):
            break
        try:
            result = gateway.request_move(endpoint, state, [], engine.to_move(state))
        except AgentFailure as exc:
            report["moves"].append({"event": "agent_failure", "detail": exc.reason})
            ok = False
            break
        report["moves"].append({"move": result.move, "event": result.event, "detail": result.detail})
        ok = ok and result.event is None
        state = engine.apply_move(state, result.move)
    report["ok"] = ok
    return report
