from __future__ import annotations

import pytest

from peerarena.kernel import get_engine
from peerarena.rng import SeededRng


def random_playout(engine, seed: int, **params):
    """Play uniformly random legal moves to the end; returns (moves, final state)."""
    rng = SeededRng(seed)
    state = engine.initial_state(seed, **params)
    moves = []
    while not engine.is_terminal(state):
        move = rng.choice(engine.legal_moves(state))
        moves.append(move)
        state = engine.apply_move(state, move)
    return moves, state


@pytest.fixture
def playout():
    return random_playout


@pytest.fixture
def engine():
    return get_engine


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
