import sys

import numpy as np
import pytest

from valnet import MassValuation, PointValuation, ValuationSystem

# Dress example tables, rows by Philco/Speech, columns by Dress (B W P)
P_WASHING = [[1 / 6, 1 / 6, 1 / 6], [0.2, 0.1, 0.2]]
P_COHERENCE = [[0.025, 0.025, 0.45], [1 / 6, 1 / 6, 1 / 6]]
PI_WASHING = [[1, 1, 1], [1, 0.2, 1]]
PI_COHERENCE = [[0.1, 0.1, 1], [1, 1, 1]]
T_WASHING = [[True, True, True], [True, False, True]]
T_COHERENCE = [[False, False, True], [True, True, True]]


def dress_system() -> ValuationSystem:
    s = ValuationSystem()
    s.add_variable("Dress", ["B", "W", "P"])
    s.add_variable("Philco", ["ok", "out"])
    s.add_variable("Speech", ["uttered", "unuttered"])
    s.add_relation("washing", ["Philco", "Dress"])
    s.add_relation("coherence", ["Speech", "Dress"])
    return s


def example1_valuations(s: ValuationSystem, calculus: str):
    """(washing, coherence) valuations for ``calculus``; tables are transposed to (Dress, X)."""
    W, C = s.scope_of("washing"), s.scope_of("coherence")
    if calculus == "belief":
        w = MassValuation.from_sets(
            W, {(("B", "ok"), ("W", "ok"), ("P", "ok"), ("B", "out"), ("P", "out")): 0.8},
            complete=True,
        )
        c = MassValuation.from_sets(
            C, {(("P", "uttered"), ("B", "unuttered"), ("W", "unuttered"), ("P", "unuttered")): 0.9},
            complete=True,
        )
        return w, c
    tables = {
        "probability": (P_WASHING, P_COHERENCE),
        "possibility": (PI_WASHING, PI_COHERENCE),
        "boolean": (T_WASHING, T_COHERENCE),
    }[calculus]
    return tuple(PointValuation(sc, calculus, np.array(t).T) for sc, t in zip((W, C), tables))


def dress_state(calculus: str, state: int) -> ValuationSystem:
    """The dress example after ``state`` pieces of evidence (0, 1 or 2)."""
    s = dress_system()
    w, c = example1_valuations(s, calculus)
    if state >= 1:
        s.attach("washing", calculus, w)
        s.observe("Philco", "out")
    if state >= 2:
        s.attach("coherence", calculus, c)
        s.observe("Speech", "uttered")
    return s


@pytest.fixture
def dress():
    return dress_system()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
