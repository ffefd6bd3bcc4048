"""Shared fixtures: frozen-data import path and memoized convergence studies."""

import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def studies():
    """Memoized level-6 convergence studies shared by the acceptance criteria.

    Returns a callable ``run(example, bubble, max_level=6, shear=0.0)`` so the
    expensive studies are built once per session no matter how many criteria
    consult them.
    """
    from quadmini.refelem import BubbleKind
    from quadmini.verify import run_convergence_study

    cache = {}

    def run(example, bubble, max_level=6, shear=0.0):
        kind = BubbleKind(bubble)
        key = (example, kind.value, max_level, shear)
        if key not in cache:
            cache[key] = run_convergence_study(example, kind, max_level, shear=shear)
        return cache[key]

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import CRITERION_LINES
    except ImportError:
        return
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
