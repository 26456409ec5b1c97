import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "vvote",
    deadline=None,
    max_examples=int(os.environ.get("VVOTE_HYPOTHESIS_EXAMPLES", "40")),
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("vvote")


@pytest.fixture
def small_election(tmp_path):
    """A set-up alg1 election with one 12-ballot printer and dealer keys."""
    from vvote.election import Election
    from wbb_harness import harness_config, shared_keys

    e = Election(harness_config("wbb-harness"), tmp_path / "run", keys=shared_keys())
    e.setup(0.0)
    return e


@pytest.fixture
def small_election_alg2(tmp_path):
    from vvote.election import Election
    from wbb_harness import harness_config, shared_keys

    e = Election(harness_config("wbb-harness").replace(mode="alg2"), tmp_path / "run", keys=shared_keys())
    e.setup(0.0)
    return e


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split(" ", 2)[1]):
            terminalreporter.write_line(line)
