import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None)
settings.load_profile("default")

SMALL_CONFIG = """
[benchmark]
master_seed = 7
iterations = 3-4
graphs_per_condition = 3

[cp]
shapes = 1*5, 2*6
name_styles = random, plain:chemistry
ce_d = 1
ce_d 2*6 = 1, 0.5

[ba]
shapes = 1*5, 2*5
name_styles = random, change:biology
ce_d = 1

[fi]
shapes = 1*5, 3*5
name_styles = random

[ci]
shapes = 2*5
name_styles = random, plain:economics
wi_n = 1, 3
"""


@pytest.fixture(scope="session")
def small_config():
    from causalbench.store import parse_config

    return parse_config(SMALL_CONFIG)


@pytest.fixture(scope="session")
def small_bench(tmp_path_factory, small_config):
    from causalbench.store import assemble

    out = tmp_path_factory.mktemp("bench")
    assemble(small_config, out)
    return out


@pytest.fixture(scope="session")
def small_records(small_bench):
    from causalbench.store import load_benchmark

    return load_benchmark(small_bench)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
