"""
Shared fixtures for the tben test suite.
"""
import os
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

import main  # noqa: E402
from src.encoding.projection import Normalization, RMProjector  # noqa: E402


def pytest_collection_modifyitems(config, items):
    if os.environ.get("TBEN_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set TBEN_RUN_SLOW=1 to run full-size benchmarks")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def run_cli(capsys):
    """Run the CLI in-process; returns (exit code, stdout)."""

    def _run(*argv):
        code = main.main([str(a) for a in argv])
        return code, capsys.readouterr().out

    return _run


def make_projector(w1, w2, norm=None) -> RMProjector:
    """Projector with hand-picked sign matrices."""
    w1 = np.asarray(w1, dtype=np.int8)
    w2 = np.asarray(w2, dtype=np.int8)
    return RMProjector(
        seed=0,
        input_dim=w1.shape[1],
        output_dim=w1.shape[0],
        norm=norm or Normalization.identity(),
        w1=w1,
        w2=w2,
    )
