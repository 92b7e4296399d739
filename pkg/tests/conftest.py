import os
from pathlib import Path

import numpy as np
import pytest

from topofc.graphstore import parse_tudataset

ROOT = Path(__file__).resolve().parents[1]
DATA = Path(os.environ.get("TOPOFC_DATA", ROOT / "data"))

# filled by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


def write_tu(root: Path, name: str, edges, indicator, labels, node_labels=None, node_attributes=None):
    """Write raw TUDataset files; ``edges`` are 1-based directed lines."""
    root.mkdir(parents=True, exist_ok=True)
    (root / f"{name}_A.txt").write_text("".join(f"{i}, {j}\n" for i, j in edges))
    (root / f"{name}_graph_indicator.txt").write_text("".join(f"{g}\n" for g in indicator))
    (root / f"{name}_graph_labels.txt").write_text("".join(f"{y}\n" for y in labels))
    if node_labels is not None:
        (root / f"{name}_node_labels.txt").write_text("".join(f"{v}\n" for v in node_labels))
    if node_attributes is not None:
        (root / f"{name}_node_attributes.txt").write_text(
            "".join(", ".join(str(x) for x in row) + "\n" for row in node_attributes)
        )
    return root


@pytest.fixture(scope="session")
def mutag():
    path = DATA / "MUTAG"
    if not path.is_dir():
        pytest.skip(f"MUTAG not found under {DATA}")
    return parse_tudataset(path)


@pytest.fixture
def tiny_dir(tmp_path):
    return write_tu(tmp_path / "TINY", "TINY", [(1, 2), (2, 1)], [1, 1], [1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
