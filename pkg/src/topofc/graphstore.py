"""Loading, validating and writing graph-classification datasets in the
TUDataset text format.

Raw files use 1-based global node ids; everything in memory is 0-based and
local to its graph.
"""

from __future__ import annotations

import hashlib
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import CrossGraphEdgeError, FormatError, ParseError

log = logging.getLogger(__name__)

MANDATORY_SUFFIXES = ("A", "graph_indicator", "graph_labels")
OPTIONAL_SUFFIXES = ("node_labels", "node_attributes")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """An undirected simple graph with optional node labels and attributes.

    ``edges`` is an ``(E, 2)`` integer array with ``i < j`` in every row,
    rows sorted lexicographically and unique.
    """

    num_nodes: int
    edges: np.ndarray
    node_labels: Optional[np.ndarray] = None
    node_attributes: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.num_nodes < 1:
            raise FormatError("a graph needs at least one node")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= self.num_nodes:
                raise FormatError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise FormatError("self-loop in edge list")
            e = np.sort(e, axis=1)
            order = np.lexsort((e[:, 1], e[:, 0]))
            e = e[order]
            if np.any(np.all(e[1:] == e[:-1], axis=1)):
                raise FormatError("duplicate undirected edge")
        object.__setattr__(self, "edges", _frozen(np.ascontiguousarray(e)))
        if self.node_labels is not None:
            lab = np.asarray(self.node_labels, dtype=np.int64)
            if lab.shape != (self.num_nodes,):
                raise FormatError("node_labels length differs from num_nodes")
            object.__setattr__(self, "node_labels", _frozen(lab))
        if self.node_attributes is not None:
            att = np.asarray(self.node_attributes, dtype=np.float64)
            if att.ndim != 2 or att.shape[0] != self.num_nodes:
                raise FormatError("node_attributes row count differs from num_nodes")
            if not np.all(np.isfinite(att)):
                raise FormatError("node_attributes contain non-finite values")
            object.__setattr__(self, "node_attributes", _frozen(att))

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.num_nodes)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b)

        return (
            self.num_nodes == other.num_nodes
            and same(self.edges, other.edges)
            and same(self.node_labels, other.node_labels)
            and same(self.node_attributes, other.node_attributes)
        )

    __hash__ = None


@dataclass(frozen=True)
class GraphParseStats:
    self_loops: int = 0
    duplicate_lines: int = 0
    asymmetric_edges: int = 0


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    graphs: tuple
    labels: np.ndarray
    label_alphabet: tuple
    parse_stats: tuple = field(default=())
    source_digest: str = ""

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (len(self.graphs),):
            raise FormatError(
                f"{len(self.graphs)} graphs but {labels.size} graph labels"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= len(self.label_alphabet)):
            raise FormatError("graph label outside the label alphabet")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if not self.parse_stats:
            object.__setattr__(
                self, "parse_stats", tuple(GraphParseStats() for _ in self.graphs)
            )

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def num_classes(self) -> int:
        return len(self.label_alphabet)

    def node_label_alphabet(self) -> tuple:
        """Sorted distinct node labels over all graphs (empty if unlabeled)."""
        seen = set()
        for g in self.graphs:
            if g.node_labels is not None:
                seen.update(int(v) for v in np.unique(g.node_labels))
        return tuple(sorted(seen))


@dataclass(frozen=True)
class GraphViolations:
    graph: int
    self_loops_removed: int
    duplicate_edges_removed: int
    asymmetric_edges: int
    isolated_nodes: int

    @property
    def total(self) -> int:
        return (
            self.self_loops_removed
            + self.duplicate_edges_removed
            + self.asymmetric_edges
            + self.isolated_nodes
        )


@dataclass(frozen=True)
class ValidationReport:
    per_graph: tuple

    @property
    def violations(self) -> tuple:
        return tuple(v for v in self.per_graph if v.total)

    @property
    def ok(self) -> bool:
        return not self.violations

    def totals(self) -> dict:
        keys = ("self_loops_removed", "duplicate_edges_removed", "asymmetric_edges", "isolated_nodes")
        return {k: sum(getattr(v, k) for v in self.per_graph) for k in keys}


def _read_lines(path: Path) -> list:
    """Return the non-blank content lines of ``path`` as ``(lineno, text)``.

    Trailing blank lines are tolerated; a blank line followed by content is
    reported as corruption.
    """
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        raw = fh.read().split("\n")
    while raw and not raw[-1].strip():
        raw.pop()
    out = []
    for lineno, text in enumerate(raw, start=1):
        text = text.strip()
        if not text:
            raise ParseError(path, lineno, "blank line inside file")
        out.append((lineno, text))
    return out


def _parse_int(path, lineno, token) -> int:
    try:
        return int(token.strip())
    except ValueError:
        raise ParseError(path, lineno, f"non-numeric token {token.strip()!r}") from None


def _parse_float(path, lineno, token) -> float:
    try:
        return float(token.strip())
    except ValueError:
        raise ParseError(path, lineno, f"non-numeric token {token.strip()!r}") from None


def dataset_files(root_dir, name: str) -> dict:
    root = Path(root_dir)
    files = {}
    for suffix in MANDATORY_SUFFIXES:
        p = root / f"{name}_{suffix}.txt"
        if not p.is_file():
            raise FormatError(f"missing mandatory file {p}")
        files[suffix] = p
    for suffix in OPTIONAL_SUFFIXES:
        p = root / f"{name}_{suffix}.txt"
        if p.is_file():
            files[suffix] = p
    return files


def digest_files(files: dict) -> str:
    h = hashlib.sha256()
    for key in sorted(files):
        h.update(key.encode())
        h.update(b"\0")
        h.update(Path(files[key]).read_bytes())
    return h.hexdigest()


def parse_tudataset(root_dir, name: Optional[str] = None) -> Dataset:
    """Parse ``{name}_*.txt`` files under ``root_dir`` into a :class:`Dataset`.

    ``name`` defaults to the directory's base name. Self-loops and repeated
    edge lines are dropped and counted per graph (see :func:`validate`).
    """
    root = Path(root_dir)
    if name is None:
        name = root.resolve().name
    if not root.is_dir():
        raise FormatError(f"dataset directory {root} does not exist")
    files = dataset_files(root, name)

    ind_path = files["graph_indicator"]
    indicator = np.array(
        [_parse_int(ind_path, ln, t) for ln, t in _read_lines(ind_path)], dtype=np.int64
    )
    num_total = indicator.size
    if num_total == 0:
        raise FormatError(f"{ind_path} is empty")

    lab_path = files["graph_labels"]
    raw_labels = [_parse_int(lab_path, ln, t) for ln, t in _read_lines(lab_path)]
    num_graphs = len(raw_labels)

    gids = np.unique(indicator)
    if gids[0] < 1 or gids[-1] > num_graphs or gids.size != num_graphs:
        raise FormatError(
            f"{ind_path} references graph ids {gids[0]}..{gids[-1]} "
            f"({gids.size} distinct) but {lab_path} lists {num_graphs} graphs"
        )
    graph_of = indicator - 1
    # local index of each global node within its graph
    order = np.argsort(graph_of, kind="stable")
    counts = np.bincount(graph_of, minlength=num_graphs)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    local = np.empty(num_total, dtype=np.int64)
    local[order] = np.arange(num_total) - np.repeat(starts, counts)

    a_path = files["A"]
    directed: list = [Counter() for _ in range(num_graphs)]
    self_loops = np.zeros(num_graphs, dtype=np.int64)
    for ln, text in _read_lines(a_path):
        parts = text.split(",")
        if len(parts) != 2:
            raise ParseError(a_path, ln, f"expected 'i, j', got {text!r}")
        u = _parse_int(a_path, ln, parts[0]) - 1
        v = _parse_int(a_path, ln, parts[1]) - 1
        for x in (u, v):
            if not 0 <= x < num_total:
                raise ParseError(a_path, ln, f"node id {x + 1} outside 1..{num_total}")
        gu, gv = graph_of[u], graph_of[v]
        if gu != gv:
            raise CrossGraphEdgeError(
                f"{a_path}:{ln}: node {u + 1} (graph {gu + 1}) linked to "
                f"node {v + 1} (graph {gv + 1})"
            )
        if u == v:
            self_loops[gu] += 1
            continue
        directed[gu][(int(local[u]), int(local[v]))] += 1

    node_labels = None
    if "node_labels" in files:
        p = files["node_labels"]
        rows = _read_lines(p)
        if len(rows) != num_total:
            raise FormatError(f"{p} has {len(rows)} lines, expected {num_total}")
        node_labels = np.array([_parse_int(p, ln, t) for ln, t in rows], dtype=np.int64)

    node_attributes = None
    if "node_attributes" in files:
        p = files["node_attributes"]
        rows = _read_lines(p)
        if len(rows) != num_total:
            raise FormatError(f"{p} has {len(rows)} lines, expected {num_total}")
        parsed = [[_parse_float(p, ln, tok) for tok in t.split(",")] for ln, t in rows]
        width = len(parsed[0])
        for (ln, _), r in zip(rows, parsed):
            if len(r) != width:
                raise ParseError(p, ln, f"expected {width} attributes, got {len(r)}")
            if not all(np.isfinite(r)):
                raise ParseError(p, ln, "non-finite attribute value")
        node_attributes = np.array(parsed, dtype=np.float64)

    graphs = []
    stats = []
    for g in range(num_graphs):
        members = order[starts[g]:starts[g] + counts[g]]
        pairs = directed[g]
        undirected = {}
        dup = 0
        for (u, v), c in pairs.items():
            dup += c - 1
            key = (u, v) if u < v else (v, u)
            undirected.setdefault(key, []).append((u, v))
        asym = sum(1 for dirs in undirected.values() if len(dirs) == 1)
        edges = np.array(sorted(undirected), dtype=np.int64).reshape(-1, 2)
        graphs.append(
            Graph(
                num_nodes=int(counts[g]),
                edges=edges,
                node_labels=None if node_labels is None else node_labels[members],
                node_attributes=None if node_attributes is None else node_attributes[members],
            )
        )
        stats.append(GraphParseStats(int(self_loops[g]), dup, asym))
        if dup or self_loops[g]:
            log.warning(
                "graph %d: dropped %d self-loop and %d duplicate edge lines",
                g, self_loops[g], dup,
            )

    alphabet = tuple(sorted(set(raw_labels)))
    remap = {lab: k for k, lab in enumerate(alphabet)}
    return Dataset(
        name=name,
        graphs=tuple(graphs),
        labels=np.array([remap[x] for x in raw_labels], dtype=np.int64),
        label_alphabet=alphabet,
        parse_stats=tuple(stats),
        source_digest=digest_files(files),
    )


def validate(ds: Dataset) -> ValidationReport:
    rows = []
    for k, (g, st) in enumerate(zip(ds.graphs, ds.parse_stats)):
        isolated = int(np.count_nonzero(g.degrees() == 0))
        rows.append(
            GraphViolations(
                graph=k,
                self_loops_removed=st.self_loops,
                duplicate_edges_removed=st.duplicate_lines,
                asymmetric_edges=st.asymmetric_edges,
                isolated_nodes=isolated,
            )
        )
    return ValidationReport(tuple(rows))


def graph_slice(ds: Dataset, idx: int) -> Graph:
    if not 0 <= idx < len(ds.graphs):
        raise IndexError(f"graph index {idx} out of range for {len(ds.graphs)} graphs")
    return ds.graphs[idx]


def _format_float(x: float) -> str:
    return repr(float(x))


def write_tudataset(ds: Dataset, root_dir, name: Optional[str] = None) -> dict:
    """Write ``ds`` in TUDataset format; every undirected edge is written in
    both directions. Returns the mapping of file role to path."""
    name = name or ds.name
    root = Path(root_dir)
    root.mkdir(parents=True, exist_ok=True)
    a_lines, ind_lines, nl_lines, na_lines = [], [], [], []
    has_nl = all(g.node_labels is not None for g in ds.graphs)
    has_na = all(g.node_attributes is not None for g in ds.graphs)
    offset = 0
    for gid, g in enumerate(ds.graphs, start=1):
        for i, j in g.edges:
            a, b = i + 1 + offset, j + 1 + offset
            a_lines.append(f"{a}, {b}")
            a_lines.append(f"{b}, {a}")
        ind_lines.extend([str(gid)] * g.num_nodes)
        if has_nl:
            nl_lines.extend(str(int(v)) for v in g.node_labels)
        if has_na:
            na_lines.extend(", ".join(_format_float(v) for v in row) for row in g.node_attributes)
        offset += g.num_nodes
    out = {
        "A": a_lines,
        "graph_indicator": ind_lines,
        "graph_labels": [str(ds.label_alphabet[y]) for y in ds.labels],
    }
    if has_nl:
        out["node_labels"] = nl_lines
    if has_na:
        out["node_attributes"] = na_lines
    paths = {}
    for suffix, lines in out.items():
        p = root / f"{name}_{suffix}.txt"
        tmp = p.with_suffix(".txt.tmp")
        tmp.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        os.replace(tmp, p)
        paths[suffix] = p
    return paths


def canonical_bytes(ds: Dataset) -> bytes:
    """Deterministic byte serialization used for reproducibility checks."""
    parts = [f"name={ds.name}", f"alphabet={list(ds.label_alphabet)}"]
    for k, (g, y) in enumerate(zip(ds.graphs, ds.labels)):
        parts.append(f"g{k} n={g.num_nodes} y={int(y)} e={g.edges.ravel().tolist()}")
        if g.node_labels is not None:
            parts.append(f" nl={g.node_labels.tolist()}")
        if g.node_attributes is not None:
            parts.append(f" na={[repr(float(v)) for v in g.node_attributes.ravel()]}")
    return "\n".join(parts).encode()


def dataset_stats(ds: Dataset) -> dict:
    nodes = np.array([g.num_nodes for g in ds.graphs], dtype=np.float64)
    edges = np.array([g.num_edges for g in ds.graphs], dtype=np.float64)
    return {
        "graphs": len(ds.graphs),
        "classes": ds.num_classes,
        "avg_nodes": float(nodes.mean()),
        "avg_edges": float(edges.mean()),
    }


__all__: Sequence[str] = (
    "Graph",
    "Dataset",
    "GraphParseStats",
    "ValidationReport",
    "GraphViolations",
    "parse_tudataset",
    "validate",
    "graph_slice",
    "write_tudataset",
    "canonical_bytes",
    "dataset_stats",
)
