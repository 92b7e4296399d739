import json
import subprocess
import sys

import numpy as np
import pytest

from topofc.cli import run
from topofc.embed import round_half_away

from conftest import DATA, write_tu

MUTAG = str(DATA / "MUTAG")


@pytest.fixture
def small(tmp_path):
    """Six labelled graphs, two classes, the last one a single node."""
    edges, indicator, labels, node_labels = [], [], [], []
    sizes = [4, 5, 4, 6, 5, 1]
    start = 1
    for g, n in enumerate(sizes, start=1):
        for k in range(n - 1):
            a, b = start + k, start + k + 1
            edges += [(a, b), (b, a)]
        if n >= 4:
            edges += [(start, start + 2), (start + 2, start)]
        indicator += [g] * n
        node_labels += [(start + k) % 3 for k in range(n)]
        start += n
    write_tu(tmp_path / "SMALL", "SMALL", edges, indicator, [0, 1, 0, 1, 0, 1], node_labels)
    return str(tmp_path / "SMALL")


def jsonl(path):
    return [json.loads(line) for line in open(path)]


def need_mutag():
    if not (DATA / "MUTAG").is_dir():
        pytest.skip("MUTAG not available")


@pytest.mark.parametrize(
    "cmd,extra,ext",
    [
        ("extract", [], "jsonl"),
        ("embed", [], "jsonl"),
        ("betti", ["--graph", "1"], "csv"),
        ("distance", ["--p", "2"], "csv"),
        ("barycenter", ["--class", "1"], "csv"),
        ("train", ["--epochs", "3"], "json"),
        ("crossval", ["--epochs", "3", "--protocol", "kfold:2"], "json"),
        ("validate", [], "json"),
    ],
)
def test_each_subcommand(small, tmp_path, cmd, extra, ext):
    out_dir = tmp_path / "out"
    out_dir.mkdir()
    assert run([cmd, "--dataset", small, "--output-dir", str(out_dir)] + extra) == 0
    produced = out_dir / f"SMALL_{cmd}.{ext}"
    text = produced.read_text()
    if ext == "csv":
        assert text.startswith("# {")
        json.loads(text.splitlines()[0][2:])
    elif ext == "jsonl":
        assert "meta" in json.loads(text.splitlines()[0])
    else:
        assert "meta" in json.loads(text)


def test_extract_records(small, tmp_path):
    out = tmp_path / "x.jsonl"
    assert run(["extract", "--dataset", small, "--out", str(out)]) == 0
    recs = jsonl(out)[1:]
    assert len(recs) == 6
    for r in recs:
        n = r["num_nodes"]
        assert len(r["births"]) == n - r["num_components"]
        assert r["births"] == sorted(r["births"])
    single = recs[-1]
    assert single["num_nodes"] == 1 and single["degenerate"] and single["births"] == []


def test_embed_records(small, tmp_path):
    out = tmp_path / "e.jsonl"
    assert run(["embed", "--dataset", small, "--mn", "fixed:4,3", "--out", str(out)]) == 0
    recs = jsonl(out)[1:]
    for r in recs:
        assert (r["m"], r["n"]) == (4, 3)
        assert len(r["v_b"]) == 4 and len(r["v_d"]) == 3
        assert r["v_b"] == sorted(r["v_b"])
    assert recs[-1]["degenerate_b"] and recs[-1]["v_b"] == [0, 0, 0, 0]


def test_emit_fc(small, tmp_path):
    fc = tmp_path / "fc.csv"
    assert run(["extract", "--dataset", small, "--graph", "0", "--emit-fc", str(fc), "--out", str(tmp_path / "x")]) == 0
    lines = fc.read_text().splitlines()
    assert lines[1] == "i,j,r"
    assert len(lines) == 2 + 4 * 3 // 2
    assert all(-1 <= float(l.split(",")[2]) <= 1 for l in lines[2:])


def test_stdout(small, capsys):
    assert run(["validate", "--dataset", small, "--out", "-"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert not doc["ok"]
    assert [(v["graph"], v["isolated_nodes"]) for v in doc["violations"]] == [(5, 1)]


def test_exit_codes(small, tmp_path, capsys):
    assert run(["frobnicate"]) == 2
    assert run(["betti", "--dataset", small, "--graph", "99", "--out", "-"]) == 2
    assert run(["embed", "--dataset", small, "--mn", "fixed:0,3", "--out", "-"]) == 2
    capsys.readouterr()
    assert run(["embed", "--dataset", str(tmp_path / "NOPE"), "--out", "-"]) == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "NOPE" in err["message"]
    # three node labels give three one-hot columns, enough to correlate
    assert run(["extract", "--dataset", small, "--features", "labels", "--out", "-"]) == 0
    assert run(["extract", "--dataset", small, "--features", "intrinsic", "--out", "-"]) == 3


def test_missing_edge_file_named(small, tmp_path, capsys):
    import os

    os.remove(os.path.join(small, "SMALL_A.txt"))
    assert run(["validate", "--dataset", small, "--out", "-"]) == 3
    assert "SMALL_A.txt" in capsys.readouterr().err


def test_config_file_and_flag_precedence(small, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dataset": small, "mn": "fixed:2,2", "seed": 9}))
    out = tmp_path / "e.jsonl"
    assert run(["embed", "--config", str(cfg), "--mn", "fixed:5,1", "--out", str(out)]) == 0
    meta, first = jsonl(out)[:2]
    assert (first["m"], first["n"]) == (5, 1)
    assert meta["meta"]["config"]["seed"] == 9
    assert run(["embed", "--config", str(tmp_path / "absent.json"), "--out", "-"]) == 3


def test_crossval_byte_identical_across_workers(small, tmp_path):
    outs = []
    for k, w in enumerate((1, 3, 1)):
        out = tmp_path / f"cv{k}.json"
        assert run(["crossval", "--dataset", small, "--epochs", "5", "--protocol", "kfold:3",
                    "--workers", str(w), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_module_entry_point(small):
    r = subprocess.run([sys.executable, "-m", "topofc", "validate", "--dataset", small, "--out", "-"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "violations" in json.loads(r.stdout)


def test_mutag_extract_cardinalities(tmp_path, mutag):
    out = tmp_path / "m.jsonl"
    assert run(["extract", "--dataset", MUTAG, "--out", str(out)]) == 0
    recs = jsonl(out)[1:]
    assert len(recs) == 188
    for r, g in zip(recs, mutag.graphs):
        n = g.num_nodes
        assert r["num_nodes"] == n and r["num_components"] == 1
        assert len(r["births"]) == n - 1
        assert len(r["deaths"]) == n * (n - 1) // 2 - (n - 1)
    mean_b = np.mean([len(r["births"]) for r in recs])
    emb = tmp_path / "m_e.jsonl"
    assert run(["embed", "--dataset", MUTAG, "--out", str(emb)]) == 0
    assert jsonl(emb)[1]["m"] == round_half_away(mean_b) == 17
