from __future__ import annotations

import csv
import json
import shutil
import subprocess
import sys

import pytest

from splitlimit import cli
from splitlimit.treecodec import DHTree


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(text):
    return list(csv.DictReader(l for l in text.splitlines() if not l.startswith("#")))


def test_count(capsys):
    code, out, _ = run(capsys, "count", "--family", "dh", "--max-n", "6")
    assert code == 0
    rows = {int(r["n"]): r for r in data_rows(out)}
    assert rows[2]["tree_count"] == "4"
    assert "# version=" not in out and "version=0.1.0" in out.splitlines()[0]


def test_constants(capsys, tmp_path):
    target = tmp_path / "c.json"
    code, _, _ = run(capsys, "constants", "--family", "dh", "--out", str(target))
    assert code == 0
    obj = json.loads(target.read_text())
    c = obj["constants"]
    assert abs(c["rho"] - 0.1597) < 1e-4 and abs(c["gamma_H"] - 3.9258) < 1e-4 and abs(c["c_f"] - 0.3602) < 1e-4
    assert obj["meta"]["config"]["family"] == "dh"


def test_tree_distance(capsys, fixtures_dir):
    code, out, _ = run(capsys, "tree", "distance", "--in", str(fixtures_dir / "nine_leaf_tree.json"), "--pair", "6", "7")
    assert code == 0 and out.strip() == "3"


def test_distances_and_decompose(capsys, fixtures_dir, tmp_path):
    tree = fixtures_dir / "nine_leaf_tree.json"
    code, out, _ = run(capsys, "tree", "graph", "--in", str(tree))
    assert code == 0
    gfile = tmp_path / "g.json"
    gfile.write_text(out)
    code, out, _ = run(capsys, "decompose", "--in", str(gfile))
    assert code == 0
    assert DHTree.from_json(out) == DHTree.from_json(tree.read_text())
    code, tree_csv, _ = run(capsys, "distances", "--in", str(tree))
    code2, graph_csv, _ = run(capsys, "distances", "--in", str(gfile))
    assert code == code2 == 0
    assert data_rows(tree_csv) == data_rows(graph_csv)


def test_sample_writes_graphs(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SPLITLIMIT_SEED", "77")
    code, _, _ = run(capsys, "sample", "--family", "dh2c", "--size", "12", "--count", "3", "--out", str(tmp_path / "a"))
    assert code == 0
    code, _, _ = run(capsys, "sample", "--family", "dh2c", "--size", "12", "--count", "3", "--out", str(tmp_path / "b"), "--seed", "77")
    assert code == 0
    for r in range(3):
        a = json.loads((tmp_path / "a" / f"graph_{r:05d}.json").read_text())
        b = json.loads((tmp_path / "b" / f"graph_{r:05d}.json").read_text())
        assert a["edges"] == b["edges"] and a["n"] == 13
        assert a["meta"]["config"]["seed"] == 77
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert len(manifest["files"]) == 3
    assert not list((tmp_path / "a").glob(".*tmp"))


def test_crt_sample(capsys):
    code, out, _ = run(capsys, "crt", "sample", "-k", "3", "--count", "5", "--seed", "1")
    assert code == 0
    rows = data_rows(out)
    assert len(rows) == 5 and len(rows[0]) == 2 + 6


def test_verify_outputs(capsys, tmp_path):
    c, s = tmp_path / "r.csv", tmp_path / "r.svg"
    code, out, _ = run(capsys, "verify", "two-point", "--family", "leaf3", "--n", "100", "--reps", "100",
                       "--seed", "3", "--csv", str(c), "--svg", str(s), "--jobs", "1")
    assert code == 0
    assert json.loads(out)["report"]["replicates"] == 100
    assert len(data_rows(c.read_text())) == 100
    assert s.read_text().startswith("<svg")
    code, out, _ = run(capsys, "verify", "k-point", "--family", "dh", "--n", "100", "--reps", "100", "--k", "2",
                       "--seed", "3", "--jobs", "1")
    assert code == 0


def test_identities_small(capsys):
    code, out, _ = run(capsys, "identities", "--order", "8", "--brute-max-n", "4", "--max-k", "2")
    assert code == 0 and json.loads(out)["ok"]


def test_usage_and_module_errors(capsys, tmp_path):
    assert run(capsys, "count", "--family", "nope", "--max-n", "3")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "tree", "distance", "--in", str(tmp_path / "missing.json"), "--pair", "1", "2")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"type":"K","children":[1,{"type":"K","children":[2,3]}]}')
    code, _, err = run(capsys, "tree", "distance", "--in", str(bad), "--pair", "1", "2")
    assert code == 1 and "InvalidTreeError" in err
    c5 = tmp_path / "c5.json"
    c5.write_text(json.dumps({"n": 5, "edges": [[i, (i + 1) % 5] for i in range(5)]}))
    code, _, err = run(capsys, "decompose", "--in", str(c5))
    assert code == 1 and "NotDistanceHereditaryError" in err


def test_selftest_and_corrupted_golden(capsys, tmp_path):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    code2, out2, _ = run(capsys, "selftest")
    assert out == out2
    gold = tmp_path / "gold"
    shutil.copytree(cli.golden_dir(), gold)
    path = gold / "golden_counts_dh2c.csv"
    path.write_text(path.read_text().replace("dh2c,3,10,", "dh2c,3,11,"))
    code, out, err = run(capsys, "selftest", "--golden-dir", str(gold))
    assert code == 1 and "golden_counts_dh2c.csv" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "splitlimit", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "splitlimit" in proc.stdout
