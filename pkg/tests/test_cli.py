import csv
import json

import numpy as np
import pytest
from helpers import planted_blocks

from ugvq.cli import main
from ugvq.pairdata import write_comparisons_csv


def run(*argv):
    return main([str(a) for a in argv])


def read_json(path):
    return json.loads(path.read_text())


@pytest.fixture
def synth_dir(tmp_path):
    assert run("synth", "--metadata", "--seed", 5, "--out-dir", tmp_path) == 0
    return tmp_path


def test_synth_outputs(synth_dir):
    assert (synth_dir / "comparisons.csv").read_text().startswith("item_a,item_b,winner\n")
    assert len(read_json(synth_dir / "truth.json")["items"]) == 20
    assert (synth_dir / "metadata.csv").exists()
    m = read_json(synth_dir / "manifest_synth.json")
    assert m["command"] == "synth" and m["seed"] == 5


def test_hodge_transitive_dataset(tmp_path):
    # 10 judgments per pair with M_ij = 5 + (j - i): Y_ij = (j - i) / 5 = s_i - s_j for s_i = -i / 5
    items = [f"x{k}" for k in range(6)]
    recs = []
    for i in range(6):
        for j in range(i + 1, 6):
            recs += [(items[i], items[j], items[i])] * (5 + j - i) + [(items[i], items[j], items[j])] * (5 - j + i)
    write_comparisons_csv(recs, tmp_path / "c.csv")
    assert run("hodge", tmp_path / "c.csv", "--out-dir", tmp_path) == 0
    rep = read_json(tmp_path / "hodge_report.json")
    assert rep["total_inconsistency"] <= 1e-9
    assert rep["ranking"] == items
    assert rep["edges"] == 15 and rep["triangles"] == 20
    assert (tmp_path / "hodge_edges.csv").exists()


def test_hodge_coin_flip(tmp_path):
    assert run("synth", "--noise", "coin_flip", "--n-items", 20, "--comparisons-per-pair", 10,
               "--seed", 2, "--out-dir", tmp_path) == 0
    assert run("hodge", tmp_path / "comparisons.csv", "--out-dir", tmp_path) == 0
    assert read_json(tmp_path / "hodge_report.json")["total_inconsistency"] > 0.5


def test_hodge_malformed_csv(tmp_path):
    (tmp_path / "bad.csv").write_text("foo,bar\n1,2\n")
    assert run("hodge", tmp_path / "bad.csv", "--out-dir", tmp_path) == 2
    (tmp_path / "bad2.csv").write_text("item_a,item_b,winner\na,b,c\n")
    assert run("hodge", tmp_path / "bad2.csv", "--out-dir", tmp_path) == 2
    assert run("hodge", tmp_path / "missing.csv", "--out-dir", tmp_path) == 2


def _planted_csv(path, seed=0):
    M, blocks = planted_blocks(seed)
    recs = []
    for i in range(8):
        for j in range(8):
            recs += [(f"n{i}", f"n{j}", f"n{i}")] * int(M[i, j])
    write_comparisons_csv(recs, path)
    return blocks


def test_cluster_delta_planted(tmp_path):
    blocks = _planted_csv(tmp_path / "c.csv")
    assert run("cluster", tmp_path / "c.csv", "--delta", 0.81, "--out-dir", tmp_path) == 0
    part = read_json(tmp_path / "partition.json")
    assert part["n_clusters"] == 2
    assert sorted(sorted(c) for c in part["clusters"]) == sorted(sorted(f"n{i}" for i in b) for b in blocks)


def test_cluster_sweep_default_grid(tmp_path):
    _planted_csv(tmp_path / "c.csv")
    assert run("cluster", tmp_path / "c.csv", "--sweep", "--out-dir", tmp_path) == 0
    rows = list(csv.reader((tmp_path / "sweep.csv").open()))
    assert rows[0] == ["delta", "modularity", "clusters"]
    assert len(rows) == 100


def test_cluster_delta_out_of_range(tmp_path):
    _planted_csv(tmp_path / "c.csv")
    assert run("cluster", tmp_path / "c.csv", "--delta", 1.5, "--out-dir", tmp_path) == 2


def test_features(synth_dir):
    d = synth_dir
    assert run("hodge", d / "comparisons.csv", "--out-dir", d) == 0
    assert run("features", d / "metadata.csv", "--scores", d / "scores.json", "--out-dir", d) == 0
    header = (d / "features.csv").read_text().splitlines()[0].split(",")
    assert len(header) == 21
    assert len(read_json(d / "metric_ranking.json")) == 20


def test_fit_linear_and_external(synth_dir):
    d = synth_dir
    assert run("hodge", d / "comparisons.csv", "--out-dir", d) == 0
    assert run("fit", d / "metadata.csv", d / "scores.json", "--model", "linear", "--top-k", 20,
               "--out-dir", d / "lin") == 0
    rows = list(csv.reader((d / "lin" / "curve.csv").open()))
    assert rows[0] == ["k", "srocc"] and len(rows) == 21
    assert run("fit", d / "metadata.csv", d / "scores.json", "--external", "nr_score",
               "--out-dir", d / "ext") == 0
    model = read_json(d / "ext" / "model.json")
    assert len(model["features"]) == 21 and len(model["weights"]) == 21


def test_fit_svr(synth_dir):
    d = synth_dir
    assert run("hodge", d / "comparisons.csv", "--out-dir", d) == 0
    assert run("fit", d / "metadata.csv", d / "scores.json", "--model", "svr", "--top-k", 5,
               "--out-dir", d / "svr") == 0
    model = read_json(d / "svr" / "model.json")
    assert model["kind"] == "svr" and sum(model["coef"]) == 0.0


def test_fit_missing_column(synth_dir, tmp_path):
    d = synth_dir
    lines = (d / "metadata.csv").read_text().splitlines()
    cols = lines[0].split(",")
    k = cols.index("viewcount")
    trimmed = [",".join(c for i, c in enumerate(line.split(",")) if i != k) for line in lines]
    (tmp_path / "meta.csv").write_text("\n".join(trimmed) + "\n")
    assert run("fit", tmp_path / "meta.csv", d / "truth.json", "--out-dir", tmp_path / "o") == 2


def test_report(synth_dir):
    d = synth_dir
    assert run("hodge", d / "comparisons.csv", "--out-dir", d) == 0
    assert run("report", d / "scores.json", "--scores", d / "scores.json", "--out-dir", d / "r1") == 0
    rep = read_json(d / "r1" / "report.json")
    assert rep["results"][0]["srocc"] == 1.0
    assert "anova" not in rep
    assert run("report", d / "truth.json", d / "scores.json", "--scores", d / "scores.json",
               "--out-dir", d / "r2") == 0
    rep = read_json(d / "r2" / "report.json")
    assert rep["anova"]["F"] is not None and rep["anova"]["F"] >= 0


def test_report_histogram_csv(synth_dir):
    d = synth_dir
    assert run("hodge", d / "comparisons.csv", "--out-dir", d) == 0
    assert run("report", d / "truth.json", "--scores", d / "scores.json", "--format", "csv",
               "--out-dir", d / "r") == 0
    name = read_json(d / "r" / "report.json")["results"][0]["histogram_csv"]
    rows = list(csv.reader((d / "r" / name).open()))
    assert rows[0] == ["rank_diff", "count"]
    assert sum(int(c) for _, c in rows[1:]) == 20


def test_report_length_mismatch(tmp_path):
    (tmp_path / "a.json").write_text(json.dumps({"items": ["a", "b", "c"], "scores": [1, 2, 3]}))
    (tmp_path / "b.json").write_text(json.dumps({"items": ["a", "b"], "scores": [1, 2]}))
    assert run("report", tmp_path / "a.json", "--scores", tmp_path / "b.json", "--out-dir", tmp_path) == 2


def test_replay_reproduces(synth_dir, monkeypatch):
    monkeypatch.chdir(synth_dir)
    assert run("hodge", "comparisons.csv", "--out-dir", "h") == 0
    first = (synth_dir / "h" / "hodge_report.json").read_bytes()
    (synth_dir / "h" / "hodge_report.json").unlink()
    assert run("replay", "h/manifest_hodge.json") == 0
    assert (synth_dir / "h" / "hodge_report.json").read_bytes() == first


def test_inputs_not_mutated(synth_dir):
    before = (synth_dir / "comparisons.csv").read_bytes()
    assert run("hodge", synth_dir / "comparisons.csv", "--out-dir", synth_dir) == 0
    assert run("cluster", synth_dir / "comparisons.csv", "--delta", 0.5, "--out-dir", synth_dir) == 0
    assert (synth_dir / "comparisons.csv").read_bytes() == before


def test_bad_arguments_exit_2():
    assert run("cluster") == 2
    assert run("fit", "x.csv", "y.json", "--model", "ridge") == 2
