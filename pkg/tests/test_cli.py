import csv
import io
import json

import numpy as np
import pytest

from sodreduce.cli import main


@pytest.fixture
def data(tmp_path):
    g = np.random.default_rng(0)
    A = g.standard_normal((60, 2)) @ g.standard_normal((2, 8)) + 0.1 * g.standard_normal((60, 8))
    p = tmp_path / "a.csv"
    np.savetxt(p, A, delimiter=",")
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_reduce_is_deterministic(tmp_path, data, capsys):
    outs = []
    for name in ("r1.bin", "r2.bin"):
        code, _ = run(capsys, "reduce", "--input", data, "--k", 2, "--eps", 0.5, "--seed", 3,
                      "--out", tmp_path / name)
        assert code == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]


def test_reduce_coreset_evaluate_pipeline(tmp_path, data, capsys):
    rep, cs = tmp_path / "r.bin", tmp_path / "c.json"
    code, out = run(capsys, "reduce", "--input", data, "--out", rep, "--stats")
    assert code == 0 and "stats" in json.loads(out.out)
    code, out = run(capsys, "coreset", "--rep", rep, "--out", cs)
    assert code == 0 and json.loads(out.out)["kind"] == "kmedian"
    code, out = run(capsys, "evaluate", "--input", data, "--rep", rep, "--shapes", "random:6")
    recs = [json.loads(line) for line in out.out.splitlines()]
    assert code == 0 and len(recs) == 6
    assert all(r["method"] == "paper" and r["ratio"] > 0 for r in recs)
    code, out = run(capsys, "evaluate", "--input", data, "--rep", rep, "--coreset", cs,
                    "--shapes", "kmedian", "--csv")
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert code == 0 and rows[0]["method"] == "coreset"


def test_dense_path_and_config_override(tmp_path, data, capsys):
    code, out = run(capsys, "reduce", "--input", data, "--out", tmp_path / "r.bin", "--path", "dense",
                    "--blocks", 4, "--stats", "--config", "c_d=0.5")
    assert code == 0
    assert json.loads(out.out)["stats"]["blocks"] == 4


def test_experiment_output_is_byte_identical(tmp_path, capsys):
    args = ["experiment", "--n", 60, "--d", 12, "--k", 2, "--dims", "2,4", "--seed", 1]
    run(capsys, *args, "--out", tmp_path / "e1.ndjson")
    run(capsys, *args, "--out", tmp_path / "e2.ndjson")
    a, b = (tmp_path / "e1.ndjson").read_bytes(), (tmp_path / "e2.ndjson").read_bytes()
    assert a == b
    recs = [json.loads(x) for x in a.decode().splitlines()]
    assert {r["method"] for r in recs} == {"paper", "random_subspace", "top_svd"}
    assert all(r["wall_time_ms"] is None for r in recs)


def test_errors_exit_with_code_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    code, out = run(capsys, "reduce", "--input", bad, "--out", tmp_path / "r.bin")
    assert code == 2 and out.err.startswith("sodreduce: error:") and "line 2" in out.err
    code, out = run(capsys, "reduce", "--out", tmp_path / "r.bin")
    assert code == 2
    code, out = run(capsys, "reduce", "--input", bad, "--out", tmp_path / "r.bin", "--config", "nope=1")
    assert code == 2


def test_synth_writes_files(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, res = run(capsys, "synth", "--n", 20, "--d", 3, "--k", 2, "--out", out)
    assert code == 0
    assert np.loadtxt(out, delimiter=",").shape == (20, 3)
    assert np.loadtxt(str(out) + ".centers.csv", delimiter=",").shape == (2, 3)
