import io
import json

import numpy as np
import pandas as pd
import pytest

from cli.app import main, parse_n_values
from core import families
from core.graph_io import store_graph


@pytest.fixture
def p3_file(tmp_path):
    path = tmp_path / "p3.txt"
    path.write_text("n 3\n1 2 1.0\n2 3 1.0\n")
    return str(path)


@pytest.fixture
def c10_file(tmp_path):
    path = tmp_path / "c10.txt"
    path.write_text("".join(f"{i} {i % 10 + 1}\n" for i in range(1, 11)))
    return str(path)


def run(*argv):
    return main([*argv, "--no-history"])


def test_kemeny_to_stdout(p3_file, capsys):
    assert run("kemeny", "--input", p3_file) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "kappa,route,n,m,bandwidth"
    assert float(out[1].split(",")[0]) == pytest.approx(1.5)


@pytest.mark.parametrize("method", ["banded", "dense", "eigen"])
def test_kemeny_methods_agree(p3_file, tmp_path, method):
    out = tmp_path / "k.json"
    assert run("kemeny", "--input", p3_file, "--method", method,
               "--out", str(out), "--output-format", "json") == 0
    row = json.loads(out.read_text())[0]
    assert row["kappa"] == pytest.approx(1.5)
    assert row["route"] == method


def test_edges_table(p3_file, tmp_path):
    out = tmp_path / "edges.csv"
    hist = tmp_path / "hist.csv"
    code = run("edges", "--input", p3_file, "--out", str(out), "--filtered",
               "--r", "0.01", "--normalize", "linear", "--histogram", str(hist))
    assert code == 0
    frame = pd.read_csv(out)
    assert list(frame["mu"]) == pytest.approx([0.75, 0.75])
    assert np.isinf(frame["c"]).all()
    assert list(frame["bridge"]) == [1, 1]
    assert "c_r=0.01" in frame.columns
    assert list(frame["mu_display"]) == [0.0, 0.0]
    assert len(pd.read_csv(hist)) == 1


def test_pairs_matrix(c10_file, tmp_path):
    out = tmp_path / "m.csv"
    assert run("pairs", "--input", c10_file, "--matrix", "--out", str(out)) == 0
    M = pd.read_csv(out, index_col="node")
    assert M.shape == (10, 10)
    assert M.loc[1, "6"] == pytest.approx(M.to_numpy().max())


def test_linkpred_writes_scores_and_correlations(c10_file, tmp_path):
    out = tmp_path / "lp.csv"
    assert run("linkpred", "--input", c10_file, "--top", "3", "--out", str(out)) == 0
    frame = pd.read_csv(out)
    assert set(frame["measure"]) == {
        "kemeny-derivative", "jaccard", "adamic-adar",
        "resource-allocation", "common-neighbour-centrality",
    }
    assert (frame.groupby("measure")["rank"].max() == 3).all()
    corr = pd.read_csv(tmp_path / "lp_correlation.csv", index_col="measure")
    assert corr.shape == (5, 5)


def test_linkpred_prints_correlations_without_out(c10_file, capsys):
    assert run("linkpred", "--input", c10_file, "--top", "2") == 0
    scores, corr = capsys.readouterr().out.split("\n\n")
    assert len(pd.read_csv(io.StringIO(scores))) == 10
    corr = pd.read_csv(io.StringIO(corr), index_col="measure")
    assert corr.shape == (5, 5)
    assert np.diag(corr.to_numpy()) == pytest.approx(np.ones(5))


def test_output_does_not_depend_on_jobs(tmp_path):
    graph = tmp_path / "g.txt"
    store_graph(families.random_connected(60, p=0.08, seed=21), str(graph))
    for command in (["edges"], ["pairs", "--matrix"], ["linkpred", "--top", "20"]):
        written = []
        for jobs in ("1", "8"):
            out = tmp_path / f"{command[0]}_{jobs}.csv"
            assert run(*command, "--input", str(graph), "--jobs", jobs, "--out", str(out)) == 0
            extra = tmp_path / f"{command[0]}_{jobs}_correlation.csv"
            written.append((out.read_bytes(), extra.read_bytes() if extra.exists() else b""))
        assert written[0] == written[1]


def test_sensitivity_curve(tmp_path):
    out = tmp_path / "zeta.csv"
    assert run("sensitivity", "--family", "star,path", "--n", "10:30:10", "--out", str(out)) == 0
    frame = pd.read_csv(out)
    assert len(frame) == 6
    assert list(frame.columns) == ["family", "n", "zeta"]


def test_sensitivity_of_input(p3_file, capsys):
    assert run("sensitivity", "--input", p3_file) == 0
    out = capsys.readouterr().out.splitlines()
    n, zeta, mean = out[1].split(",")
    assert float(zeta) == pytest.approx(3.5 / 9)
    assert float(mean) == pytest.approx(7 / 9)


def test_onepath_check_passes(capsys):
    assert run("onepath-check", "--n", "20") == 0
    out = capsys.readouterr().out
    assert float(out.strip().split("=")[1]) < 1e-8


def test_solve(p3_file, capsys):
    assert run("solve", "--input", p3_file, "--pair", "1", "2") == 0
    frame = [line.split(",") for line in capsys.readouterr().out.splitlines()[1:]]
    assert [float(x) for _, x in frame] == pytest.approx([0.75, -0.25, -0.25])


def test_disconnected_input_exits_with_graph_error(tmp_path, capsys):
    path = tmp_path / "two.txt"
    path.write_text("1 2\n3 4\n")
    assert run("kemeny", "--input", str(path)) == 2
    assert "separated" in capsys.readouterr().err


def test_malformed_input_exits_with_graph_error(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 2 -1\n")
    assert run("edges", "--input", str(path)) == 2


def test_usage_errors(p3_file):
    assert run("kemeny") == 1
    assert run("kemeny", "--input", p3_file, "--jobs", "0") == 1
    assert run("frobnicate") == 1
    assert run("sensitivity", "--family", "wheel", "--n", "10") == 1


def test_history_records_runs(p3_file, tmp_path, capsys):
    db = str(tmp_path / "runs.db")
    assert main(["kemeny", "--input", p3_file, "--history-db", db]) == 0
    capsys.readouterr()
    assert main(["history", "--history-db", db, "--output-format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["subcommand"] == "kemeny"
    assert rows[0]["status"] == "completed"
    assert rows[0]["kappa"] == pytest.approx(1.5)


def test_parse_n_values():
    assert parse_n_values("10:30:10") == [10, 20, 30]
    assert parse_n_values("4,8") == [4, 8]
    assert parse_n_values("7") == [7]
