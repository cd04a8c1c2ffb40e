import json

import numpy as np
import pandas as pd
import pytest

from cli.output import histogram, normalize, score_frame, write_frame
from db.models import INFINITE, ScoreTable


def test_normalize_modes():
    assert normalize([1.0, 2.0], "none") is None
    assert np.allclose(normalize([1.0, 3.0, 2.0], "linear"), [0.0, 1.0, 0.5])
    assert np.allclose(normalize([1.0, 4.0, 9.0], "sqrt-linear"), [0.0, 0.5, 1.0])
    assert np.array_equal(normalize([2.0, 2.0], "linear"), [0.0, 0.0])
    with pytest.raises(ValueError):
        normalize([1.0], "log")


def test_histogram_of_constant_column_has_one_bin():
    frame = histogram([0.75] * 9, 50)
    assert len(frame) == 1
    assert frame["count"].iloc[0] == 9


def test_histogram_counts_everything():
    values = np.linspace(0, 1, 101)
    frame = histogram(values, 50)
    assert len(frame) == 50
    assert frame["count"].sum() == 101


def test_score_frame_uses_labels():
    table = ScoreTable("mu", "edges", ((0, 1, 0.5),), "descending", labels=("a", "b"))
    frame = score_frame(table, "mu")
    assert frame.to_dict(orient="records") == [{"p": "a", "q": "b", "mu": 0.5}]


def test_write_csv_and_json(tmp_path):
    frame = pd.DataFrame({"p": [1, 2], "c": [INFINITE, 0.25], "x": [np.nan, 1.0]})
    csv_path = tmp_path / "out.csv"
    write_frame(frame, str(csv_path), "csv")
    assert csv_path.read_text().splitlines() == ["p,c,x", "1,inf,", "2,0.25,1.0"]
    json_path = tmp_path / "out.json"
    write_frame(frame, str(json_path), "json")
    assert json.loads(json_path.read_text()) == [
        {"p": 1, "c": "inf", "x": None},
        {"p": 2, "c": 0.25, "x": 1.0},
    ]


def test_write_to_stdout(capsys):
    write_frame(pd.DataFrame({"kappa": [1.5]}), None)
    assert capsys.readouterr().out == "kappa\n1.5\n"
