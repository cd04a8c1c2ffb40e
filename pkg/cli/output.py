"""Result writers (CSV/JSON) and display transforms for score columns."""
import json
import sys
from typing import Optional

import numpy as np
import pandas as pd

from db.models import ScoreTable, is_infinite
from utils.config import FLAT_RTOL

NORMALIZATIONS = ("none", "linear", "sqrt-linear")
OUTPUT_FORMATS = ("csv", "json")


def is_flat(values: np.ndarray) -> bool:
    if values.size == 0:
        return True
    spread = float(values.max() - values.min())
    return spread <= FLAT_RTOL * float(np.abs(values).max())


def normalize(values, mode: str) -> Optional[np.ndarray]:
    """Display column: (x - min)/(max - min), applied after a square root for sqrt-linear.

    A constant column maps to zeros. Returns None for mode "none".
    """
    if mode not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {mode!r}; expected one of {NORMALIZATIONS}")
    if mode == "none":
        return None
    values = np.asarray(values, dtype=float)
    if mode == "sqrt-linear":
        values = np.sqrt(values)
    if is_flat(values):
        return np.zeros_like(values)
    low, high = values.min(), values.max()
    return (values - low) / (high - low)


def histogram(values, bins: int) -> pd.DataFrame:
    """Bin edges and raw counts; a constant column yields a single degenerate bin."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    values = np.asarray(values, dtype=float)
    if is_flat(values):
        value = float(values[0]) if values.size else 0.0
        return pd.DataFrame({"left": [value], "right": [value], "count": [int(values.size)]})
    counts, edges = np.histogram(values, bins=bins)
    return pd.DataFrame({"left": edges[:-1], "right": edges[1:], "count": counts})


def score_frame(table: ScoreTable, score_name: str = "score") -> pd.DataFrame:
    """Labelled (p, q, score) rows of a score table in pair order."""
    labelled = [table.label_pair(p, q) for p, q in table.pairs]
    return pd.DataFrame({
        "p": [a for a, _ in labelled],
        "q": [b for _, b in labelled],
        score_name: table.scores,
    })


def add_display_column(frame: pd.DataFrame, column: str, mode: str) -> pd.DataFrame:
    shown = normalize(frame[column].to_numpy(dtype=float), mode)
    if shown is not None:
        frame[f"{column}_display"] = shown
    return frame


def _cell(value):
    if is_infinite(value):
        return "inf"
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_frame(frame: pd.DataFrame, path: Optional[str], fmt: str = "csv",
                index: bool = False) -> None:
    """Write a result table to path, or stdout when path is None."""
    if fmt not in OUTPUT_FORMATS:
        raise ValueError(f"unknown output format {fmt!r}; expected one of {OUTPUT_FORMATS}")
    frame = frame.map(_cell)
    if fmt == "csv":
        text = frame.to_csv(index=index, lineterminator="\n")
    else:
        if index:
            frame = frame.reset_index()
        records = [
            {key: (None if isinstance(v, float) and np.isnan(v) else v) for key, v in row.items()}
            for row in frame.to_dict(orient="records")
        ]
        text = json.dumps(records, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def write_matrix(M: np.ndarray, labels: tuple, path: Optional[str], fmt: str = "csv") -> None:
    frame = pd.DataFrame(M, index=list(labels), columns=list(labels))
    frame.index.name = "node"
    write_frame(frame, path, fmt, index=True)
