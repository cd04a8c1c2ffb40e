"""Graph input/output: edge lists, Matrix Market, and input fingerprints."""
import hashlib
import io
import math
import os
from typing import BinaryIO, Optional, Union

import scipy.io

from core.errors import GraphFormatError
from db.models import WeightedGraph
from utils.config import HASH_CHUNK_SIZE
from utils.logger import get_logger

log = get_logger("kemenytool.io")

FORMATS = ("edgelist", "mtx")

Source = Union[str, os.PathLike, BinaryIO, bytes]


def compute_sha256(path: str) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            while True:
                chunk = f.read(HASH_CHUNK_SIZE)
                if not chunk:
                    break
                h.update(chunk)
    except OSError:
        return ""
    return h.hexdigest()


def guess_format(path: str) -> str:
    return "mtx" if str(path).lower().endswith(".mtx") else "edgelist"


def load_graph(source: Source, fmt: Optional[str] = None) -> WeightedGraph:
    """Read a graph from a path, a binary stream or raw bytes.

    Node ids in the input are 1-based; they become the graph's labels.
    """
    if fmt is None:
        fmt = guess_format(source) if isinstance(source, (str, os.PathLike)) else "edgelist"
    if fmt not in FORMATS:
        raise ValueError(f"unknown graph format {fmt!r}; expected one of {FORMATS}")

    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as f:
            return load_graph(f, fmt)
    if isinstance(source, bytes):
        source = io.BytesIO(source)

    if fmt == "edgelist":
        g = _read_edgelist(source)
    else:
        g = _read_matrix_market(source)
    log.info("Loaded graph: %d nodes, %d edges, %d loops", g.n, g.m, len(g.loops))
    return g


class _EdgeCollector:
    """Accumulates 1-based entries, deduplicating symmetric repeats."""

    def __init__(self):
        self.weights: dict = {}
        self.loops: dict = {}
        self.max_id = 0

    def add(self, p: int, q: int, w: float, line: Optional[int]) -> None:
        if p < 1 or q < 1:
            raise GraphFormatError(f"node ids are 1-based, got {min(p, q)}", line)
        if not math.isfinite(w):
            raise GraphFormatError(f"non-finite weight {w}", line)
        self.max_id = max(self.max_id, p, q)
        if p == q:
            if w < 0:
                raise GraphFormatError(f"negative loop weight {w} at node {p}", line)
            self._store(self.loops, p, w, line, f"loop at node {p}")
            return
        if w <= 0:
            raise GraphFormatError(f"nonpositive weight {w} on edge {p}-{q}", line)
        key = (p, q) if p < q else (q, p)
        self._store(self.weights, key, w, line, f"edge {key[0]}-{key[1]}")

    @staticmethod
    def _store(table: dict, key, w: float, line, what: str) -> None:
        if key in table:
            if table[key] != w:
                raise GraphFormatError(
                    f"{what} listed twice with different weights ({table[key]} and {w})", line
                )
            return
        table[key] = w

    def build(self, n: Optional[int]) -> WeightedGraph:
        if n is None:
            n = self.max_id
        if n < 1:
            raise GraphFormatError("graph has no nodes")
        if self.max_id > n:
            raise GraphFormatError(f"node id {self.max_id} exceeds declared node count {n}")
        return WeightedGraph(
            n=n,
            weights={(p - 1, q - 1): w for (p, q), w in self.weights.items()},
            loops={p - 1: w for p, w in self.loops.items()},
            labels=tuple(range(1, n + 1)),
        )


def _read_edgelist(stream: BinaryIO) -> WeightedGraph:
    collector = _EdgeCollector()
    declared_n: Optional[int] = None
    for lineno, raw in enumerate(stream, start=1):
        try:
            line = raw.decode("utf-8").strip()
        except UnicodeDecodeError:
            raise GraphFormatError("input is not valid UTF-8", lineno) from None
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "n":
            if declared_n is not None:
                raise GraphFormatError("node-count header repeated", lineno)
            if len(parts) != 2:
                raise GraphFormatError("header must read 'n <count>'", lineno)
            declared_n = _parse_int(parts[1], lineno)
            if declared_n < 1:
                raise GraphFormatError("declared node count must be >= 1", lineno)
            if collector.max_id > declared_n:
                raise GraphFormatError(
                    f"node id {collector.max_id} exceeds declared node count {declared_n}", lineno
                )
            continue
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"expected 'p q [w]', got {len(parts)} fields", lineno)
        p = _parse_int(parts[0], lineno)
        q = _parse_int(parts[1], lineno)
        w = _parse_float(parts[2], lineno) if len(parts) == 3 else 1.0
        if declared_n is not None and max(p, q) > declared_n:
            raise GraphFormatError(
                f"node id {max(p, q)} exceeds declared node count {declared_n}", lineno
            )
        collector.add(p, q, w, lineno)
    return collector.build(declared_n)


def _read_matrix_market(stream: BinaryIO) -> WeightedGraph:
    try:
        matrix = scipy.io.mmread(stream)
    except Exception as exc:
        raise GraphFormatError(f"cannot parse Matrix Market input: {exc}") from exc
    if not hasattr(matrix, "tocoo"):
        raise GraphFormatError("Matrix Market input must be in coordinate format")
    coo = matrix.tocoo()
    rows, cols = coo.shape
    if rows != cols:
        raise GraphFormatError(f"adjacency matrix must be square, got {rows}x{cols}")
    collector = _EdgeCollector()
    for i, j, w in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
        collector.add(int(i) + 1, int(j) + 1, float(w), None)
    return collector.build(rows)


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(f"expected an integer node id, got {token!r}", lineno) from None


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise GraphFormatError(f"expected a numeric weight, got {token!r}", lineno) from None


def store_graph(g: WeightedGraph, sink: Union[str, os.PathLike, BinaryIO]) -> None:
    """Write g as an edge list with a node-count header; weights are written with repr."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as f:
            store_graph(g, f)
            return
    lines = [f"n {g.n}"]
    for p, q, w in g.edge_list:
        lines.append(f"{g.label(p)} {g.label(q)} {w!r}")
    for p, w in g.loops.items():
        lines.append(f"{g.label(p)} {g.label(p)} {w!r}")
    sink.write(("\n".join(lines) + "\n").encode("utf-8"))
