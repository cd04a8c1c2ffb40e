import hashlib
import io

import pytest

from core.errors import GraphFormatError
from core.graph_io import compute_sha256, load_graph, store_graph


def test_edgelist_path_graph():
    g = load_graph(b"n 3\n1 2 1.0\n2 3 1.0\n")
    assert g.n == 3
    assert g.edge_list == [(0, 1, 1.0), (1, 2, 1.0)]
    assert g.labels == (1, 2, 3)


def test_edgelist_without_header_and_default_weight():
    g = load_graph(b"# comment\n\n1 2\n2 3 2.5\n")
    assert g.n == 3
    assert g.weight(1, 2) == 2.5
    assert g.weight(0, 1) == 1.0


def test_matrix_market_symmetric():
    text = (
        b"%%MatrixMarket matrix coordinate real symmetric\n"
        b"2 2 1\n"
        b"2 1 1.0\n"
    )
    g = load_graph(io.BytesIO(text), "mtx")
    assert g.n == 2
    assert g.edge_list == [(0, 1, 1.0)]


def test_nonpositive_weight_reports_line():
    with pytest.raises(GraphFormatError) as excinfo:
        load_graph(b"n 2\n1 2 -0.5\n")
    assert excinfo.value.line == 2
    assert "nonpositive" in str(excinfo.value)


@pytest.mark.parametrize("text", [
    b"1 2 1.0\n2 1 3.0\n",          # same edge, different weights
    b"n 2\n1 3\n",                   # id beyond declared n
    b"0 1\n",                        # ids are 1-based
    b"1 2 abc\n",                    # weight not a number
    b"1 2 3 4\n",                    # too many fields
    b"1 1 -1\n",                     # negative loop
])
def test_rejects_malformed_input(text):
    with pytest.raises(GraphFormatError):
        load_graph(text)


def test_repeated_edge_with_same_weight_is_deduplicated():
    g = load_graph(b"1 2 1.5\n2 1 1.5\n")
    assert g.m == 1


def test_loops_are_kept():
    g = load_graph(b"1 2\n2 2 0.5\n")
    assert dict(g.loops) == {1: 0.5}
    assert list(g.degrees) == [1.0, 1.5]


def test_store_then_load_preserves_graph(tmp_path):
    g = load_graph(b"n 4\n1 2 0.1\n2 3 2\n3 4 1e-3\n4 4 0.25\n")
    path = tmp_path / "g.txt"
    store_graph(g, str(path))
    again = load_graph(str(path))
    assert again.n == g.n
    assert dict(again.weights) == dict(g.weights)
    assert dict(again.loops) == dict(g.loops)


def test_sha256_of_file(tmp_path):
    path = tmp_path / "g.txt"
    path.write_bytes(b"1 2\n")
    assert compute_sha256(str(path)) == hashlib.sha256(b"1 2\n").hexdigest()
    assert compute_sha256(str(tmp_path / "missing")) == ""
