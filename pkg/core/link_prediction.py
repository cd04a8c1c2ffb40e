"""Non-edge scoring: the Kemeny-derivative measure and four common-neighbour baselines."""
import math
from typing import Optional, Sequence

import networkx as nx
import pandas as pd

from core.centrality import analyze_pairs, mu_bar, non_edges
from core.errors import ScoreUniverseError
from core.graph import require_connected, to_networkx
from core.parallel import PairBatchRunner
from db.models import ScoreTable, SolverContext, WeightedGraph
from utils.config import CNC_ALPHA
from utils.logger import get_logger

log = get_logger("kemenytool.linkpred")

# CLI short name -> measure id
MEASURES = {
    "kd": "kemeny-derivative",
    "jaccard": "jaccard",
    "aa": "adamic-adar",
    "ra": "resource-allocation",
    "cnc": "common-neighbour-centrality",
}
DIRECTIONS = ("likely", "important")


def resolve_measure(name: str) -> str:
    if name in MEASURES:
        return MEASURES[name]
    if name in MEASURES.values():
        return name
    raise ValueError(f"unknown measure {name!r}; expected one of {sorted(MEASURES)}")


def _adamic_adar(G: nx.Graph, pairs: list) -> list:
    scores = []
    skipped = 0
    for u, v in pairs:
        terms = []
        for z in nx.common_neighbors(G, u, v):
            degree = G.degree(z)
            if degree < 2:
                skipped += 1
                continue
            terms.append(1.0 / math.log(degree))
        scores.append((u, v, math.fsum(terms)))
    if skipped:
        log.warning("Adamic-Adar skipped %d common neighbours of degree 1", skipped)
    return scores


def _resource_allocation(G: nx.Graph, pairs: list) -> list:
    return [
        (u, v, math.fsum(1.0 / G.degree(z) for z in nx.common_neighbors(G, u, v)))
        for u, v in pairs
    ]


def score_non_edges(
    ctx: SolverContext,
    g: WeightedGraph,
    measure: str = "kemeny-derivative",
    alpha_c: float = CNC_ALPHA,
    direction: str = "likely",
    runner: Optional[PairBatchRunner] = None,
) -> ScoreTable:
    """One score per non-adjacent pair p < q.

    The Kemeny-derivative score is mu_bar with full weights. Low values mark
    likely links under direction="likely"; direction="important" ranks high
    mu_bar first (the pairs whose connection most raises Kemeny's constant).
    Baselines use unweighted adjacency and always rank high scores first;
    their sums are exactly rounded, so relabeling nodes never changes a score.
    """
    measure_id = resolve_measure(measure)
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    require_connected(g)
    pairs = non_edges(g)

    if measure_id == "kemeny-derivative":
        analyses = analyze_pairs(ctx, g, pairs, runner)
        entries = [(pa.p, pa.q, mu_bar(pa)) for pa in analyses]
        order = "ascending" if direction == "likely" else "descending"
        metadata = {"orientation": direction}
    else:
        G = to_networkx(g)
        if measure_id == "jaccard":
            entries = list(nx.jaccard_coefficient(G, pairs))
        elif measure_id == "adamic-adar":
            entries = _adamic_adar(G, pairs)
        elif measure_id == "resource-allocation":
            entries = _resource_allocation(G, pairs)
        else:
            if not 0 <= alpha_c <= 1:
                raise ValueError("alpha_c must lie in [0, 1]")
            entries = list(nx.common_neighbor_centrality(G, pairs, alpha=alpha_c))
        order = "descending"
        metadata = {"alpha_c": alpha_c} if measure_id == "common-neighbour-centrality" else {}

    log.info("Scored %d non-edges with %s", len(entries), measure_id)
    return ScoreTable(
        measure_id=measure_id,
        universe="non-edges",
        entries=tuple(entries),
        sort_direction=order,
        labels=g.labels,
        metadata=metadata,
    )


def ranked(table: ScoreTable) -> list:
    """Entries in likely-link order; ties broken by (p, q)."""
    if table.sort_direction == "ascending":
        return sorted(table.entries, key=lambda e: (e[2], e[0], e[1]))
    return sorted(table.entries, key=lambda e: (-e[2], e[0], e[1]))


def top_k(table: ScoreTable, k: int) -> tuple:
    """(first k pairs in ranking order, truncated flag); the flag is set when k exceeds the table."""
    if k < 1:
        raise ValueError("k must be >= 1")
    order = ranked(table)
    truncated = k > len(order)
    if truncated:
        log.warning("Requested top %d but only %d pairs are scored", k, len(order))
    return [(p, q) for p, q, _ in order[:k]], truncated


def correlation_matrix(tables: Sequence) -> pd.DataFrame:
    """Pearson coefficients between score tables over one pair universe."""
    if not tables:
        raise ValueError("need at least one score table")
    reference = tables[0].pairs
    ids = [t.measure_id for t in tables]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate measure ids in {ids}")
    for t in tables[1:]:
        if t.pairs != reference:
            raise ScoreUniverseError(
                f"{t.measure_id} is scored over a different pair set than {tables[0].measure_id}"
            )
    frame = pd.DataFrame({t.measure_id: t.scores for t in tables})
    return frame.corr(method="pearson")
