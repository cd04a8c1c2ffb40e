"""Pairwise Kemeny-derivative measures built on alpha = w^T S^-1 w and beta = w^T S^-1 D S^-1 w.

mu(p, q) = a_pq * beta is the derivative of Kemeny's constant when edge
weight moves from {p, q} onto the loops at p and q; mu_bar = beta is the same
derivative with the scaling a_pq dropped, so it is defined for non-edges too.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from core import laplacian_solver as solver
from core.errors import PoleError
from core.graph import bridges
from core.parallel import PairBatchRunner
from db.models import INFINITE, PairAnalysis, ScoreTable, SolverContext, WeightedGraph
from utils.config import BRIDGE_TOL, POLE_TOL
from utils.logger import get_logger

log = get_logger("kemenytool.centrality")


def _bridge_set(ctx: SolverContext, g: WeightedGraph) -> frozenset:
    if "bridges" not in ctx.cache:
        ctx.cache["bridges"] = bridges(g)
    return ctx.cache["bridges"]


def _check_bridge_identity(pa: PairAnalysis) -> None:
    if pa.a == 0:
        return
    product = pa.a * pa.alpha
    if pa.is_bridge and abs(product - 1.0) > BRIDGE_TOL:
        log.warning("Cut-edge (%d, %d) has a*alpha = %.12g, expected 1", pa.p, pa.q, product)
    elif not pa.is_bridge and product >= 1.0 - BRIDGE_TOL:
        log.warning("Edge (%d, %d) is not a cut-edge but a*alpha = %.12g", pa.p, pa.q, product)


def _normalize(pairs: Iterable) -> list:
    out = []
    for p, q in pairs:
        p, q = int(p), int(q)
        if p == q:
            raise ValueError("p and q must differ")
        out.append((p, q) if p < q else (q, p))
    return out


def analyze_pair(ctx: SolverContext, g: WeightedGraph, p: int, q: int,
                 compensated: bool = False) -> PairAnalysis:
    """alpha, beta, weight and cut-edge flag of {p, q}."""
    if p == q:
        raise ValueError("p and q must differ")
    p, q = (p, q) if p < q else (q, p)
    alpha, beta = solver.quadratic_forms(ctx, p, q, compensated)
    pa = PairAnalysis(p=p, q=q, a=g.weight(p, q), alpha=alpha, beta=beta,
                      is_bridge=(p, q) in _bridge_set(ctx, g))
    _check_bridge_identity(pa)
    return pa


def analyze_pairs(
    ctx: SolverContext,
    g: WeightedGraph,
    pairs: Iterable,
    runner: Optional[PairBatchRunner] = None,
    compensated: bool = False,
) -> list:
    """PairAnalysis for many pairs, sorted by (p, q).

    Pairs are grouped into solver blocks by their position in the bandwidth
    ordering so each block's first triangular solve stays short.
    """
    pairs = sorted(set(_normalize(pairs)))
    if not pairs:
        return []
    runner = runner or PairBatchRunner()
    inverse = ctx.perm.inverse
    work = sorted(pairs, key=lambda pq: (min(inverse[pq[0]], inverse[pq[1]]), pq))
    cut = _bridge_set(ctx, g)

    def run(block):
        alpha, beta = solver.quadratic_forms_block(ctx, block, compensated)
        return [
            PairAnalysis(p=p, q=q, a=g.weight(p, q), alpha=float(al), beta=float(be),
                         is_bridge=(p, q) in cut)
            for (p, q), al, be in zip(block, alpha, beta)
        ]

    results = [pa for chunk in runner.map_blocks(work, run) for pa in chunk]
    for pa in results:
        _check_bridge_identity(pa)
    results.sort(key=lambda pa: pa.pair)
    log.info("Analyzed %d pairs", len(results))
    return results


def analyze_edges(
    ctx: SolverContext,
    g: WeightedGraph,
    runner: Optional[PairBatchRunner] = None,
) -> list:
    """PairAnalysis for every edge, sorted by (p, q).

    On the banded route all edges come out of one sweep over the Laplacian
    blocks; the dense route and the GTH factorization solve edge by edge.
    """
    if ctx.route != "banded" or ctx.gth:
        return analyze_pairs(ctx, g, [(p, q) for p, q, _ in g.edge_list], runner)
    rows, cols, weights = g.edge_arrays
    alpha, beta = solver.band_quadratic_forms(ctx, np.column_stack([rows, cols]))
    cut = _bridge_set(ctx, g)
    results = [
        PairAnalysis(p=p, q=q, a=a, alpha=al, beta=be, is_bridge=(p, q) in cut)
        for p, q, a, al, be in zip(rows.tolist(), cols.tolist(), weights.tolist(),
                                   alpha.tolist(), beta.tolist())
    ]
    for pa in results:
        _check_bridge_identity(pa)
    log.info("Analyzed %d edges", len(results))
    return results


def mu(pa: PairAnalysis) -> float:
    return pa.a * pa.beta


def mu_bar(pa: PairAnalysis) -> float:
    return pa.beta


def mu_derivative(pa: PairAnalysis, order: int, weighted: bool = True) -> float:
    """i-th derivative at t = 0: i! a^i alpha^(i-1) beta (weighted) or i! a^(i-1) alpha^(i-1) beta."""
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    scale = pa.a ** order if weighted else pa.a ** (order - 1)
    return math.factorial(order) * scale * pa.alpha ** (order - 1) * pa.beta


@dataclass(frozen=True)
class PerturbationCurve:
    """t -> Kemeny's constant after moving t * a_pq of weight from {p, q} onto the loops."""
    analysis: PairAnalysis
    kappa0: float

    @property
    def pole(self) -> Optional[float]:
        """t* = 1/(a alpha); None for a non-edge."""
        product = self.analysis.a * self.analysis.alpha
        return 1.0 / product if product else None

    def _denominator(self, t: float) -> float:
        pa = self.analysis
        denom = 1.0 - t * pa.a * pa.alpha
        if abs(denom) < POLE_TOL:
            raise PoleError(f"t={t} is the pole of the perturbation curve of ({pa.p}, {pa.q})")
        return denom

    def value(self, t: float) -> float:
        pa = self.analysis
        return self.kappa0 + t * pa.a * pa.beta / self._denominator(t)

    def derivative(self, t: float, order: int = 1) -> float:
        if order == 0:
            return self.value(t)
        if order < 1:
            raise ValueError("derivative order must be >= 0")
        pa = self.analysis
        denom = self._denominator(t)
        return (math.factorial(order) * pa.a ** order * pa.alpha ** (order - 1) * pa.beta
                / denom ** (order + 1))


def kappa_curve(pa: PairAnalysis, kappa0: float, t: float) -> float:
    return PerturbationCurve(pa, kappa0).value(t)


def removal_measure_c(pa: PairAnalysis):
    """Kemeny increase when edge {p, q} is removed; INFINITE for a cut-edge."""
    if pa.a == 0:
        raise ValueError(f"({pa.p}, {pa.q}) is not an edge; the removal measure needs a > 0")
    if pa.is_bridge:
        return INFINITE
    return mu(pa) / (1.0 - pa.a * pa.alpha)


def regularized(ctx: SolverContext, pa: PairAnalysis, r: float) -> tuple:
    """(mu_r, c_r) from the resolvent of S + rD.

    On a cut-edge a alpha = 1, so the denominator 1 - a alpha_r is taken as
    a r x^T D x_r with x = S^-1 w, which keeps its relative accuracy as r -> 0.
    """
    if not r > 0:
        raise ValueError("regularization r must be > 0")
    if pa.a == 0:
        raise ValueError(f"({pa.p}, {pa.q}) is not an edge; c_r needs a > 0")
    w = np.zeros(ctx.n)
    w[pa.p], w[pa.q] = 1.0, -1.0
    x_r = solver.regularized_solve(ctx, r, w)
    d = solver.degrees(ctx)
    mu_r = pa.a * float(np.add.reduce(d * x_r * x_r))
    if pa.is_bridge:
        x = solver.solve_pair(ctx, pa.p, pa.q)
        gap = pa.a * r * float(np.add.reduce(d * x * x_r))
    else:
        gap = 1.0 - pa.a * (x_r[pa.p] - x_r[pa.q])
    return mu_r, mu_r / gap


def filtered_cF(ctx: SolverContext, g: WeightedGraph, pa: PairAnalysis) -> float:
    """2 w^T S^-1 D S^-1 D S^-1 w / mu for a cut-edge."""
    if not pa.is_bridge:
        raise ValueError(f"({pa.p}, {pa.q}) is not a cut-edge; the filtered measure is defined only for cut-edges")
    x = solver.solve_pair(ctx, pa.p, pa.q)
    Dx = g.degrees * x
    y = solver.solve_rhs(ctx, Dx)
    return 2.0 * float(Dx @ y) / mu(pa)


def condition_number(pa: PairAnalysis, signed: bool = False) -> float:
    """beta, or -beta as the signed derivative of Kemeny's constant along A - t w w^T."""
    if pa.p == pa.q:
        return 0.0
    return -pa.beta if signed else pa.beta


def _table(g, analyses, measure_id, universe, score, direction, **metadata) -> ScoreTable:
    return ScoreTable(
        measure_id=measure_id,
        universe=universe,
        entries=tuple((pa.p, pa.q, score(pa)) for pa in analyses),
        sort_direction=direction,
        labels=g.labels,
        metadata=metadata,
    )


def batch_edges(ctx: SolverContext, g: WeightedGraph,
                runner: Optional[PairBatchRunner] = None) -> ScoreTable:
    """mu for every edge."""
    analyses = analyze_edges(ctx, g, runner)
    return _table(g, analyses, "mu", "edges", mu, "descending")


def non_edges(g: WeightedGraph) -> list:
    return [(p, q) for p in range(g.n) for q in range(p + 1, g.n) if not g.has_edge(p, q)]


def batch_pairs(ctx: SolverContext, g: WeightedGraph, include_non_edges: bool = True,
                runner: Optional[PairBatchRunner] = None) -> ScoreTable:
    """mu_bar over the edges, or over all pairs p < q when include_non_edges."""
    if include_non_edges:
        pairs = [(p, q) for p in range(g.n) for q in range(p + 1, g.n)]
        universe = "all-pairs"
    else:
        pairs = [(p, q) for p, q, _ in g.edge_list]
        universe = "edges"
    analyses = analyze_pairs(ctx, g, pairs, runner)
    return _table(g, analyses, "mu-bar", universe, mu_bar, "descending")


def mu_bar_matrix(table: ScoreTable, n: int) -> np.ndarray:
    """Symmetric n x n matrix of an all-pairs mu_bar table, zero diagonal."""
    if table.universe != "all-pairs":
        raise ValueError("mu_bar_matrix needs an all-pairs table")
    M = np.zeros((n, n))
    for p, q, s in table.entries:
        M[p, q] = M[q, p] = s
    return M
