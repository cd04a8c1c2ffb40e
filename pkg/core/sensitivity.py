"""Global sensitivity of Kemeny's constant: the averaged mu_bar over node pairs."""
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from core import laplacian_solver as solver
from core.centrality import batch_pairs
from core.families import FAMILIES, family
from core.parallel import PairBatchRunner
from db.models import SensitivityReport, SolverContext, WeightedGraph
from utils.logger import get_logger

log = get_logger("kemenytool.sensitivity")

COLUMN_BLOCK = 256


def _trace_and_total(ctx: SolverContext) -> tuple:
    """(trace M, 1^T M 1) for M = S^-1 D S^-1, from column solves in index order."""
    d = solver.degrees(ctx)
    trace = 0.0
    for start in range(0, ctx.n, COLUMN_BLOCK):
        stop = min(start + COLUMN_BLOCK, ctx.n)
        E = np.zeros((ctx.n, stop - start))
        E[np.arange(start, stop), np.arange(stop - start)] = 1.0
        X = solver.solve_rhs(ctx, E)
        trace += float(np.add.reduce(np.add.reduce(d[:, None] * X * X, axis=0)))
    u = solver.solve_rhs(ctx, np.ones(ctx.n))
    return trace, float(np.add.reduce(d * u * u))


def global_sensitivity(
    ctx: SolverContext,
    g: WeightedGraph,
    with_pair_mean: bool = True,
    runner: Optional[PairBatchRunner] = None,
) -> SensitivityReport:
    """zeta = (n trace M - 1^T M 1) / n^2, optionally with the mean of mu_bar over all n^2 ordered pairs.

    The pair mean counts each unordered pair twice and the diagonal as zero,
    so it equals 2 * zeta.
    """
    n = g.n
    trace, total = _trace_and_total(ctx)
    zeta = (n * trace - total) / n ** 2
    pair_mean = None
    if with_pair_mean:
        table = batch_pairs(ctx, g, include_non_edges=True, runner=runner)
        pair_mean = 2.0 * float(np.add.reduce(table.scores)) / n ** 2
    log.info("Sensitivity n=%d: zeta=%.12g pair mean=%s", n, zeta, pair_mean)
    return SensitivityReport(n=n, zeta_formula=zeta, zeta_pair_mean=pair_mean)


def sensitivity_curve(
    family_name: str,
    n_values: Iterable,
    gth: bool = False,
    with_pair_mean: bool = False,
) -> pd.DataFrame:
    """zeta over sizes of one graph family, one row per n."""
    if family_name not in FAMILIES:
        raise ValueError(f"unknown family {family_name!r}; expected one of {FAMILIES}")
    rows = []
    for n in n_values:
        if n < 2:
            raise ValueError("sensitivity curves need n >= 2")
        g = family(family_name, int(n))
        report = global_sensitivity(solver.preprocess(g, gth=gth), g, with_pair_mean)
        rows.append({
            "family": family_name,
            "n": report.n,
            "zeta": report.zeta_formula,
            "zeta_pair_mean": report.zeta_pair_mean,
        })
    frame = pd.DataFrame(rows, columns=["family", "n", "zeta", "zeta_pair_mean"])
    if not with_pair_mean:
        frame = frame.drop(columns="zeta_pair_mean")
    return frame
