"""kemeny, edges, pairs, solve and history subcommands."""
import dataclasses

import pandas as pd

from cli.app import UsageError
from cli.output import add_display_column, histogram, score_frame, write_frame, write_matrix
from core import centrality, spectral
from core import laplacian_solver as solver
from core.graph_io import load_graph
from core.parallel import PairBatchRunner
from db.models import RunConfig, RunRecord, WeightedGraph
from db.repository import RunRepository
from utils.logger import get_logger

log = get_logger("kemenytool.cli")


def load_input(config: RunConfig) -> WeightedGraph:
    if not config.input_path:
        raise UsageError(f"{config.subcommand} needs --input PATH")
    return load_graph(config.input_path, config.input_format or None)


def prepare(config: RunConfig, session, route: str = "auto"):
    """Load the input graph and preprocess it; returns (graph, solver context)."""
    g = load_input(config)
    ctx = solver.preprocess(g, gth=config.gth, route=route, dense_threshold=config.dense_threshold)
    session.describe(g, ctx)
    return g, ctx


def write_histogram(config: RunConfig, values) -> None:
    if config.histogram_path:
        write_frame(histogram(values, config.histogram_bins), config.histogram_path,
                    config.output_format)


def cmd_kemeny(config: RunConfig, session) -> int:
    method = config.options.get("method", "auto")
    g = load_input(config)
    bandwidth = ""
    if g.n == 1:
        kappa, route = 0.0, "trivial"
        session.describe(g)
    elif method == "eigen":
        kappa, route = spectral.kemeny_via_eigs(g, config.dense_threshold), "eigen"
        session.describe(g)
    else:
        ctx = solver.preprocess(g, gth=config.gth, route=method,
                                dense_threshold=config.dense_threshold)
        session.describe(g, ctx)
        kappa, route, bandwidth = solver.kemeny_banded(ctx), ctx.route, ctx.b
    session.add_metric("kappa", kappa)
    frame = pd.DataFrame([{
        "kappa": kappa, "route": route, "n": g.n, "m": g.m, "bandwidth": bandwidth,
    }])
    write_frame(frame, config.out_path, config.output_format)
    return 0


def cmd_edges(config: RunConfig, session) -> int:
    g, ctx = prepare(config, session)
    runner = PairBatchRunner(config.jobs)
    analyses = centrality.analyze_edges(ctx, g, runner)
    frame = pd.DataFrame({
        "p": [g.label(pa.p) for pa in analyses],
        "q": [g.label(pa.q) for pa in analyses],
        "weight": [pa.a for pa in analyses],
        "mu": [centrality.mu(pa) for pa in analyses],
        "mu_bar": [centrality.mu_bar(pa) for pa in analyses],
        "alpha": [pa.alpha for pa in analyses],
        "bridge": [int(pa.is_bridge) for pa in analyses],
        "c": [centrality.removal_measure_c(pa) for pa in analyses],
    })
    if config.options.get("filtered"):
        frame["c_filtered"] = [
            centrality.filtered_cF(ctx, g, pa) if pa.is_bridge else None for pa in analyses
        ]
    for r in config.r_values:
        pairs = [centrality.regularized(ctx, pa, r) for pa in analyses]
        frame[f"mu_r={r:g}"] = [mu_r for mu_r, _ in pairs]
        frame[f"c_r={r:g}"] = [c_r for _, c_r in pairs]
    add_display_column(frame, "mu", config.normalization)
    write_frame(frame, config.out_path, config.output_format)
    write_histogram(config, frame["mu"].to_numpy(dtype=float))

    session.add_metric("edges", len(analyses))
    session.add_metric("bridges", sum(pa.is_bridge for pa in analyses))
    if analyses:
        session.add_metric("mu_max", float(frame["mu"].max()))
    return 0


def cmd_pairs(config: RunConfig, session) -> int:
    edges_only = bool(config.options.get("edges_only"))
    if config.options.get("matrix") and edges_only:
        raise UsageError("--matrix needs all pairs; drop --edges-only")
    g, ctx = prepare(config, session)
    table = centrality.batch_pairs(ctx, g, include_non_edges=not edges_only,
                                   runner=PairBatchRunner(config.jobs))
    session.add_metric("pairs", len(table))
    if config.options.get("matrix"):
        write_matrix(centrality.mu_bar_matrix(table, g.n), g.labels, config.out_path,
                     config.output_format)
        return 0
    frame = score_frame(table, "mu_bar")
    frame["edge"] = [int(g.has_edge(p, q)) for p, q in table.pairs]
    add_display_column(frame, "mu_bar", config.normalization)
    write_frame(frame, config.out_path, config.output_format)
    write_histogram(config, table.scores)
    return 0


def cmd_solve(config: RunConfig, session) -> int:
    g, ctx = prepare(config, session)
    p_label, q_label = config.options["pair"]
    p, q = g.index_of(p_label), g.index_of(q_label)
    x = solver.solve_pair(ctx, p, q)
    alpha, beta = solver.quadratic_forms(ctx, p, q)
    frame = pd.DataFrame({"node": list(g.labels), "x": x})
    w = [0.0] * g.n
    w[p], w[q] = 1.0, -1.0
    for r in config.r_values:
        frame[f"x_r={r:g}"] = solver.regularized_solve(ctx, r, w)
    write_frame(frame, config.out_path, config.output_format)
    log.info("alpha=%.17g beta=%.17g", alpha, beta)
    session.add_metric("alpha", alpha)
    session.add_metric("beta", beta)
    return 0


def cmd_history(config: RunConfig, session) -> int:
    repo = RunRepository()
    if config.options.get("clear"):
        repo.clear_all()
        log.info("Run history cleared")
        return 0
    records = repo.list_recent(config.options.get("limit", 20))
    rows = []
    for record in records:
        row = dataclasses.asdict(record)
        row.update(repo.get_metrics(record.id))
        rows.append(row)
    columns = [f.name for f in dataclasses.fields(RunRecord)]
    frame = pd.DataFrame(rows)
    if frame.empty:
        frame = pd.DataFrame(columns=columns)
    write_frame(frame, config.out_path, config.output_format)
    return 0
