"""sensitivity and onepath-check subcommands."""
import sys

import pandas as pd

from cli.app import UsageError
from cli.commands import load_input, prepare
from cli.output import write_frame
from core import centrality, onepath
from core import laplacian_solver as solver
from core.families import FAMILIES, path
from core.parallel import PairBatchRunner
from core.sensitivity import global_sensitivity, sensitivity_curve
from db.models import RunConfig
from utils.config import ONEPATH_RTOL
from utils.logger import get_logger

log = get_logger("kemenytool.cli")


def cmd_sensitivity(config: RunConfig, session) -> int:
    families = config.options.get("family")
    pair_mean = bool(config.options.get("pair_mean"))
    if families:
        n_values = config.options.get("n_values")
        if not n_values:
            raise UsageError("--family needs --n START:STOP:STEP")
        unknown = [f for f in families if f not in FAMILIES]
        if unknown:
            raise UsageError(f"unknown family {unknown[0]!r}; expected one of {FAMILIES}")
        frame = pd.concat(
            [sensitivity_curve(f, n_values, gth=config.gth, with_pair_mean=pair_mean)
             for f in families],
            ignore_index=True,
        )
        session.add_metric("curve_points", len(frame))
    else:
        g, ctx = prepare(config, session)
        with_mean = pair_mean or g.n <= config.dense_threshold
        report = global_sensitivity(ctx, g, with_pair_mean=with_mean,
                                    runner=PairBatchRunner(config.jobs))
        frame = pd.DataFrame([{
            "n": report.n,
            "zeta": report.zeta_formula,
            "zeta_pair_mean": report.zeta_pair_mean,
        }])
        session.add_metric("zeta", report.zeta_formula)
        session.add_metric("zeta_pair_mean", report.zeta_pair_mean)
    write_frame(frame, config.out_path, config.output_format)
    return 0


def _compare_unit_paths(n_values: list, config: RunConfig) -> list:
    rows = []
    for n in n_values:
        g = path(n)
        ctx = solver.preprocess(g, gth=config.gth, dense_threshold=config.dense_threshold)
        spec = onepath.unit_path_spec(n)
        analyses = centrality.analyze_edges(ctx, g, PairBatchRunner(config.jobs))
        for q, pa in enumerate(analyses, start=1):
            rows.append({
                "n": n,
                "q": q,
                "mu_solver": centrality.mu(pa),
                "mu_closed_form": onepath.mu_onepath(spec, q),
                "mu_parabola": onepath.unit_path_mu(n, q),
            })
    return rows


def _compare_input(config: RunConfig, session) -> list:
    g = load_input(config)
    spec = onepath.spec_from_graph(g)
    ctx = solver.preprocess(g, gth=config.gth, dense_threshold=config.dense_threshold)
    session.describe(g, ctx)
    analyses = centrality.analyze_edges(ctx, g, PairBatchRunner(config.jobs))
    session.add_metric("kappa_closed_form", onepath.kemeny_onepath(spec))
    return [
        {"n": g.n, "q": q, "mu_solver": centrality.mu(pa),
         "mu_closed_form": onepath.mu_onepath(spec, q)}
        for q, pa in enumerate(analyses, start=1)
    ]


def cmd_onepath_check(config: RunConfig, session) -> int:
    """Max relative deviation between the general solver and the one-path closed forms."""
    if config.input_path:
        rows = _compare_input(config, session)
    else:
        n_values = config.options.get("n_values") or [50]
        if len(n_values) == 1:
            n_values = list(range(2, n_values[0] + 1))
        if min(n_values) < 2:
            raise UsageError("one-path checks need n >= 2")
        rows = _compare_unit_paths(n_values, config)

    frame = pd.DataFrame(rows)
    reference = frame["mu_solver"].abs()
    deviation = ((frame["mu_closed_form"] - frame["mu_solver"]).abs() / reference)
    if "mu_parabola" in frame:
        deviation = deviation.combine(
            (frame["mu_parabola"] - frame["mu_solver"]).abs() / reference, max
        )
    frame["relative_deviation"] = deviation
    worst = float(deviation.max()) if len(frame) else 0.0

    if config.out_path:
        write_frame(frame, config.out_path, config.output_format)
    sys.stdout.write(f"max_relative_deviation={worst!r}\n")
    session.add_metric("max_relative_deviation", worst)
    if worst > ONEPATH_RTOL:
        log.error("One-path check failed: deviation %.3e exceeds %.0e", worst, ONEPATH_RTOL)
        return 1
    return 0
