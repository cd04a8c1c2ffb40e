"""linkpred subcommand: score tables for non-edges, optional top-k and correlations."""
import os
import sys

import pandas as pd

from cli.commands import prepare, write_histogram
from cli.output import normalize, write_frame
from core import link_prediction as lp
from core.parallel import PairBatchRunner
from db.models import RunConfig
from utils.config import CNC_ALPHA
from utils.logger import get_logger

log = get_logger("kemenytool.cli")


def _correlation_path(config: RunConfig) -> str:
    explicit = config.options.get("correlation")
    if explicit:
        return explicit
    if config.out_path:
        stem, _ = os.path.splitext(config.out_path)
        return f"{stem}_correlation.csv"
    return ""


def cmd_linkpred(config: RunConfig, session) -> int:
    g, ctx = prepare(config, session)
    measure = config.options.get("measure", "all")
    names = list(lp.MEASURES) if measure == "all" else [measure]
    alpha_c = config.options.get("alpha_c")
    alpha_c = CNC_ALPHA if alpha_c is None else alpha_c
    direction = config.options.get("direction", "likely")
    top = config.options.get("top")
    runner = PairBatchRunner(config.jobs)

    tables = [
        lp.score_non_edges(ctx, g, name, alpha_c=alpha_c, direction=direction, runner=runner)
        for name in names
    ]

    frames = []
    for table in tables:
        ordered = lp.ranked(table)
        if top:
            _, truncated = lp.top_k(table, top)
            session.add_metric(f"{table.measure_id}_truncated", int(truncated))
            ordered = ordered[:top]
        scores = [s for _, _, s in ordered]
        frame = pd.DataFrame({
            "measure": table.measure_id,
            "orientation": table.metadata.get("orientation", "likely"),
            "rank": range(1, len(ordered) + 1),
            "p": [table.label_pair(p, q)[0] for p, q, _ in ordered],
            "q": [table.label_pair(p, q)[1] for p, q, _ in ordered],
            "score": scores,
        })
        shown = normalize(scores, config.normalization)
        if shown is not None:
            frame["score_display"] = shown
        frames.append(frame)
        session.add_metric(f"{table.measure_id}_pairs", len(table))
        if table.measure_id == "kemeny-derivative":
            write_histogram(config, table.scores)

    write_frame(pd.concat(frames, ignore_index=True), config.out_path, config.output_format)

    if len(tables) > 1 and tables[0].entries:
        matrix = lp.correlation_matrix(tables)
        matrix.index.name = "measure"
        path = _correlation_path(config)
        if path:
            write_frame(matrix, path, "csv", index=True)
            log.info("Wrote correlation matrix to %s", path)
        else:
            sys.stdout.write("\n")
            write_frame(matrix, None, config.output_format, index=True)
    return 0
