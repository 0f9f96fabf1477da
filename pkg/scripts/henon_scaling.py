"""Grow Henon representations over a list of grid sizes and print the
box-count and resolution scaling table (optionally as CSV)."""

import csv
import os
import sys
from dataclasses import dataclass

from common import parse_config

from finres.cli import RunConfig, cmd_sweep, sweep_table


@dataclass
class ScalingConfig:
    """Henon scaling sweep."""

    p1s: tuple = (446, 2000, 20000)
    workers: int = os.cpu_count() or 1
    metric: str = "euclidean"
    csv: str = ""


def run(cfg: ScalingConfig):
    rows = cmd_sweep(RunConfig(workers=cfg.workers, metric=cfg.metric), list(cfg.p1s))
    sys.stdout.write(sweep_table(rows))
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p1", "status", "boxes", "edges", "r_plus", "mixing", "build_seconds", "peak_rss_bytes"])
            for r in rows:
                w.writerow(
                    [r.p1, r.status, r.boxes, r.edges, r.r_plus, r.mixing,
                     r.timings.get("build_seconds"), r.timings.get("peak_rss_bytes")]
                )
    return rows


if __name__ == "__main__":
    run(parse_config(ScalingConfig))
