"""Scan p1 upward to find the smallest grid on which the Henon cover
closes without escaping the region, then report its verdict."""

from dataclasses import dataclass

from common import parse_config

from finres.construct import ConstructionFailure, build
from finres.cover import grid_new
from finres.dynmap import MapSpec
from finres.graph import analyze_graph

REGION = ((-1.4, -0.5), (2.8, 1.0))
X0 = (0.61989426930989, 0.17586130934794)


@dataclass
class SearchConfig:
    """Smallest successful Henon grid."""

    start: int = 380
    stop: int = 520
    step: int = 1


def run(cfg: SearchConfig):
    m = MapSpec.henon()
    for p1 in range(cfg.start, cfg.stop + 1, cfg.step):
        try:
            rep = build(grid_new(*REGION, p1), m, X0)
        except ConstructionFailure as exc:
            if p1 % 20 == 0:
                print(f"p1={p1} escape after {exc.processed} boxes")
            continue
        v = analyze_graph(rep.graph)
        print(
            f"smallest p1={p1} boxes={len(rep.cover)} edges={rep.graph.m} "
            f"r_plus={rep.r_plus:.6f} transitive={v.transitive} mixing={v.mixing}"
        )
        return p1
    print("no successful grid in range")
    return None


if __name__ == "__main__":
    run(parse_config(SearchConfig))
