"""Time the component and period searches on random strongly connected
graphs with |E| = degree * |V| and print ns per vertex and per edge."""

import time
from dataclasses import dataclass

import numpy as np
from common import parse_config

from finres.graph import DiGraph, graph_period, period_search, tarjan_scc


@dataclass
class BenchConfig:
    """Linear-time benchmark for the graph kernels."""

    sizes: tuple = (10**5, 10**6, 10**7)
    degree: int = 8
    repeats: int = 3
    seed: int = 0


def random_graph(n: int, degree: int, rng) -> DiGraph:
    perm = rng.permutation(n).astype(np.int32)
    extra = (degree - 1) * n
    src = np.concatenate([perm, rng.integers(0, n, extra, dtype=np.int32)])
    dst = np.concatenate([np.roll(perm, -1), rng.integers(0, n, extra, dtype=np.int32)])
    return DiGraph.from_edges(n, src, dst)


def best(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(cfg: BenchConfig):
    rng = np.random.default_rng(cfg.seed)
    warm = random_graph(1000, cfg.degree, rng)
    tarjan_scc(warm)
    graph_period(warm, check=False)
    print("n edges tarjan_ns_per_vertex period_ns_per_vertex tarjan_ns_per_edge scanned_eq_m")
    rows = []
    for n in cfg.sizes:
        g = random_graph(n, cfg.degree, rng)
        t_scc = best(lambda: tarjan_scc(g), cfg.repeats)
        t_per = best(lambda: graph_period(g, check=False), cfg.repeats)
        scanned = tarjan_scc(g).edges_scanned == g.m and period_search(g).edges_scanned == g.m
        rows.append((n, g.m, t_scc / n * 1e9, t_per / n * 1e9))
        print(f"{n} {g.m} {t_scc / n * 1e9:.1f} {t_per / n * 1e9:.1f} {t_scc / g.m * 1e9:.1f} {scanned}")
        del g
    for name, col in (("tarjan", 2), ("period", 3)):
        vals = [r[col] for r in rows]
        print(f"{name} per-vertex spread x{max(vals) / min(vals):.2f}")
    return rows


if __name__ == "__main__":
    run(parse_config(BenchConfig))
