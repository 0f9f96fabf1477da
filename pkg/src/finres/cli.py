"""Command-line front end: verify, sweep and analyze-graph.

Exit codes are a stable contract:

    0  mixing, and r_plus <= eps
    1  not mixing (or mixing but r_plus > eps)
    2  construction failure (an image left the region)
    3  configuration or input error
    4  memory budget exceeded
"""

from __future__ import annotations

import argparse
import os
import resource
import sys
import time
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

from .construct import (
    SEEN_MODES,
    BuildConfig,
    ConstructionFailure,
    Representation,
    build,
    export,
    resolution_certificate,
)
from .cover import SMALLEST_NORMAL, GridSpec, grid_new, inner_resolution_bound
from .dynmap import HENON, KINDS, LINEAR1D, LOGISTIC, MapSpec
from .errors import DomainError, MemoryBudgetExceeded
from .graph import analyze_graph, read_edge_list
from .interval import METRICS

EXIT_OK = 0
EXIT_NOT_MIXING = 1
EXIT_CONSTRUCTION = 2
EXIT_CONFIG = 3
EXIT_BUDGET = 4

HENON_X0 = (0.61989426930989, 0.17586130934794)

# per map: (a, b), region lower, region width, start point
MAP_DEFAULTS = {
    HENON: (((14, 10), (3, 10)), (-1.4, -0.5), (2.8, 1.0), HENON_X0),
    LOGISTIC: (((4, 1), None), (0.0,), (1.0,), (0.3,)),
    LINEAR1D: (((1, 2), (1, 4)), (0.0,), (1.0,), (0.5,)),
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything one verify run needs.  ``None`` fields take map defaults."""

    map: str = HENON
    a_num: int | None = None
    a_den: int | None = None
    b_num: int | None = None
    b_den: int | None = None
    region: tuple[float, ...] | None = None  # lower values then widths
    p1: int = 446
    kappa: float = SMALLEST_NORMAL
    x0: tuple[float, ...] | None = None
    metric: str = "euclidean"
    eps: float = 0.05
    export_cover: str | None = None
    export_graph: str | None = None
    report: str | None = None
    memory_budget: int | None = None
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    index_width: int = 32
    seen_mode: str = "auto"
    progress: int = 0

    def __post_init__(self):
        if self.map not in KINDS:
            raise ConfigError(f"unknown map {self.map!r}; choose from {sorted(KINDS)}")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.p1 < 1:
            raise ConfigError("p1 must be positive")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if self.index_width not in (32, 64):
            raise ConfigError("index width must be 32 or 64")
        if self.seen_mode not in SEEN_MODES:
            raise ConfigError(f"seen mode must be one of {SEEN_MODES}")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        for num, den in ((self.a_num, self.a_den), (self.b_num, self.b_den)):
            if den is not None and den == 0:
                raise ConfigError("parameter denominator must be nonzero")

    def map_spec(self) -> MapSpec:
        (a, b), _, _, _ = MAP_DEFAULTS[self.map]
        a = (self.a_num if self.a_num is not None else a[0], self.a_den if self.a_den is not None else a[1])
        if self.map == LOGISTIC:
            if self.b_num is not None or self.b_den is not None:
                raise ConfigError("the logistic map takes only --a-num/--a-den (its r)")
            return MapSpec.logistic(a)
        b = (self.b_num if self.b_num is not None else b[0], self.b_den if self.b_den is not None else b[1])
        return MapSpec.henon(a, b) if self.map == HENON else MapSpec.linear1d(a, b)

    def grid(self) -> GridSpec:
        _, lower, width, _ = MAP_DEFAULTS[self.map]
        dim = len(lower)
        if self.region is not None:
            if len(self.region) != 2 * dim:
                raise ConfigError(f"--region needs {2 * dim} numbers for {self.map}")
            lower, width = self.region[:dim], self.region[dim:]
        try:
            return grid_new(lower, width, self.p1, self.kappa)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def start(self) -> tuple[float, ...]:
        x0 = self.x0 if self.x0 is not None else MAP_DEFAULTS[self.map][3]
        if len(x0) != len(MAP_DEFAULTS[self.map][1]):
            raise ConfigError(f"--x0 needs {len(MAP_DEFAULTS[self.map][1])} numbers for {self.map}")
        return tuple(x0)


@dataclass
class AnalysisReport:
    status: str
    map: str | None = None
    p1: int | None = None
    divisions: tuple[int, ...] | None = None
    boxes: int | None = None
    edges: int | None = None
    r_plus: float | None = None
    inner_resolution: float | None = None
    scc_count: int | None = None
    period: int | None = None
    transitive: bool | None = None
    mixing: bool | None = None
    eps: float | None = None
    certified: bool | None = None
    seen_mode: str | None = None
    escape_box: tuple[int, ...] | None = None
    escape_lo: tuple[float, ...] | None = None
    escape_hi: tuple[float, ...] | None = None
    message: str | None = None
    timings: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {
            "construction-failure": EXIT_CONSTRUCTION,
            "budget-exceeded": EXIT_BUDGET,
            "config-error": EXIT_CONFIG,
        }.get(self.status, EXIT_OK if self.mixing and self.certified is not False else EXIT_NOT_MIXING)

    def lines(self) -> list[str]:
        """``key value`` lines; everything above the timings marker is
        deterministic for a given configuration."""
        out = []
        for f in fields(self):
            if f.name == "timings":
                continue
            v = getattr(self, f.name)
            if v is not None:
                out.append(f"{f.name} {_fmt(v)}")
        out.append("--- timings")
        for k, v in self.timings.items():
            out.append(f"{k} {_fmt(v) if not isinstance(v, float) else f'{v:.6f}'}")
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return v.hex()
    if isinstance(v, tuple):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _peak_rss_bytes() -> int:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


def _rep_bytes(rep: Representation) -> int:
    g = rep.graph
    return rep.cover.nbytes + g.offsets.nbytes + g.targets.nbytes


# ------------------------------------------------------------ commands


def cmd_verify(cfg: RunConfig) -> AnalysisReport:
    m = cfg.map_spec()
    g = cfg.grid()
    x0 = cfg.start()
    base = dict(map=cfg.map, p1=cfg.p1, divisions=g.divisions, eps=cfg.eps)
    bcfg = BuildConfig(
        metric=cfg.metric,
        memory_budget=cfg.memory_budget,
        workers=cfg.workers,
        seen_mode=cfg.seen_mode,
        index_width=cfg.index_width,
        progress_every=cfg.progress,
    )
    t0 = time.perf_counter()
    try:
        rep = build(g, m, x0, bcfg)
    except ConstructionFailure as exc:
        return AnalysisReport(
            "construction-failure",
            escape_box=exc.box,
            escape_lo=exc.rect.lo,
            escape_hi=exc.rect.hi,
            timings={"build_seconds": time.perf_counter() - t0},
            **base,
        )
    except MemoryBudgetExceeded as exc:
        return AnalysisReport("budget-exceeded", message=str(exc), **base)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    t1 = time.perf_counter()
    verdict = analyze_graph(rep.graph)
    t2 = time.perf_counter()
    if cfg.export_cover or cfg.export_graph:
        export(rep, cfg.export_cover, cfg.export_graph)
    t3 = time.perf_counter()
    return AnalysisReport(
        "ok",
        boxes=rep.stats["boxes"],
        edges=rep.stats["edges"],
        r_plus=rep.r_plus,
        inner_resolution=inner_resolution_bound(g),
        scc_count=verdict.scc_count,
        period=verdict.period,
        transitive=verdict.transitive,
        mixing=verdict.mixing,
        certified=resolution_certificate(rep, cfg.eps),
        seen_mode=rep.stats["seen_mode"],
        timings={
            "build_seconds": t1 - t0,
            "analysis_seconds": t2 - t1,
            "export_seconds": t3 - t2,
            "representation_bytes": _rep_bytes(rep),
            "peak_rss_bytes": _peak_rss_bytes(),
        },
        **base,
    )


SWEEP_COLUMNS = ("p1", "status", "boxes", "edges", "r_plus", "mixing", "seconds")


def cmd_sweep(cfg: RunConfig, p1s: Sequence[int]) -> list[AnalysisReport]:
    rows = []
    for p1 in p1s:
        one = replace(cfg, p1=p1, export_cover=None, export_graph=None, report=None)
        try:
            rows.append(cmd_verify(one))
        except ConfigError as exc:
            rows.append(AnalysisReport("config-error", map=cfg.map, p1=p1, message=str(exc)))
    return rows


def sweep_table(rows: Sequence[AnalysisReport]) -> str:
    out = [" ".join(SWEEP_COLUMNS)]
    for r in rows:
        secs = r.timings.get("build_seconds", 0.0) + r.timings.get("analysis_seconds", 0.0)
        vals = (r.p1, r.status, r.boxes, r.edges, r.r_plus, r.mixing, f"{secs:.3f}")
        out.append(" ".join("-" if v is None else (v if isinstance(v, str) else _fmt(v)) for v in vals))
    ok = [r for r in rows if r.status == "ok"]
    for a, b in zip(ok, ok[1:]):
        out.append(
            f"ratio {a.p1} {b.p1} p1 {b.p1 / a.p1:.4g} boxes {b.boxes / a.boxes:.4g} "
            f"r_plus {a.r_plus / b.r_plus:.4g}"
        )
    return "\n".join(out) + "\n"


def cmd_analyze_graph(path, index_width: int = 32) -> AnalysisReport:
    try:
        g = read_edge_list(path, index_width)
    except (OSError, DomainError) as exc:
        raise ConfigError(str(exc)) from None
    t0 = time.perf_counter()
    v = analyze_graph(g)
    return AnalysisReport(
        "ok",
        boxes=v.vertices,
        edges=v.edges,
        scc_count=v.scc_count,
        period=v.period,
        transitive=v.transitive,
        mixing=v.mixing,
        timings={"analysis_seconds": time.perf_counter() - t0},
    )


# ------------------------------------------------------------ parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(_float(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _float(text: str) -> float:
    text = text.strip()
    if text in ("min-normal", "smallest-normal"):
        return SMALLEST_NORMAL
    try:
        return float(text)
    except ValueError:
        return float.fromhex(text)


def _bytes(text: str) -> int:
    text = text.strip().upper()
    scale = {"K": 1 << 10, "M": 1 << 20, "G": 1 << 30, "T": 1 << 40}
    try:
        if text and text[-1] in scale:
            return int(float(text[:-1]) * scale[text[-1]])
        return int(text)
    except ValueError:
        raise ConfigError(f"bad byte count {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


# key -> converter, shared by flags and config files
_CONVERT = {
    "map": str,
    "a_num": int,
    "a_den": int,
    "b_num": int,
    "b_den": int,
    "region": _floats,
    "p1": int,
    "kappa": _float,
    "x0": _floats,
    "metric": str,
    "eps": _float,
    "export_cover": str,
    "export_graph": str,
    "report": str,
    "memory_budget": _bytes,
    "workers": int,
    "index_width": int,
    "seen_mode": str,
    "progress": int,
}


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONVERT:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value' with a known key")
        try:
            out[key] = _CONVERT[key](value.strip())
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return out


def _add_run_flags(p: argparse.ArgumentParser):
    s = argparse.SUPPRESS
    p.add_argument("--config", default=s, help="flat 'key = value' file; flags override it")
    p.add_argument("--map", choices=sorted(KINDS), default=s)
    p.add_argument("--a-num", type=int, default=s, help="first parameter numerator (a, r or slope)")
    p.add_argument("--a-den", type=int, default=s)
    p.add_argument("--b-num", type=int, default=s, help="second parameter numerator (b or offset)")
    p.add_argument("--b-den", type=int, default=s)
    p.add_argument("--region", type=_floats, default=s, help="lower corner then widths, comma separated")
    p.add_argument("--p1", type=int, default=s, help="cells along the first axis")
    p.add_argument("--kappa", type=_float, default=s, help="cell overlap margin (decimal, hex, or min-normal)")
    p.add_argument("--x0", type=_floats, default=s, help="start point, comma separated")
    p.add_argument("--metric", choices=METRICS, default=s)
    p.add_argument("--eps", type=_float, default=s, help="resolution target (default 0.05)")
    p.add_argument("--export-cover", default=s, metavar="PATH")
    p.add_argument("--export-graph", default=s, metavar="PATH")
    p.add_argument("--report", default=s, metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--memory-budget", type=_bytes, default=s, metavar="BYTES", help="accepts K/M/G suffixes")
    p.add_argument("--workers", type=int, default=s)
    p.add_argument("--index-width", type=int, choices=(32, 64), default=s)
    p.add_argument("--seen-mode", choices=SEEN_MODES, default=s)
    p.add_argument("--progress", type=int, default=s, metavar="N", help="progress line every N boxes")


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="finres", description="Finite-resolution mixing checks for maps on box covers.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="build a representation and decide mixing")
    _add_run_flags(v)
    s = sub.add_parser("sweep", help="verify over several p1 values and tabulate the scaling")
    _add_run_flags(s)
    s.add_argument("--p1-list", type=_ints, required=True, help="comma-separated p1 values")
    a = sub.add_parser("analyze-graph", help="analyze an edge-list file")
    a.add_argument("path")
    a.add_argument("--index-width", type=int, choices=(32, 64), default=32)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if "config" in ns:
        values.update(read_config_file(ns.config))
    values.update({k: v for k, v in vars(ns).items() if k in _CONVERT})
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = make_parser().parse_args(argv)
        if ns.command == "analyze-graph":
            rep = cmd_analyze_graph(ns.path, ns.index_width)
            _emit(rep.text(), None)
            return rep.exit_code
        cfg = config_from_args(ns)
        if ns.command == "sweep":
            rows = cmd_sweep(cfg, ns.p1_list)
            _emit(sweep_table(rows), cfg.report)
            return EXIT_OK if all(r.exit_code == EXIT_OK for r in rows) else EXIT_NOT_MIXING
        rep = cmd_verify(cfg)
    except ConfigError as exc:
        print(f"finres: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if rep.status == "construction-failure":
        print(f"finres: image of box {rep.escape_box} escapes the region", file=sys.stderr)
    elif rep.status == "budget-exceeded":
        print(f"finres: {rep.message}", file=sys.stderr)
    _emit(rep.text(), cfg.report)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
