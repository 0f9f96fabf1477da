"""Grow a grid cover from one point until it is closed under the map.

The cover list doubles as the worklist: boxes are processed in the order
they were appended, and each processed box appends the not-yet-seen grid
boxes meeting its image enclosure.  Processing happens in batches of
already-listed boxes; within a batch the candidate targets are concatenated
in list order and claimed first-come, which yields exactly the list a
one-box-at-a-time loop would build.
"""

from __future__ import annotations

import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .cover import (
    GridSpec,
    boxes_containing_point,
    index_ranges,
    outer_resolution_cover,
    write_cover,
)
from .dynmap import MapSpec, eval_boxes
from .errors import DomainError, MemoryBudgetExceeded
from .graph import DiGraph, _index_dtype, write_edge_list
from .interval import EUCLIDEAN, METRICS, ORect, OInterval, diam_arrays, up, widths_up

DENSE = "dense"
HASH = "hash"
AUTO = "auto"
SEEN_MODES = (AUTO, DENSE, HASH)


class ConstructionFailure(Exception):
    """An image enclosure left the grid region."""

    def __init__(self, box: tuple[int, ...], rect: ORect, processed: int = 0):
        self.box = box
        self.rect = rect
        self.processed = processed
        super().__init__(f"image of box {box} escapes the region: {rect.lo} .. {rect.hi}")


@dataclass(frozen=True)
class BuildConfig:
    metric: str = EUCLIDEAN
    memory_budget: int | None = None  # bytes; None means no cap
    workers: int = 1
    seen_mode: str = AUTO
    index_width: int = 32
    batch: int = 1 << 16
    progress_every: int = 0  # boxes between progress lines on stderr; 0 = quiet

    def __post_init__(self):
        if self.metric not in METRICS:
            raise DomainError(f"unknown metric {self.metric!r}")
        if self.seen_mode not in SEEN_MODES:
            raise DomainError(f"seen mode must be one of {SEEN_MODES}")
        if self.workers < 1 or self.batch < 1:
            raise DomainError("workers and batch must be positive")
        if self.memory_budget is not None and self.memory_budget <= 0:
            raise DomainError("memory budget must be positive")


@dataclass(frozen=True, eq=False)
class Representation:
    """Closed cover (linear grid ids in construction order) and its graph."""

    grid: GridSpec
    cover: np.ndarray
    graph: DiGraph
    r_plus: float
    metric: str = EUCLIDEAN
    stats: dict = field(default_factory=dict)

    @property
    def boxes(self) -> list[tuple[int, ...]]:
        ks = self.grid.unravel(self.cover)
        return [tuple(int(k[i]) for k in ks) for i in range(len(self.cover))]

    def images(self, i: int) -> list[tuple[int, ...]]:
        """Cover boxes in the image of cover box ``i``."""
        return [tuple(int(k) for k in self.grid.unravel(self.cover[j])) for j in self.graph.successors(i)]


# ------------------------------------------------------------ seen sets


@numba.njit(cache=True)
def _claim_bits(bits, ids):
    # first occurrence of every id not yet in the bitmap; sets the bits
    fresh = np.zeros(len(ids), dtype=np.bool_)
    for i in range(len(ids)):
        v = ids[i]
        byte = v >> 3
        mask = np.uint8(1) << np.uint8(v & 7)
        if bits[byte] & mask == 0:
            bits[byte] |= mask
            fresh[i] = True
    return fresh


class _DenseSeen:
    def __init__(self, size: int):
        self.bits = np.zeros((size + 7) // 8, dtype=np.uint8)

    @property
    def nbytes(self) -> int:
        return self.bits.nbytes

    def claim(self, ids: np.ndarray) -> np.ndarray:
        return _claim_bits(self.bits, ids)


class _HashSeen:
    def __init__(self):
        self.seen: set[int] = set()

    @property
    def nbytes(self) -> int:
        return 64 * len(self.seen)  # rough CPython set cost per int

    def claim(self, ids: np.ndarray) -> np.ndarray:
        fresh = np.zeros(len(ids), dtype=bool)
        seen = self.seen
        for i, v in enumerate(ids.tolist()):
            if v not in seen:
                seen.add(v)
                fresh[i] = True
        return fresh


def _pick_seen(size: int, mode: str, budget: int | None):
    dense_bytes = (size + 7) // 8
    if mode == AUTO:
        cap = budget // 4 if budget is not None else 1 << 30
        mode = DENSE if dense_bytes <= cap else HASH
    return (_DenseSeen(size) if mode == DENSE else _HashSeen()), mode


# ------------------------------------------------------------ batch step


def _expand(g: GridSpec, kmin: list[np.ndarray], kmax: list[np.ndarray]):
    """Linear ids of every box in each per-axis index range, row-major
    within a range, ranges concatenated.  Returns (ids, per-range counts)."""
    counts_axis = [b - a + 1 for a, b in zip(kmin, kmax)]
    per = counts_axis[0].astype(np.int64)
    for c in counts_axis[1:]:
        per = per * c
    total = int(per.sum())
    owner = np.repeat(np.arange(len(per)), per)
    starts = np.cumsum(per) - per
    j = np.arange(total, dtype=np.int64) - starts[owner]
    ids = np.zeros(total, dtype=np.int64)
    for a, c, s in zip(reversed(kmin), reversed(counts_axis), reversed(g.strides)):
        co = c[owner]
        ids += (a[owner] + j % co) * s
        j //= co
    return ids, per


def _images(g: GridSpec, m: MapSpec, ids: np.ndarray, metric: str):
    """Evaluate a chunk of boxes.  Returns (escape mask, image lo, image hi,
    target ids, per-box target counts, hull diameters)."""
    ks = g.unravel(ids)
    lo = [left[k] for k, (left, _) in zip(ks, g.endpoints)]
    hi = [right[k] for k, (_, right) in zip(ks, g.endpoints)]
    ilo, ihi = eval_boxes(m, lo, hi)
    kmin, kmax, inside = index_ranges(g, ilo, ihi)
    if not inside.all():
        return ~inside, ilo, ihi, None, None, None
    targets, per = _expand(g, kmin, kmax)
    widths = [
        widths_up(left[a], right[b]) for a, b, (left, right) in zip(kmin, kmax, g.endpoints)
    ]
    hull = diam_arrays(widths, metric)
    return None, ilo, ihi, targets, per, hull


def _chunks(n: int, parts: int):
    step = -(-n // parts)
    return [(s, min(n, s + step)) for s in range(0, n, step)]


# ------------------------------------------------------------ build


def build(
    g: GridSpec,
    m: MapSpec,
    x0: Sequence[float] | None = None,
    config: BuildConfig | None = None,
    seed_ids: np.ndarray | None = None,
) -> Representation:
    """Grow the cover from the grid boxes containing ``x0`` (or from
    ``seed_ids``) until closed.  Raises ConstructionFailure on escape."""
    cfg = config or BuildConfig()
    t0 = time.perf_counter()
    if g.dim != m.dim:
        raise DomainError(f"grid dimension {g.dim} does not match map dimension {m.dim}")
    if seed_ids is None:
        if x0 is None:
            raise DomainError("need a start point or seed boxes")
        seeds = boxes_containing_point(g, [float(v) for v in x0])
        seed_ids = np.array([g.linear_index(b) for b in seeds], dtype=np.int64)
    else:
        seed_ids = np.asarray(seed_ids, dtype=np.int64)
        if len(seed_ids) and (seed_ids.min() < 0 or seed_ids.max() >= g.size):
            raise DomainError("seed box out of range")
    _index_dtype(cfg.index_width, 0)  # reject a bad width before any work
    budget = cfg.memory_budget

    seen, mode = _pick_seen(g.size, cfg.seen_mode, budget)
    fresh = seen.claim(seed_ids)
    cover_parts = [seed_ids[fresh]]
    listed = int(fresh.sum())
    # pending = boxes listed but not processed; kept as a queue of arrays
    queue = [cover_parts[0]]
    processed = 0
    target_parts: list[np.ndarray] = []
    count_parts: list[np.ndarray] = []
    n_edges = 0
    r_hull = 0.0
    batches = 0
    next_report = cfg.progress_every
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None

    try:
        while queue:
            # take up to cfg.batch pending boxes, in list order
            take, size = [], 0
            while queue and size < cfg.batch:
                head = queue[0]
                room = cfg.batch - size
                if len(head) <= room:
                    take.append(queue.pop(0))
                    size += len(head)
                else:
                    take.append(head[:room])
                    queue[0] = head[room:]
                    size += room
            batch = np.concatenate(take) if len(take) > 1 else take[0]
            batches += 1

            spans = _chunks(len(batch), cfg.workers)
            work = lambda se: _images(g, m, batch[se[0] : se[1]], cfg.metric)  # noqa: E731
            results = list(pool.map(work, spans)) if pool else [work(s) for s in spans]

            for (s, _), (escape, ilo, ihi, *_rest) in zip(spans, results):
                if escape is not None:
                    i = int(np.argmax(escape))
                    box = tuple(int(k[0]) for k in g.unravel(batch[s + i : s + i + 1]))
                    rect = ORect(tuple(OInterval(float(a[i]), float(b[i])) for a, b in zip(ilo, ihi)))
                    raise ConstructionFailure(box, rect, processed + s + i)

            targets = np.concatenate([r[3] for r in results])
            per = np.concatenate([r[4] for r in results])
            r_hull = max(r_hull, max(float(r[5].max()) for r in results))
            target_parts.append(targets)
            count_parts.append(per)
            n_edges += len(targets)
            processed += len(batch)

            new = targets[seen.claim(targets)]
            if len(new):
                cover_parts.append(new)
                queue.append(new)
                listed += len(new)

            if budget is not None:
                need = seen.nbytes + 8 * listed + 8 * n_edges + 8 * processed
                if need > budget:
                    raise MemoryBudgetExceeded(need, budget, "cover construction")
            if cfg.progress_every and processed >= next_report:
                print(f"boxes processed {processed} listed {listed} edges {n_edges}", file=sys.stderr)
                next_report = processed + cfg.progress_every
    finally:
        if pool is not None:
            pool.shutdown()

    cover = np.concatenate(cover_parts)
    targets = np.concatenate(target_parts) if target_parts else np.zeros(0, dtype=np.int64)
    per = np.concatenate(count_parts) if count_parts else np.zeros(0, dtype=np.int64)
    del target_parts, count_parts

    dtype = _index_dtype(cfg.index_width, len(cover))
    order = np.argsort(cover, kind="stable")
    pos = np.searchsorted(cover, targets, sorter=order)
    local = order[pos]
    if not np.array_equal(cover[local], targets):
        raise AssertionError("closure broken: a target never entered the cover")
    offsets = np.zeros(len(cover) + 1, dtype=np.int64)
    np.cumsum(per, out=offsets[1:])
    graph = DiGraph(len(cover), offsets, local.astype(dtype))

    r_plus = up(max(r_hull, outer_resolution_cover(g, cfg.metric)))
    stats = {
        "boxes": len(cover),
        "edges": graph.m,
        "batches": batches,
        "seen_mode": mode,
        "seconds": time.perf_counter() - t0,
    }
    return Representation(g, cover, graph, r_plus, cfg.metric, stats)


def build_full(g: GridSpec, m: MapSpec, config: BuildConfig | None = None) -> Representation:
    """Representation on the whole grid (every box seeded)."""
    return build(g, m, config=config, seed_ids=np.arange(g.size, dtype=np.int64))


def resolution_certificate(rep: Representation, eps: float) -> bool:
    return rep.r_plus <= eps


def verify_closure(rep: Representation, m: MapSpec) -> bool:
    """Recompute every image from scratch and compare with the stored graph."""
    g = rep.grid
    cover = rep.cover
    sorted_cover = np.sort(cover)
    for s in range(0, len(cover), 1 << 16):
        ids = cover[s : s + (1 << 16)]
        escape, _, _, targets, per, _ = _images(g, m, ids, rep.metric)
        if escape is not None:
            return False
        pos = np.searchsorted(sorted_cover, targets)
        if np.any(pos >= len(cover)) or not np.array_equal(sorted_cover[np.minimum(pos, len(cover) - 1)], targets):
            return False
        lo, hi = rep.graph.offsets[s], rep.graph.offsets[s + len(ids)]
        stored = cover[rep.graph.targets[lo:hi]]
        if not np.array_equal(stored, targets):
            return False
    return True


def export(rep: Representation, cover_path=None, graph_path=None):
    if cover_path is not None:
        write_cover(cover_path, rep.grid, rep.cover, rep.metric)
    if graph_path is not None:
        write_edge_list(graph_path, rep.graph)
