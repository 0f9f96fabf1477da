"""Overlapping open box grids, their resolution bounds, and 1-D essential covers.

A grid over the box ``prod (lower_i, lower_i + width_i)`` has ``divisions[i]``
cells per axis.  Cell ``k`` on an axis is the open interval

    (lower + k*width/p,  lower + (k+1)*width/p + margin)

with every operation rounded outward, so neighbouring cells overlap by at
least ``margin``.  Endpoints are tabulated once per axis; both ends are
nondecreasing in ``k``, which lets index queries use binary search.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .interval import (
    EUCLIDEAN,
    METRICS,
    OInterval,
    ORect,
    diam_from_widths,
    down,
    widths_up,
)

BoxId = tuple[int, ...]

SMALLEST_NORMAL = sys.float_info.min  # 2**-1022


def _half_down(x: float) -> float:
    h = x * 0.5
    return h if h * 2.0 == x else down(h)


@dataclass(frozen=True)
class GridSpec:
    lower: tuple[float, ...]
    width: tuple[float, ...]
    divisions: tuple[int, ...]
    margin: float = SMALLEST_NORMAL

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "width", tuple(float(v) for v in self.width))
        object.__setattr__(self, "divisions", tuple(int(v) for v in self.divisions))
        n = len(self.lower)
        if n < 1 or len(self.width) != n or len(self.divisions) != n:
            raise DomainError("lower, width and divisions must share one nonzero length")
        if not all(math.isfinite(v) for v in self.lower + self.width):
            raise DomainError("non-finite region")
        if any(w <= 0 for w in self.width):
            raise DomainError("region widths must be positive")
        if any(p < 1 for p in self.divisions):
            raise DomainError("division counts must be >= 1")
        if not (self.margin > 0 and math.isfinite(self.margin)):
            raise DomainError("margin must be positive")
        for w, p in zip(self.width, self.divisions):
            # exact comparison margin < w/p keeps an exclusive core in every cell
            if Fraction(self.margin) * p >= Fraction(w):
                raise DomainError(f"margin {self.margin!r} >= cell width {w}/{p}")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def size(self) -> int:
        return math.prod(self.divisions)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out = [1] * self.dim
        for i in range(self.dim - 2, -1, -1):
            out[i] = out[i + 1] * self.divisions[i + 1]
        return tuple(out)

    @cached_property
    def endpoints(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per axis, arrays (left, right) of cell endpoints indexed by k."""
        out = []
        for a, w, p in zip(self.lower, self.width, self.divisions):
            pf = float(p)
            step_lo = down(w / pf)
            step_hi = math.nextafter(w / pf, math.inf)
            k = np.arange(p, dtype=np.float64)
            left = np.nextafter(a + np.nextafter(k * step_lo, -np.inf), -np.inf)
            right = np.nextafter(
                np.nextafter(a + np.nextafter((k + 1.0) * step_hi, np.inf), np.inf)
                + self.margin,
                np.inf,
            )
            left.setflags(write=False)
            right.setflags(write=False)
            out.append((left, right))
        return tuple(out)

    @cached_property
    def region(self) -> ORect:
        """Union of all cells; the computed stand-in for the region."""
        return ORect(
            tuple(OInterval(float(l[0]), float(r[-1])) for l, r in self.endpoints)
        )

    def linear_index(self, box: BoxId) -> int:
        self._check_box(box)
        return sum(k * s for k, s in zip(box, self.strides))

    def box_id(self, index: int) -> BoxId:
        if not 0 <= index < self.size:
            raise DomainError(f"linear index {index} out of range")
        out = []
        for s in self.strides:
            k, index = divmod(index, s)
            out.append(k)
        return tuple(out)

    def _check_box(self, box: BoxId):
        if len(box) != self.dim or not all(0 <= k < p for k, p in zip(box, self.divisions)):
            raise DomainError(f"box {box!r} out of range for {self.divisions}")

    def unravel(self, linear: np.ndarray) -> list[np.ndarray]:
        """Per-axis index arrays for an array of linear indices."""
        rest = np.asarray(linear, dtype=np.int64)
        out = []
        for s in self.strides:
            out.append(rest // s)
            rest = rest % s
        return out


def grid_new(
    lower: Sequence[float], width: Sequence[float], divisions: int, margin: float = SMALLEST_NORMAL
) -> GridSpec:
    """Grid with ``divisions`` cells on the first axis and proportional counts elsewhere.

    Counts for the other axes are ``round(divisions * width_i / width_0)``
    (ties to even), computed exactly.
    """
    if divisions < 1:
        raise DomainError("divisions must be >= 1")
    if len(width) < 1 or any(w <= 0 for w in width):
        raise DomainError("region widths must be positive")
    w0 = Fraction(width[0])
    counts = [int(divisions)]
    for w in width[1:]:
        counts.append(max(1, round(Fraction(divisions) * Fraction(w) / w0)))
    return GridSpec(tuple(lower), tuple(width), tuple(counts), margin)


def box_bounds(g: GridSpec, box: BoxId) -> ORect:
    g._check_box(box)
    return ORect(
        tuple(OInterval(float(l[k]), float(r[k])) for k, (l, r) in zip(box, g.endpoints))
    )


def _axis_range(left: np.ndarray, right: np.ndarray, lo, hi):
    """Cells k on one axis with left[k] < hi and lo < right[k]."""
    kmin = np.searchsorted(right, lo, side="right")
    kmax = np.searchsorted(left, hi, side="left") - 1
    return kmin, kmax


def boxes_containing_point(g: GridSpec, x: Sequence[float]) -> list[BoxId]:
    """Grid boxes whose open bounds strictly contain ``x``, row-major order."""
    if len(x) != g.dim:
        raise DomainError("dimension mismatch")
    if not g.region.contains_point(x):
        raise DomainError(f"point {tuple(x)!r} outside the grid region")
    ranges = []
    for (left, right), v in zip(g.endpoints, x):
        kmin, kmax = _axis_range(left, right, v, v)
        ranges.append(range(int(kmin), int(kmax) + 1))
    return list(itertools.product(*ranges))


def index_ranges(g: GridSpec, lo: Sequence[np.ndarray], hi: Sequence[np.ndarray]):
    """Vector form of the per-axis intersection ranges.

    Returns ``(kmin, kmax, inside)``: lists of per-axis index arrays clamped
    to the grid, and a mask of rects lying inside the grid region.
    """
    kmin, kmax = [], []
    inside = None
    for (left, right), alo, ahi in zip(g.endpoints, lo, hi):
        a, b = _axis_range(left, right, alo, ahi)
        kmin.append(a)
        kmax.append(b)
        ok = (alo >= left[0]) & (ahi <= right[-1])
        inside = ok if inside is None else inside & ok
    return kmin, kmax, inside


def boxes_intersecting_rect(g: GridSpec, r: ORect) -> tuple[list[BoxId], bool]:
    """All boxes meeting the open rect ``r``, and whether ``r`` lies in the region."""
    if r.dim != g.dim:
        raise DomainError("dimension mismatch")
    ranges = []
    for (left, right), ax in zip(g.endpoints, r.axes):
        kmin, kmax = _axis_range(left, right, ax.lo, ax.hi)
        ranges.append(range(int(kmin), int(kmax) + 1))
    inside = all(
        left[0] <= ax.lo and ax.hi <= right[-1] for (left, right), ax in zip(g.endpoints, r.axes)
    )
    return list(itertools.product(*ranges)), inside


def cell_widths(g: GridSpec) -> list[float]:
    """Per axis, an upper bound on the widest cell."""
    return [float(np.max(widths_up(l, r))) for l, r in g.endpoints]


def outer_resolution_cover(g: GridSpec, metric: str = EUCLIDEAN) -> float:
    """Upper bound on the largest box diameter in the grid."""
    return diam_from_widths(cell_widths(g), metric)


def inner_resolution_bound(g: GridSpec) -> float:
    """Lower bound margin/2 on the inner resolution, max metric.

    Adjacent cells overlap by at least ``margin``, so any max-ball of radius
    margin/2 fits in one box.
    """
    return _half_down(g.margin)


def thickness_bound(g: GridSpec) -> float:
    """Lower bound on the largest ball radius every box admits (max metric)."""
    narrowest = min(
        float(np.min(np.nextafter(r - l, -np.inf))) for l, r in g.endpoints
    )
    return _half_down(narrowest)


# -------------------------------------------------------------- file format


def write_cover(path, g: GridSpec, linear_ids: Iterable[int], metric: str = EUCLIDEAN):
    """Header ``dim n p1 .. pn margin metric`` then one line per box:
    linear index, per-axis k, per-axis lo hi in hex."""
    if metric not in METRICS:
        raise DomainError(f"unknown metric {metric!r}")
    ids = np.asarray(list(linear_ids) if not isinstance(linear_ids, np.ndarray) else linear_ids)
    ks = g.unravel(ids)
    with open(path, "w") as fh:
        counts = " ".join(str(p) for p in g.divisions)
        fh.write(f"dim {g.dim} {counts} {g.margin.hex()} {metric}\n")
        for row, lin in enumerate(ids):
            parts = [str(int(lin))]
            parts += [str(int(k[row])) for k in ks]
            for k, (left, right) in zip(ks, g.endpoints):
                parts.append(float(left[k[row]]).hex())
                parts.append(float(right[k[row]]).hex())
            fh.write(" ".join(parts) + "\n")


@dataclass
class CoverFile:
    divisions: tuple[int, ...]
    margin: float
    metric: str
    linear: list[int] = field(default_factory=list)
    boxes: list[BoxId] = field(default_factory=list)
    bounds: list[ORect] = field(default_factory=list)


def read_cover(path) -> CoverFile:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) < 5 or header[0] != "dim":
            raise DomainError(f"{path}:1: bad cover header")
        n = int(header[1])
        if len(header) != n + 4:
            raise DomainError(f"{path}:1: expected {n} division counts")
        out = CoverFile(
            tuple(int(v) for v in header[2 : 2 + n]), float.fromhex(header[2 + n]), header[3 + n]
        )
        for lineno, line in enumerate(fh, start=2):
            tok = line.split()
            if not tok:
                continue
            if len(tok) != 1 + 3 * n:
                raise DomainError(f"{path}:{lineno}: expected {1 + 3 * n} fields")
            try:
                out.linear.append(int(tok[0]))
                out.boxes.append(tuple(int(v) for v in tok[1 : 1 + n]))
                ends = [float.fromhex(v) for v in tok[1 + n :]]
                out.bounds.append(ORect.from_bounds(list(zip(ends[0::2], ends[1::2]))))
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
    return out


# ------------------------------------------------- 1-D essential covers
#
# Elements are finite unions of open intervals with exact rational ends,
# stored as sorted tuples of disjoint (lo, hi) pairs.

Piece = tuple[Fraction, Fraction]
OpenSet = tuple[Piece, ...]


@dataclass(frozen=True)
class IntervalCover1D:
    """Ordered open intervals covering ``region`` (default: their hull)."""

    intervals: tuple[OInterval, ...]
    region: OInterval | None = None

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        if not self.intervals:
            raise DomainError("empty cover")
        if self.region is None:
            object.__setattr__(
                self,
                "region",
                OInterval(min(iv.lo for iv in self.intervals), max(iv.hi for iv in self.intervals)),
            )

    def elements(self) -> list[OpenSet]:
        return [_normalize([(Fraction(iv.lo), Fraction(iv.hi))]) for iv in self.intervals]


def _normalize(pieces: Iterable[Piece]) -> OpenSet:
    out: list[list[Fraction]] = []
    for lo, hi in sorted(p for p in pieces if p[0] < p[1]):
        if out and lo < out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def _union(sets: Iterable[OpenSet]) -> OpenSet:
    return _normalize(p for s in sets for p in s)


def _closure(s: OpenSet) -> list[Piece]:
    out: list[list[Fraction]] = []
    for lo, hi in s:
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def _minus_closed(s: OpenSet, closed: Sequence[Piece]) -> OpenSet:
    """Open set ``s`` minus a union of closed intervals."""
    current = list(s)
    for a, b in closed:
        nxt = []
        for lo, hi in current:
            if hi <= a or b <= lo:
                nxt.append((lo, hi))
                continue
            if lo < a:
                nxt.append((lo, a))
            if b < hi:
                nxt.append((b, hi))
        current = nxt
    return _normalize(current)


def _subset(s: OpenSet, u: OpenSet) -> bool:
    return all(any(ul <= lo and hi <= uh for ul, uh in u) for lo, hi in s)


def _as_open_set(e) -> OpenSet:
    if isinstance(e, OInterval):
        return _normalize([(Fraction(e.lo), Fraction(e.hi))])
    if len(e) == 2 and not isinstance(e[0], (tuple, list)):
        return _normalize([(Fraction(e[0]), Fraction(e[1]))])
    return _normalize((Fraction(lo), Fraction(hi)) for lo, hi in e)


def exclusive_part(elems: Sequence[OpenSet], k: int) -> OpenSet:
    """Element ``k`` minus the closure of all other elements."""
    others = _union(e for i, e in enumerate(elems) if i != k)
    return _minus_closed(elems[k], _closure(others))


def is_essential_1d(cover) -> bool:
    """Every element keeps a nonempty open part after removing the closure
    of the union of all the others."""
    if isinstance(cover, IntervalCover1D):
        elems = cover.elements()
    else:
        elems = [_as_open_set(e) for e in cover]
    return all(exclusive_part(elems, k) for k in range(len(elems)))


def set_diameter(s: OpenSet) -> Fraction:
    return s[-1][1] - s[0][0] if s else Fraction(0)


def essentialize_1d(cover: IntervalCover1D) -> list[OpenSet]:
    """Make a 1-D cover essential by trimming elements in order.

    Element k is left alone if it already owns an exclusive ball, emptied
    if the others cover it, and otherwise keeps a witness ball B(x, r)
    while the closed ball of radius r/2 is cut out of the later elements.
    The witness is the midpoint of the longest part of element k outside
    the closure of the earlier elements, r half that part's length.  If no
    such part exists the cut is made from every other element instead.
    Empty elements are dropped from the result.
    """
    elems = cover.elements()
    region = _normalize([(Fraction(cover.region.lo), Fraction(cover.region.hi))])
    if _union(elems) != region:
        raise DomainError("intervals do not cover the region")
    n = len(elems)
    for k in range(n):
        cur = elems[k]
        if not cur or exclusive_part(elems, k):
            continue
        others = _union(e for i, e in enumerate(elems) if i != k)
        if _subset(cur, others):
            elems[k] = ()
            continue
        free = _minus_closed(cur, _closure(_union(elems[:k])))
        targets = range(k + 1, n)
        if not free:
            free = cur
            targets = [i for i in range(n) if i != k]
        lo, hi = max(free, key=lambda p: p[1] - p[0])
        x, r = (lo + hi) / 2, (hi - lo) / 2
        hole = [(x - r / 2, x + r / 2)]
        for i in targets:
            elems[i] = _minus_closed(elems[i], hole)
    return [e for e in elems if e]
