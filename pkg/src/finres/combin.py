"""Combinatorial (multivalued) maps on finite covers.

A `CombMap` sends each element index of a cover to a sorted tuple of
element indices.  Cover elements themselves live in a `CoverHandle` and are
only needed for the finer/coarser relations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError
from .interval import OInterval, ORect, rect_contains


@dataclass(frozen=True)
class CombMap:
    n: int
    images: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        imgs = tuple(tuple(sorted(set(int(v) for v in im))) for im in self.images)
        if len(imgs) != self.n:
            raise DomainError(f"expected {self.n} image lists, got {len(imgs)}")
        for im in imgs:
            if im and (im[0] < 0 or im[-1] >= self.n):
                raise DomainError(f"image index out of range in {im}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def from_lists(cls, images: Sequence[Iterable[int]]) -> "CombMap":
        return cls(len(images), tuple(tuple(im) for im in images))

    @classmethod
    def identity(cls, n: int) -> "CombMap":
        return cls(n, tuple((i,) for i in range(n)))

    @property
    def total(self) -> bool:
        return all(self.images)

    def __call__(self, u: int) -> tuple[int, ...]:
        return self.images[u]

    def edges(self):
        for u, im in enumerate(self.images):
            for v in im:
                yield u, v


def comb_image_set(f: CombMap, s: Iterable[int]) -> tuple[int, ...]:
    out: set[int] = set()
    for u in s:
        if not 0 <= u < f.n:
            raise DomainError(f"index {u} out of range")
        out.update(f.images[u])
    return tuple(sorted(out))


def comb_compose(g: CombMap, f: CombMap) -> CombMap:
    """(g o f)(u) = union of g(v) over v in f(u)."""
    if g.n != f.n:
        raise DomainError(f"size mismatch: {g.n} vs {f.n}")
    return CombMap(f.n, tuple(comb_image_set(g, im) for im in f.images))


def comb_power(f: CombMap, k: int) -> CombMap:
    if k < 1:
        raise DomainError("power must be >= 1")
    out = f
    for _ in range(k - 1):
        out = comb_compose(f, out)
    return out


def comb_inverse(f: CombMap) -> CombMap:
    inv: list[list[int]] = [[] for _ in range(f.n)]
    for u, v in f.edges():
        inv[v].append(u)
    return CombMap(f.n, tuple(tuple(im) for im in inv))


# ----------------------------------------------------------------- covers


def _contains(a, b) -> bool:
    if isinstance(a, ORect):
        return rect_contains(a, b)
    if isinstance(a, OInterval):
        return a.lo <= b.lo and b.hi <= a.hi
    return b <= a  # point sets


@dataclass(frozen=True)
class CoverHandle:
    """Cover elements by index: ORects, OIntervals, or frozensets of points."""

    elements: tuple

    def __post_init__(self):
        els = tuple(frozenset(e) if isinstance(e, (set, list)) else e for e in self.elements)
        object.__setattr__(self, "elements", els)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


def is_finer_cover(u1: CoverHandle, u2: CoverHandle) -> bool:
    """Every element of u1 lies in some element of u2, and every element of
    u2 contains some element of u1."""
    first = all(any(_contains(b, a) for b in u2.elements) for a in u1.elements)
    second = all(any(_contains(b, a) for a in u1.elements) for b in u2.elements)
    return first and second


def is_finer_map(f1: CombMap, u1: CoverHandle, f2: CombMap, u2: CoverHandle) -> bool:
    """f1 finer than f2.

    Checked for *every* pair U1 in U2, not just one containing element;
    the weaker form does not survive composition.
    """
    if f1.n != len(u1) or f2.n != len(u2):
        raise DomainError("map size does not match its cover")
    if not is_finer_cover(u1, u2):
        return False
    for i, a in enumerate(u1.elements):
        for j, b in enumerate(u2.elements):
            if not _contains(b, a):
                continue
            targets = [u2.elements[w] for w in f2.images[j]]
            for v in f1.images[i]:
                if not any(_contains(t, u1.elements[v]) for t in targets):
                    return False
    return True


def minimal_representation(m, u: CoverHandle) -> CombMap:
    """Exact minimal representation of a 1-D toy map on a 1-D cover:
    W is in F(U) iff W meets f(U)."""
    from .dynmap import LINEAR1D, LOGISTIC, exact_image_1d, image_meets

    if m.kind not in (LINEAR1D, LOGISTIC):
        raise DomainError(f"minimal representation unsupported for {m.kind}")
    ends = []
    for e in u.elements:
        iv = e.axes[0] if isinstance(e, ORect) else e
        if isinstance(e, ORect) and e.dim != 1:
            raise DomainError("minimal representation needs a 1-D cover")
        ends.append((Fraction(iv.lo), Fraction(iv.hi)))
    images = []
    for lo, hi in ends:
        s = exact_image_1d(m, lo, hi)
        images.append(tuple(j for j, (wl, wh) in enumerate(ends) if image_meets(s, wl, wh)))
    return CombMap(len(ends), tuple(images))


def mixing_by_powers(f: CombMap) -> bool:
    """Brute force: some power k <= (n-1)^2 + 1 maps every element onto the
    whole cover."""
    full = tuple(range(f.n))
    if not f.total:
        return False
    power = f
    for _ in range((f.n - 1) ** 2 + 1):
        if all(im == full for im in power.images):
            return True
        power = comb_compose(f, power)
    return False
