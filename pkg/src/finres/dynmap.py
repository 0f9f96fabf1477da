"""Rigorous image enclosures for the Hénon map and two 1-D toy maps.

The formulas are written once and evaluated either on `OInterval`s (one
box) or on `IntervalArray`s (a batch of boxes); both paths round
identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError
from .interval import IntervalArray, OInterval, ORect, down, oi_from_rational, up

HENON = "henon"
LOGISTIC = "logistic"
LINEAR1D = "linear1d"
KINDS = {HENON: 2, LOGISTIC: 1, LINEAR1D: 2}
DIMS = {HENON: 2, LOGISTIC: 1, LINEAR1D: 1}


@dataclass(frozen=True)
class MapSpec:
    """A map family with interval parameter enclosures.

    ``exact`` holds the rational parameter values the enclosures were built
    from (needed only by exact 1-D image computations).  ``domain`` is an
    optional closed box the map sends into itself; images are clipped to it.
    """

    kind: str
    params: tuple[OInterval, ...]
    exact: tuple[Fraction, ...] | None = None
    domain: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown map kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(self.params))
        if len(self.params) != KINDS[self.kind]:
            raise DomainError(f"{self.kind} takes {KINDS[self.kind]} parameters")
        if not all(isinstance(p, OInterval) for p in self.params):
            raise DomainError("parameters must be OIntervals")
        if self.domain is not None and len(self.domain) != self.dim:
            raise DomainError("domain dimension mismatch")

    @property
    def dim(self) -> int:
        return DIMS[self.kind]

    @classmethod
    def from_rationals(cls, kind: str, pairs: Sequence[tuple[int, int]], domain=None) -> "MapSpec":
        params = tuple(oi_from_rational(n, d) for n, d in pairs)
        exact = tuple(Fraction(n, d) for n, d in pairs)
        return cls(kind, params, exact, domain)

    @classmethod
    def henon(cls, a=(14, 10), b=(3, 10)) -> "MapSpec":
        return cls.from_rationals(HENON, [a, b])

    @classmethod
    def logistic(cls, r=(4, 1)) -> "MapSpec":
        # the toy family is x -> clamp(r x (1-x), 0, 1) on [0, 1]; for
        # 0 <= r <= 4 the clamp is the identity
        return cls.from_rationals(LOGISTIC, [r], domain=((0.0, 1.0),))

    @classmethod
    def linear1d(cls, slope=(1, 2), offset=(1, 4), domain=None) -> "MapSpec":
        return cls.from_rationals(LINEAR1D, [slope, offset], domain)


def _formula(m: MapSpec, coords):
    if m.kind == HENON:
        x, y = coords
        a, b = m.params
        sq = x.sqr()
        return [(1.0 + y) - sq * a, x * b]
    if m.kind == LOGISTIC:
        (x,) = coords
        (r,) = m.params
        t = x - 0.5
        return [(0.25 - t.sqr()) * r]
    (x,) = coords
    slope, offset = m.params
    return [x * slope + offset]


def _clip_scalar(iv: OInterval, lo: float, hi: float) -> OInterval:
    a, b = max(iv.lo, down(lo)), min(iv.hi, up(hi))
    return OInterval(a, b) if a < b else iv


def eval_box(m: MapSpec, u: ORect) -> ORect:
    """Open rect containing f(u) for every parameter in the enclosures."""
    if u.dim != m.dim:
        raise DomainError(f"{m.kind} acts on dimension {m.dim}, got {u.dim}")
    out = _formula(m, list(u.axes))
    if m.domain is not None:
        out = [_clip_scalar(iv, lo, hi) for iv, (lo, hi) in zip(out, m.domain)]
    return ORect(tuple(out))


def eval_point(m: MapSpec, x: Sequence[float]) -> ORect:
    """Image enclosure of a single point, via the one-ulp box around it."""
    return eval_box(m, ORect(tuple(OInterval.point(float(v)) for v in x)))


def eval_boxes(m: MapSpec, lo: Sequence[np.ndarray], hi: Sequence[np.ndarray]):
    """Batch version of `eval_box` on per-axis endpoint arrays."""
    if len(lo) != m.dim:
        raise DomainError(f"{m.kind} acts on dimension {m.dim}, got {len(lo)}")
    coords = [IntervalArray(l, h, check=False) for l, h in zip(lo, hi)]
    out = _formula(m, coords)
    if m.domain is not None:
        clipped = []
        for iv, (dlo, dhi) in zip(out, m.domain):
            c = iv.clip(dlo, dhi)
            ok = c.lo < c.hi
            clipped.append(IntervalArray(np.where(ok, c.lo, iv.lo), np.where(ok, c.hi, iv.hi), check=False))
        out = clipped
    return [iv.lo for iv in out], [iv.hi for iv in out]


# ------------------------------------------------- exact 1-D images

# An image set is (lo, hi, lo_closed, hi_closed) with rational ends.
ImageSet = tuple[Fraction, Fraction, bool, bool]


def _clamp_unit(s: ImageSet) -> ImageSet:
    lo, hi, lc, hc = s
    if hi < 0 or (hi == 0 and not hc) or (hi == 0 and lo < 0):
        return (Fraction(0), Fraction(0), True, True)
    if lo > 1 or (lo == 1 and not lc) or (lo == 1 and hi > 1):
        return (Fraction(1), Fraction(1), True, True)
    if lo < 0:
        lo, lc = Fraction(0), True
    if hi > 1:
        hi, hc = Fraction(1), True
    return (lo, hi, lc, hc)


def exact_image_1d(m: MapSpec, lo: Fraction, hi: Fraction) -> ImageSet:
    """Exact image of the open interval (lo, hi) under the nominal map."""
    if m.exact is None:
        raise DomainError("map has no exact parameter values")
    if m.kind == LINEAR1D:
        s, c = m.exact
        if s == 0:
            out = (c, c, True, True)
        elif s > 0:
            out = (s * lo + c, s * hi + c, False, False)
        else:
            out = (s * hi + c, s * lo + c, False, False)
    elif m.kind == LOGISTIC:
        (r,) = m.exact
        g = lambda x: r * x * (1 - x)  # noqa: E731
        half = Fraction(1, 2)
        if r == 0:
            out = (Fraction(0), Fraction(0), True, True)
        elif hi <= half or lo >= half:
            a, b = sorted((g(lo), g(hi)))
            out = (a, b, False, False)
        else:
            top = r / 4
            if r > 0:
                out = (min(g(lo), g(hi)), top, False, True)
            else:
                out = (top, max(g(lo), g(hi)), True, False)
    else:
        raise DomainError(f"no exact images for {m.kind}")
    if m.domain is not None:
        if m.domain != ((0.0, 1.0),):
            raise DomainError("exact clipping supports the unit domain only")
        out = _clamp_unit(out)
    return out


def image_meets(s: ImageSet, wlo: Fraction, whi: Fraction) -> bool:
    """Whether the open interval (wlo, whi) meets the image set ``s``."""
    lo, hi, lc, hc = s
    if max(wlo, lo) < min(whi, hi):
        return True
    return (lc and wlo < lo < whi) or (hc and wlo < hi < whi)
