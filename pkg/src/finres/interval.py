"""Open-interval arithmetic on binary64 endpoints.

Every result is computed in round-to-nearest and then each endpoint is
moved one ulp outward, so the returned open interval contains every exact
result.  Plain Python floats passed as operands are treated as exact points.

`OInterval` / `ORect` are the scalar types.  `IntervalArray` carries the
same operations over numpy arrays of endpoints and produces bit-identical
endpoints; the map evaluators are written once against either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ArithmeticOverflow, DomainError

EUCLIDEAN = "euclidean"
MAX = "max"
METRICS = (EUCLIDEAN, MAX)

# largest representable negative number; lower end of squares of intervals
# containing zero
NEG_TINY = -math.ulp(0.0)

_SPLITTER = 134217729.0  # 2**27 + 1
_SQ_MAX = 2.0**500
_SQ_MIN = 2.0**-450


def down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def up(x: float) -> float:
    return math.nextafter(x, math.inf)


def _square_is_exact(a):
    """True where ``a*a`` is exactly representable (Veltkamp/Dekker)."""
    p = a * a
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    err = ((ah * ah - p) + 2.0 * ah * al) + al * al
    mag = abs(a)
    return (err == 0) & (mag < _SQ_MAX) & ((mag > _SQ_MIN) | (a == 0))


@dataclass(frozen=True, slots=True)
class OInterval:
    """The open interval (lo, hi) with binary64 endpoints, lo < hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError(f"non-finite endpoint in ({self.lo!r}, {self.hi!r})")
        if not self.lo < self.hi:
            raise DomainError(f"empty open interval ({self.lo!r}, {self.hi!r})")

    @classmethod
    def point(cls, x: float) -> "OInterval":
        """Smallest open interval around a representable x."""
        return _finish(down(x), up(x))

    @classmethod
    def from_hex(cls, lo: str, hi: str) -> "OInterval":
        return cls(float.fromhex(lo), float.fromhex(hi))

    def hex(self) -> tuple[str, str]:
        return self.lo.hex(), self.hi.hex()

    def contains(self, x) -> bool:
        """Strict membership; ``x`` may be a float or a Fraction."""
        if isinstance(x, Fraction):
            return Fraction(self.lo) < x < Fraction(self.hi)
        return self.lo < x < self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    @property
    def width(self) -> float:
        """Upper bound on hi - lo."""
        return up(self.hi - self.lo)

    def __add__(self, other):
        return oi_add(self, other)

    def __radd__(self, other):
        return oi_add(other, self)

    def __sub__(self, other):
        return oi_sub(self, other)

    def __rsub__(self, other):
        return oi_sub(other, self)

    def __mul__(self, other):
        return oi_mul(self, other)

    def __rmul__(self, other):
        return oi_mul(other, self)

    def __truediv__(self, other):
        return oi_div(self, other)

    def __rtruediv__(self, other):
        return oi_div(other, self)

    def sqr(self) -> "OInterval":
        return oi_sqr(self)


def _ends(x) -> tuple[float, float]:
    if isinstance(x, OInterval):
        return x.lo, x.hi
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"non-finite operand {x!r}")
        return x, x
    raise TypeError(f"unsupported operand {x!r}")


def _finish(lo: float, hi: float) -> OInterval:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ArithmeticOverflow(f"endpoint overflow: ({lo!r}, {hi!r})")
    return OInterval(lo, hi)


def oi_add(a, b) -> OInterval:
    alo, ahi = _ends(a)
    blo, bhi = _ends(b)
    return _finish(down(alo + blo), up(ahi + bhi))


def oi_sub(a, b) -> OInterval:
    alo, ahi = _ends(a)
    blo, bhi = _ends(b)
    return _finish(down(alo - bhi), up(ahi - blo))


def oi_mul(a, b) -> OInterval:
    alo, ahi = _ends(a)
    blo, bhi = _ends(b)
    ps = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
    return _finish(down(min(ps)), up(max(ps)))


def oi_div(a, b) -> OInterval:
    alo, ahi = _ends(a)
    blo, bhi = _ends(b)
    if blo <= 0.0 <= bhi:
        raise DomainError("divisor closure contains zero")
    qs = (alo / blo, alo / bhi, ahi / blo, ahi / bhi)
    return _finish(down(min(qs)), up(max(qs)))


def _sq_up(x: float) -> float:
    s = x * x
    return s if _square_is_exact(x) else up(s)


def _sq_down(x: float) -> float:
    s = x * x
    return s if _square_is_exact(x) else down(s)


def oi_sqr(a: OInterval) -> OInterval:
    """Square of an open interval.

    Exact squares of endpoints are kept as they are; inexact ones are moved
    one ulp outward.  If 0 lies in the closure of ``a`` the lower end is
    ``NEG_TINY``.
    """
    lo, hi = a.lo, a.hi
    if lo > 0.0:
        return _finish(_sq_down(lo), _sq_up(hi))
    if hi < 0.0:
        return _finish(_sq_down(hi), _sq_up(lo))
    return _finish(NEG_TINY, max(_sq_up(lo), _sq_up(hi)))


def oi_from_rational(num: int, den: int) -> OInterval:
    """Tight open enclosure of num/den.

    A representable quotient q gives (q-ulp, q+ulp); otherwise the two
    neighbouring binary64 numbers are returned.
    """
    if den == 0:
        raise DomainError("zero denominator")
    q = Fraction(num, den)
    f = float(q)
    if not math.isfinite(f):
        raise ArithmeticOverflow(f"{num}/{den} is not representable")
    exact = Fraction(f)
    if exact == q:
        return _finish(down(f), up(f))
    if exact < q:
        return _finish(f, up(f))
    return _finish(down(f), f)


# ---------------------------------------------------------------- rectangles


@dataclass(frozen=True, slots=True)
class ORect:
    """Product of open intervals."""

    axes: tuple[OInterval, ...]

    def __post_init__(self):
        if len(self.axes) < 1:
            raise DomainError("rect needs at least one axis")
        object.__setattr__(self, "axes", tuple(self.axes))

    @classmethod
    def from_bounds(cls, bounds: Sequence[tuple[float, float]]) -> "ORect":
        return cls(tuple(OInterval(lo, hi) for lo, hi in bounds))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def lo(self) -> tuple[float, ...]:
        return tuple(ax.lo for ax in self.axes)

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(ax.hi for ax in self.axes)

    def contains_point(self, x: Sequence) -> bool:
        if len(x) != self.dim:
            raise DomainError("dimension mismatch")
        return all(ax.contains(v) for ax, v in zip(self.axes, x))


def _same_dim(a: ORect, b: ORect):
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")


def rect_intersects(a: ORect, b: ORect) -> bool:
    _same_dim(a, b)
    return all(x.lo < y.hi and y.lo < x.hi for x, y in zip(a.axes, b.axes))


def rect_contains(a: ORect, b: ORect) -> bool:
    """Whether open rect ``a`` contains open rect ``b``."""
    _same_dim(a, b)
    return all(x.lo <= y.lo and y.hi <= x.hi for x, y in zip(a.axes, b.axes))


def rect_hull(a: ORect, b: ORect) -> ORect:
    _same_dim(a, b)
    return ORect(
        tuple(OInterval(min(x.lo, y.lo), max(x.hi, y.hi)) for x, y in zip(a.axes, b.axes))
    )


def diam_from_widths(widths: Sequence[float], metric: str = EUCLIDEAN) -> float:
    """Upward-rounded diameter of a box with the given (upper-bound) widths."""
    if metric == MAX:
        return max(widths)
    if metric != EUCLIDEAN:
        raise DomainError(f"unknown metric {metric!r}")
    total = 0.0
    for wd in widths:
        total = up(total + up(wd * wd))
    return up(math.sqrt(total))


def rect_diam(r: ORect, metric: str = EUCLIDEAN) -> float:
    """Certified upper bound on the diameter of the closure of ``r``."""
    return diam_from_widths([ax.width for ax in r.axes], metric)


# ------------------------------------------------------------ array version


def _down_arr(x):
    return np.nextafter(x, -np.inf)


def _up_arr(x):
    return np.nextafter(x, np.inf)


class IntervalArray:
    """Vector of open intervals, endpoint arrays ``lo`` and ``hi``.

    Operands may be other IntervalArrays (elementwise), OIntervals
    (broadcast), or floats (exact points).
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi, check: bool = True):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        if check:
            if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
                raise ArithmeticOverflow("non-finite endpoint in interval array")
            if not np.all(self.lo < self.hi):
                raise DomainError("empty open interval in interval array")

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, i) -> OInterval:
        return OInterval(float(self.lo[i]), float(self.hi[i]))

    @staticmethod
    def _ends(x):
        if isinstance(x, IntervalArray):
            return x.lo, x.hi
        return _ends(x)

    def __add__(self, other):
        return _arr_add(self, other)

    def __radd__(self, other):
        return _arr_add(other, self)

    def __sub__(self, other):
        return _arr_sub(self, other)

    def __rsub__(self, other):
        return _arr_sub(other, self)

    def __mul__(self, other):
        return _arr_mul(self, other)

    def __rmul__(self, other):
        return _arr_mul(other, self)

    def __truediv__(self, other):
        return _arr_div(self, other)

    def sqr(self) -> "IntervalArray":
        lo, hi = self.lo, self.hi
        with np.errstate(over="ignore", invalid="ignore"):
            lo2, hi2 = lo * lo, hi * hi
            lo_ex, hi_ex = _square_is_exact(lo), _square_is_exact(hi)
        lo_d = np.where(lo_ex, lo2, _down_arr(lo2))
        hi_d = np.where(hi_ex, hi2, _down_arr(hi2))
        lo_u = np.where(lo_ex, lo2, _up_arr(lo2))
        hi_u = np.where(hi_ex, hi2, _up_arr(hi2))
        pos = lo > 0.0
        neg = hi < 0.0
        new_lo = np.where(pos, lo_d, np.where(neg, hi_d, NEG_TINY))
        new_hi = np.where(pos, hi_u, np.where(neg, lo_u, np.maximum(lo_u, hi_u)))
        return _arr_finish(new_lo, new_hi)

    def clip(self, lo: float, hi: float) -> "IntervalArray":
        """Intersect with the closed interval [lo, hi], kept open outward."""
        return IntervalArray(
            np.maximum(self.lo, down(lo)), np.minimum(self.hi, up(hi)), check=False
        )


def _arr_finish(lo, hi) -> IntervalArray:
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ArithmeticOverflow("endpoint overflow in interval array")
    return IntervalArray(lo, hi, check=False)


def _arr_add(a, b):
    alo, ahi = IntervalArray._ends(a)
    blo, bhi = IntervalArray._ends(b)
    return _arr_finish(_down_arr(alo + blo), _up_arr(ahi + bhi))


def _arr_sub(a, b):
    alo, ahi = IntervalArray._ends(a)
    blo, bhi = IntervalArray._ends(b)
    return _arr_finish(_down_arr(alo - bhi), _up_arr(ahi - blo))


def _arr_mul(a, b):
    alo, ahi = IntervalArray._ends(a)
    blo, bhi = IntervalArray._ends(b)
    p1, p2, p3, p4 = alo * blo, alo * bhi, ahi * blo, ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return _arr_finish(_down_arr(lo), _up_arr(hi))


def _arr_div(a, b):
    alo, ahi = IntervalArray._ends(a)
    blo, bhi = IntervalArray._ends(b)
    if np.any((np.asarray(blo) <= 0.0) & (np.asarray(bhi) >= 0.0)):
        raise DomainError("divisor closure contains zero")
    q1, q2, q3, q4 = alo / blo, alo / bhi, ahi / blo, ahi / bhi
    lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
    hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
    return _arr_finish(_down_arr(lo), _up_arr(hi))


def widths_up(lo, hi):
    """Elementwise upper bound on hi - lo."""
    return _up_arr(np.asarray(hi) - np.asarray(lo))


def diam_arrays(widths: Sequence[np.ndarray], metric: str = EUCLIDEAN) -> np.ndarray:
    """Vector form of `diam_from_widths`; identical rounding."""
    if metric == MAX:
        out = widths[0]
        for wd in widths[1:]:
            out = np.maximum(out, wd)
        return np.asarray(out, dtype=np.float64)
    if metric != EUCLIDEAN:
        raise DomainError(f"unknown metric {metric!r}")
    total = np.zeros_like(np.asarray(widths[0], dtype=np.float64))
    for wd in widths:
        total = _up_arr(total + _up_arr(wd * wd))
    return _up_arr(np.sqrt(total))
