"""Exact adding-machine dynamics on the unit interval.

A point of [0, 1) is carried as a K-bit binary expansion r_1 r_2 ... r_K,
where bit r_l has weight 2**-l.  Reading the same bits lowest-weight-first
as an unsigned integer ("the counter") turns the interval map into an exact
counter decrement: the map flips the leading run of zeros to ones and the
first one to zero, which is exactly what subtracting 1 does to the counter.
Orbits, images of dyadic intervals, and measures of the arrival bands built
from them can therefore be computed without any rounding.

Conventions used throughout:

* ``counter`` bit ``l`` (0-based) equals expansion bit ``r_(l+1)``.
* The dyadic interval with ``depth`` d and ``index`` j collects the points
  whose first d expansion bits spell j lowest-weight-first, i.e. whose
  counter is congruent to j modulo 2**d.  Its length is 2**-d.
* The forward map sends index j to j - 1 at every depth; its inverse is the
  classical adding machine (counter increment).

The arrival model marks a point if some band matches its leading bits.
Band 0 is "first two bits are 00".  Band i >= 1 is "bit i is the first
one among bits i..2i+1", equivalently the counter is congruent to a value
in [2**(i-1), 2**i) modulo 2**(2i+1).  A point seeds a run of length
2**(i-1): starting from a counter whose low 2i+1 bits are below 2**(i-1),
every one of the next 2**(i-1) counter values lands in some band.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "DEFAULT_PRECISION",
    "MAX_SET_DEPTH",
    "ExceptionalPointError",
    "OrbitRangeError",
    "PrecisionError",
    "DyadicPoint",
    "DyadicInterval",
    "DyadicIntervalSet",
    "bit_reverse",
    "first_one_index",
    "apply_map",
    "apply_inverse",
    "apply_power",
    "interval_index",
    "band_limit",
    "run_seed_set",
    "arrival_band",
    "arrival_set_truncated",
    "arrival_set_measure",
    "in_run_seed",
    "in_arrival_band",
    "in_arrival_set",
    "in_arrival_set_batch",
    "membership_window",
    "window_arrival_counts",
    "uniform_counters",
    "uniform_point",
    "sample_run_seed",
]

DEFAULT_PRECISION = 64

# Interval sets do segment arithmetic in units of 2**-depth; capping the
# depth at 63 keeps every segment endpoint inside uint64.
MAX_SET_DEPTH = 63


class ExceptionalPointError(ValueError):
    """The map (or its inverse) is undefined at an orbit endpoint."""


class OrbitRangeError(ValueError):
    """An orbit step would leave the representable counter window."""


class PrecisionError(ValueError):
    """A query needs more bits than the point or set carries."""


def bit_reverse(x: int, width: int) -> int:
    """Reverse the low `width` bits of a nonnegative integer."""
    if width < 0:
        raise ValueError("width must be nonnegative")
    if x < 0 or x >> width:
        raise ValueError(f"{x} does not fit in {width} bits")
    if width == 0:
        return 0
    return int(format(x, f"0{width}b")[::-1], 2)


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class DyadicPoint:
    """A point of [0, 1) held as an exact K-bit expansion.

    ``counter`` is the expansion read lowest-weight-first; ``precision`` is
    the number of carried bits K.  The numeric value is recovered exactly as
    ``bit_reverse(counter, K) / 2**K``.
    """

    counter: int
    precision: int = DEFAULT_PRECISION

    def __post_init__(self) -> None:
        if not isinstance(self.precision, int) or self.precision < 1:
            raise PrecisionError(f"precision must be a positive integer, got {self.precision!r}")
        if not isinstance(self.counter, int):
            raise TypeError(f"counter must be an int, got {type(self.counter).__name__}")
        if not 0 <= self.counter < (1 << self.precision):
            raise ValueError(
                f"counter {self.counter} out of range for precision {self.precision}"
            )

    @classmethod
    def from_bits(cls, bits: Sequence[int], precision: int | None = None) -> "DyadicPoint":
        """Build a point from expansion bits r_1, r_2, ... (highest weight first)."""
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        k = precision if precision is not None else max(len(bits), 1)
        if len(bits) > k:
            raise PrecisionError(f"{len(bits)} bits exceed precision {k}")
        counter = 0
        for l, b in enumerate(bits):
            counter |= b << l
        return cls(counter, k)

    @classmethod
    def from_fraction(cls, value: Fraction, precision: int = DEFAULT_PRECISION) -> "DyadicPoint":
        value = Fraction(value)
        if not 0 <= value < 1:
            raise ValueError(f"value {value} outside [0, 1)")
        den = value.denominator
        if den & (den - 1) or den > (1 << precision):
            raise PrecisionError(f"{value} is not dyadic at precision {precision}")
        scaled = value.numerator * ((1 << precision) // den)
        return cls(bit_reverse(scaled, precision), precision)

    @classmethod
    def from_float(cls, value: float, precision: int = DEFAULT_PRECISION) -> "DyadicPoint":
        return cls.from_fraction(Fraction(value), precision)

    def bit(self, l: int) -> int:
        """Expansion bit r_l (1-based, weight 2**-l)."""
        if not 1 <= l <= self.precision:
            raise PrecisionError(f"bit index {l} outside 1..{self.precision}")
        return (self.counter >> (l - 1)) & 1

    def bits(self) -> tuple[int, ...]:
        return tuple((self.counter >> l) & 1 for l in range(self.precision))

    @property
    def value(self) -> Fraction:
        return Fraction(bit_reverse(self.counter, self.precision), 1 << self.precision)

    def __float__(self) -> float:
        return float(self.value)

    def to_json(self) -> dict:
        return {"counter": format(self.counter, "x"), "precision": self.precision}

    @classmethod
    def from_json(cls, data: dict) -> "DyadicPoint":
        return cls(int(str(data["counter"]), 16), int(data["precision"]))


def first_one_index(p: DyadicPoint) -> int:
    """Position of the first 1 in the expansion (1-based).

    Errors at the all-zeros point, where no carry ever terminates.
    """
    c = p.counter
    if c == 0:
        raise ExceptionalPointError("exceptional point: expansion is all zeros")
    return (c & -c).bit_length()


def apply_map(p: DyadicPoint) -> DyadicPoint:
    """One forward step: flip the leading zeros to ones and the first one to zero.

    On the counter this is an exact decrement; the all-zeros point has no image.
    """
    if p.counter == 0:
        raise ExceptionalPointError("exceptional point: all-zeros expansion has no forward image")
    return DyadicPoint(p.counter - 1, p.precision)


def apply_inverse(p: DyadicPoint) -> DyadicPoint:
    """One backward step (the adding machine); the all-ones point has no image."""
    top = (1 << p.precision) - 1
    if p.counter == top:
        raise ExceptionalPointError("exceptional point: all-ones expansion has no backward image")
    return DyadicPoint(p.counter + 1, p.precision)


def apply_power(p: DyadicPoint, k: int) -> DyadicPoint:
    """k-th iterate (k may be negative); errors if the orbit leaves the window."""
    c = p.counter - k
    if not 0 <= c < (1 << p.precision):
        raise OrbitRangeError(
            f"orbit leaves representable window: counter {p.counter} step {k} "
            f"at precision {p.precision}"
        )
    return DyadicPoint(c, p.precision)


def interval_index(p: DyadicPoint, depth: int) -> int:
    """Index of the depth-`depth` dyadic interval containing the point.

    The index spells the first `depth` expansion bits lowest-weight-first,
    so it is simply the counter reduced modulo 2**depth.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > p.precision:
        raise PrecisionError(f"depth {depth} exceeds precision {p.precision}")
    return p.counter & ((1 << depth) - 1)


# ---------------------------------------------------------------------------
# dyadic intervals and canonical interval sets


@dataclass(frozen=True)
class DyadicInterval:
    """Half-open dyadic interval of length 2**-depth.

    ``index`` spells the shared leading bits lowest-weight-first; the interval
    therefore collects the points whose counter is congruent to ``index``
    modulo 2**depth.
    """

    depth: int
    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.depth <= MAX_SET_DEPTH:
            raise PrecisionError(f"depth must be in 0..{MAX_SET_DEPTH}, got {self.depth}")
        if not 0 <= self.index < (1 << self.depth):
            raise ValueError(f"index {self.index} out of range at depth {self.depth}")

    @property
    def measure(self) -> Fraction:
        return Fraction(1, 1 << self.depth)

    @property
    def value_start(self) -> Fraction:
        """Left endpoint on the value axis."""
        return Fraction(bit_reverse(self.index, self.depth), 1 << self.depth)

    def contains(self, p: DyadicPoint) -> bool:
        if self.depth > p.precision:
            raise PrecisionError(f"depth {self.depth} exceeds point precision {p.precision}")
        return (p.counter & ((1 << self.depth) - 1)) == self.index


_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_M8 = np.uint64(0x00FF00FF00FF00FF)
_M16 = np.uint64(0x0000FFFF0000FFFF)


def _bit_reverse_u64(x: np.ndarray) -> np.ndarray:
    x = ((x & _M1) << np.uint64(1)) | ((x >> np.uint64(1)) & _M1)
    x = ((x & _M2) << np.uint64(2)) | ((x >> np.uint64(2)) & _M2)
    x = ((x & _M4) << np.uint64(4)) | ((x >> np.uint64(4)) & _M4)
    x = ((x & _M8) << np.uint64(8)) | ((x >> np.uint64(8)) & _M8)
    x = ((x & _M16) << np.uint64(16)) | ((x >> np.uint64(16)) & _M16)
    return (x << np.uint64(32)) | (x >> np.uint64(32))


class DyadicIntervalSet:
    """A finite union of dyadic intervals in canonical form.

    The canonical form is the unique minimal decomposition: components are
    pairwise disjoint and no two siblings (same parent interval) are both
    present, so equal unions compare equal.  Measures are exact rationals.
    """

    __slots__ = ("_depths", "_indices", "_base", "_starts", "_ends", "_measure")

    def __init__(self, intervals: Iterable[DyadicInterval | tuple[int, int]] = ()):
        depths = []
        indices = []
        for item in intervals:
            if isinstance(item, DyadicInterval):
                d, j = item.depth, item.index
            else:
                d, j = item
                DyadicInterval(d, j)  # validate
            depths.append(d)
            indices.append(j)
        self._init_from_arrays(
            np.asarray(depths, dtype=np.int64), np.asarray(indices, dtype=np.uint64)
        )

    @classmethod
    def _from_arrays(cls, depths: np.ndarray, indices: np.ndarray) -> "DyadicIntervalSet":
        self = object.__new__(cls)
        self._init_from_arrays(
            np.asarray(depths, dtype=np.int64), np.asarray(indices, dtype=np.uint64)
        )
        return self

    def _init_from_arrays(self, depths: np.ndarray, indices: np.ndarray) -> None:
        if depths.size == 0:
            self._depths = np.empty(0, np.int64)
            self._indices = np.empty(0, np.uint64)
            self._base = 0
            self._starts = np.empty(0, np.uint64)
            self._ends = np.empty(0, np.uint64)
            self._measure = Fraction(0)
            return
        if depths.min() < 0 or depths.max() > MAX_SET_DEPTH:
            raise PrecisionError(f"depth outside 0..{MAX_SET_DEPTH}")
        base = int(depths.max())
        # place every interval on the value axis in units of 2**-base
        starts = np.zeros(depths.size, np.uint64)
        for d in np.unique(depths):
            sel = depths == d
            rev = _bit_reverse_u64(indices[sel]) >> np.uint64(64 - d) if d else indices[sel] * 0
            starts[sel] = rev << np.uint64(base - d)
        lens = np.uint64(1) << (base - depths).astype(np.uint64)
        order = np.argsort(starts, kind="stable")
        s = starts[order]
        e = s + lens[order]
        # merge overlapping or touching segments
        emax = np.maximum.accumulate(e)
        first = np.empty(s.size, bool)
        first[0] = True
        first[1:] = s[1:] > emax[:-1]
        seg_start = s[first]
        last = np.flatnonzero(np.append(first[1:], True))
        seg_end = emax[last]
        # re-cut each merged segment into maximal aligned blocks
        comp_d: list[int] = []
        comp_j: list[int] = []
        for a, b in zip(seg_start.tolist(), seg_end.tolist()):
            while a < b:
                align = (a & -a).bit_length() - 1 if a else base
                size = (b - a).bit_length() - 1
                exp = min(align, size)
                comp_d.append(base - exp)
                comp_j.append(bit_reverse(a >> exp, base - exp))
                a += 1 << exp
        self._depths = np.asarray(comp_d, np.int64)
        self._indices = np.asarray(comp_j, np.uint64)
        self._base = base
        self._starts = seg_start
        self._ends = seg_end
        total = int(np.sum(seg_end - seg_start, dtype=np.uint64))
        self._measure = Fraction(total, 1 << base)

    @property
    def measure(self) -> Fraction:
        return self._measure

    def __len__(self) -> int:
        return int(self._depths.size)

    @property
    def is_empty(self) -> bool:
        return self._depths.size == 0

    def components(self) -> list[DyadicInterval]:
        """Canonical components sorted by (depth, index)."""
        pairs = sorted(zip(self._depths.tolist(), self._indices.tolist()))
        return [DyadicInterval(int(d), int(j)) for d, j in pairs]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DyadicIntervalSet):
            return NotImplemented
        if self._depths.size != other._depths.size:
            return False
        a = sorted(zip(self._depths.tolist(), self._indices.tolist()))
        b = sorted(zip(other._depths.tolist(), other._indices.tolist()))
        return a == b

    def __hash__(self) -> int:
        return hash(tuple(sorted(zip(self._depths.tolist(), self._indices.tolist()))))

    def __repr__(self) -> str:
        return f"DyadicIntervalSet({len(self)} components, measure={self._measure})"

    def contains_point(self, p: DyadicPoint) -> bool:
        if self.is_empty:
            return False
        v = bit_reverse(p.counter, p.precision)
        if p.precision >= self._base:
            pos = v >> (p.precision - self._base)
        else:
            pos = v << (self._base - p.precision)
        k = int(np.searchsorted(self._starts, np.uint64(pos), side="right")) - 1
        return k >= 0 and pos < int(self._ends[k])

    def __contains__(self, p: DyadicPoint) -> bool:
        return self.contains_point(p)

    def contains_set(self, other: "DyadicIntervalSet") -> bool:
        """Exact containment: every point of `other` lies in this set."""
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        base = max(self._base, other._base)
        ss = self._starts.astype(object) * (1 << (base - self._base))
        se = self._ends.astype(object) * (1 << (base - self._base))
        os_ = other._starts.astype(object) * (1 << (base - other._base))
        oe = other._ends.astype(object) * (1 << (base - other._base))
        # merged segments are maximal, so a covered segment sits inside one of ours
        k = np.searchsorted(ss.astype(np.float64), os_.astype(np.float64)) - 1
        for i in range(os_.size):
            j = int(k[i])
            # float search may be off by one near boundaries; fix up exactly
            while j + 1 < ss.size and ss[j + 1] <= os_[i]:
                j += 1
            while j >= 0 and ss[j] > os_[i]:
                j -= 1
            if j < 0 or oe[i] > se[j]:
                return False
        return True

    def to_json(self) -> list[list[int]]:
        return [[int(d), int(j)] for d, j in sorted(zip(self._depths.tolist(), self._indices.tolist()))]

    @classmethod
    def from_json(cls, data: Iterable[Sequence[int]]) -> "DyadicIntervalSet":
        return cls((int(d), int(j)) for d, j in data)


# ---------------------------------------------------------------------------
# arrival bands


def band_limit(precision: int) -> int:
    """Deepest band index testable at the given precision."""
    if precision < 1:
        raise PrecisionError("precision must be positive")
    return (precision - 1) // 2


def _check_band(i: int, precision: int) -> None:
    if i < 0:
        raise ValueError("band index must be nonnegative")
    if 2 * i + 1 > precision:
        raise PrecisionError(f"band {i} needs depth {2 * i + 1}, precision is {precision}")


def run_seed_set(i: int, precision: int = DEFAULT_PRECISION) -> DyadicIntervalSet:
    """Depth-(2i+1) intervals with indices [0, 2**(i-1)): the seeds of all-ones runs.

    Empty for i = 0.  A counter in this set begins a stretch of 2**(i-1)
    consecutive counters that all land in some arrival band.
    """
    _check_band(i, precision)
    if i == 0:
        return DyadicIntervalSet()
    d = 2 * i + 1
    idx = np.arange(1 << (i - 1), dtype=np.uint64)
    return DyadicIntervalSet._from_arrays(np.full(idx.size, d, np.int64), idx)


def arrival_band(i: int, precision: int = DEFAULT_PRECISION) -> DyadicIntervalSet:
    """Band i of the arrival set.

    Band 0 is the single depth-2 interval of index 0; band i >= 1 collects the
    depth-(2i+1) intervals with indices [2**(i-1), 2**i).  Every band has
    measure 2**-(i+2).
    """
    _check_band(i, precision)
    if i == 0:
        return DyadicIntervalSet([(2, 0)])
    d = 2 * i + 1
    idx = np.arange(1 << (i - 1), 1 << i, dtype=np.uint64)
    return DyadicIntervalSet._from_arrays(np.full(idx.size, d, np.int64), idx)


def arrival_set_truncated(
    i_max: int, precision: int = DEFAULT_PRECISION
) -> tuple[DyadicIntervalSet, Fraction]:
    """Union of bands 0..i_max and the measure dropped by truncation.

    The truncation is one-sided: the returned set is a subset of the full
    union, and the dropped bands account for at most the returned tail bound
    sum(2**-(i+2), i > i_max) = 2**-(i_max+2).
    """
    _check_band(i_max, precision)
    depths = [np.asarray([2], np.int64)]
    indices = [np.asarray([0], np.uint64)]
    for i in range(1, i_max + 1):
        idx = np.arange(1 << (i - 1), 1 << i, dtype=np.uint64)
        depths.append(np.full(idx.size, 2 * i + 1, np.int64))
        indices.append(idx)
    union = DyadicIntervalSet._from_arrays(np.concatenate(depths), np.concatenate(indices))
    return union, Fraction(1, 1 << (i_max + 2))


@functools.lru_cache(maxsize=None)
def arrival_set_measure(i_max: int) -> Fraction:
    """Exact measure of the union of bands 0..i_max.

    Computed by an exact sweep over bit positions: the only live state while
    scanning bits is the deadline by which the pending zero-run must be
    broken, so the sweep is a small Markov chain over Fractions.  Agrees with
    the interval-set union but stays cheap for deep truncations, where the
    union has ~2**i_max components.
    """
    if i_max < 0:
        raise ValueError("i_max must be nonnegative")
    half = Fraction(1, 2)
    member = Fraction(0)
    pending: dict[int, Fraction] = {1: Fraction(1)}  # band 0 watches bits 0..1
    for t in range(max(2 * i_max, 1) + 1):
        nxt: dict[int, Fraction] = {}
        for d, mass in pending.items():
            zero = mass * half
            if t == d:
                member += zero
            else:
                nxt[d] = nxt.get(d, Fraction(0)) + zero
            if t <= i_max - 1:
                d2 = 2 * t + 2
                nxt[d2] = nxt.get(d2, Fraction(0)) + mass * half
        pending = nxt
    return member


def _resolve_band_cap(precision: int, i_max: int | None) -> int:
    cap = band_limit(precision)
    if i_max is None:
        return cap
    if not 0 <= i_max <= cap:
        raise PrecisionError(f"i_max {i_max} outside 0..{cap} at precision {precision}")
    return i_max


def in_run_seed(p: DyadicPoint, i: int) -> bool:
    _check_band(i, p.precision)
    if i == 0:
        return False
    return interval_index(p, 2 * i + 1) < (1 << (i - 1))


def in_arrival_band(p: DyadicPoint, i: int) -> bool:
    _check_band(i, p.precision)
    if i == 0:
        return interval_index(p, 2) == 0
    return (1 << (i - 1)) <= interval_index(p, 2 * i + 1) < (1 << i)


def in_arrival_set(p: DyadicPoint, i_max: int | None = None) -> bool:
    """True when some band 0..i_max matches the point's leading bits."""
    cap = _resolve_band_cap(p.precision, i_max)
    c = p.counter
    if c & 3 == 0:
        return True
    for i in range(1, cap + 1):
        if (c >> (i - 1)) & ((1 << (i + 2)) - 1) == 1:
            return True
    return False


def in_arrival_set_batch(
    counters: np.ndarray, precision: int = DEFAULT_PRECISION, i_max: int | None = None
) -> np.ndarray:
    """Vectorized arrival-set membership for an array of counters (K <= 64)."""
    if precision > 64:
        raise PrecisionError("batch membership supports precision <= 64")
    cap = _resolve_band_cap(precision, i_max)
    c = np.asarray(counters, dtype=np.uint64)
    member = (c & np.uint64(3)) == 0
    for i in range(1, cap + 1):
        mask = np.uint64((1 << (i + 2)) - 1)
        member |= ((c >> np.uint64(i - 1)) & mask) == np.uint64(1)
    return member


def membership_window(p: DyadicPoint, width: int, i_max: int | None = None) -> np.ndarray:
    """Arrival indicators at counters c, c+1, ..., c+width-1 (backward orbit)."""
    if width < 0:
        raise ValueError("width must be nonnegative")
    if width == 0:
        return np.empty(0, bool)
    if p.counter + width > (1 << p.precision):
        raise OrbitRangeError(
            f"window of width {width} from counter {p.counter} leaves precision {p.precision}"
        )
    if p.precision <= 64:
        counters = np.uint64(p.counter) + np.arange(width, dtype=np.uint64)
        return in_arrival_set_batch(counters, p.precision, i_max)
    cap = _resolve_band_cap(p.precision, i_max)
    return np.asarray(
        [in_arrival_set(DyadicPoint(p.counter + j, p.precision), cap) for j in range(width)],
        dtype=bool,
    )


@functools.lru_cache(maxsize=32)
def _window_bands(width: int, cap: int) -> tuple:
    """Per-band geometry for windowed counting over `width` consecutive counters.

    Band residues modulo their period form one contiguous run, so membership
    over a window is a union of shifted runs.  Bands whose period fits in the
    window get a precomputed tile (runs at every multiple of the period);
    wider bands contribute at most one run plus its wrap-around spill.
    """
    tiled = []
    sparse = []
    bands = [(4, 0, 1)]  # period, run start, run length
    bands += [(1 << (2 * i + 1), 1 << (i - 1), 1 << (i - 1)) for i in range(1, cap + 1)]
    for period, lo, length in bands:
        if period <= width:
            # replicate the run across the tile by doubling, not one period
            # at a time: the straightforward loop is quadratic in width
            total = width + period
            tile = (1 << length) - 1
            span = period
            while span < total:
                tile |= tile << span
                span <<= 1
            tile &= (1 << total) - 1
            tiled.append((period, lo, tile))
        else:
            sparse.append((period, lo, length))
    return (1 << width) - 1, tuple(tiled), tuple(sparse)


def window_arrival_counts(
    counters: Iterable[int],
    width: int,
    precision: int = DEFAULT_PRECISION,
    i_max: int | None = None,
) -> np.ndarray:
    """Number of arrivals among counters c..c+width-1, for each starting counter.

    Exact and far cheaper than testing each of the `width` counters when the
    window is long; used by the Monte Carlo experiments.  Agrees with
    ``membership_window(...).sum()`` pointwise.
    """
    if width < 1:
        raise ValueError("width must be positive")
    cap = _resolve_band_cap(precision, i_max)
    wmask, tiled, sparse = _window_bands(width, cap)
    top = 1 << precision
    if isinstance(counters, np.ndarray):
        counters = counters.tolist()
    out = []
    for c in counters:
        c = int(c)
        if not 0 <= c <= top - width:
            raise OrbitRangeError(
                f"window of width {width} from counter {c} leaves precision {precision}"
            )
        mask = 0
        for period, lo, tile in tiled:
            phase = (lo - c) & (period - 1)
            mask |= tile >> (period - phase)
        for period, lo, length in sparse:
            phase = (lo - c) & (period - 1)
            if phase < width:
                mask |= ((1 << length) - 1) << phase
            spill = phase + length - period
            if spill > 0:
                mask |= (1 << spill) - 1
        out.append((mask & wmask).bit_count())
    return np.asarray(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# sampling


def uniform_counters(
    rng: np.random.Generator, size: int, precision: int = DEFAULT_PRECISION, width: int = 1
) -> np.ndarray:
    """Counters uniform over the values whose width-`width` window stays representable.

    Rejection keeps the draw exactly uniform on [0, 2**K - width]; the
    clipped sliver has probability width * 2**-K.
    """
    if precision > 64:
        raise PrecisionError("vector sampling supports precision <= 64")
    if not 1 <= width <= (1 << precision):
        raise ValueError("width out of range")
    limit = (1 << precision) - width  # largest admissible counter
    out = np.empty(size, np.uint64)
    need = np.arange(size)
    while need.size:
        draw = np.zeros(need.size, np.uint64)
        for shift in range(0, precision, 32):
            block = rng.integers(0, 1 << 32, size=need.size, dtype=np.uint64)
            draw |= block << np.uint64(shift)
        if precision < 64:
            draw &= np.uint64((1 << precision) - 1)
        out[need] = draw
        need = need[draw > np.uint64(limit)] if limit < (1 << precision) - 1 else need[:0]
    return out


def _uniform_int(rng: np.random.Generator, bits: int) -> int:
    """Uniform integer in [0, 2**bits), any bit count."""
    value = 0
    for shift in range(0, bits, 32):
        value |= int(rng.integers(0, 1 << 32)) << shift
    return value & ((1 << bits) - 1)


def uniform_point(rng: np.random.Generator, precision: int = DEFAULT_PRECISION) -> DyadicPoint:
    """Uniform point whose forward and backward orbits both exist (endpoints resampled)."""
    top = (1 << precision) - 1
    while True:
        c = _uniform_int(rng, precision)
        if 0 < c < top:
            return DyadicPoint(c, precision)


def sample_run_seed(
    i: int, rng: np.random.Generator, precision: int = DEFAULT_PRECISION
) -> DyadicPoint:
    """Uniform draw from the run-seed set of band i (i >= 1)."""
    _check_band(i, precision)
    if i < 1:
        raise ValueError("run seeds exist for band indices i >= 1 only")
    low = int(rng.integers(0, 1 << (i - 1)))
    high = _uniform_int(rng, precision - (2 * i + 1))
    return DyadicPoint((high << (2 * i + 1)) | low, precision)
