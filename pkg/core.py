"""
Exact arithmetic and symbolic integer sets for ratio block sequence analysis
Every set is described symbolically and answers counting queries in closed form,
so factorial-scale sets can be analysed without enumerating their elements
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar, Dict, Iterator, List, Optional, Tuple

from config import ANALYSIS_CONFIG

# Set elements are plain Python ints (unbounded), ratios are exact Fractions
Natural = int
Rational = Fraction


class RatioBlockError(Exception):
    """Base class for every error raised by the toolkit."""


class BudgetExceeded(RatioBlockError):
    """An enumeration would produce more elements than the element budget allows."""

    def __init__(self, requested: int, budget: int):
        super().__init__(f"enumeration of {requested} elements exceeds the budget of {budget}")
        self.requested = requested
        self.budget = budget


class SetExhausted(RatioBlockError):
    """A finite set has fewer elements than requested."""


class InfeasibleParameters(RatioBlockError, ValueError):
    """Construction parameters violate their admissible range or invariants."""


class StructureError(RatioBlockError):
    """Structural runs of a union interleave, so run-based statistics are unavailable."""


# ---------------------------------------------------------------------------
# Exact number helpers
# ---------------------------------------------------------------------------

def as_rational(value) -> Fraction:
    """
    Convert ints, Fractions and strings such as "7/10" or "0.25" to an exact Fraction.
    Floats go through their shortest repr, so 0.7 becomes 7/10.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational")


def as_natural(value) -> int:
    if isinstance(value, str):
        value = int(value.strip())
    value = as_rational(value)
    if value.denominator != 1 or value < 0:
        raise ValueError(f"{value} is not a natural number")
    return int(value)


def encode_rational(value) -> str:
    """Decimal string for integers, "p/q" for proper fractions."""
    value = as_rational(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_json(value) -> Dict:
    """Exact and approximate forms of a number, as emitted in every JSON output."""
    if isinstance(value, float):
        return {'exact': None, 'decimal': value}
    value = as_rational(value)
    return {'exact': encode_rational(value), 'decimal': value.numerator / value.denominator}


def log_of(value) -> float:
    """Natural log of a positive int or Fraction of any size."""
    value = as_rational(value)
    return math.log(value.numerator) - math.log(value.denominator)


def iroot_floor(n: int, k: int) -> int:
    """
    Floor of the k-th root of n using integer Newton iteration.

    Args:
        n: Non-negative integer
        k: Root degree (>= 1)

    Returns:
        Largest r with r**k <= n
    """
    if k < 1 or n < 0:
        raise ValueError(f"iroot_floor needs n >= 0 and k >= 1, got n={n}, k={k}")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # 2**ceil(bits/k) is above the root, so Newton decreases monotonically
    r = 1 << -(-n.bit_length() // k)
    while True:
        s = ((k - 1) * r + n // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def iroot_ceil(n: int, k: int) -> int:
    """Smallest r with r**k >= n."""
    r = iroot_floor(n, k)
    return r if r ** k == n else r + 1


def floor_power(x, q) -> int:
    """floor(x ** q) for rational x >= 0 and rational q > 0, computed exactly."""
    x, q = as_rational(x), as_rational(q)
    if x <= 0:
        return 0
    a, b = q.numerator, q.denominator
    return iroot_floor(x.numerator ** a // x.denominator ** a, b)


def ceil_power(x, q) -> int:
    """ceil(x ** q) for rational x >= 0 and rational q > 0, computed exactly."""
    x, q = as_rational(x), as_rational(q)
    if x <= 0:
        return 0
    a, b = q.numerator, q.denominator
    num, den = x.numerator ** a, x.denominator ** a
    return iroot_ceil(-(-num // den), b)


# ---------------------------------------------------------------------------
# Set descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Run:
    """A maximal structural piece of a set: first and last element and its largest inner gap."""
    first: int
    last: int
    gap: int


class SetDescriptor(ABC):
    """Symbolic description of a set of positive integers."""

    family: ClassVar[str] = ''

    @abstractmethod
    def count(self, x: int) -> int:
        """Number of elements <= x (x is an int)."""

    @abstractmethod
    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        """Elements in (lo, hi], strictly increasing. No budget check."""

    @abstractmethod
    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        """Structural runs of the elements in (lo, hi], in increasing order."""

    @abstractmethod
    def params(self) -> Dict:
        """JSON-ready parameters (all numbers as decimal or "p/q" strings)."""

    def upper_bound(self) -> Optional[int]:
        """Largest element of a finite set (0 when empty), None for infinite sets."""
        return None

    def to_json(self) -> Dict:
        return {'family': self.family, 'params': self.params()}

    def contains(self, a: int) -> bool:
        return a >= 1 and self.count(a) - self.count(a - 1) == 1

    def element(self, i: int) -> int:
        """The i-th smallest element (1-based), found by bisection on count."""
        if i < 1:
            raise ValueError(f"element index must be >= 1, got {i}")
        bound = self.upper_bound()
        if bound is not None and self.count(bound) < i:
            raise SetExhausted(f"{self.family} set has only {self.count(bound)} elements, asked for {i}")
        return self._bisect_count(i)

    def _bisect_count(self, i: int) -> int:
        # smallest x with count(x) >= i; caller guarantees it exists
        hi = 1
        while self.count(hi) < i:
            hi *= 2
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.count(mid) >= i:
                hi = mid
            else:
                lo = mid
        return hi

    def predecessor(self, t) -> Optional[int]:
        """Largest element <= t, or None."""
        c = self.count(math.floor(t)) if t >= 1 else 0
        return self.element(c) if c else None

    def successor(self, t) -> Optional[int]:
        """Smallest element > t, or None when the set ends before t."""
        c = self.count(math.floor(t)) if t >= 1 else 0
        try:
            return self.element(c + 1)
        except SetExhausted:
            return None


@dataclass(frozen=True)
class Explicit(SetDescriptor):
    """A finite set listed element by element."""
    elements: Tuple[int, ...]

    family: ClassVar[str] = 'explicit'

    def __post_init__(self):
        values = sorted({as_natural(v) for v in self.elements})
        if values and values[0] < 1:
            raise InfeasibleParameters("set elements must be positive integers")
        object.__setattr__(self, 'elements', tuple(values))

    def count(self, x: int) -> int:
        return bisect.bisect_right(self.elements, x)

    def _slice(self, lo: int, hi: int) -> Tuple[int, ...]:
        return self.elements[bisect.bisect_right(self.elements, lo):bisect.bisect_right(self.elements, hi)]

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        return iter(self._slice(lo, hi))

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        return (Run(e, e, 0) for e in self._slice(lo, hi))

    def upper_bound(self) -> Optional[int]:
        return self.elements[-1] if self.elements else 0

    def params(self) -> Dict:
        return {'elements': [str(e) for e in self.elements]}

    @classmethod
    def from_params(cls, params: Dict) -> 'Explicit':
        return cls(tuple(as_natural(e) for e in params['elements']))


@dataclass(frozen=True)
class FinitePoints(Explicit):
    """Finitely many isolated points inside a larger construction."""

    family: ClassVar[str] = 'finite_points'


@dataclass(frozen=True)
class FactorialPoints(SetDescriptor):
    """{n! : n >= 1}; 1 = 0! = 1! is listed once."""

    family: ClassVar[str] = 'factorial_points'

    def count(self, x: int) -> int:
        n, f = 0, 1
        while f * (n + 1) <= x:
            n += 1
            f *= n
        return n

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        f = 1
        for n in itertools.count(1):
            f *= n
            if f > hi:
                return
            if f > lo:
                yield f

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        return (Run(e, e, 0) for e in self.iter_range(lo, hi))

    def params(self) -> Dict:
        return {}

    @classmethod
    def from_params(cls, params: Dict) -> 'FactorialPoints':
        return cls()


@dataclass(frozen=True)
class PowerRoot(SetDescriptor):
    """{ceil(j ** (1/q)) : j in N} restricted to the value window (low, high]."""
    q: Fraction
    low: Fraction = Fraction(0)
    high: Optional[Fraction] = None

    family: ClassVar[str] = 'power_root'

    def __post_init__(self):
        q = as_rational(self.q)
        if not 0 < q <= 1:
            raise InfeasibleParameters(f"exponent q={q} outside (0, 1]")
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'low', as_rational(self.low))
        if self.high is not None:
            object.__setattr__(self, 'high', as_rational(self.high))

    @classmethod
    def from_j_range(cls, q, j_lo: int, j_hi: Optional[int] = None) -> 'PowerRoot':
        """Elements ceil(j ** (1/q)) for j_lo <= j <= j_hi. Ceilings are strictly increasing for q <= 1."""
        q = as_rational(q)
        low = ceil_power(j_lo - 1, 1 / q) if j_lo > 1 else 0
        high = None if j_hi is None else ceil_power(j_hi, 1 / q)
        return cls(q, low, high)

    def _bounds(self, lo: int, hi: int) -> Tuple[int, int]:
        lo = max(lo, math.floor(self.low))
        if self.high is not None:
            hi = min(hi, math.floor(self.high))
        return lo, hi

    def _index(self, y: int) -> int:
        # j <= y**q  <=>  ceil(j ** (1/q)) <= y
        return floor_power(y, self.q) if y > 0 else 0

    def _value(self, j: int) -> int:
        return ceil_power(j, 1 / self.q)

    def count(self, x: int) -> int:
        lo, hi = self._bounds(0, x)
        if hi <= lo:
            return 0
        return self._index(hi) - self._index(lo)

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        lo, hi = self._bounds(lo, hi)
        if hi <= lo:
            return iter(())
        if self.q == 1:
            return iter(range(lo + 1, hi + 1))
        return (self._value(j) for j in range(self._index(lo) + 1, self._index(hi) + 1))

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        lo, hi = self._bounds(lo, hi)
        if hi <= lo:
            return
        j0, j1 = self._index(lo) + 1, self._index(hi)
        if j1 < j0:
            return
        top = [self._value(j) for j in range(max(j0, j1 - ANALYSIS_CONFIG['trailing_gaps']), j1 + 1)]
        gap = max((b - a for a, b in zip(top, top[1:])), default=0)
        yield Run(self._value(j0), top[-1], gap)

    def upper_bound(self) -> Optional[int]:
        if self.high is None:
            return None
        lo, hi = self._bounds(0, math.floor(self.high))
        return self._value(self._index(hi)) if hi > lo and self.count(hi) else 0

    def params(self) -> Dict:
        return {'q': encode_rational(self.q), 'low': encode_rational(self.low),
                'high': None if self.high is None else encode_rational(self.high)}

    @classmethod
    def from_params(cls, params: Dict) -> 'PowerRoot':
        high = params.get('high')
        return cls(as_rational(params['q']), as_rational(params.get('low', 0)),
                   None if high is None else as_rational(high))


@dataclass(frozen=True)
class FactorialBlocks:
    """Blocks ((2k+shift)!, (2k+1+shift)!] for k >= 1; closed=True includes the left endpoint."""
    shift: int = 0
    closed: bool = False

    def blocks(self) -> Iterator[Tuple[int, int]]:
        for k in itertools.count(1):
            left = math.factorial(2 * k + self.shift)
            right = math.factorial(2 * k + 1 + self.shift)
            yield (left - 1 if self.closed else left), right

    def is_finite(self) -> bool:
        return False

    def to_json(self) -> Dict:
        return {'rule': 'factorial', 'shift': self.shift, 'closed': self.closed}


@dataclass(frozen=True)
class IntervalList:
    """Explicit blocks (l, r], merged into sorted disjoint form."""
    intervals: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        merged: List[List[int]] = []
        for left, right in sorted((int(l), int(r)) for l, r in self.intervals):
            if right <= left:
                continue
            if merged and left <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], right)
            else:
                merged.append([left, right])
        object.__setattr__(self, 'intervals', tuple((l, r) for l, r in merged))

    def blocks(self) -> Iterator[Tuple[int, int]]:
        return iter(self.intervals)

    def is_finite(self) -> bool:
        return True

    def to_json(self) -> Dict:
        return {'rule': 'intervals', 'intervals': [[str(l), str(r)] for l, r in self.intervals]}


@dataclass(frozen=True)
class GapList:
    """The complement of finitely many blocks (l, r]: (0, l_1], (r_1, l_2], ..., (r_n, inf)."""
    intervals: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, 'intervals', IntervalList(self.intervals).intervals)

    def blocks(self) -> Iterator[Tuple[int, int]]:
        left = 0
        for l, r in self.intervals:
            if l > left:
                yield left, l
            left = r
        yield left, math.inf

    def is_finite(self) -> bool:
        return False

    def to_json(self) -> Dict:
        return {'rule': 'gaps', 'intervals': [[str(l), str(r)] for l, r in self.intervals]}


def block_rule_from_json(obj: Dict):
    if obj['rule'] == 'factorial':
        return FactorialBlocks(int(obj.get('shift', 0)), bool(obj.get('closed', False)))
    if obj['rule'] == 'intervals':
        return IntervalList(tuple((as_natural(l), as_natural(r)) for l, r in obj['intervals']))
    if obj['rule'] == 'gaps':
        return GapList(tuple((as_natural(l), as_natural(r)) for l, r in obj['intervals']))
    raise ValueError(f"unknown block rule {obj['rule']!r}")


def _blocks_below(rule, x: int) -> Iterator[Tuple[int, int]]:
    for left, right in rule.blocks():
        if left >= x:
            break
        yield left, right


@dataclass(frozen=True)
class IntervalBlocks(SetDescriptor):
    """All integers of every block (l_k, r_k] of a block rule."""
    rule: object

    family: ClassVar[str] = 'interval_blocks'

    def count(self, x: int) -> int:
        return sum(min(right, x) - left for left, right in _blocks_below(self.rule, x))

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        for left, right in _blocks_below(self.rule, hi):
            yield from range(max(left, lo) + 1, min(right, hi) + 1)

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        for left, right in _blocks_below(self.rule, hi):
            a, b = max(left, lo), min(right, hi)
            if b > a:
                yield Run(a + 1, b, 1 if b > a + 1 else 0)

    def upper_bound(self) -> Optional[int]:
        if not self.rule.is_finite():
            return None
        return self.rule.intervals[-1][1] if self.rule.intervals else 0

    def params(self) -> Dict:
        return {'rule': self.rule.to_json()}

    @classmethod
    def from_params(cls, params: Dict) -> 'IntervalBlocks':
        return cls(block_rule_from_json(params['rule']))


@dataclass(frozen=True)
class ProgressionBlocks(SetDescriptor):
    """Multiples of step inside every block (l_k, r_k] of a block rule."""
    step: int
    rule: object

    family: ClassVar[str] = 'progression_blocks'

    def __post_init__(self):
        if self.step < 1:
            raise InfeasibleParameters(f"progression step must be >= 1, got {self.step}")

    def count(self, x: int) -> int:
        s = self.step
        return sum(min(right, x) // s - left // s for left, right in _blocks_below(self.rule, x))

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        s = self.step
        for left, right in _blocks_below(self.rule, hi):
            a = max(left, lo)
            yield from range((a // s + 1) * s, min(right, hi) + 1, s)

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        s = self.step
        for left, right in _blocks_below(self.rule, hi):
            first = (max(left, lo) // s + 1) * s
            last = min(right, hi) // s * s
            if last >= first:
                yield Run(first, last, s if last > first else 0)

    def upper_bound(self) -> Optional[int]:
        if not self.rule.is_finite():
            return None
        for left, right in reversed(self.rule.intervals):
            top = right // self.step * self.step
            if top > left:
                return top
        return 0

    def params(self) -> Dict:
        return {'step': str(self.step), 'rule': self.rule.to_json()}

    @classmethod
    def from_params(cls, params: Dict) -> 'ProgressionBlocks':
        return cls(as_natural(params['step']), block_rule_from_json(params['rule']))


@dataclass(frozen=True)
class PowerBlocks(SetDescriptor):
    """
    Blocks {j**n : n**(n-1) <= j <= (n+1)**(n+1)} for n = 1, 2, ...
    The largest element of block n equals the smallest of block n+1, so that
    shared endpoint is listed once (with block n).
    """
    n_max: Optional[int] = None

    family: ClassVar[str] = 'power_blocks'

    @staticmethod
    def block_range(n: int) -> Tuple[int, int]:
        """Full j-range [n**(n-1), (n+1)**(n+1)] of block n."""
        return n ** (n - 1), (n + 1) ** (n + 1)

    def _blocks(self, x: int) -> Iterator[Tuple[int, int, int]]:
        for n in itertools.count(1):
            if self.n_max is not None and n > self.n_max:
                break
            j_lo, j_hi = self.block_range(n)
            if n > 1:
                j_lo += 1
            if j_lo ** n > x:
                break
            yield n, j_lo, j_hi

    def count(self, x: int) -> int:
        return sum(min(j_hi, iroot_floor(x, n)) - j_lo + 1 for n, j_lo, j_hi in self._blocks(x))

    def _j_window(self, lo: int, hi: int) -> Iterator[Tuple[int, int, int]]:
        for n, j_lo, j_hi in self._blocks(hi):
            start = max(j_lo, iroot_floor(lo, n) + 1)
            stop = min(j_hi, iroot_floor(hi, n))
            if stop >= start:
                yield n, start, stop

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        for n, start, stop in self._j_window(lo, hi):
            for j in range(start, stop + 1):
                yield j ** n

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        for n, start, stop in self._j_window(lo, hi):
            gap = stop ** n - (stop - 1) ** n if stop > start else 0
            yield Run(start ** n, stop ** n, gap)

    def upper_bound(self) -> Optional[int]:
        if self.n_max is None:
            return None
        return self.block_range(self.n_max)[1] ** self.n_max

    def params(self) -> Dict:
        return {'n_max': None if self.n_max is None else str(self.n_max)}

    @classmethod
    def from_params(cls, params: Dict) -> 'PowerBlocks':
        n_max = params.get('n_max')
        return cls(None if n_max is None else as_natural(n_max))


@dataclass(frozen=True)
class GeometricCeil(SetDescriptor):
    """{ceil(anchor * ratio**j) : j_min <= j <= j_max}, capped at values <= high."""
    anchor: Fraction
    ratio: Fraction
    j_min: int = 1
    j_max: Optional[int] = None
    high: Optional[Fraction] = None

    family: ClassVar[str] = 'geometric_ceil'

    def __post_init__(self):
        anchor, ratio = as_rational(self.anchor), as_rational(self.ratio)
        if anchor <= 0:
            raise InfeasibleParameters(f"anchor must be positive, got {anchor}")
        if ratio <= 1:
            raise InfeasibleParameters(f"ratio must exceed 1, got {ratio}")
        object.__setattr__(self, 'anchor', anchor)
        object.__setattr__(self, 'ratio', ratio)
        if self.high is not None:
            object.__setattr__(self, 'high', as_rational(self.high))

    def _raw(self, j: int) -> Fraction:
        return self.anchor * self.ratio ** j

    def _value(self, j: int) -> int:
        return math.ceil(self._raw(j))

    def _cap(self, y: int) -> int:
        return y if self.high is None else min(y, math.floor(self.high))

    def _last_index(self, y: int) -> Optional[int]:
        """Largest admissible j with anchor * ratio**j <= y, or None."""
        if y < 1 or self._raw(self.j_min) > y:
            return None
        estimate = int((math.log(y) - log_of(self.anchor)) / log_of(self.ratio))
        j = max(estimate, self.j_min)
        while self._raw(j) > y and j > self.j_min:
            j -= 1
        while (self.j_max is None or j < self.j_max) and self._raw(j + 1) <= y:
            j += 1
        if self.j_max is not None:
            j = min(j, self.j_max)
        return j

    def _first_index_above(self, lo: int) -> int:
        last = self._last_index(lo)
        return self.j_min if last is None else last + 1

    def _collisions(self, j_top: int) -> int:
        # ceilings can repeat only while consecutive raw values differ by less than 1
        repeats, previous = 0, self._value(self.j_min)
        j = self.j_min + 1
        while j <= j_top and self._raw(j - 1) * (self.ratio - 1) < 1:
            value = self._value(j)
            repeats += value == previous
            previous = value
            j += 1
        return repeats

    def count(self, x: int) -> int:
        j_top = self._last_index(self._cap(x))
        if j_top is None:
            return 0
        return j_top - self.j_min + 1 - self._collisions(j_top)

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        j_top = self._last_index(self._cap(hi))
        if j_top is None:
            return
        previous = None
        for j in range(self._first_index_above(lo), j_top + 1):
            value = self._value(j)
            if value != previous:
                yield value
            previous = value

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        values = list(self.iter_range(lo, hi))
        if values:
            yield Run(values[0], values[-1], max((b - a for a, b in zip(values, values[1:])), default=0))

    def upper_bound(self) -> Optional[int]:
        if self.high is None and self.j_max is None:
            return None
        if self.high is None:
            return self._value(self.j_max)
        j_top = self._last_index(math.floor(self.high))
        return 0 if j_top is None else self._value(j_top)

    def params(self) -> Dict:
        return {'anchor': encode_rational(self.anchor), 'ratio': encode_rational(self.ratio),
                'j_min': str(self.j_min),
                'j_max': None if self.j_max is None else str(self.j_max),
                'high': None if self.high is None else encode_rational(self.high)}

    @classmethod
    def from_params(cls, params: Dict) -> 'GeometricCeil':
        j_max, high = params.get('j_max'), params.get('high')
        return cls(as_rational(params['anchor']), as_rational(params['ratio']),
                   int(params.get('j_min', 1)),
                   None if j_max is None else int(j_max),
                   None if high is None else as_rational(high))


@dataclass(frozen=True)
class Union(SetDescriptor):
    """
    Union of descriptors. When the constructor knows the parts are disjoint it says
    so and counting is a plain sum. Otherwise every later part is checked against the
    earlier ones by enumerating whichever side is sparser up to x, so count stays exact
    when one side of each overlap is small (a sparse set unioned with a dense one) and
    raises BudgetExceeded only when both sides exceed the element budget.
    """
    parts: Tuple[SetDescriptor, ...]
    disjoint: bool = False

    family: ClassVar[str] = 'union'

    def __post_init__(self):
        object.__setattr__(self, 'parts', tuple(self.parts))

    def _duplicates(self, x: int) -> int:
        repeated = 0
        for i, part in enumerate(self.parts[1:], start=1):
            earlier = self.parts[:i]
            before = earlier[0] if i == 1 else Union(earlier)
            if part.count(x) <= before.count(x):
                repeated += sum(1 for e in enumerate_range(part, 0, x) if any(p.contains(e) for p in earlier))
            else:
                repeated += sum(1 for e in enumerate_range(before, 0, x) if part.contains(e))
        return repeated

    def count(self, x: int) -> int:
        total = sum(p.count(x) for p in self.parts)
        if self.disjoint or len(self.parts) < 2:
            return total
        return total - self._duplicates(x)

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        previous = None
        for value in heapq.merge(*(p.iter_range(lo, hi) for p in self.parts)):
            if value != previous:
                yield value
            previous = value

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        previous = None
        for run in heapq.merge(*(p.runs(lo, hi) for p in self.parts), key=lambda r: (r.first, r.last)):
            if previous is not None and run.first <= previous.last:
                if run == previous and run.first == run.last:
                    continue
                raise StructureError(f"runs {previous} and {run} interleave; enumerate a prefix instead")
            yield run
            previous = run

    def upper_bound(self) -> Optional[int]:
        bounds = [p.upper_bound() for p in self.parts]
        if any(b is None for b in bounds):
            return None
        return max(bounds, default=0)

    def params(self) -> Dict:
        return {'parts': [p.to_json() for p in self.parts], 'disjoint': self.disjoint}

    @classmethod
    def from_params(cls, params: Dict) -> 'Union':
        return cls(tuple(descriptor_from_json(p) for p in params['parts']), bool(params.get('disjoint', False)))


@dataclass(frozen=True)
class Masked(SetDescriptor):
    """Elements of inner that fall inside the blocks of mask."""
    inner: SetDescriptor
    mask: IntervalBlocks

    family: ClassVar[str] = 'masked'

    def count(self, x: int) -> int:
        return sum(self.inner.count(min(right, x)) - self.inner.count(left)
                   for left, right in _blocks_below(self.mask.rule, x))

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        for left, right in _blocks_below(self.mask.rule, hi):
            a, b = max(left, lo), min(right, hi)
            if b > a:
                yield from self.inner.iter_range(a, b)

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        for left, right in _blocks_below(self.mask.rule, hi):
            a, b = max(left, lo), min(right, hi)
            if b > a:
                yield from self.inner.runs(a, b)

    def upper_bound(self) -> Optional[int]:
        bounds = [b for b in (self.inner.upper_bound(), self.mask.upper_bound()) if b is not None]
        if not bounds:
            return None
        c = self.count(min(bounds))
        return self._bisect_count(c) if c else 0

    def params(self) -> Dict:
        return {'inner': self.inner.to_json(), 'mask': self.mask.rule.to_json()}

    @classmethod
    def from_params(cls, params: Dict) -> 'Masked':
        return cls(descriptor_from_json(params['inner']), IntervalBlocks(block_rule_from_json(params['mask'])))


_FAMILIES = {cls.family: cls for cls in (Explicit, FinitePoints, FactorialPoints, PowerRoot, IntervalBlocks,
                                         ProgressionBlocks, PowerBlocks, GeometricCeil, Union, Masked)}


def descriptor_from_json(obj: Dict) -> SetDescriptor:
    family = obj.get('family')
    if family not in _FAMILIES:
        raise ValueError(f"unknown set family {family!r}")
    return _FAMILIES[family].from_params(obj.get('params', {}))


def save_descriptor(descriptor: SetDescriptor, filename: str):
    with open(filename, 'w') as f:
        json.dump(descriptor.to_json(), f, indent=2, sort_keys=True)


def load_descriptor(filename: str) -> SetDescriptor:
    with open(filename) as f:
        return descriptor_from_json(json.load(f))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def count(descriptor: SetDescriptor, x) -> int:
    """
    Counting function A(x) = #{a <= x : a in A}, in closed form.

    Args:
        descriptor: Set to count
        x: Natural or rational bound (rationals are floored)

    Returns:
        Number of elements not exceeding x
    """
    x = math.floor(x)
    if x <= 0:
        return 0
    return descriptor.count(x)


def enumerate_range(descriptor: SetDescriptor, lo, hi, budget: Optional[int] = None) -> Iterator[int]:
    """
    Stream the elements in (lo, hi], strictly increasing.

    The number of elements is known in closed form up front, so a range larger than
    the element budget is refused before anything is produced.
    """
    if lo > hi:
        raise ValueError(f"empty range: lo={lo} > hi={hi}")
    lo, hi = max(math.floor(lo), 0), math.floor(hi)
    budget = ANALYSIS_CONFIG['element_budget'] if budget is None else budget
    size = count(descriptor, hi) - count(descriptor, lo)
    if size > budget:
        raise BudgetExceeded(size, budget)
    return descriptor.iter_range(lo, hi)


@dataclass(frozen=True)
class Prefix:
    """The first N elements {a_1 < ... < a_N} of a set."""
    elements: Tuple[int, ...]
    source: Optional[SetDescriptor] = None

    def __post_init__(self):
        elements = tuple(self.elements)
        if any(a >= b for a, b in zip(elements, elements[1:])):
            raise ValueError("prefix elements must be strictly increasing")
        object.__setattr__(self, 'elements', elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def to_json_lines(self) -> str:
        return ''.join(f'"{a}"\n' for a in self.elements)

    @classmethod
    def from_json_lines(cls, text: str, source: Optional[SetDescriptor] = None) -> 'Prefix':
        return cls(tuple(int(json.loads(line)) for line in text.splitlines() if line.strip()), source)


def take_prefix(descriptor: SetDescriptor, n: int, budget: Optional[int] = None) -> Prefix:
    """
    Materialize the first n elements of a set.

    Args:
        descriptor: Set to truncate
        n: Number of elements (>= 1)
        budget: Element budget, defaults to ANALYSIS_CONFIG['element_budget']

    Returns:
        Prefix whose last element a satisfies count(a) = n and count(a-1) = n-1
    """
    if n < 1:
        raise ValueError(f"prefix length must be >= 1, got {n}")
    budget = ANALYSIS_CONFIG['element_budget'] if budget is None else budget
    if n > budget:
        raise BudgetExceeded(n, budget)
    last = descriptor.element(n)
    elements = tuple(descriptor.iter_range(0, last))
    assert(len(elements) == n)
    return Prefix(elements, descriptor)


def write_prefix(prefix: Prefix, filename: str):
    with open(filename, 'w') as f:
        f.write(prefix.to_json_lines())


def read_prefix(filename: str, source: Optional[SetDescriptor] = None) -> Prefix:
    with open(filename) as f:
        return Prefix.from_json_lines(f.read(), source)
