"""
Finite-truncation estimators for the statistics of integer sets
Step distribution functions, counting-ratio scans, exponent of convergence,
dispersion, mean ratios and (N)-denseness probes
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union as TUnion

import numpy as np

from config import ANALYSIS_CONFIG
from core import Prefix, SetDescriptor, as_rational, count, enumerate_range, rational_json

Value = TUnion[Fraction, float]


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitTrace:
    """
    Checkpoint values of a statistic with liminf/limsup surrogates over the tail window
    (the last tail_fraction of the checkpoints).
    """
    name: str
    checkpoints: Tuple[Tuple[int, Value], ...]
    tol: float = field(default_factory=lambda: ANALYSIS_CONFIG['tol'])

    def __post_init__(self):
        if not self.checkpoints:
            raise ValueError(f"{self.name}: trace has no checkpoints")
        object.__setattr__(self, 'checkpoints', tuple(self.checkpoints))

    @property
    def values(self) -> List[Value]:
        return [v for _, v in self.checkpoints]

    @property
    def tail(self) -> List[Value]:
        size = max(1, math.ceil(len(self.checkpoints) * ANALYSIS_CONFIG['tail_fraction']))
        return self.values[-size:]

    @property
    def running_inf(self) -> Value:
        return min(self.tail)

    @property
    def running_sup(self) -> Value:
        return max(self.tail)

    @property
    def limit(self) -> Value:
        return self.values[-1]

    @property
    def verdict(self) -> str:
        """converged, diverging or oscillating."""
        tail = self.tail
        if self.running_sup - self.running_inf < self.tol:
            return 'converged'
        monotone = all(a <= b for a, b in zip(tail, tail[1:]))
        if monotone and tail[0] > 0 and tail[-1] >= ANALYSIS_CONFIG['diverge_factor'] * tail[0]:
            return 'diverging'
        return 'oscillating'

    def converges_to(self, target, tol: Optional[float] = None) -> bool:
        tol = self.tol if tol is None else tol
        return abs(self.running_sup - target) <= tol and abs(self.running_inf - target) <= tol

    def to_json(self) -> Dict:
        return {
            'name': self.name,
            'checkpoints': [[str(t), rational_json(v)] for t, v in self.checkpoints],
            'inf': rational_json(self.running_inf),
            'sup': rational_json(self.running_sup),
            'limit': rational_json(self.limit),
            'verdict': self.verdict,
        }


def geometric_checkpoints(lo: int, hi: int, per_octave: int = 4) -> List[int]:
    """Integers lo <= n <= hi spaced by 2**(1/per_octave), always including lo and hi."""
    if hi < lo:
        return []
    points = {lo, hi}
    x = float(max(lo, 1))
    step = 2.0 ** (1.0 / per_octave)
    while x < hi:
        points.add(int(x))
        x *= step
    return sorted(p for p in points if lo <= p <= hi)


def _grid(lo: int, hi: int, size: int) -> List[int]:
    if hi <= lo:
        return [lo]
    return sorted({min(max(int(round(t)), lo), hi) for t in np.geomspace(float(lo), float(hi), size)})


def _check_prefix(prefix: Prefix, minimum: int = 2):
    if len(prefix) < minimum:
        raise ValueError(f"prefix needs at least {minimum} elements, has {len(prefix)}")


# ---------------------------------------------------------------------------
# Step distribution functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelDF:
    """The only possible asymptotic distribution functions: c0 or x**q."""
    kind: str
    q: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind not in ('c0', 'power'):
            raise ValueError(f"unknown model {self.kind!r}")
        if self.kind == 'power' and not (self.q is not None and 0 < self.q <= 1):
            raise ValueError(f"power model exponent {self.q} outside (0, 1]")

    def __call__(self, x) -> float:
        x = float(x)
        if self.kind == 'c0':
            return 0.0 if x == 0 else 1.0
        return x ** float(self.q)

    def to_json(self) -> Dict:
        return {'kind': self.kind, 'q': None if self.q is None else rational_json(self.q)}


@dataclass(frozen=True)
class DFEnvelope:
    """Pointwise min/max of F(A_n, x) over a window of n, with the best single-model fit."""
    grid: Tuple[Fraction, ...]
    lower: Tuple[Fraction, ...]
    upper: Tuple[Fraction, ...]
    window: Tuple[int, int]
    q_hat: Optional[float]
    model: Optional[ModelDF]
    singleton: bool

    def to_json(self) -> Dict:
        return {
            'window': [self.window[0], self.window[1]],
            'grid': [rational_json(x) for x in self.grid],
            'lower': [rational_json(v) for v in self.lower],
            'upper': [rational_json(v) for v in self.upper],
            'q_hat': self.q_hat,
            'model': None if self.model is None else self.model.to_json(),
            'singleton': self.singleton,
        }


def _count_below(prefix: Prefix, n: int, x: Fraction) -> int:
    # a_i / a_n < x  <=>  a_i < ceil(x * a_n) for integer a_i
    return bisect.bisect_left(prefix.elements, math.ceil(x * prefix[n - 1]), 0, n)


def step_df(prefix: Prefix, n: int, x) -> Fraction:
    """
    F(A_n, x) = #{i <= n : a_i / a_n < x} / n, with F(A_n, 1) = 1.

    Args:
        prefix: Prefix of the set
        n: Block index (1-based)
        x: Point in [0, 1]

    Returns:
        Exact rational value
    """
    if not 1 <= n <= len(prefix):
        raise ValueError(f"block index {n} outside 1..{len(prefix)}")
    x = as_rational(x)
    if not 0 <= x <= 1:
        raise ValueError(f"x={x} outside [0, 1]")
    if x == 1:
        return Fraction(1)
    return Fraction(_count_below(prefix, n, x), n)


def df_envelope(prefix: Prefix, window: Tuple[int, int], grid: Sequence) -> DFEnvelope:
    """
    Lower and upper envelopes of F(A_n, .) over n in the window.

    The envelope is flagged as a singleton when upper - lower < tol at every grid point
    and both stay within tol of one model (c0, or x**q with q fitted as the mean of
    log F / log x over interior grid points).
    """
    lo, hi = window
    if lo > hi:
        raise ValueError(f"empty window {window}")
    if lo < 1 or hi > len(prefix):
        raise ValueError(f"window {window} outside 1..{len(prefix)}")
    grid = tuple(sorted(as_rational(x) for x in grid))
    if any(not 0 <= x <= 1 for x in grid):
        raise ValueError("grid points must lie in [0, 1]")
    tol = ANALYSIS_CONFIG['tol']

    lower, upper = [], []
    for x in grid:
        if x == 1:
            lower.append(Fraction(1))
            upper.append(Fraction(1))
            continue
        low = high = None
        for n in range(lo, hi + 1):
            value = Fraction(_count_below(prefix, n, x), n)
            if low is None or value < low:
                low = value
            if high is None or value > high:
                high = value
        lower.append(low)
        upper.append(high)

    interior = [(float(x), float(l + u) / 2) for x, l, u in zip(grid, lower, upper) if 0 < x < 1]
    xs = np.array([x for x, m in interior if m > 0])
    mids = np.array([m for x, m in interior if m > 0])
    q_hat = float(np.mean(np.log(mids) / np.log(xs))) if len(xs) else None

    model = None
    if interior and all(float(u) > 1 - tol for x, u in zip(grid, upper) if 0 < x < 1):
        model = ModelDF('c0')
    elif q_hat is not None and 0 < q_hat <= 1 + tol:
        model = ModelDF('power', min(Fraction(q_hat).limit_denominator(100), Fraction(1)))

    singleton = model is not None and all(
        float(u - l) < tol and abs(float(l) - model(x)) <= tol and abs(float(u) - model(x)) <= tol
        for x, l, u in zip(grid, lower, upper))
    return DFEnvelope(grid, tuple(lower), tuple(upper), (lo, hi), q_hat, model, singleton)


@dataclass(frozen=True)
class Attainment:
    n: int
    value: Fraction
    residual: Fraction

    def to_json(self) -> Dict:
        return {'n': self.n, 'value': rational_json(self.value), 'residual': rational_json(self.residual)}


def window_attaining(prefix: Prefix, c, gamma, window: Tuple[int, int]) -> Attainment:
    """argmin over n in the window of |F(A_n, c) - gamma|; ties go to the smallest n."""
    lo, hi = window
    if lo > hi:
        raise ValueError(f"empty window {window}")
    c, gamma = as_rational(c), as_rational(gamma)
    if not 0 < c < 1:
        raise ValueError(f"c={c} outside (0, 1)")
    best = None
    for n in range(max(lo, 1), min(hi, len(prefix)) + 1):
        value = Fraction(_count_below(prefix, n, c), n)
        residual = abs(value - gamma)
        if best is None or residual < best.residual:
            best = Attainment(n, value, residual)
    if best is None:
        raise ValueError(f"window {window} has no index inside the prefix")
    return best


# ---------------------------------------------------------------------------
# Prefix statistics
# ---------------------------------------------------------------------------

def mean_ratio(prefix: Prefix) -> LimitTrace:
    """S_n = (a_1 + ... + a_n) / (n a_n) at geometrically spaced n, exact."""
    _check_prefix(prefix)
    marks = set(geometric_checkpoints(2, len(prefix)))
    points, total = [], 0
    for n, a in enumerate(prefix.elements, start=1):
        total += a
        if n in marks:
            points.append((n, Fraction(total, n * a)))
    return LimitTrace('mean_ratio', points)


def moment_ratio(prefix: Prefix, alpha) -> LimitTrace:
    """Sum of a_i**alpha over n * a_n**alpha; tends to q/(q+alpha) for a regular sequence with exponent q."""
    _check_prefix(prefix)
    alpha = float(as_rational(alpha))
    logs = np.array([math.log(a) for a in prefix.elements])
    points = []
    for n in geometric_checkpoints(2, len(prefix)):
        points.append((n, float(np.mean(np.exp(alpha * (logs[:n] - logs[n - 1]))))))
    return LimitTrace(f'moment_ratio[{alpha}]', points)


def lambda_trace(prefix: Prefix) -> LimitTrace:
    """log n / log a_n for every n >= 2 with a_n >= 2; running_sup estimates the exponent of convergence."""
    _check_prefix(prefix)
    points = [(n, math.log(n) / math.log(a))
              for n, a in enumerate(prefix.elements, start=1) if n >= 2 and a >= 2]
    return LimitTrace('lambda', points)


def dispersion_trace(prefix: Prefix) -> LimitTrace:
    """max{a_1, a_(i+1) - a_i : i < n} / a_n for every n; running_inf estimates the lower dispersion."""
    _check_prefix(prefix)
    elements = prefix.elements
    widest = elements[0]
    points = [(1, 1.0)]
    for n in range(2, len(elements) + 1):
        widest = max(widest, elements[n - 1] - elements[n - 2])
        points.append((n, widest / elements[n - 1]))
    return LimitTrace('dispersion', points)


def consecutive_ratio(prefix: Prefix) -> LimitTrace:
    """a_(n+1) / a_n."""
    _check_prefix(prefix)
    e = prefix.elements
    return LimitTrace('consecutive_ratio', [(n, Fraction(e[n], e[n - 1])) for n in range(1, len(e))])


def index_dilation_ratio(prefix: Prefix, k: int) -> LimitTrace:
    """a_(kn) / a_n; tends to k**(1/q) for a regular sequence with exponent q."""
    if k < 2:
        raise ValueError(f"dilation factor k={k} must be >= 2")
    _check_prefix(prefix, k)
    e = prefix.elements
    return LimitTrace(f'index_dilation[{k}]',
                      [(n, Fraction(e[k * n - 1], e[n - 1])) for n in range(1, len(e) // k + 1)])


# ---------------------------------------------------------------------------
# Counting-function statistics (closed form, no enumeration)
# ---------------------------------------------------------------------------

def ratio_scan(descriptor: SetDescriptor, c, checkpoints: Iterable) -> LimitTrace:
    """
    A(ct) / A(t) at each checkpoint, exact; A(ct) counts the naturals <= ct.

    Args:
        descriptor: Set to scan
        c: Positive rational dilation
        checkpoints: Increasing naturals or rationals t

    Returns:
        LimitTrace of exact rationals
    """
    c = as_rational(c)
    if c <= 0:
        raise ValueError(f"c={c} must be positive")
    points = []
    for t in checkpoints:
        t = as_rational(t)
        denominator = count(descriptor, t)
        if denominator == 0:
            raise ValueError(f"A(t) = 0 at checkpoint t={t}")
        points.append((math.floor(t), Fraction(count(descriptor, c * t), denominator)))
    return LimitTrace(f'ratio_scan[{c}]', points)


def log_count_scan(descriptor: SetDescriptor, checkpoints: Iterable) -> LimitTrace:
    """log A(t) / log t; checkpoints with A(t) = 0 or t <= 1 are skipped."""
    points = []
    for t in checkpoints:
        t = as_rational(t)
        a = count(descriptor, t)
        if a >= 1 and t > 1:
            points.append((math.floor(t), math.log(a) / (math.log(t.numerator) - math.log(t.denominator))))
    return LimitTrace('log_count', points)


def _dispersion_walk(descriptor: SetDescriptor, hi: int) -> List[Tuple[int, float]]:
    points, widest, previous = [], 0, None
    for run in descriptor.runs(0, hi):
        widest = max(widest, run.first if previous is None else run.first - previous, run.gap)
        points.append((run.last, widest / run.last))
        previous = run.last
    return points


def dispersion_scan(descriptor: SetDescriptor, hi=None, checkpoints: Optional[Iterable] = None) -> LimitTrace:
    """
    Dispersion from structural runs, so factorial-scale sets need no enumeration.

    Without checkpoints the values are taken at every run end up to hi, which is where the
    running maximum gap is smallest relative to the current element.
    """
    if checkpoints is None:
        if hi is None:
            raise ValueError("dispersion_scan needs hi or checkpoints")
        points = _dispersion_walk(descriptor, math.floor(hi))
    else:
        points = []
        for t in checkpoints:
            walk = _dispersion_walk(descriptor, math.floor(t))
            if walk:
                points.append((math.floor(t), walk[-1][1]))
    return LimitTrace('dispersion_scan', points)


@dataclass(frozen=True)
class Lemma1Report:
    """Sup/inf of A(ct)/A(t) on a dense grid against the restricted points t = a_n / c."""
    c: Fraction
    window: Tuple[int, int]
    grid_sup: Fraction
    grid_inf: Fraction
    restricted_sup: Fraction
    restricted_inf: Fraction
    grid_size: int
    restricted_size: int

    @property
    def sup_gap(self) -> Fraction:
        return abs(self.grid_sup - self.restricted_sup)

    @property
    def inf_gap(self) -> Fraction:
        return abs(self.grid_inf - self.restricted_inf)

    def to_json(self) -> Dict:
        return {
            'c': rational_json(self.c),
            'window': [str(self.window[0]), str(self.window[1])],
            'grid_sup': rational_json(self.grid_sup),
            'grid_inf': rational_json(self.grid_inf),
            'restricted_sup': rational_json(self.restricted_sup),
            'restricted_inf': rational_json(self.restricted_inf),
            'sup_gap': rational_json(self.sup_gap),
            'inf_gap': rational_json(self.inf_gap),
        }


def _enumerable(descriptor: SetDescriptor, lo: int, hi: int) -> bool:
    return count(descriptor, hi) - count(descriptor, lo) <= ANALYSIS_CONFIG['probe_point_limit']


def lemma1_check(descriptor: SetDescriptor, c, window: Tuple[int, int]) -> Lemma1Report:
    """
    Compare sup/inf of A(ct)/A(t) over a dense t-grid in the window with the same
    extrema over t = a_n / c.

    The grid holds geometric points plus structural boundary points (run ends e and e/c);
    when the window is small enough every element contributes its jump points.
    """
    c = as_rational(c)
    if c <= 1:
        raise ValueError(f"c={c} must exceed 1")
    lo, hi = math.floor(window[0]), math.floor(window[1])
    if lo < 1 or lo >= hi:
        raise ValueError(f"infeasible window {window}")

    grid = set(_grid(lo, hi, ANALYSIS_CONFIG['lemma1_grid_points']))
    restricted_elements = set()
    top = math.floor(c * hi)
    if _enumerable(descriptor, lo, top):
        jumps = list(enumerate_range(descriptor, lo, top))
        for a in jumps:
            grid.update((a - 1, a, math.floor(a / c), math.ceil(a / c)))
        restricted_elements.update(jumps)
    else:
        for run in descriptor.runs(lo, top):
            for e in (run.first - 1, run.first, run.last):
                grid.update((e, math.floor(e / c), math.ceil(e / c)))
            restricted_elements.update((run.first, run.last))
        for g in list(grid):
            a = descriptor.predecessor(c * g)
            if a is not None:
                restricted_elements.add(a)

    grid_values = []
    for t in sorted(g for g in grid if lo <= g <= hi):
        denominator = count(descriptor, t)
        if denominator:
            grid_values.append(Fraction(count(descriptor, c * t), denominator))
    restricted_values = []
    for a in sorted(restricted_elements):
        t = a / c
        if lo <= t <= hi and count(descriptor, t):
            restricted_values.append(Fraction(count(descriptor, a), count(descriptor, t)))
    if not grid_values or not restricted_values:
        raise ValueError(f"window {window} holds no usable points")
    return Lemma1Report(c, (lo, hi), max(grid_values), min(grid_values),
                        max(restricted_values), min(restricted_values),
                        len(grid_values), len(restricted_values))


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of the A(ct) > A(t) scan for one c."""
    c: Fraction
    violations: Tuple[int, ...]
    head_min: int
    tail_min: int
    candidates: int
    condition_i: bool
    condition_ii: bool

    def to_json(self) -> Dict:
        return {
            'c': rational_json(self.c),
            'violations': [str(t) for t in self.violations],
            'head_min': str(self.head_min),
            'tail_min': str(self.tail_min),
            'candidates': self.candidates,
            'condition_i': self.condition_i,
            'condition_ii': self.condition_ii,
        }


@dataclass(frozen=True)
class NdenseReport:
    t_range: Tuple[int, int]
    results: Tuple[ProbeResult, ...]

    @property
    def condition_i(self) -> bool:
        return all(r.condition_i for r in self.results)

    @property
    def condition_ii(self) -> bool:
        return all(r.condition_ii for r in self.results)

    def to_json(self) -> Dict:
        return {'t_range': [str(self.t_range[0]), str(self.t_range[1])],
                'condition_i': self.condition_i, 'condition_ii': self.condition_ii,
                'results': [r.to_json() for r in self.results]}


def _probe_candidates(descriptor: SetDescriptor, c: Fraction, lo: int, hi: int) -> List[int]:
    points = {lo, hi}
    if _enumerable(descriptor, lo, hi):
        for a in enumerate_range(descriptor, lo, hi):
            points.update((a, a - 1, math.floor(a / c)))
    else:
        decades = max(1.0, math.log10(hi) - math.log10(lo))
        points.update(_grid(lo, hi, int(decades * ANALYSIS_CONFIG['probe_grid_per_decade']) + 2))
        for run in descriptor.runs(lo, hi):
            points.update((run.first, run.last, math.floor(run.last / c)))
        for g in list(points):
            a = descriptor.predecessor(g)
            if a is not None:
                points.add(a)
    return sorted(p for p in points if lo <= p <= hi)


def ndense_probe(descriptor: SetDescriptor, cs: Sequence, t_range: Tuple[int, int]) -> NdenseReport:
    """
    Scan A(ct) - A(t) over a t-grid plus the jump points a_n and a_n/c in the range.

    condition_i holds when no violation A(ct) = A(t) falls in the upper half of the range
    (log scale); condition_ii when the minimal difference on that half is positive and
    exceeds the minimum on the lower half.
    """
    lo, hi = math.floor(t_range[0]), math.floor(t_range[1])
    if lo < 1 or lo > hi:
        raise ValueError(f"empty range {t_range}")
    split = math.isqrt(lo * hi)
    results = []
    for c in cs:
        c = as_rational(c)
        if c <= 1:
            raise ValueError(f"c={c} must exceed 1")
        candidates = _probe_candidates(descriptor, c, lo, hi)
        differences = [(t, count(descriptor, c * t) - count(descriptor, t)) for t in candidates]
        violations = tuple(t for t, diff in differences if diff == 0)
        head = [diff for t, diff in differences if t < split] or [0]
        tail = [diff for t, diff in differences if t >= split]
        tail_min = min(tail)
        results.append(ProbeResult(c, violations, min(head), tail_min, len(candidates),
                                   not any(t >= split for t in violations),
                                   tail_min > 0 and tail_min > min(head)))
    return NdenseReport((lo, hi), tuple(results))
