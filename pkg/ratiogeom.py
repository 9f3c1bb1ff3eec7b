"""
Multi-dimensional ratio sets and directions sets
Exact ratio points, the orthant/sphere homeomorphisms and coverage surrogates for denseness
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union as TUnion

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from config import ANALYSIS_CONFIG
from core import (BudgetExceeded, Prefix, SetDescriptor, as_rational, encode_rational,
                  enumerate_range, rational_json)
from analysis import LimitTrace, dispersion_trace


@dataclass(frozen=True)
class RatioPoint:
    """(a_1/b, ..., a_(k-1)/b) together with its witness (a_1, ..., a_(k-1); b)."""
    coordinates: Tuple[Fraction, ...]
    numerators: Tuple[int, ...]
    denominator: int

    def __post_init__(self):
        if self.denominator < 1 or len(self.numerators) != len(self.coordinates):
            raise ValueError("ratio point witness does not match its coordinates")
        if any(c != Fraction(a, self.denominator) for c, a in zip(self.coordinates, self.numerators)):
            raise ValueError(f"coordinates {self.coordinates} do not reproduce from their witness")

    @classmethod
    def from_witness(cls, numerators: Sequence[int], denominator: int) -> 'RatioPoint':
        numerators = tuple(numerators)
        return cls(tuple(Fraction(a, denominator) for a in numerators), numerators, denominator)

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def in_unit_cube(self) -> bool:
        return all(0 < c < 1 for c in self.coordinates)

    def csv_row(self) -> List[str]:
        return [encode_rational(c) for c in self.coordinates]


@dataclass(frozen=True)
class SpherePoint:
    """Point of the positive part of the unit sphere, optionally with an exact integer witness."""
    coordinates: Tuple[float, ...]
    witness: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        coords = np.asarray(self.coordinates, dtype=float)
        if np.any(coords <= 0):
            raise ValueError(f"sphere point {self.coordinates} is not in the positive orthant")
        if abs(float(np.sum(coords ** 2)) - 1.0) > ANALYSIS_CONFIG['sphere_tol']:
            raise ValueError(f"sphere point {self.coordinates} is not on the unit sphere")
        object.__setattr__(self, 'coordinates', tuple(float(c) for c in coords))


# ---------------------------------------------------------------------------
# Point sets
# ---------------------------------------------------------------------------

def _factor_sets(sets, k: int) -> List[SetDescriptor]:
    if isinstance(sets, SetDescriptor):
        sets = [sets]
    sets = list(sets)
    if k < 2:
        raise ValueError(f"k={k} must be >= 2")
    if len(sets) == 1:
        return sets * (k - 1)
    if len(sets) != k - 1:
        raise ValueError(f"R^{k} needs {k - 1} numerator sets, got {len(sets)}")
    return sets


def ratio_points(sets, base: SetDescriptor, k: int, bound: int, unit_cube: bool = False,
                 budget: Optional[int] = None) -> List[RatioPoint]:
    """
    All points of R^k(A_1, ..., A_(k-1); B) whose witnesses are <= bound.

    Args:
        sets: One descriptor (used for every coordinate) or k-1 descriptors
        base: Denominator set B
        k: Ratio set order (points have k-1 coordinates)
        bound: Largest witness allowed
        unit_cube: Keep only points inside (0, 1)^(k-1)
        budget: Element budget for the product of all factors

    Returns:
        Points deduplicated by value, sorted by coordinates
    """
    factors = _factor_sets(sets, k)
    budget = ANALYSIS_CONFIG['element_budget'] if budget is None else budget
    numerators = [list(enumerate_range(s, 0, bound, budget)) for s in factors]
    denominators = list(enumerate_range(base, 0, bound, budget))
    size = math.prod(len(n) for n in numerators) * len(denominators)
    if size > budget:
        raise BudgetExceeded(size, budget)

    points: Dict[Tuple[Fraction, ...], RatioPoint] = {}
    for b in denominators:
        for combo in itertools.product(*numerators):
            if unit_cube and any(a >= b for a in combo):
                continue
            coords = tuple(Fraction(a, b) for a in combo)
            if coords not in points:
                points[coords] = RatioPoint(coords, combo, b)
    return [points[c] for c in sorted(points)]


def direction_points(sets, base: SetDescriptor, k: int, bound: int,
                     budget: Optional[int] = None) -> List[SpherePoint]:
    """D^k(A_1, ..., A_(k-1); B): normalized witnesses (a_1, ..., a_(k-1), b)."""
    return [map_sphere(p) for p in ratio_points(sets, base, k, bound, budget=budget)]


def tuple_realized(descriptor: SetDescriptor, values: Sequence, denominator: int) -> bool:
    """True when (v_1, ..., v_m) is a ratio point of the set with witness denominator."""
    if not descriptor.contains(denominator):
        return False
    for v in values:
        a = as_rational(v) * denominator
        if a.denominator != 1 or not descriptor.contains(int(a)):
            return False
    return True


# ---------------------------------------------------------------------------
# Homeomorphisms between the orthant and the sphere
# ---------------------------------------------------------------------------

def map_orthant(point: SpherePoint) -> TUnion[RatioPoint, Tuple[float, ...]]:
    """F(x_1, ..., x_k) = (x_1/x_k, ..., x_(k-1)/x_k); exact when the point carries a witness."""
    if point.witness is not None:
        return RatioPoint.from_witness(point.witness[:-1], point.witness[-1])
    x = np.asarray(point.coordinates)
    return tuple(float(v) for v in x[:-1] / x[-1])


def map_sphere(point) -> SpherePoint:
    """
    G(y_1, ..., y_(k-1)) = (y_1, ..., y_(k-1), 1) / sqrt(y_1^2 + ... + y_(k-1)^2 + 1).

    A RatioPoint keeps its witness, so F(G(p)) reproduces p exactly.
    """
    witness = None
    if isinstance(point, RatioPoint):
        witness = point.numerators + (point.denominator,)
        v = np.array([float(a) for a in witness])
    else:
        y = np.asarray([float(c) for c in point])
        if np.any(y <= 0):
            raise ValueError(f"orthant point {tuple(point)} has a non-positive coordinate")
        v = np.append(y, 1.0)
    return SpherePoint(tuple(v / np.linalg.norm(v)), witness)


def map_involution(point, j: int):
    """
    H_j(x) = (x_1/x_j, ..., 1/x_j, ..., x_(k-1)/x_j), an exact involution.

    Args:
        point: RatioPoint or tuple of rationals
        j: Coordinate index, 1-based

    Returns:
        Same kind as the input; RatioPoint witnesses are permuted (b takes position j)
    """
    coords = point.coordinates if isinstance(point, RatioPoint) else tuple(as_rational(c) for c in point)
    if not 1 <= j <= len(coords):
        raise ValueError(f"index j={j} outside 1..{len(coords)}")
    pivot = coords[j - 1]
    if pivot <= 0:
        raise ValueError(f"coordinate x_{j}={pivot} must be positive")
    if isinstance(point, RatioPoint):
        numerators = list(point.numerators)
        numerators[j - 1] = point.denominator
        return RatioPoint.from_witness(numerators, point.numerators[j - 1])
    return tuple(Fraction(1) / pivot if i == j - 1 else c / pivot for i, c in enumerate(coords))


# ---------------------------------------------------------------------------
# Coverage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForbiddenRegion:
    """Shape R^(k+1) accumulation points must respect: all coords >= 1-d/2 or some coord <= 1-d."""
    d: Fraction
    threshold: int = ANALYSIS_CONFIG['forbidden_threshold']
    slack: float = ANALYSIS_CONFIG['forbidden_slack']

    def violated_by(self, coordinates: Sequence) -> bool:
        d = float(self.d)
        values = [float(c) for c in coordinates]
        return min(values) > 1 - d + self.slack and min(values) < 1 - d / 2 - self.slack


@dataclass(frozen=True)
class CoverageReport:
    """Finite evidence for denseness of R^k in (0,1)^(k-1) on an m^(k-1) box grid."""
    k: int
    bound: Optional[int]
    m: int
    points: int
    hit_fraction: float
    largest_empty_box: Fraction
    largest_gap: Optional[Fraction] = None
    forbidden_checked: int = 0
    forbidden_violations: Tuple[RatioPoint, ...] = ()

    def to_json(self) -> Dict:
        return {
            'k': self.k,
            'bound': None if self.bound is None else str(self.bound),
            'm': self.m,
            'points': self.points,
            'hit_fraction': self.hit_fraction,
            'largest_empty_box': rational_json(self.largest_empty_box),
            'largest_gap': None if self.largest_gap is None else rational_json(self.largest_gap),
            'forbidden_checked': self.forbidden_checked,
            'forbidden_violations': [p.csv_row() for p in self.forbidden_violations],
        }


def _largest_empty_box(hits: np.ndarray) -> Fraction:
    m = hits.shape[0]
    dims = hits.ndim
    best = 0
    for side in range(1, m + 1):
        windows = sliding_window_view(hits, (side,) * dims)
        occupied = windows.any(axis=tuple(range(dims, 2 * dims)))
        if occupied.all():
            break
        best = side
    return Fraction(best, m)


def _box_index(point: RatioPoint, m: int) -> Tuple[int, ...]:
    # half-open boxes [i/m, (i+1)/m)
    return tuple(a * m // point.denominator for a in point.numerators)


def coverage_probe(points: Sequence[RatioPoint], k: int, m: int, forbidden: Optional[ForbiddenRegion] = None,
                   bound: Optional[int] = None) -> CoverageReport:
    """
    Hit fraction of the m^(k-1) congruent boxes of (0,1)^(k-1), largest empty box,
    the largest gap for k = 2 and, when a region is given, the large-witness points
    breaking its shape.
    """
    if m < 2:
        raise ValueError(f"grid resolution m={m} must be >= 2")
    inside = [p for p in points if p.dimension == k - 1 and p.in_unit_cube()]
    hits = np.zeros((m,) * (k - 1), dtype=bool)
    for p in inside:
        hits[_box_index(p, m)] = True

    largest_gap = None
    if k == 2:
        xs = sorted({p.coordinates[0] for p in inside} | {Fraction(0), Fraction(1)})
        largest_gap = max(b - a for a, b in zip(xs, xs[1:]))

    checked, violations = 0, []
    if forbidden is not None:
        for p in inside:
            witness = p.numerators + (p.denominator,)
            if p.denominator <= forbidden.threshold or len(set(witness)) != len(witness):
                continue
            checked += 1
            if forbidden.violated_by(p.coordinates):
                violations.append(p)
    return CoverageReport(k, bound, m, len(inside), float(hits.mean()), _largest_empty_box(hits),
                          largest_gap, checked, tuple(violations))


def _hit_boxes(elements: List[int], b: int, m: int) -> List[int]:
    # boxes i with some a in [ceil(i b / m), ceil((i+1) b / m) - 1], a < b
    hit = []
    for i in range(m):
        lo = -(-i * b // m)
        hi = -(-(i + 1) * b // m) - 1
        pos = bisect.bisect_left(elements, max(lo, 1))
        if pos < len(elements) and elements[pos] <= min(hi, b - 1):
            hit.append(i)
    return hit


def coverage_of_sets(sets, base: SetDescriptor, k: int, m: int, bound: int,
                     budget: Optional[int] = None) -> CoverageReport:
    """
    Coverage of R^k(A_1, ..., A_(k-1); B) in (0,1)^(k-1) without listing the points:
    each denominator b contributes the product of its per-coordinate hit boxes.
    Stops early once every box is hit.
    """
    if m < 2:
        raise ValueError(f"grid resolution m={m} must be >= 2")
    factors = _factor_sets(sets, k)
    numerators = [list(enumerate_range(s, 0, bound, budget)) for s in factors]
    hits = np.zeros((m,) * (k - 1), dtype=bool)
    seen = 0
    for b in enumerate_range(base, 0, bound, budget):
        seen += 1
        boxes = [_hit_boxes(n, b, m) for n in numerators]
        if all(boxes):
            hits[np.ix_(*boxes)] = True
            if hits.all():
                break
    return CoverageReport(k, bound, m, seen, float(hits.mean()), _largest_empty_box(hits))


def forbidden_region_scan(prefix: Prefix, k: int, d, threshold: Optional[int] = None,
                          slack: Optional[float] = None) -> CoverageReport:
    """
    Scan R^k of a prefix for points with distinct witnesses a_1 < ... < a_(k-1) < b,
    b above the threshold, that break the shape "all coords >= 1-d/2 or some coord <= 1-d".

    Sorted witnesses suffice because the shape is symmetric in the coordinates: for each b
    the smallest admissible a_1 is found by bisection and the remaining k-2 numerators are
    the next elements below b.
    """
    region = ForbiddenRegion(as_rational(d),
                             ANALYSIS_CONFIG['forbidden_threshold'] if threshold is None else threshold,
                             ANALYSIS_CONFIG['forbidden_slack'] if slack is None else slack)
    d = float(region.d)
    elements = prefix.elements
    checked, violations = 0, []
    for idx, b in enumerate(elements):
        if b <= region.threshold:
            continue
        checked += 1
        start = bisect.bisect_right(elements, math.floor(b * (1 - d + region.slack)), 0, idx)
        if start >= idx or elements[start] >= b * (1 - d / 2 - region.slack):
            continue
        if idx - start >= k - 1:
            witness = elements[start:start + k - 1]
            violations.append(RatioPoint.from_witness(witness, b))
    return CoverageReport(k, elements[-1] if elements else None, 0, checked, 0.0, Fraction(0), None,
                          checked, tuple(violations))


@dataclass(frozen=True)
class DispersionBound:
    k: int
    dispersion: float
    bound: Fraction
    coverage: Optional[float]
    applicable: bool
    holds: bool

    def to_json(self) -> Dict:
        return {'k': self.k, 'dispersion': self.dispersion, 'bound': rational_json(self.bound),
                'coverage': self.coverage, 'applicable': self.applicable, 'holds': self.holds}


def dispersion_bound_check(prefix: Optional[Prefix], k: int, coverage: Optional[CoverageReport] = None,
                           trace: Optional[LimitTrace] = None) -> DispersionBound:
    """
    Lower dispersion <= 1/k whenever R^k is dense; applicable only when the coverage
    report shows near-full coverage. A precomputed trace (e.g. a dispersion_scan) may
    replace the prefix.
    """
    if trace is None:
        trace = dispersion_trace(prefix)
    dispersion = float(trace.running_inf)
    fraction = None if coverage is None else coverage.hit_fraction
    applicable = fraction is None or fraction >= ANALYSIS_CONFIG['coverage_full']
    bound = Fraction(1, k)
    return DispersionBound(k, dispersion, bound, fraction, applicable,
                           dispersion <= float(bound) + ANALYSIS_CONFIG['tol'])
