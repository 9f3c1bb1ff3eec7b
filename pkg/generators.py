"""
Constructors for every explicitly built set family
Each generator returns an immutable SetDescriptor; parameters are exact rationals
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from core import (Explicit, FactorialBlocks, FactorialPoints, FinitePoints, GapList, GeometricCeil,
                  InfeasibleParameters, IntervalBlocks, IntervalList, Masked, PowerBlocks, PowerRoot,
                  ProgressionBlocks, SetDescriptor, Union, as_natural, as_rational, ceil_power, floor_power,
                  iroot_floor, log_of)


def power_sequence(q) -> SetDescriptor:
    """{ceil(j ** (1/q)) : j in N}; q=1 gives N, q=1/2 the squares."""
    return PowerRoot(as_rational(q))


def naturals() -> SetDescriptor:
    return PowerRoot(Fraction(1))


def geometric_set(anchor=1, ratio=2, j_min: int = 1) -> SetDescriptor:
    """{ceil(anchor * ratio**j) : j >= j_min}, e.g. {2^j} or {ceil((4/3)^j)}."""
    return GeometricCeil(as_rational(anchor), as_rational(ratio), j_min)


def factorial_interval_set(closed: bool = False) -> SetDescriptor:
    """
    All integers in ((2k)!, (2k+1)!] for k >= 1, or in [(2k)!, (2k+1)!] when closed.
    Its ratio block sequence has liminf of F = 0 and limsup = 1 at every x in (0, 1).
    """
    return IntervalBlocks(FactorialBlocks(0, closed))


def mixed_progression_set() -> SetDescriptor:
    """All integers in ((2k-1)!, (2k)!] together with the even numbers in ((2k)!, (2k+1)!]."""
    return Union((IntervalBlocks(FactorialBlocks(-1)), ProgressionBlocks(2, FactorialBlocks(0))), disjoint=True)


def ndense_zero_lambda_set() -> SetDescriptor:
    """(N)-dense set with exponent of convergence 0: blocks {j^n : n^(n-1) <= j <= (n+1)^(n+1)}."""
    return PowerBlocks()


def masked_set(inner: SetDescriptor) -> SetDescriptor:
    """Restrict inner to the closed factorial blocks [(2k)!, (2k+1)!]."""
    return Masked(inner, IntervalBlocks(FactorialBlocks(0, closed=True)))


# ---------------------------------------------------------------------------
# Two-exponent set: liminf log A(t)/log t = p, limsup = q
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NolimParams:
    """
    Parameters of the two-exponent construction.

    p_seq(k) gives p_k (non-increasing, >= p); by default p_k = p.
    b_seq(k) gives b_k (strictly increasing); by default b_1 is given and
    b_{k+1} is the smallest integer above k * b_k ** (q / p_ceil(k/2)).

    With p = 0 and no p_seq the odd blocks are empty and b grows as
    b_{k+1} = b_k ** ((k+3)/2) for odd k, b_k ** 2 for even k; the widening odd
    gaps drive log A(b_2k) / log b_2k down like q / (k+1).
    """
    p: Fraction
    q: Fraction
    b1: int = 2
    pieces: int = 10          # A_1 ... A_pieces, needs b_1 ... b_(pieces+1)
    p_seq: Optional[Callable[[int], Fraction]] = None
    b_seq: Optional[Callable[[int], int]] = None

    def __post_init__(self):
        p, q = as_rational(self.p), as_rational(self.q)
        if not 0 <= p < 1:
            raise InfeasibleParameters(f"p={p} outside [0, 1)")
        if not 0 < q <= 1 or p >= q:
            raise InfeasibleParameters(f"q={q} must lie in (0, 1] and exceed p={p}")
        if self.pieces < 1 or self.b1 < 1:
            raise InfeasibleParameters("pieces and b1 must be positive")
        if p == 0 and self.p_seq is None and self.b_seq is None and self.b1 < 2:
            raise InfeasibleParameters("b1 must be at least 2 when p = 0")
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'q', q)

    def p_k(self, k: int) -> Fraction:
        if self.p_seq is not None:
            return as_rational(self.p_seq(k))
        return self.p

    @property
    def empty_odd_blocks(self) -> bool:
        return self.p == 0 and self.p_seq is None

    def b_values(self) -> List[int]:
        """b_1 ... b_(pieces+1)."""
        if self.b_seq is not None:
            return [as_natural(self.b_seq(k)) for k in range(1, self.pieces + 2)]
        b = [self.b1]
        for k in range(1, self.pieces + 1):
            if self.empty_odd_blocks:
                b.append(b[-1] ** ((k + 3) // 2 if k % 2 else 2))
                continue
            p_tilde = self.p_k(-(-k // 2))
            if p_tilde == 0:
                raise InfeasibleParameters(f"p_{-(-k // 2)} = 0 leaves the default b rule undefined at k={k}; pass b_seq")
            ratio = self.q / p_tilde
            a, c = ratio.numerator, ratio.denominator
            b.append(iroot_floor(k ** c * b[-1] ** a, c) + 1)
        return b


def _check_nolim(params: NolimParams, b: List[int]):
    for k in range(1, len(b)):
        if b[k] <= b[k - 1]:
            raise InfeasibleParameters(f"b sequence not strictly increasing at k={k}")
    if params.empty_odd_blocks:
        return
    half = -(-params.pieces // 2)
    for k in range(1, half + 1):
        p_k = params.p_k(k)
        if p_k < params.p or not p_k <= 1:
            raise InfeasibleParameters(f"p_{k}={p_k} outside [p, 1]")
        if k > 1 and p_k > params.p_k(k - 1):
            raise InfeasibleParameters(f"p sequence increases at k={k}")
    if params.q * log_of(b[0]) >= params.p_k(1) * log_of(b[1]):
        raise InfeasibleParameters("b_1^q < b_2^p fails at k=1")
    # log of b_k^q / b_(k+1)^(p_ceil(k/2)) must strictly decrease
    decay = [params.q * log_of(b[k - 1]) - float(params.p_k(-(-k // 2))) * log_of(b[k])
             for k in range(1, len(b))]
    for k in range(1, len(decay)):
        if decay[k] >= decay[k - 1]:
            raise InfeasibleParameters(f"b_k^q / b_(k+1)^p_k does not decrease at k={k + 1}")


def _nolim_pieces(params: NolimParams, keep: Callable[[int], bool] = lambda i: True) -> List[PowerRoot]:
    b = params.b_values()
    _check_nolim(params, b)
    parts: List[PowerRoot] = []
    for i in range(1, params.pieces + 1):
        exponent = params.p_k((i + 1) // 2) if i % 2 else params.q
        if exponent == 0 or not keep(i):
            continue
        parts.append(PowerRoot(exponent, b[i - 1], b[i]))
    return parts


def nolim_set(params: NolimParams) -> SetDescriptor:
    """
    Union of A_(2k-1) = {ceil(j^(1/p_k))} on (b_(2k-1), b_(2k)] and
    A_(2k) = {ceil(j^(1/q))} on (b_(2k), b_(2k+1)], both windows in value space.

    Args:
        params: NolimParams

    Returns:
        Disjoint Union of PowerRoot pieces; pieces with p_k = 0 are empty
    """
    return Union(tuple(_nolim_pieces(params)), disjoint=True)


def nolim_checkpoints(params: NolimParams) -> Tuple[List[int], List[int]]:
    """The b_(2k) (low-exponent) and b_(2k+1) (high-exponent) checkpoints."""
    b = params.b_values()
    return b[1::2], b[2::2]


def nolim_sparse_set(params: NolimParams) -> SetDescriptor:
    """
    Only the pieces A_(4k-1) and A_4k of the two-exponent set.

    Nothing lies in (b_(4k+1), b_(4k+3)], so A(ct) = A(t) on ever longer stretches and the
    set is not (N)-dense, while the lower dispersion stays 0 and the two exponents survive.
    """
    return Union(tuple(_nolim_pieces(params, lambda i: i % 4 in (3, 0))), disjoint=True)


def sparse_power_set(q, b1: int = 2, pieces: int = 10) -> SetDescriptor:
    """
    {ceil(j^(1/q))} on the windows (b_2k, b_(2k+1)] only: the two-exponent set with p = 0.
    log A(t)/log t has liminf 0 and limsup q, and A(ct) = A(t) across every empty stretch.
    """
    return nolim_set(NolimParams(Fraction(0), as_rational(q), b1, pieces))


def ndense_sparse_power_set(q, b1: int = 2, pieces: int = 10) -> SetDescriptor:
    """
    sparse_power_set(q) filled in with the (N)-dense exponent-0 blocks outside its windows.

    The filling has exponent of convergence 0, so the liminf 0 / limsup q behaviour of
    log A(t)/log t is kept while the gaps between windows close up.
    """
    windows = _nolim_pieces(NolimParams(Fraction(0), as_rational(q), b1, pieces))
    filler = Masked(PowerBlocks(), IntervalBlocks(GapList(tuple((int(w.low), int(w.high)) for w in windows))))
    return Union((filler,) + tuple(windows), disjoint=True)


# ---------------------------------------------------------------------------
# Arbitrary dispersion construction
# ---------------------------------------------------------------------------

TupleRule = Callable[[int], Tuple[Fraction, ...]]


@dataclass(frozen=True)
class DispersionParams:
    """
    Parameters of the dispersion construction with R^k dense, R^(k+1) not dense,
    lower dispersion d and log A(t)/log t -> lam.

    kappa and kappa_blocks replace the power slices of the listed blocks by exponent
    kappa < lam (kappa = 0 deletes them), so the lower limit of log A(t)/log t drops to kappa.
    """
    k: int = 2
    d: Fraction = Fraction(1, 4)
    lam: Fraction = Fraction(1, 2)
    n_max: int = 5
    tuple_rule: Optional[TupleRule] = None
    kappa: Optional[Fraction] = None
    kappa_blocks: Tuple[int, ...] = ()

    def __post_init__(self):
        d, lam = as_rational(self.d), as_rational(self.lam)
        if self.k < 1:
            raise InfeasibleParameters(f"k={self.k} must be >= 1")
        if not 0 < d <= Fraction(1, self.k):
            raise InfeasibleParameters(f"d={d} outside (0, 1/{self.k}]")
        if not 0 <= lam <= 1:
            raise InfeasibleParameters(f"lambda={lam} outside [0, 1]")
        if self.n_max < 1:
            raise InfeasibleParameters(f"n_max={self.n_max} must be >= 1")
        object.__setattr__(self, 'd', d)
        object.__setattr__(self, 'lam', lam)
        if self.kappa is not None:
            kappa = as_rational(self.kappa)
            if not 0 <= kappa < lam:
                raise InfeasibleParameters(f"kappa={kappa} must lie in [0, lambda)")
            object.__setattr__(self, 'kappa', kappa)
        object.__setattr__(self, 'kappa_blocks', tuple(self.kappa_blocks))

    def exponent(self, n: int) -> Fraction:
        if self.kappa is not None and n in self.kappa_blocks:
            return self.kappa
        return self.lam


def admissible_tuple(values: Tuple[Fraction, ...], n: int, k: int) -> bool:
    """(4n-1)! * q_l is an integer >= (4n-2)! for every l, and 0 < q_1 < ... < q_(k-1) < 1."""
    if len(values) != k - 1:
        return False
    if any(not 0 < v < 1 for v in values) or any(a >= b for a, b in zip(values, values[1:])):
        return False
    scale, floor_value = math.factorial(4 * n - 1), math.factorial(4 * n - 2)
    return all((scale * v).denominator == 1 and scale * v >= floor_value for v in values)


def farey_tuples(k: int, n_max: int) -> List[Tuple[Fraction, ...]]:
    """
    Default enumeration of the (k-1)-tuples of the dispersion construction: for each n,
    the first unused admissible tuple, ordered by largest denominator and then lexicographically.
    """
    chosen: List[Tuple[Fraction, ...]] = []
    used = set()
    for n in range(1, n_max + 1):
        found = None
        for top in itertools.count(2):
            grid = sorted({Fraction(a, b) for b in range(2, top + 1) for a in range(1, b)})
            for combo in itertools.combinations(grid, k - 1):
                if max(v.denominator for v in combo) != top or combo in used:
                    continue
                if admissible_tuple(combo, n, k):
                    found = combo
                    break
            if found is not None:
                break
        used.add(found)
        chosen.append(found)
    return chosen


def dispersion_tuples(params: DispersionParams) -> List[Tuple[Fraction, ...]]:
    """Tuples q^(n) for n = 1 ... n_max, validated."""
    if params.k < 2:
        return []
    if params.tuple_rule is None:
        tuples = farey_tuples(params.k, params.n_max)
    else:
        tuples = [tuple(as_rational(v) for v in params.tuple_rule(n)) for n in range(1, params.n_max + 1)]
    for n, values in enumerate(tuples, start=1):
        if not admissible_tuple(values, n, params.k):
            raise InfeasibleParameters(f"tuple {values} is not admissible at n={n}")
    return tuples


def _block_pieces(params: DispersionParams, n: int, values: Tuple[Fraction, ...]) -> List[SetDescriptor]:
    f = math.factorial
    pieces: List[SetDescriptor] = []
    exponent = params.exponent(n)
    if exponent > 0:
        low = max(Fraction(f(4 * n - 4)), params.d * f(4 * n - 3))
        high = 2 * params.d / (2 - params.d) * f(4 * n - 3)
        pieces.append(PowerRoot(exponent, low, high))
    scale = f(4 * n - 1)
    pieces.append(FinitePoints(tuple(int(scale * v) for v in values) + (scale,)))
    if params.d < 1:
        pieces.append(GeometricCeil(Fraction(scale), 1 / (1 - params.d), 1, None, Fraction(f(4 * n))))
    return pieces


def _scaled_factorial_base(d: Fraction, lam: Fraction, n: int) -> Fraction:
    """base with base^(1/a) = d_n * n! where lam = a/b; d_n = (1 - 1/n)^(1/lam) when d = 1."""
    a, b = lam.numerator, lam.denominator
    if d < 1:
        return (d * math.factorial(n)) ** a
    return Fraction(n - 1, n) ** b * math.factorial(n) ** a


def _single_dimension_set(params: DispersionParams) -> SetDescriptor:
    d, lam = params.d, params.lam
    if lam == 0:
        if d < 1:
            return GeometricCeil(Fraction(1), 1 / (1 - d))
        return FactorialPoints()
    slices: Dict[Fraction, List[Tuple[int, int]]] = {}
    extras = set()
    previous_top = 0
    for n in range(1, params.n_max + 1):
        base = _scaled_factorial_base(d, lam, n)
        extras.update((ceil_power(base, Fraction(1, lam.numerator)), math.factorial(n)))
        # j runs over [(d_n n!)^lam, (n!)^lam]
        j_lo = ceil_power(base, Fraction(1, lam.denominator))
        j_hi = floor_power(math.factorial(n), lam)
        if j_lo > j_hi:
            continue
        low = max(ceil_power(j_lo - 1, 1 / lam) if j_lo > 1 else 0, previous_top)
        high = ceil_power(j_hi, 1 / lam)
        previous_top = max(previous_top, high)
        exponent = params.exponent(n)
        if exponent > 0 and high > low:
            slices.setdefault(exponent, []).append((low, high))
    # windows are clipped against each other, so slices never share a value
    parts: List[SetDescriptor] = [Masked(PowerRoot(e), IntervalBlocks(IntervalList(tuple(w))))
                                  for e, w in sorted(slices.items(), reverse=True)]
    covered = Union(tuple(parts), disjoint=True)
    points = tuple(sorted(e for e in extras if e > 0 and not covered.contains(e)))
    if points:
        parts.append(FinitePoints(points))
    return Union(tuple(parts), disjoint=True)


def dispersion_set(params: DispersionParams) -> SetDescriptor:
    """
    Set with lower dispersion d, log A(t)/log t -> lam, R^k dense and R^(k+1) not dense.

    For k >= 2 this is the union over n <= n_max of
      B_n = {ceil(j^(1/lam))} on (max{(4n-4)!, d(4n-3)!}, 2d/(2-d) (4n-3)!]   (empty if lam = 0)
      C_n = {(4n-1)! q_l^(n)} plus (4n-1)!
      D_n = {ceil((4n-1)! / (1-d)^j)} on ((4n-1)!, (4n)!]                      (empty if d = 1)
    The three families never overlap, so the union counts as a plain sum.

    For k = 1 the set is the union of {ceil(d_n n!), n!} and the power slices between them,
    or a geometric / factorial set when lam = 0.

    Args:
        params: DispersionParams

    Returns:
        SetDescriptor
    """
    if params.k == 1:
        return _single_dimension_set(params)
    tuples = dispersion_tuples(params)
    parts: List[SetDescriptor] = []
    for n, values in enumerate(tuples, start=1):
        parts.extend(_block_pieces(params, n, values))
    return Union(tuple(parts), disjoint=True)


def dispersion_checkpoints(params: DispersionParams) -> List[Fraction]:
    """t = d * (4n+1)! at which log A(t)/log t approaches lam from below."""
    return [params.d * math.factorial(4 * n + 1) for n in range(1, params.n_max + 1)]


# ---------------------------------------------------------------------------
# Family registry for the command line and JSON suites
# ---------------------------------------------------------------------------

def _flag(value) -> bool:
    return str(value).lower() in ('1', 'true', 'yes', 'closed')


def _blocks(value) -> Tuple[int, ...]:
    return tuple(int(v) for v in str(value).split(',') if v.strip())


def _nolim_params(p: Dict) -> NolimParams:
    return NolimParams(as_rational(p.get('p', '1/2')), as_rational(p.get('q', '7/10')),
                       int(p.get('b1', 2)), int(p.get('pieces', 10)))


def build_family(name: str, params: Optional[Dict] = None) -> SetDescriptor:
    """
    Build a named family from string parameters (as given by --param key=value).

    Args:
        name: Family name, see FAMILIES
        params: Parameter strings

    Returns:
        SetDescriptor
    """
    params = dict(params or {})
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; choose from {', '.join(sorted(FAMILIES))}")
    return FAMILIES[name](params)


FAMILIES: Dict[str, Callable[[Dict], SetDescriptor]] = {
    'power': lambda p: power_sequence(p.get('q', '1/2')),
    'naturals': lambda p: naturals(),
    'geometric': lambda p: geometric_set(p.get('anchor', 1), p.get('ratio', 2), int(p.get('j_min', 1))),
    'factorial': lambda p: factorial_interval_set(_flag(p.get('closed', False))),
    'mixed': lambda p: mixed_progression_set(),
    'nolim': lambda p: nolim_set(_nolim_params(p)),
    'nolim_sparse': lambda p: nolim_sparse_set(_nolim_params(p)),
    'sparse_power': lambda p: sparse_power_set(p.get('q', '1/2'), int(p.get('b1', 2)), int(p.get('pieces', 10))),
    'ndense_sparse_power': lambda p: ndense_sparse_power_set(p.get('q', '1/2'), int(p.get('b1', 2)),
                                                             int(p.get('pieces', 10))),
    'dispersion': lambda p: dispersion_set(DispersionParams(
        int(p.get('k', 2)), as_rational(p.get('d', '1/4')), as_rational(p.get('lambda', '1/2')),
        int(p.get('n_max', 5)), None,
        None if p.get('kappa') is None else as_rational(p['kappa']),
        _blocks(p.get('kappa_blocks', '')))),
    'ndense_zero': lambda p: ndense_zero_lambda_set(),
    'masked': lambda p: masked_set(build_family(p.get('inner', 'power'),
                                                {k[6:]: v for k, v in p.items() if k.startswith('inner.')})),
    'explicit': lambda p: Explicit(_blocks(p.get('elements', ''))),
}
