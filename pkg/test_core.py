"""
Tests for exact arithmetic, set descriptors and the counting/enumeration operations
"""

import bisect
import json
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from config import ANALYSIS_CONFIG
from core import (BudgetExceeded, Explicit, FactorialBlocks, FactorialPoints, GapList, GeometricCeil, IntervalBlocks,
                  IntervalList, Masked, PowerRoot, Prefix, SetExhausted, StructureError, Union, as_rational, ceil_power,
                  count, descriptor_from_json, encode_rational, enumerate_range, floor_power, iroot_ceil,
                  iroot_floor, load_descriptor, rational_json, read_prefix, save_descriptor, take_prefix,
                  write_prefix)
from generators import (DispersionParams, NolimParams, dispersion_set, factorial_interval_set, geometric_set,
                        masked_set, mixed_progression_set, naturals, ndense_sparse_power_set, ndense_zero_lambda_set,
                        nolim_set, nolim_sparse_set, power_sequence, sparse_power_set)


FIXTURES = {
    'naturals': naturals,
    'squares': lambda: power_sequence(Fraction(1, 2)),
    'three_quarter_power': lambda: power_sequence(Fraction(3, 4)),
    'powers_of_two': lambda: geometric_set(1, 2),
    'four_thirds': lambda: geometric_set(1, Fraction(4, 3)),
    'factorial': factorial_interval_set,
    'mixed': mixed_progression_set,
    'ndense_zero': ndense_zero_lambda_set,
    'masked_squares': lambda: masked_set(power_sequence(Fraction(1, 2))),
    'nolim': lambda: nolim_set(NolimParams(Fraction(1, 2), Fraction(7, 10))),
    'nolim_sparse': lambda: nolim_sparse_set(NolimParams(Fraction(1, 2), Fraction(7, 10))),
    'sparse_power': lambda: sparse_power_set(Fraction(1, 2)),
    'ndense_sparse_power': lambda: ndense_sparse_power_set(Fraction(1, 2)),
    'factorial_points': FactorialPoints,
    'dispersion': lambda: dispersion_set(DispersionParams(n_max=3)),
}
LIMIT = 10**5


@lru_cache(maxsize=None)
def _fixture(name):
    descriptor = FIXTURES[name]()
    return descriptor, list(enumerate_range(descriptor, 0, LIMIT))


# ---------------------------------------------------------------------------
# Numbers
# ---------------------------------------------------------------------------

@given(st.integers(min_value=0, max_value=10**60), st.integers(min_value=1, max_value=12))
def test_iroot_floor_brackets_the_root(n, k):
    r = iroot_floor(n, k)
    assert r ** k <= n < (r + 1) ** k
    c = iroot_ceil(n, k)
    assert c ** k >= n and (c == 0 or (c - 1) ** k < n)


@pytest.mark.parametrize("x, q, floor_value, ceil_value", [
    (10, Fraction(1, 2), 3, 4),
    (8, Fraction(1, 3), 2, 2),
    (Fraction(9, 4), Fraction(1, 2), 1, 2),
    (2, Fraction(3, 2), 2, 3),
    (0, Fraction(1, 2), 0, 0),
])
def test_exact_powers(x, q, floor_value, ceil_value):
    assert floor_power(x, q) == floor_value
    assert ceil_power(x, q) == ceil_value


def test_rational_parsing_and_encoding():
    assert as_rational("7/10") == Fraction(7, 10)
    assert as_rational(0.7) == Fraction(7, 10)
    assert as_rational(" 3 ") == 3
    with pytest.raises(TypeError):
        as_rational(True)
    assert encode_rational(Fraction(6, 4)) == "3/2"
    assert encode_rational(10**30) == str(10**30)
    assert rational_json(Fraction(1, 4)) == {'exact': '1/4', 'decimal': 0.25}
    assert rational_json(0.5)['exact'] is None


# ---------------------------------------------------------------------------
# Counting and enumeration
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(FIXTURES))
@settings(max_examples=60, deadline=None)
@given(x=st.integers(min_value=-5, max_value=LIMIT))
def test_count_matches_enumeration(name, x):
    descriptor, elements = _fixture(name)
    assert count(descriptor, x) == bisect.bisect_right(elements, x)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_enumeration_is_strictly_increasing(name):
    _, elements = _fixture(name)
    assert elements
    assert all(a < b for a, b in zip(elements, elements[1:]))


def test_count_floors_rational_bounds():
    squares = power_sequence(Fraction(1, 2))
    assert count(squares, 100) == 10
    assert count(squares, Fraction(199, 2)) == 9
    assert count(squares, 0) == 0
    assert count(squares, -3) == 0


def test_factorial_interval_counts():
    s = factorial_interval_set()
    assert list(enumerate_range(s, 0, 30)) == [3, 4, 5, 6, 25, 26, 27, 28, 29, 30]
    assert count(s, 24) == 4
    assert count(s, 120) == 100
    closed = factorial_interval_set(closed=True)
    assert count(closed, 6) == 5


def test_geometric_ceilings_drop_repeats():
    s = geometric_set(1, Fraction(4, 3))
    assert take_prefix(s, 6).elements == (2, 3, 4, 5, 6, 8)
    assert s.element(6) == 8
    assert count(s, 7) == 5


def test_enumerate_range_rejects_reversed_and_oversized_ranges():
    with pytest.raises(ValueError):
        enumerate_range(naturals(), 10, 5)
    with pytest.raises(BudgetExceeded) as excinfo:
        enumerate_range(naturals(), 0, 10**9, budget=1000)
    assert excinfo.value.requested == 10**9
    assert list(enumerate_range(naturals(), 5, 5)) == []


def test_take_prefix_and_exhaustion():
    assert take_prefix(power_sequence(Fraction(1, 2)), 5).elements == (1, 4, 9, 16, 25)
    with pytest.raises(SetExhausted):
        take_prefix(Explicit((1, 2, 3)), 4)
    with pytest.raises(ValueError):
        take_prefix(naturals(), 0)
    with pytest.raises(BudgetExceeded):
        take_prefix(naturals(), 10, budget=5)


def test_neighbours_and_membership():
    squares = power_sequence(Fraction(1, 2))
    assert squares.element(10) == 100
    assert squares.predecessor(99) == 81
    assert squares.successor(100) == 121
    assert squares.contains(144) and not squares.contains(145)
    finite = Explicit((3, 7))
    assert finite.successor(7) is None
    assert finite.predecessor(2) is None


def test_power_root_windows_are_half_open():
    piece = PowerRoot(Fraction(1, 2), 4, 49)
    assert list(piece.iter_range(0, 100)) == [9, 16, 25, 36, 49]
    assert piece.upper_bound() == 49
    assert PowerRoot.from_j_range(Fraction(1, 2), 3, 5).count(100) == 3


# ---------------------------------------------------------------------------
# Unions, masks and runs
# ---------------------------------------------------------------------------

def test_overlapping_union_counts_each_element_once():
    u = Union((Explicit((1, 2, 3)), Explicit((2, 3, 4))))
    assert count(u, 10) == 4
    assert list(u.iter_range(0, 10)) == [1, 2, 3, 4]


def test_overlapping_union_enumerates_the_sparser_side():
    squares_and_cubes = Union((power_sequence(Fraction(1, 2)), power_sequence(Fraction(1, 3))))
    # 10^6 squares and 10^4 cubes share the 100 sixth powers
    assert count(squares_and_cubes, 10**12) == 10**6 + 10**4 - 100
    cubes_first = Union((power_sequence(Fraction(1, 3)), power_sequence(Fraction(1, 2))))
    assert count(cubes_first, 10**12) == count(squares_and_cubes, 10**12)


def test_overlapping_dense_union_hits_the_budget(monkeypatch):
    monkeypatch.setitem(ANALYSIS_CONFIG, 'element_budget', 1000)
    u = Union((naturals(), power_sequence(Fraction(1, 2))))
    assert count(u, 900) == 900
    with pytest.raises(BudgetExceeded):
        count(u, 10**9)


def test_gap_list_complements_its_windows():
    gaps = GapList(((10, 20), (4, 6)))
    assert list(gaps.blocks())[:2] == [(0, 4), (6, 10)]
    filled = IntervalBlocks(gaps)
    assert list(filled.iter_range(0, 25)) == [1, 2, 3, 4, 7, 8, 9, 10, 21, 22, 23, 24, 25]
    assert count(filled, 10**6) == 10**6 - 12
    assert filled.upper_bound() is None


def test_factorial_points_are_unbounded():
    s = FactorialPoints()
    assert list(enumerate_range(s, 0, 5040)) == [1, 2, 6, 24, 120, 720, 5040]
    assert count(s, 5039) == 6
    assert count(s, 3628800) == 10
    assert s.element(12) == 479001600
    assert s.upper_bound() is None


def test_interleaving_runs_raise():
    u = Union((IntervalBlocks(IntervalList(((0, 10),))), IntervalBlocks(IntervalList(((5, 20),)))))
    with pytest.raises(StructureError):
        list(u.runs(0, 30))


def test_masked_set_keeps_closed_factorial_blocks():
    m = masked_set(naturals())
    assert list(enumerate_range(m, 0, 30)) == [2, 3, 4, 5, 6, 24, 25, 26, 27, 28, 29, 30]
    assert Masked(naturals(), IntervalBlocks(IntervalList(((10, 12),)))).upper_bound() == 12


def test_mixed_set_runs():
    runs = list(mixed_progression_set().runs(0, 120))
    assert [(r.first, r.last, r.gap) for r in runs] == [(2, 2, 0), (4, 6, 2), (7, 24, 1), (26, 120, 2)]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ['squares', 'four_thirds', 'mixed', 'masked_squares', 'dispersion',
                                  'ndense_sparse_power', 'factorial_points'])
def test_descriptor_json_preserves_counts(name, tmp_path):
    descriptor, _ = _fixture(name)
    path = tmp_path / "descriptor.json"
    save_descriptor(descriptor, str(path))
    loaded = load_descriptor(str(path))
    assert loaded == descriptor
    for x in (1, 100, 5040, LIMIT):
        assert count(loaded, x) == count(descriptor, x)


def test_descriptor_json_uses_decimal_strings():
    obj = GeometricCeil(Fraction(6), Fraction(4, 3), 1, None, Fraction(24)).to_json()
    assert obj == {'family': 'geometric_ceil',
                   'params': {'anchor': '6', 'ratio': '4/3', 'j_min': '1', 'j_max': None, 'high': '24'}}
    assert descriptor_from_json(json.loads(json.dumps(obj))).count(24) == 4
    assert FactorialBlocks(0).to_json() == {'rule': 'factorial', 'shift': 0, 'closed': False}


def test_prefix_json_lines(tmp_path):
    prefix = take_prefix(geometric_set(1, 2), 70)
    text = prefix.to_json_lines()
    assert text.splitlines()[0] == '"2"'
    assert text.splitlines()[-1] == f'"{2 ** 70}"'
    path = tmp_path / "prefix.jsonl"
    write_prefix(prefix, str(path))
    assert read_prefix(str(path)).elements == prefix.elements
    with pytest.raises(ValueError):
        Prefix((3, 2))
