"""
Tests for the finite-truncation estimators
"""

import math
from fractions import Fraction

import pytest

from analysis import (LimitTrace, consecutive_ratio, df_envelope, dispersion_scan, dispersion_trace,
                      geometric_checkpoints, index_dilation_ratio, lambda_trace, lemma1_check, log_count_scan,
                      mean_ratio, moment_ratio, ndense_probe, ratio_scan, step_df, window_attaining)
from core import Explicit, PowerBlocks, count, take_prefix
from generators import (DispersionParams, dispersion_checkpoints, dispersion_set, factorial_interval_set,
                        geometric_set, masked_set, mixed_progression_set, naturals, ndense_zero_lambda_set,
                        power_sequence)

SQUARES = power_sequence(Fraction(1, 2))


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

def test_trace_verdicts():
    assert LimitTrace('flat', [(1, 1.0), (2, 0.5), (3, 0.5), (4, 0.5)]).verdict == 'converged'
    assert LimitTrace('grow', [(i, 2.0 ** i) for i in range(1, 9)]).verdict == 'diverging'
    assert LimitTrace('swing', [(i, float(i % 2)) for i in range(1, 9)]).verdict == 'oscillating'
    with pytest.raises(ValueError):
        LimitTrace('empty', [])


def test_trace_json():
    trace = LimitTrace('t', [(10, Fraction(1, 3)), (20, Fraction(1, 2))])
    obj = trace.to_json()
    assert obj['checkpoints'][0] == ['10', {'exact': '1/3', 'decimal': 1 / 3}]
    assert obj['limit']['exact'] == '1/2'
    assert trace.converges_to(Fraction(1, 2))


def test_geometric_checkpoints():
    assert geometric_checkpoints(1, 16, per_octave=1) == [1, 2, 4, 8, 16]
    assert geometric_checkpoints(5, 3) == []


# ---------------------------------------------------------------------------
# Step distribution functions
# ---------------------------------------------------------------------------

def test_step_df_examples():
    prefix = take_prefix(SQUARES, 4)
    assert step_df(prefix, 4, Fraction(1, 2)) == Fraction(1, 2)
    assert step_df(prefix, 4, Fraction(3, 5)) == Fraction(3, 4)
    assert step_df(prefix, 4, 0) == 0
    assert step_df(prefix, 4, 1) == 1
    with pytest.raises(ValueError):
        step_df(prefix, 5, Fraction(1, 2))
    with pytest.raises(ValueError):
        step_df(prefix, 2, Fraction(3, 2))


def test_envelope_of_squares_is_square_root():
    prefix = take_prefix(SQUARES, 2000)
    envelope = df_envelope(prefix, (1000, 2000), [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1])
    assert envelope.model.kind == 'power'
    assert envelope.model.q == Fraction(1, 2)
    assert abs(envelope.q_hat - 0.5) < 0.01
    assert envelope.singleton


def test_envelope_of_powers_of_two_is_c0():
    prefix = take_prefix(geometric_set(1, 2), 1500)
    envelope = df_envelope(prefix, (1000, 1500), [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1])
    assert envelope.model.kind == 'c0'
    assert envelope.singleton


def test_envelope_of_factorial_set_spans_zero_to_one():
    factorial = factorial_interval_set()
    n = count(factorial, 2 * math.factorial(8))
    assert n == 44740
    envelope = df_envelope(take_prefix(factorial, n), (4000, n), [Fraction(1, 2)])
    assert envelope.lower[0] < Fraction(1, 10)
    assert envelope.upper[0] > Fraction(95, 100)
    assert not envelope.singleton


def test_envelope_rejects_bad_window():
    prefix = take_prefix(SQUARES, 10)
    with pytest.raises(ValueError):
        df_envelope(prefix, (8, 4), [Fraction(1, 2)])
    with pytest.raises(ValueError):
        df_envelope(prefix, (1, 20), [Fraction(1, 2)])


def test_window_attaining():
    prefix = take_prefix(SQUARES, 300)
    best = window_attaining(prefix, Fraction(1, 4), Fraction(1, 2), (100, 200))
    assert 100 <= best.n <= 200
    assert best.residual <= Fraction(1, 100)
    with pytest.raises(ValueError):
        window_attaining(prefix, 1, Fraction(1, 2), (100, 200))


# ---------------------------------------------------------------------------
# Prefix statistics
# ---------------------------------------------------------------------------

def test_mean_ratio_of_squares():
    trace = mean_ratio(take_prefix(SQUARES, 20_000))
    assert isinstance(trace.limit, Fraction)
    assert abs(trace.limit - Fraction(1, 3)) < Fraction(5, 1000)


def test_moment_ratio_of_squares():
    trace = moment_ratio(take_prefix(SQUARES, 20_000), 2)
    assert abs(trace.limit - 0.2) < 5e-3


def test_lambda_trace_of_squares():
    trace = lambda_trace(take_prefix(SQUARES, 10_000))
    assert abs(trace.running_sup - 0.5) < 1e-9
    assert abs(trace.running_inf - 0.5) < 1e-9


def test_dispersion_trace_of_powers_of_two():
    trace = dispersion_trace(take_prefix(geometric_set(1, 2), 50))
    assert trace.running_inf == 0.5
    assert trace.checkpoints[0] == (1, 1.0)


def test_consecutive_and_dilation_ratios():
    assert consecutive_ratio(take_prefix(naturals(), 1000)).verdict == 'converged'
    squares = index_dilation_ratio(take_prefix(SQUARES, 200), 2)
    assert squares.verdict == 'converged' and squares.limit == 4
    assert index_dilation_ratio(take_prefix(geometric_set(1, 2), 60), 2).verdict == 'diverging'
    with pytest.raises(ValueError):
        index_dilation_ratio(take_prefix(SQUARES, 10), 1)


# ---------------------------------------------------------------------------
# Counting statistics
# ---------------------------------------------------------------------------

def test_ratio_scan_of_squares():
    trace = ratio_scan(SQUARES, 2, [10**8, 10**9, 10**10])
    assert all(abs(float(v) - math.sqrt(2)) < 1e-3 for v in trace.values)
    with pytest.raises(ValueError, match="A\\(t\\) = 0"):
        ratio_scan(Explicit((100,)), 2, [5])
    with pytest.raises(ValueError):
        ratio_scan(SQUARES, 0, [10])


def test_ratio_scan_of_mixed_set():
    f = math.factorial
    trace = ratio_scan(mixed_progression_set(), 2, [f(2 * k) for k in range(6, 9)])
    assert all(abs(v - Fraction(3, 2)) < Fraction(5, 100) for v in trace.values)


def test_ratio_scan_envelope_of_factorial_set():
    f = math.factorial
    factorial = factorial_interval_set()
    low = ratio_scan(factorial, Fraction(1, 2), [2 * f(2 * k) for k in range(9, 13)])
    high = ratio_scan(factorial, Fraction(1, 2), [2 * f(2 * k + 1) for k in range(1, 9)])
    assert max(low.values) < Fraction(5, 100)
    assert min(high.values) > Fraction(95, 100)


def test_log_count_scan_of_squares():
    trace = log_count_scan(SQUARES, [10**4, 10**10])
    assert all(abs(v - 0.5) < 1e-9 for v in trace.values)


def test_dispersion_scan_of_factorial_set():
    factorial = factorial_interval_set()
    assert dispersion_scan(factorial, math.factorial(61)).running_inf < 0.02
    at_seven = dispersion_scan(factorial, checkpoints=[math.factorial(7)])
    assert at_seven.values == [601 / 5040]
    with pytest.raises(ValueError):
        dispersion_scan(factorial)


def test_dispersion_construction_statistics():
    params = DispersionParams()
    s = dispersion_set(params)
    assert abs(dispersion_scan(s, math.factorial(20)).running_inf - 0.25) < 0.05
    deep = DispersionParams(n_max=11)
    values = log_count_scan(dispersion_set(deep), dispersion_checkpoints(deep)).values
    # the first checkpoints overshoot; from n = 3 on the exponent climbs towards lambda
    assert values[0] > values[1] > values[2]
    assert all(a < b < 0.5 for a, b in zip(values[2:], values[3:]))
    assert all(abs(v - 0.5) < 0.1 for v in values[9:])


def test_lemma1_on_squares():
    report = lemma1_check(SQUARES, 2, (10**8, 10**10))
    assert abs(float(report.grid_sup) - math.sqrt(2)) < 1e-3
    assert report.sup_gap < Fraction(1, 100)
    assert report.inf_gap < Fraction(1, 100)


def test_lemma1_on_mixed_set():
    report = lemma1_check(mixed_progression_set(), 2, (math.factorial(6), math.factorial(16)))
    assert report.sup_gap < Fraction(1, 100)
    assert report.inf_gap < Fraction(1, 100)
    assert abs(report.grid_inf - Fraction(3, 2)) < Fraction(5, 100)
    with pytest.raises(ValueError):
        lemma1_check(SQUARES, 1, (10, 100))


def test_ndense_probe_squares_and_powers_of_two():
    squares = ndense_probe(SQUARES, [Fraction(101, 100)], (10**5, 10**9))
    assert squares.condition_i and squares.condition_ii
    assert squares.results[0].violations == ()
    powers = ndense_probe(geometric_set(1, 2), [Fraction(6, 5)], (10, 10**6))
    assert not powers.condition_i
    assert 1024 in powers.results[0].violations
    with pytest.raises(ValueError):
        ndense_probe(SQUARES, [1], (10, 100))


@pytest.mark.parametrize("descriptor, n", [
    (naturals(), 10**4),
    (SQUARES, 10**4),
    (geometric_set(1, 2), 100),
    (geometric_set(1, Fraction(4, 3)), 200),
    (mixed_progression_set(), 10**5),
])
def test_ndense_scan_agrees_with_consecutive_ratio(descriptor, n):
    report = ndense_probe(descriptor, [Fraction(101, 100)], (10**5, 10**9))
    ratio_to_one = float(consecutive_ratio(take_prefix(descriptor, n)).running_sup) <= 1.01
    assert (not report.results[0].violations) == ratio_to_one


def test_masked_squares_keep_exponent_but_lose_ndense():
    f = math.factorial
    masked = masked_set(SQUARES)
    report = ndense_probe(masked, [Fraction(2)], (10**3, 10**9))
    assert not report.condition_i
    # 70^2 and 602^2 close the blocks [6!, 7!] and [8!, 9!]
    assert {4900, 362404} <= set(report.results[0].violations)
    assert dispersion_scan(masked, f(15)).running_inf < 0.1
    assert all(abs(v - 0.5) < 0.02 for v in log_count_scan(masked, [f(13), f(15), f(17)]).values)


def test_ndense_zero_ratio_tends_to_one():
    tops = [PowerBlocks.block_range(n)[1] ** n for n in range(3, 9)]
    values = ratio_scan(ndense_zero_lambda_set(), 2, tops).values
    assert all(a > b for a, b in zip(values, values[1:]))
    assert 1 < values[-1] < Fraction(101, 100)


@pytest.mark.parametrize("q", [Fraction(1, 3), Fraction(1, 2), Fraction(1)])
def test_power_sequence_summary_chain(q):
    s = power_sequence(q)
    for c in (Fraction(3, 2), Fraction(2), Fraction(3)):
        values = ratio_scan(s, c, geometric_checkpoints(10**8, 10**10)).values
        assert all(abs(float(v) - float(c) ** float(q)) < 1e-2 for v in values)
    prefix = take_prefix(s, 10**4)
    assert float(consecutive_ratio(prefix).limit) < 1.01
    assert dispersion_trace(prefix).limit < 0.01
    assert abs(lambda_trace(prefix).limit - float(q)) < 0.01


@pytest.mark.parametrize("subset, superset", [
    (SQUARES, naturals()),
    (geometric_set(1, 4), geometric_set(1, 2)),
    (masked_set(SQUARES), SQUARES),
    (factorial_interval_set(), naturals()),
])
def test_estimates_are_monotone_under_inclusion(subset, superset):
    # the n-th element of a subset is at least the n-th element of the superset
    small = lambda_trace(take_prefix(subset, 200)).values
    large = lambda_trace(take_prefix(superset, 200)).values
    assert all(x <= y for x, y in zip(small, large))
    checkpoints = [10**3, 10**5, 10**7]
    sparse = dispersion_scan(subset, checkpoints=checkpoints).values
    dense = dispersion_scan(superset, checkpoints=checkpoints).values
    assert all(x >= y for x, y in zip(sparse, dense))
