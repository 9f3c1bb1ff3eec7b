#!/usr/bin/env python3
"""
Suite Runner for the ratioblock toolkit
Replays the acceptance checks (built-in or from a JSON suite file) and collects a SuiteReport
"""

import bisect
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis import (LimitTrace, consecutive_ratio, dispersion_scan, dispersion_trace,
                      geometric_checkpoints, index_dilation_ratio, lambda_trace, lemma1_check,
                      log_count_scan, mean_ratio, moment_ratio, ndense_probe, ratio_scan)
from config import ANALYSIS_CONFIG, EXIT_FAIL, EXIT_PASS, SUITE_CONFIG
from core import (PowerBlocks, RatioBlockError, as_natural, as_rational, count, enumerate_range,
                  take_prefix)
from generators import (DispersionParams, NolimParams, build_family, dispersion_checkpoints,
                        dispersion_set, dispersion_tuples, factorial_interval_set, geometric_set,
                        mixed_progression_set, naturals, ndense_zero_lambda_set, nolim_set,
                        power_sequence)
from ratiogeom import (SpherePoint, coverage_of_sets, dispersion_bound_check, forbidden_region_scan,
                       map_involution, map_orthant, map_sphere, RatioPoint, tuple_realized)
from report import CheckResult, SuiteReport, emit


# Anchors every built-in check must name
ANCHORS = {
    'mean-ratio': 'S_n tends to q/(q+1) for a regular sequence with exponent q',
    'regular-variation': 'A(ct)/A(t) tends to c^q',
    'exponent-of-convergence': 'log n / log a_n tends to the exponent of convergence',
    'oscillating-ratio': 'A(2t)/A(t) oscillates between 3/2 and 3',
    'envelope': 'liminf of F(A_n, x) is 0 and limsup is 1',
    'restricted-extrema': 'extrema of A(ct)/A(t) over all t equal those over t = a_n/c',
    'homeomorphism': 'F and G invert each other, H_j is an involution',
    'ndense': 'A(ct) > A(t) for all large t, equivalently a_(n+1)/a_n -> 1',
    'dispersion': 'lower dispersion limits and the 1/k bound under dense R^k',
    'arbitrary-dispersion': 'prescribed lower dispersion d and exponent lambda',
    'zero-exponent-ndense': 'consecutive ratio inside block n is at most (1 + n^(1-n))^n',
    'two-exponent': 'liminf log A(t)/log t = p and limsup = q',
    'oracle': 'closed-form counting agrees with enumeration',
}


class MalformedSuite(RatioBlockError, ValueError):
    """A suite definition that cannot be run."""


@dataclass(frozen=True)
class Check:
    """
    One check of a suite.

    kind 'value': compute() returns a number, pass iff |computed - expected| <= tolerance.
    kind 'predicate': compute() returns (bool, witnesses).
    """
    name: str
    anchor: str
    compute: Callable[[], object]
    expected: object = None
    tolerance: Optional[Fraction] = None
    kind: str = 'value'

    def validate(self):
        if not self.name or not self.anchor:
            raise MalformedSuite(f"check {self.name!r} needs a name and an anchor")
        if self.kind not in ('value', 'predicate'):
            raise MalformedSuite(f"check {self.name}: unknown kind {self.kind!r}")
        if self.kind == 'value' and (self.expected is None or self.tolerance is None or self.tolerance <= 0):
            raise MalformedSuite(f"check {self.name}: value checks need an expected value and a positive tolerance")


@dataclass(frozen=True)
class SuiteSpec:
    name: str
    checks: Tuple[Check, ...] = field(default_factory=tuple)

    def validate(self):
        names = [c.name for c in self.checks]
        if len(set(names)) != len(names):
            raise MalformedSuite(f"suite {self.name}: duplicate check names")
        for check in self.checks:
            check.validate()


def _difference(computed, expected) -> float:
    if isinstance(computed, Fraction) and isinstance(expected, Fraction):
        return abs(computed - expected)
    return abs(float(computed) - float(expected))


def run_check(check: Check) -> CheckResult:
    """
    Run a single check; any exception becomes a failure with the exception text as reason.

    Args:
        check: Check to run

    Returns:
        CheckResult with runtime filled in
    """
    start = time.perf_counter()
    computed, passed, reason, witnesses = None, False, None, ()
    try:
        outcome = check.compute()
        if check.kind == 'predicate':
            computed, witnesses = outcome
            computed = bool(computed)
            passed = computed
            witnesses = tuple(str(w) for w in witnesses)
        else:
            computed = outcome
            passed = _difference(computed, check.expected) <= float(check.tolerance)
    except Exception as e:
        reason = f"{type(e).__name__}: {e}"
    return CheckResult(check.name, check.anchor, check.kind, computed,
                       True if check.kind == 'predicate' else check.expected,
                       check.tolerance, passed, reason, witnesses, time.perf_counter() - start)


def run_suite(spec: SuiteSpec, jobs: Optional[int] = None, verbose: bool = True) -> SuiteReport:
    """
    Run every check of a suite; with jobs > 1 checks run in a thread pool.

    Args:
        spec: Suite to run
        jobs: Worker count (defaults to SUITE_CONFIG['jobs'])
        verbose: Print progress lines

    Returns:
        Finalized SuiteReport ordered by spec order
    """
    spec.validate()
    jobs = SUITE_CONFIG['jobs'] if jobs is None else jobs
    report = SuiteReport(spec.name)
    report.start()

    if verbose:
        print("\n" + "=" * 60)
        print(f"RATIOBLOCK SUITE: {spec.name} ({len(spec.checks)} checks)")
        print("=" * 60)

    def record(index: int, result: CheckResult):
        report.update(index, result)
        if verbose:
            mark = '✓' if result.passed else '✗'
            extra = f" ({result.reason})" if result.reason else ''
            print(f"  {mark} {result.name} [{result.runtime:.2f}s]{extra}")

    if jobs > 1 and len(spec.checks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(run_check, check): i for i, check in enumerate(spec.checks)}
            for future in as_completed(futures):
                record(futures[future], future.result())
    else:
        for i, check in enumerate(spec.checks):
            record(i, run_check(check))

    report.finalize()
    if verbose:
        print("\n" + "=" * 60)
        print("SUITE SUMMARY")
        print("=" * 60)
        print(f"  Passed: {report.passed}/{len(spec.checks)}")
        for result in report.ordered:
            if not result.passed:
                print(f"  ✗ {result.name}: {result.reason or 'out of tolerance'}")
    return report


# ---------------------------------------------------------------------------
# Statistic registry (shared with the command line)
# ---------------------------------------------------------------------------

def _checkpoints(options: Dict) -> List[Fraction]:
    if 'checkpoints' in options:
        return [as_rational(t) for t in options['checkpoints']]
    if 'lo' in options and 'hi' in options:
        return geometric_checkpoints(as_natural(options['lo']), as_natural(options['hi']),
                                     int(options.get('per_octave', 4)))
    raise MalformedSuite("statistic needs 'checkpoints' or 'lo' and 'hi'")


def _prefix(descriptor, options: Dict):
    if 'n' not in options:
        raise MalformedSuite("prefix statistics need option 'n'")
    return take_prefix(descriptor, as_natural(options['n']))


STATISTICS: Dict[str, Callable[[object, Dict], LimitTrace]] = {
    'mean_ratio': lambda d, o: mean_ratio(_prefix(d, o)),
    'moment_ratio': lambda d, o: moment_ratio(_prefix(d, o), o.get('alpha', 1)),
    'lambda': lambda d, o: lambda_trace(_prefix(d, o)),
    'dispersion': lambda d, o: dispersion_trace(_prefix(d, o)),
    'consecutive_ratio': lambda d, o: consecutive_ratio(_prefix(d, o)),
    'index_dilation': lambda d, o: index_dilation_ratio(_prefix(d, o), int(o.get('k', 2))),
    'ratio_scan': lambda d, o: ratio_scan(d, o.get('c', 2), _checkpoints(o)),
    'log_count': lambda d, o: log_count_scan(d, _checkpoints(o)),
    'dispersion_scan': lambda d, o: dispersion_scan(d, as_natural(o['hi']) if 'hi' in o else None,
                                                    _checkpoints(o) if 'hi' not in o else None),
}

REDUCERS = {
    'limit': lambda trace: trace.limit,
    'inf': lambda trace: trace.running_inf,
    'sup': lambda trace: trace.running_sup,
}


def compute_statistic(family: str, params: Dict, statistic: str, options: Dict) -> LimitTrace:
    if statistic not in STATISTICS:
        raise MalformedSuite(f"unknown statistic {statistic!r}; choose from {', '.join(sorted(STATISTICS))}")
    return STATISTICS[statistic](build_family(family, params), options)


def _json_check(entry: Dict) -> Check:
    try:
        name, family, statistic = entry['name'], entry['family'], entry['statistic']
        expected, tolerance = as_rational(entry['expected']), as_rational(entry['tolerance'])
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedSuite(f"suite entry {entry!r} is incomplete: {e}") from e
    params, options = dict(entry.get('params', {})), dict(entry.get('options', {}))
    reduce = options.pop('reduce', 'limit')
    if statistic not in STATISTICS or reduce not in REDUCERS:
        raise MalformedSuite(f"check {name}: unknown statistic {statistic!r} or reduction {reduce!r}")
    compute = lambda: REDUCERS[reduce](compute_statistic(family, params, statistic, options))
    return Check(name, entry.get('anchor', ''), compute, expected, tolerance, 'value')


def load_suite(filename: str) -> SuiteSpec:
    """Read a JSON suite file: {"name": ..., "checks": [{name, anchor, family, params, statistic, options, expected, tolerance}]}."""
    try:
        with open(filename) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedSuite(f"cannot read suite {filename}: {e}") from e
    if not isinstance(data, dict) or not isinstance(data.get('checks', []), list):
        raise MalformedSuite(f"suite {filename} must be an object with a list of checks")
    spec = SuiteSpec(str(data.get('name', 'custom')), tuple(_json_check(e) for e in data.get('checks', [])))
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# Built-in acceptance suite
# ---------------------------------------------------------------------------

def _worst(values: Sequence, target) -> object:
    """The value farthest from target."""
    return max(values, key=lambda v: abs(float(v) - float(target)))


def _rng():
    return np.random.default_rng(ANALYSIS_CONFIG['seed'])


def _homeomorphism_error() -> float:
    rng = _rng()
    worst = 0.0
    for k in (2, 3, 4):
        for y in rng.uniform(0.01, 100.0, size=(10_000, k - 1)):
            back = map_orthant(map_sphere(tuple(y)))
            worst = max(worst, float(np.max(np.abs(np.array(back) - y))))
        for x in np.abs(rng.standard_normal((10_000, k))) + 1e-3:
            point = SpherePoint(tuple(x / np.linalg.norm(x)))
            back = map_sphere(map_orthant(point))
            worst = max(worst, float(np.max(np.abs(np.array(back.coordinates) - np.array(point.coordinates)))))
    return worst


def _involution_exact():
    rng = _rng()
    failures = []
    for _ in range(1000):
        size = int(rng.integers(1, 4))
        numerators = [int(a) for a in rng.integers(1, 10**6, size=size)]
        denominator = int(rng.integers(1, 10**6))
        j = int(rng.integers(1, size + 1))
        point = RatioPoint.from_witness(numerators, denominator)
        plain = point.coordinates
        if map_involution(map_involution(point, j), j).coordinates != plain \
                or map_involution(map_involution(plain, j), j) != plain:
            failures.append(f"{numerators}/{denominator}@{j}")
    return not failures, failures


def _lemma1_gap(descriptor, c, window) -> Fraction:
    report = lemma1_check(descriptor, c, window)
    return max(report.sup_gap, report.inf_gap)


def _ndense_fixtures():
    """(name, descriptor, prefix length) for the probe-versus-consecutive-ratio agreement."""
    factorial = factorial_interval_set()
    return [
        ('naturals', naturals(), 10**4),
        ('squares', power_sequence(Fraction(1, 2)), 10**4),
        ('powers_of_two', geometric_set(1, 2), 100),
        ('four_thirds', geometric_set(1, Fraction(4, 3)), 200),
        ('factorial', factorial, count(factorial, math.factorial(9)) + 1),
        ('mixed', mixed_progression_set(), 10**5),
    ]


def _probe_agreement():
    disagreements = []
    for name, descriptor, n in _ndense_fixtures():
        probe = ndense_probe(descriptor, [Fraction(101, 100)], (10**5, 10**9))
        probe_dense = not probe.results[0].violations
        ratio_to_one = float(consecutive_ratio(take_prefix(descriptor, n)).running_sup) <= 1 + ANALYSIS_CONFIG['tol']
        if probe_dense != ratio_to_one:
            disagreements.append(name)
    return not disagreements, disagreements


def _violation_per_decade():
    probe = ndense_probe(geometric_set(1, 2), [Fraction(6, 5)], (10, 10**6))
    violations = probe.results[0].violations
    empty = [f"1e{i}" for i in range(1, 6) if not any(10**i <= t < 10**(i + 1) for t in violations)]
    return not empty, empty


def _dispersion_bound():
    failures = []
    factorial = factorial_interval_set()
    fixtures = [('naturals', naturals(), 10**4, None),
                ('squares', power_sequence(Fraction(1, 2)), 10**4, None),
                ('powers_of_two', geometric_set(1, 2), 100, None),
                ('four_thirds', geometric_set(1, Fraction(4, 3)), 200, None),
                ('factorial', factorial, None, dispersion_scan(factorial, math.factorial(61)))]
    for name, descriptor, n, trace in fixtures:
        coverage = coverage_of_sets(descriptor, descriptor, 2, 10, 10**6)
        prefix = None if n is None else take_prefix(descriptor, n)
        bound = dispersion_bound_check(prefix, 2, coverage, trace)
        if bound.applicable and not bound.holds:
            failures.append(f"{name}: {bound.dispersion:.4f}")
    return not failures, failures


def _dispersion_exponents(n_max: int = 11) -> List[float]:
    """log A(t)/log t at t = d(4n+1)!, n = 1 ... n_max; the first two overshoot, then it climbs towards lam."""
    params = DispersionParams(n_max=n_max)
    return log_count_scan(dispersion_set(params), dispersion_checkpoints(params)).values


def _dispersion_exponent_trend():
    values = _dispersion_exponents()[2:]
    increasing = all(a < b for a, b in zip(values, values[1:]))
    return increasing and all(v < DispersionParams().lam for v in values), [f"{v:.4f}" for v in values]


def _tuples_realized():
    params = DispersionParams()
    descriptor = dispersion_set(params)
    missing = [values for n, values in enumerate(dispersion_tuples(params), start=1)
               if not tuple_realized(descriptor, values, math.factorial(4 * n - 1))]
    return not missing, missing


def _forbidden_region_clear():
    params = DispersionParams()
    descriptor = dispersion_set(params)
    prefix = take_prefix(descriptor, count(descriptor, math.factorial(16)))
    scan = forbidden_region_scan(prefix, 3, params.d)
    return scan.forbidden_checked > 0 and not scan.forbidden_violations, \
        [p.numerators + (p.denominator,) for p in scan.forbidden_violations]


def _zero_exponent_blocks():
    descriptor = ndense_zero_lambda_set()
    failures = []
    for n in range(2, 6):
        j_lo, j_hi = PowerBlocks.block_range(n)
        block = list(enumerate_range(descriptor, j_lo ** n, j_hi ** n))
        worst = max(Fraction(b, a) for a, b in zip(block, block[1:]))
        if worst > (1 + Fraction(1, n ** (n - 1))) ** n or (n == 5 and worst > Fraction(101, 100)):
            failures.append(f"block {n}: {float(worst):.6f}")
    return not failures, failures


def _oracle_fixtures():
    return [('naturals', naturals()), ('squares', power_sequence(Fraction(1, 2))),
            ('powers_of_two', geometric_set(1, 2)), ('four_thirds', geometric_set(1, Fraction(4, 3))),
            ('factorial', factorial_interval_set()), ('mixed', mixed_progression_set()),
            ('ndense_zero', ndense_zero_lambda_set()),
            ('nolim', nolim_set(NolimParams(Fraction(1, 2), Fraction(7, 10)))),
            ('dispersion', dispersion_set(DispersionParams(n_max=3)))]


def _oracle_equivalence():
    rng = _rng()
    mismatches = []
    for name, descriptor in _oracle_fixtures():
        elements = list(enumerate_range(descriptor, 0, 10**6))
        for x in rng.integers(1, 10**6 + 1, size=1000):
            x = int(x)
            if count(descriptor, x) != bisect.bisect_right(elements, x):
                mismatches.append(f"{name}@{x}")
    return not mismatches, mismatches


def builtin_suite() -> SuiteSpec:
    """The acceptance suite, at truncations where every bound is attained."""
    squares = power_sequence(Fraction(1, 2))
    mixed = mixed_progression_set()
    factorial = factorial_interval_set()
    f = math.factorial
    checks: List[Check] = []

    for q in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
        checks.append(Check(f'mean_ratio_q={q}', 'mean-ratio',
                            lambda q=q: mean_ratio(take_prefix(power_sequence(q), 200_000)).limit,
                            q / (q + 1), Fraction(5, 1000)))

    for c in (Fraction(3, 2), Fraction(2), Fraction(3)):
        checks.append(Check(f'regular_variation_c={c}', 'regular-variation',
                            lambda c=c: _worst(ratio_scan(squares, c, geometric_checkpoints(10**8, 10**10)).values,
                                               math.sqrt(c)),
                            math.sqrt(c), Fraction(1, 1000)))

    checks.append(Check('lambda_squares', 'exponent-of-convergence',
                        lambda: _worst(lambda_trace(take_prefix(squares, 10**4)).values, 0.5),
                        Fraction(1, 2), Fraction(1, 10**9)))
    ndense = ndense_zero_lambda_set()
    block_five_top = PowerBlocks.block_range(5)[1] ** 5
    checks.append(Check('lambda_ndense_zero_block5', 'exponent-of-convergence',
                        lambda: (lambda s: (s < 0.21, [f"{s:.4f}"]))(
                            lambda_trace(take_prefix(ndense, count(ndense, block_five_top))).running_sup),
                        kind='predicate'))

    checks.append(Check('mixed_ratio_even_factorials', 'oscillating-ratio',
                        lambda: _worst(ratio_scan(mixed, 2, [f(2 * k) for k in range(6, 9)]).values, 1.5),
                        Fraction(3, 2), Fraction(5, 100)))
    checks.append(Check('mixed_ratio_odd_factorials', 'oscillating-ratio',
                        lambda: _worst(ratio_scan(mixed, 2, [f(2 * k - 1) for k in range(25, 28)]).values, 3),
                        Fraction(3), Fraction(5, 100)))

    checks.append(Check('factorial_envelope_low', 'envelope',
                        lambda: max(ratio_scan(factorial, Fraction(1, 2), [2 * f(2 * k) for k in range(9, 13)]).values),
                        Fraction(0), Fraction(5, 100)))
    checks.append(Check('factorial_envelope_high', 'envelope',
                        lambda: min(ratio_scan(factorial, Fraction(1, 2), [2 * f(2 * k + 1) for k in range(1, 9)]).values),
                        Fraction(1), Fraction(5, 100)))

    checks.append(Check('restricted_extrema_squares', 'restricted-extrema',
                        lambda: _lemma1_gap(squares, 2, (10**8, 10**10)), Fraction(0), Fraction(1, 100)))
    checks.append(Check('restricted_extrema_mixed', 'restricted-extrema',
                        lambda: _lemma1_gap(mixed, 2, (f(6), f(16))), Fraction(0), Fraction(1, 100)))

    checks.append(Check('orthant_sphere_roundtrip', 'homeomorphism', _homeomorphism_error,
                        0.0, Fraction(1, 10**12)))
    checks.append(Check('involution_exact', 'homeomorphism', _involution_exact, kind='predicate'))

    checks.append(Check('ndense_squares_no_violation', 'ndense',
                        lambda: (lambda r: (not r.violations, r.violations[:5]))(
                            ndense_probe(squares, [Fraction(101, 100)], (10**5, 10**9)).results[0]),
                        kind='predicate'))
    checks.append(Check('ndense_powers_of_two_violations', 'ndense', _violation_per_decade, kind='predicate'))
    checks.append(Check('ndense_probe_matches_consecutive_ratio', 'ndense', _probe_agreement, kind='predicate'))

    for name, descriptor, n, target in (('naturals', naturals(), 10**4, Fraction(0)),
                                        ('squares', squares, 10**4, Fraction(0)),
                                        ('powers_of_two', geometric_set(1, 2), 100, Fraction(1, 2)),
                                        ('four_thirds', geometric_set(1, Fraction(4, 3)), 200, Fraction(1, 4))):
        checks.append(Check(f'dispersion_{name}', 'dispersion',
                            lambda d=descriptor, n=n: dispersion_trace(take_prefix(d, n)).running_inf,
                            target, Fraction(2, 100)))
    checks.append(Check('dispersion_factorial', 'dispersion',
                        lambda: dispersion_scan(factorial, f(61)).running_inf, Fraction(0), Fraction(2, 100)))
    checks.append(Check('dispersion_bound_under_coverage', 'dispersion', _dispersion_bound, kind='predicate'))

    checks.append(Check('arbitrary_dispersion_value', 'arbitrary-dispersion',
                        lambda: dispersion_scan(dispersion_set(DispersionParams()), f(20)).running_inf,
                        Fraction(1, 4), Fraction(5, 100)))
    checks.append(Check('arbitrary_dispersion_exponent', 'arbitrary-dispersion',
                        lambda: _worst(_dispersion_exponents()[9:], 0.5), Fraction(1, 2), Fraction(1, 10)))
    checks.append(Check('arbitrary_dispersion_exponent_trend', 'arbitrary-dispersion',
                        _dispersion_exponent_trend, kind='predicate'))
    checks.append(Check('arbitrary_dispersion_tuples_realized', 'arbitrary-dispersion',
                        _tuples_realized, kind='predicate'))
    checks.append(Check('arbitrary_dispersion_forbidden_region', 'arbitrary-dispersion',
                        _forbidden_region_clear, kind='predicate'))

    checks.append(Check('zero_exponent_block_ratios', 'zero-exponent-ndense', _zero_exponent_blocks, kind='predicate'))

    nolim_params = NolimParams(Fraction(1, 2), Fraction(7, 10))
    b = nolim_params.b_values()
    checks.append(Check('two_exponent_lower', 'two-exponent',
                        lambda: _worst(log_count_scan(nolim_set(nolim_params), [b[3], b[5], b[7]]).values, 0.5),
                        Fraction(1, 2), Fraction(5, 100)))
    checks.append(Check('two_exponent_upper', 'two-exponent',
                        lambda: _worst(log_count_scan(nolim_set(nolim_params), [b[4], b[6], b[8]]).values, 0.7),
                        Fraction(7, 10), Fraction(5, 100)))

    checks.append(Check('count_matches_enumeration', 'oracle', _oracle_equivalence, kind='predicate'))

    for check in checks:
        assert(check.anchor in ANCHORS)
    return SuiteSpec('acceptance', tuple(checks))


SUITES = {'acceptance': builtin_suite}


def resolve_suite(name_or_file: str) -> SuiteSpec:
    if name_or_file in SUITES:
        return SUITES[name_or_file]()
    return load_suite(name_or_file)


if __name__ == "__main__":
    suite = resolve_suite(sys.argv[1] if len(sys.argv) > 1 else 'acceptance')
    result = run_suite(suite)
    path = emit(result, 'json')
    print(f"\nResults saved to: {path}")
    sys.exit(EXIT_PASS if result.all_passed else EXIT_FAIL)
