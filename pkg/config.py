"""
Configuration file for the ratioblock analysis toolkit
Contains all tunable parameters for enumeration, estimators and the suite runner
"""

import os
from fractions import Fraction

# Analysis Configuration
ANALYSIS_CONFIG = {
    # Maximum number of elements a single enumeration call may produce
    'element_budget': int(os.environ.get('RATIOBLOCK_BUDGET', 10_000_000)),

    # Limit verdicts on LimitTrace tails
    'tol': 1e-2,              # sup - inf below this on the tail means "converged"
    'tail_fraction': Fraction(1, 2),  # tail window = last half of the checkpoints
    'diverge_factor': 2,      # monotone tail growing by this factor means "diverging"

    # Structural runs
    'trailing_gaps': 4,       # gaps inspected at the top of a power run

    # (N)-denseness probe
    'probe_point_limit': 50_000,   # enumerate every jump point below this many elements
    'probe_grid_per_decade': 40,   # geometric t-grid density otherwise

    # Restricted-extrema comparison
    'lemma1_grid_points': 64,

    # Ratio-set geometry
    'forbidden_threshold': 5040,   # only witnesses with denominator > 7! count
    'forbidden_slack': 0.02,
    'coverage_full': 0.95,         # hit fraction treated as near-full coverage
    'sphere_tol': 1e-12,

    # Seed for every sampled check
    'seed': 0,
}

# Suite runner Configuration
SUITE_CONFIG = {
    'results_dir': 'results',
    'default_format': 'text',
    'jobs': 1,                # > 1 runs checks in a thread pool
}

# Report layout
REPORT_SCHEMA = 'ratioblock-report/1'
CSV_COLUMNS = ('name', 'computed', 'expected', 'tolerance', 'pass')

# Exit codes
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
