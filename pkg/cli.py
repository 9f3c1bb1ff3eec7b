"""
Command-line surface of the ratioblock toolkit
Subcommands gen, analyze, ratioset, probe and report share --budget, --json and --seed
Sets come from a constructed family (--family NAME --param KEY=VALUE) or a saved descriptor (--in FILE)
"""

import argparse
import json
import sys
from typing import Dict, List, Optional, Tuple

from analysis import df_envelope, lemma1_check, ndense_probe, step_df, window_attaining
from config import ANALYSIS_CONFIG, EXIT_FAIL, EXIT_PASS, EXIT_USAGE, SUITE_CONFIG
from core import (Prefix, RatioBlockError, SetDescriptor, as_natural, as_rational, encode_rational,
                  enumerate_range, load_descriptor, rational_json, read_prefix, save_descriptor, take_prefix,
                  write_prefix)
from generators import FAMILIES, build_family
from ratiogeom import ForbiddenRegion, coverage_of_sets, coverage_probe, ratio_points
from report import emit
from suite_runner import REDUCERS, STATISTICS, SUITES, resolve_suite, run_suite

PREFIX_TOOLS = ('step_df', 'df_envelope', 'window_attaining', 'lemma1_check')


def _pairs(items: Optional[List[str]]) -> Dict[str, object]:
    """key=value pairs; checkpoints=a,b,c becomes a list."""
    result: Dict[str, object] = {}
    for item in items or []:
        if '=' not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        key, value = item.split('=', 1)
        result[key.strip()] = value.split(',') if key.strip() == 'checkpoints' else value.strip()
    return result


def _window(text: Optional[str], what: str = '--window') -> Tuple[str, str]:
    if text is None:
        raise ValueError(f"{what} lo,hi is required")
    parts = text.split(',')
    if len(parts) != 2:
        raise ValueError(f"{what} expects lo,hi, got {text!r}")
    return parts[0].strip(), parts[1].strip()


def _grid(text: Optional[str]) -> List[str]:
    return [] if text is None else [g.strip() for g in text.split(',') if g.strip()]


def _source(args) -> Tuple[SetDescriptor, str]:
    """The set named on the command line and a label for text output."""
    if args.family and args.input:
        raise ValueError("give either --family or --in, not both")
    if args.input:
        return load_descriptor(args.input), args.input
    if not args.family:
        raise ValueError(f"{args.command} needs --family NAME or --in descriptor.json")
    return build_family(args.family, _pairs(args.param)), args.family


def _emit_json(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_gen(args) -> int:
    descriptor, label = _source(args)
    if args.descriptor:
        save_descriptor(descriptor, args.descriptor)
    if args.n is None and args.lo is None and args.hi is None:
        _emit_json(descriptor.to_json())
        return EXIT_PASS
    if args.n is not None:
        prefix = take_prefix(descriptor, args.n)
    else:
        if args.lo is None or args.hi is None:
            raise ValueError("gen needs --n or both --lo and --hi")
        prefix = Prefix(tuple(enumerate_range(descriptor, as_natural(args.lo), as_natural(args.hi))), descriptor)
    if args.out:
        write_prefix(prefix, args.out)
    if args.json:
        _emit_json({'descriptor': descriptor.to_json(), 'elements': [str(a) for a in prefix.elements]})
    elif not args.out:
        sys.stdout.write(prefix.to_json_lines())
    else:
        print(f"{len(prefix)} elements of {label} saved to: {args.out}")
    return EXIT_PASS


def _tool_prefix(args, descriptor: Optional[SetDescriptor], length: int) -> Prefix:
    if args.prefix_in:
        return read_prefix(args.prefix_in, descriptor)
    if descriptor is None:
        raise ValueError(f"{args.statistic} needs --family, --in or --prefix-in")
    return take_prefix(descriptor, length)


def _run_tool(args, descriptor: Optional[SetDescriptor]) -> Dict:
    """step_df, df_envelope, window_attaining and lemma1_check as JSON-ready dicts."""
    if args.statistic == 'step_df':
        if args.n is None or args.x is None:
            raise ValueError("step_df needs --n and --x")
        value = step_df(_tool_prefix(args, descriptor, args.n), args.n, args.x)
        return {'n': args.n, 'x': rational_json(as_rational(args.x)), 'value': rational_json(value)}
    if args.statistic == 'lemma1_check':
        if descriptor is None:
            raise ValueError("lemma1_check needs --family or --in")
        lo, hi = _window(args.window)
        return lemma1_check(descriptor, args.c or '2', (as_natural(lo), as_natural(hi))).to_json()
    lo, hi = (int(v) for v in _window(args.window))
    prefix = _tool_prefix(args, descriptor, hi)
    if args.statistic == 'df_envelope':
        grid = _grid(args.grid) or ['1/4', '1/2', '3/4', '1']
        return df_envelope(prefix, (lo, hi), grid).to_json()
    if args.c is None or args.gamma is None:
        raise ValueError("window_attaining needs --c and --gamma")
    return window_attaining(prefix, args.c, args.gamma, (lo, hi)).to_json()


def _statistic_options(args) -> Dict[str, object]:
    options = _pairs(args.option)
    if args.n is not None:
        options['n'] = str(args.n)
    if args.c is not None:
        options['c'] = args.c
    if args.grid is not None:
        options['checkpoints'] = _grid(args.grid)
    if args.window is not None:
        options['lo'], options['hi'] = _window(args.window)
    return options


def cmd_analyze(args) -> int:
    if args.statistic in PREFIX_TOOLS:
        descriptor, label = _source(args) if (args.family or args.input) else (None, args.prefix_in)
        result = _run_tool(args, descriptor)
        if args.json:
            _emit_json(result)
            return EXIT_PASS
        print(f"{args.statistic} on {label}")
        for key in sorted(result):
            print(f"  {key}: {result[key]}")
        return EXIT_PASS

    descriptor, label = _source(args)
    trace = STATISTICS[args.statistic](descriptor, _statistic_options(args))
    if args.json:
        _emit_json(trace.to_json())
        return EXIT_PASS
    print(f"{trace.name} on {label}")
    for t, value in trace.checkpoints[-args.tail:]:
        print(f"  {t}: {float(value):.6f}")
    print(f"  inf={float(trace.running_inf):.6f} sup={float(trace.running_sup):.6f} "
          f"{args.reduce}={float(REDUCERS[args.reduce](trace)):.6f} verdict={trace.verdict}")
    return EXIT_PASS


def cmd_ratioset(args) -> int:
    descriptor, label = _source(args)
    base = descriptor if args.base is None else build_family(args.base, _pairs(args.base_param))
    bound = as_natural(args.bound)
    if args.product:
        coverage = coverage_of_sets(descriptor, base, args.k, args.m, bound)
        points = []
    else:
        points = ratio_points(descriptor, base, args.k, bound)
        region = None if args.d is None else ForbiddenRegion(as_rational(args.d))
        coverage = coverage_probe(points, args.k, args.m, region, bound)
    if args.json:
        result = coverage.to_json()
        if args.list:
            result['points'] = [p.csv_row() for p in points]
        _emit_json(result)
        return EXIT_PASS
    if args.list:
        for p in points:
            print(','.join(p.csv_row()))
    print(f"R^{args.k} of {label}, witnesses <= {bound}, grid m={args.m}")
    print(f"  points in unit cube: {coverage.points}")
    print(f"  hit fraction: {coverage.hit_fraction:.4f}")
    print(f"  largest empty box: {encode_rational(coverage.largest_empty_box)}")
    if coverage.largest_gap is not None:
        print(f"  largest gap: {encode_rational(coverage.largest_gap)}")
    if args.d is not None and not args.product:
        print(f"  forbidden-region violations: {len(coverage.forbidden_violations)} of {coverage.forbidden_checked}")
    return EXIT_PASS


def cmd_probe(args) -> int:
    descriptor, label = _source(args)
    report = ndense_probe(descriptor, args.c or ['101/100'], (as_natural(args.lo), as_natural(args.hi)))
    if args.json:
        _emit_json(report.to_json())
        return EXIT_PASS
    print(f"A(ct) > A(t) probe on {label}, t in [{args.lo}, {args.hi}]")
    for r in report.results:
        mark = '✓' if r.condition_i else '✗'
        print(f"  {mark} c={encode_rational(r.c)}: {len(r.violations)} violations, "
              f"min difference {r.tail_min} (upper half) / {r.head_min} (lower half)")
        for t in r.violations[:5]:
            print(f"      A(ct) = A(t) at t={t}")
    return EXIT_PASS


def cmd_report(args) -> int:
    spec = resolve_suite(args.suite)
    report = run_suite(spec, args.jobs, verbose=not args.json)
    path = emit(report, args.format, args.out)
    if args.json:
        _emit_json(report.generate_report())
    else:
        print(f"\nResults saved to: {path}")
    return EXIT_PASS if report.all_passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ratioblock',
        description="Ratio block sequences of integer sets: generate, analyze, probe, report",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s gen --family power --param q=1/2 --descriptor squares.json    Save the squares' descriptor
  %(prog)s gen --family power --param q=1/2 --n 20                       First 20 squares as JSON lines
  %(prog)s analyze mean_ratio --in squares.json --n 200000
  %(prog)s analyze ratio_scan --family mixed --c 2 --grid 479001600,87178291200 --json
  %(prog)s analyze df_envelope --in squares.json --window 1000,2000 --grid 1/4,1/2,3/4
  %(prog)s analyze lemma1_check --family factorial --c 3/2 --window 1000,1000000
  %(prog)s ratioset --in squares.json --k 3 --bound 100000 --grid 8 --json
  %(prog)s probe --family power --param q=1/2 --c 101/100 --lo 100000 --hi 1000000000
  %(prog)s report acceptance --format json
        """)
    parser.add_argument('--budget', type=int, help="element budget for any single enumeration")
    parser.add_argument('--json', action='store_true', help="machine-readable JSON on stdout")
    parser.add_argument('--seed', type=int, help="seed for sampled checks")
    sub = parser.add_subparsers(dest='command', required=True)

    def set_command(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--family', choices=sorted(FAMILIES), help="constructed family")
        p.add_argument('--param', action='append', metavar='KEY=VALUE', help="family parameter")
        p.add_argument('--in', dest='input', metavar='FILE', help="descriptor JSON written by gen --descriptor")
        p.add_argument('--json', action='store_true', default=argparse.SUPPRESS, help="machine-readable JSON on stdout")
        return p

    p = set_command('gen', "print a descriptor, or enumerate a prefix or a range")
    p.add_argument('--n', type=int, help="prefix length")
    p.add_argument('--lo', help="range start (exclusive)")
    p.add_argument('--hi', help="range end (inclusive)")
    p.add_argument('--out', help="write JSON lines here")
    p.add_argument('--descriptor', help="also save the descriptor JSON here")
    p.set_defaults(handler=cmd_gen)

    p = set_command('analyze', "compute a statistic trace or a distribution-function tool")
    p.add_argument('statistic', choices=sorted(STATISTICS) + list(PREFIX_TOOLS))
    p.add_argument('--n', type=int, help="prefix length, or the block index for step_df")
    p.add_argument('--c', help="dilation or distribution-function point")
    p.add_argument('--x', help="point in [0, 1] for step_df")
    p.add_argument('--gamma', help="target value for window_attaining")
    p.add_argument('--window', metavar='LO,HI', help="index window, or the t-window for lemma1_check and scans")
    p.add_argument('--grid', metavar='X1,X2,...', help="checkpoints, or x-grid for df_envelope")
    p.add_argument('--prefix-in', help="JSON-lines prefix written by gen --out")
    p.add_argument('--option', action='append', metavar='KEY=VALUE',
                   help="statistic option (alpha, k, per_octave, hi)")
    p.add_argument('--reduce', default='limit', choices=sorted(REDUCERS))
    p.add_argument('--tail', type=int, default=10, help="checkpoints shown in text output")
    p.set_defaults(handler=cmd_analyze)

    p = set_command('ratioset', "coverage of the k-th ratio set in the unit cube")
    p.add_argument('--k', type=int, default=2)
    p.add_argument('--m', '--grid', dest='m', type=int, default=10, help="boxes per axis")
    p.add_argument('--bound', required=True, help="largest witness")
    p.add_argument('--base', choices=sorted(FAMILIES), help="denominator family (default: the same set)")
    p.add_argument('--base-param', action='append', metavar='KEY=VALUE')
    p.add_argument('--d', help="check the forbidden-region shape for this d")
    p.add_argument('--product', action='store_true', help="count boxes per denominator instead of listing points")
    p.add_argument('--list', action='store_true', help="print the points")
    p.set_defaults(handler=cmd_ratioset)

    p = set_command('probe', "scan A(ct) > A(t)")
    p.add_argument('--c', action='append', help="dilation > 1 (repeatable)")
    p.add_argument('--lo', required=True)
    p.add_argument('--hi', required=True)
    p.set_defaults(handler=cmd_probe)

    p = sub.add_parser('report', help="run a suite and write its report")
    p.add_argument('suite', nargs='?', default='acceptance',
                   help=f"built-in suite ({', '.join(SUITES)}) or a JSON suite file")
    p.add_argument('--format', default=SUITE_CONFIG['default_format'], choices=('json', 'csv', 'text'))
    p.add_argument('--out', help="report destination")
    p.add_argument('--jobs', type=int, default=SUITE_CONFIG['jobs'])
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.budget is not None:
        ANALYSIS_CONFIG['element_budget'] = args.budget
    if args.seed is not None:
        ANALYSIS_CONFIG['seed'] = args.seed
    try:
        return args.handler(args)
    except (RatioBlockError, ValueError, TypeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
