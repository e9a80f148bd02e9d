#!/usr/bin/env python3
"""
splitcircle - Point-Splitting Circle Workbench
Command-line entry point

Generates point sets, censuses the circles through their triples, checks
the counting identities, counts degenerate sets and runs one-point
deformations. Every command prints a JSON report; exit code 0 means PASS,
1 FAIL and 2 ERROR.
"""

import argparse
import copy
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from deformation_lab import (
    DEFAULT_JITTER_MAGNITUDE,
    LawViolation,
    MotionPath,
    SimultaneousCrossing,
    TangentContact,
    check_exchange_law,
    jitter_target,
    run_deformation,
)
from exact_geometry import (
    Point,
    SplitCircleError,
    find_concyclic_quadruples,
    format_point_text,
    format_rational,
    parse_point_text,
    to_rational,
    write_point_file,
)
from generators import (
    construct_degenerate_quad,
    construct_section3,
    derive_seed,
    generate_random_general_position,
    random_header,
    verify_recursions,
)
from splitting_census import (
    THREADS_ENV,
    build_census,
    census_summary,
    check_census_theorems,
    degenerate_circles,
    pair_counts,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

PASS, FAIL, ERROR = 'PASS', 'FAIL', 'ERROR'
EXIT_CODES = {PASS: 0, FAIL: 1, ERROR: 2}

DEFAULT_CONFIG = {
    'census': {
        'threads': 0,
        'parallel_threshold': 64,
    },
    'generators': {
        'coordinate_bound': 1000,
        'max_retries': 10000,
        'section3_max_attempts': 24,
        'degenerate_max_attempts': 2000,
    },
    'deformation': {
        'jitter_attempts': 8,
        'jitter_magnitude': format_rational(DEFAULT_JITTER_MAGNITUDE),
        'max_refinements': 200,
    },
    'verify': {
        'n_max': 4,
        'trials': 10,
    },
    'logging': {
        'level': 'WARNING',
    },
}


def _load_config(config_file: Optional[str]) -> dict:
    """Load configuration from file or use defaults"""
    config = copy.deepcopy(DEFAULT_CONFIG)

    if config_file:
        try:
            with open(config_file, 'r') as f:
                loaded_config = json.load(f)
            # Merge per section so a partial file keeps the other defaults
            for section, values in loaded_config.items():
                if isinstance(values, dict) and section in config:
                    config[section].update(values)
                else:
                    config[section] = values
            logger.info(f"Loaded configuration from {config_file}")
        except Exception as e:
            logger.warning(f"Could not load config file: {e}. Using defaults.")

    threads = os.environ.get(THREADS_ENV)
    if threads is not None:
        try:
            config['census']['threads'] = int(threads)
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV}={threads!r}")

    return config


@dataclass
class RunReport:
    """Structured outcome of one command"""
    command: str
    arguments: dict
    input_digest: Optional[str] = None
    result: dict = field(default_factory=dict)
    status: str = PASS
    timestamp: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def fail(self, reason: str):
        self.status = FAIL
        self.result.setdefault('failures', []).append(reason)

    def to_dict(self) -> dict:
        report = {
            'command': self.command,
            'arguments': self.arguments,
            'input_digest': self.input_digest,
            'result': self.result,
            'status': self.status,
        }
        if self.timestamp is not None:
            report['timestamp'] = self.timestamp
        return report

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _read_input(path: str, report: RunReport):
    with open(path, 'rb') as f:
        data = f.read()
    report.input_digest = 'sha256:' + hashlib.sha256(data).hexdigest()
    return parse_point_text(data.decode('utf-8'))


def _census(points, config: dict):
    return build_census(points,
                        threads=config['census']['threads'],
                        parallel_threshold=config['census']['parallel_threshold'])


def cmd_gen(args, config: dict, report: RunReport) -> Optional[str]:
    """
    Generate a point set

    Without --out the point text is returned for stdout, the sidecar riding
    along as a '# sidecar {...}' header line.
    """
    gen = config['generators']
    sidecar = None
    if args.kind == 'random':
        points = generate_random_general_position(args.count, args.seed,
                                                  gen['coordinate_bound'], gen['max_retries'])
        header = random_header(args.count, args.seed, gen['coordinate_bound'])
    elif args.kind == 'section3':
        built = construct_section3(args.n, args.seed, gen['section3_max_attempts'])
        points, header, sidecar = built.points, built.header(), built.sidecar()
    else:
        built = construct_degenerate_quad(args.interior, args.seed, gen['degenerate_max_attempts'])
        points, header, sidecar = built.points, built.header(), built.sidecar()

    if not args.out:
        if sidecar is not None:
            header = header + [f"sidecar {json.dumps(sidecar, sort_keys=True)}"]
        return format_point_text(points, header)

    write_point_file(args.out, points, header)
    report.result = {'kind': args.kind, 'points': len(points), 'out': args.out}
    if sidecar is not None:
        sidecar_path = f"{args.out}.json"
        with open(sidecar_path, 'w') as f:
            json.dump(sidecar, f, indent=2)
            f.write("\n")
        report.result['sidecar_path'] = sidecar_path
        report.result['sidecar'] = sidecar
    return None


def cmd_census(args, config: dict, report: RunReport) -> Optional[str]:
    points = _read_input(args.input, report)
    summary = census_summary(_census(points, config))
    report.result = summary.to_dict()
    for row in summary.rows:
        if not row.match:
            report.fail(f"class ({row.a},{row.b}): counted {row.count}, predicted {row.predicted}")
    if summary.total_circles != summary.total_predicted:
        report.fail(f"{summary.total_circles} circles, expected {summary.total_predicted}")
    if not summary.pairs_odd:
        report.fail("a pair lies on an even number of point-splitting circles")
    if args.format == 'csv':
        return summary.to_csv()
    return None


def cmd_pairs(args, config: dict, report: RunReport) -> Optional[str]:
    points = _read_input(args.input, report)
    census = _census(points, config)
    counts = pair_counts(census)
    n = census.n
    total = sum(counts.values())
    report.result = {
        'n': n,
        'pairs': [{'i': i, 'j': j, 'count': c} for (i, j), c in counts.items()],
        'total': total,
        'all_odd': all(c % 2 == 1 for c in counts.values()),
    }
    for (i, j), c in counts.items():
        if c % 2 == 0:
            report.fail(f"pair ({i},{j}) lies on {c} point-splitting circles")
    if total != 3 * n * n:
        report.fail(f"pair counts sum to {total}, expected {3 * n * n}")
    if args.format == 'csv':
        lines = ["i,j,count"] + [f"{i},{j},{c}" for (i, j), c in counts.items()]
        return "\n".join(lines) + "\n"
    return None


def cmd_verify(args, config: dict, report: RunReport) -> Optional[str]:
    n_max = args.n_max if args.n_max is not None else config['verify']['n_max']
    trials = args.trials if args.trials is not None else config['verify']['trials']
    if n_max < 1 or trials < 1:
        raise ValueError(f"n-max and trials must be at least 1, got {n_max} and {trials}")
    bound = config['generators']['coordinate_bound']

    censuses = 0
    checks_run = 0
    for n in range(1, n_max + 1):
        for trial in range(trials):
            trial_seed = derive_seed(args.seed, n, trial)
            points = generate_random_general_position(2 * n + 1, trial_seed, bound,
                                                      config['generators']['max_retries'])
            checks = check_census_theorems(_census(points, config))
            censuses += 1
            checks_run += len(checks)
            failed = [c for c in checks if not c.passed]
            if failed:
                report.status = FAIL
                report.result.setdefault('failures', []).append({
                    'n': n,
                    'trial': trial,
                    'seed': trial_seed,
                    'checks': [c.to_dict() for c in failed],
                    'points': format_point_text(points),
                })
        logger.info(f"n={n}: {trials} random sets checked")

    report.result.update({'n_max': n_max, 'trials': trials,
                          'censuses': censuses, 'checks_run': checks_run})
    if n_max >= 2:
        recursions = verify_recursions(n_max, args.seed, config['generators']['section3_max_attempts'])
        report.result['recursion_checks'] = len(recursions.checks)
        report.result['recursion_failures'] = [c.to_dict() for c in recursions.failures()]
        if not recursions.passed:
            report.status = FAIL
    return None


def cmd_degenerate(args, config: dict, report: RunReport) -> Optional[str]:
    points = _read_input(args.input, report)
    n = points.n
    if n is None:
        raise ValueError(f"expected an odd number of points, got {len(points)}")

    if points.gp_status.ok:
        count = _census(points, config).point_splitting
        report.result = {
            'count': count,
            'concyclic': [],
            'notice': 'input is in general position; ordinary census used',
        }
        if count != n * n:
            report.fail(f"general-position count {count}, predicted {n * n}")
        return None

    circles = degenerate_circles(points)
    quadruples = [list(q) for q in find_concyclic_quadruples(points)]
    count = sum(1 for c in circles if c.qualifies)
    report.result = {
        'count': count,
        'distinct_circles': len(circles),
        'concyclic': quadruples,
        'multi_point_circles': [c.to_dict() for c in circles if len(c.on_circle) > 3],
    }
    if len(points) == 7 and len(quadruples) == 1:
        if count not in (8, 9):
            report.fail(f"seven points with one concyclic quadruple gave {count}, expected 8 or 9")
    else:
        report.result['notice'] = 'no prediction for this degeneracy pattern'
    return None


def cmd_deform(args, config: dict, report: RunReport) -> Optional[str]:
    points = _read_input(args.input, report)
    settings = config['deformation']
    target = Point(to_rational(args.target_x), to_rational(args.target_y))
    aimed = target
    attempts = settings['jitter_attempts'] if args.jitter else 0
    magnitude = Fraction(settings['jitter_magnitude'])

    for attempt in range(attempts + 1):
        try:
            path = MotionPath(points, args.moving_index, target)
            log = run_deformation(path, config['census']['threads'], settings['max_refinements'])
            break
        except (SimultaneousCrossing, TangentContact) as e:
            if attempt == attempts:
                raise
            target = jitter_target(aimed, args.seed, attempt, magnitude)
            logger.warning(f"{e}; retrying with target {target}")

    report.result = log.to_dict()
    report.result['jitter_attempts'] = attempt
    verdicts = []
    for event in log.events:
        try:
            verdicts.append(check_exchange_law(event).to_dict())
        except LawViolation as e:
            report.fail(str(e))
    report.result['verdicts'] = verdicts
    if not log.census_invariant:
        report.fail("signature census differs between checkpoints")
    return None


def _arguments(args) -> dict:
    skip = {'func', 'config', 'verbose', 'out'}
    return {key: value for key, value in sorted(vars(args).items()) if key not in skip}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=['json', 'csv'], default='json',
                        help='Report format (csv for census and pairs tables)')
    common.add_argument('--seed', type=int, default=0,
                        help='Seed for every random choice')
    common.add_argument('--reproducible', action='store_true',
                        help='Omit the timestamp so reports are byte-identical')
    common.add_argument('--out', default=None,
                        help='Output file (gen: the point file; others: the JSON report or CSV table)')
    common.add_argument('-c', '--config', default=None,
                        help='Configuration file (JSON)')
    common.add_argument('-v', '--verbose', action='store_true',
                        help='Enable verbose logging')

    parser = argparse.ArgumentParser(
        prog='splitcircle',
        description='Point-splitting circle census, constructions and deformations'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', parents=[common], help='Generate a point set')
    gen.add_argument('kind', choices=['random', 'section3', 'degenerate'])
    gen.add_argument('--count', type=int, default=7, help='Points for random sets')
    gen.add_argument('--n', type=int, default=3, help='n for the 2n+1 point polygon construction')
    gen.add_argument('--interior', type=int, choices=[0, 1], default=1,
                     help='Free points inside the concyclic circle')
    gen.set_defaults(func=cmd_gen)

    for name, func, text in (('census', cmd_census, 'Census all circles of a point file'),
                             ('pairs', cmd_pairs, 'Point-splitting circles through every pair'),
                             ('degenerate', cmd_degenerate, 'Count circles of a degenerate set')):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument('input', help='Point file')
        command.set_defaults(func=func)

    verify = sub.add_parser('verify', parents=[common], help='Check the counting identities on random sets')
    verify.add_argument('--n-max', type=int, default=None)
    verify.add_argument('--trials', type=int, default=None)
    verify.set_defaults(func=cmd_verify)

    deform = sub.add_parser('deform', parents=[common], help='Move one point and log every crossing')
    deform.add_argument('input', help='Point file')
    deform.add_argument('--moving-index', type=int, default=0)
    deform.add_argument('--target-x', required=True, help="Target x as 'num/den'")
    deform.add_argument('--target-y', required=True, help="Target y as 'num/den'")
    deform.add_argument('--jitter', action='store_true',
                        help='Nudge the target and retry after a simultaneous crossing')
    deform.set_defaults(func=cmd_deform)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr
    )
    config = _load_config(args.config)
    if not args.verbose:
        logging.getLogger().setLevel(config['logging']['level'])

    report = RunReport(args.command, _arguments(args))
    if not args.reproducible:
        report.timestamp = time.strftime('%Y-%m-%dT%H:%M:%SZ', time.gmtime())

    text = None
    try:
        text = args.func(args, config, report)
    except LawViolation as e:
        report.status = FAIL
        report.result = {'error': str(e)}
    except (SplitCircleError, ValueError, OSError) as e:
        logger.debug(f"{args.command} failed: {e}")
        report.status = ERROR
        report.result = {'error': str(e), 'type': type(e).__name__}
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        report.status = ERROR
        report.result = {'error': str(e), 'type': type(e).__name__}

    output = text if report.status != ERROR and text is not None else report.to_json()
    if args.out and args.command != 'gen':
        with open(args.out, 'w') as f:
            f.write(output)
    else:
        sys.stdout.write(output)

    if report.status != PASS:
        logger.warning(f"{args.command}: {report.status}")
    return report.exit_code


if __name__ == '__main__':
    sys.exit(main())
