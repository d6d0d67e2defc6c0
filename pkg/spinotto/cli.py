"""
Command line driver.

Subcommands:

* ``cycle`` - run the configured cycle to its limit cycle and print it
* ``sweep`` - run the configured cycle-time sweep and export the table
* ``trajectories`` - sample single-atom counting statistics of both strokes
* ``check`` - evaluate the cycle invariants on a configuration

Exit codes: 0 success, 2 configuration error, 3 simulation error,
4 I/O error, 5 violated invariant.
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import ujson as json

from spinotto._version import __version__
from spinotto.config import SimulationConfig, load_config
from spinotto.cycle import find_limit_cycle, run_cycle
from spinotto.kinetics import (
    RNG_ALGORITHM,
    ContactPhase,
    ensemble_statistics,
    evolve_with_count,
    make_rng,
    sample_trajectory,
)
from spinotto.model import MAX_LEVEL, LevelDistribution
from spinotto.sweep import (
    FORMATS,
    emit_plot_script,
    export_results,
    run_sweep,
)
from spinotto.thermo import (
    efficiency_closed_form,
    efficiency_uncertainty,
    max_efficiency,
)
from spinotto.utils import (
    get_logger,
    to_jsonable,
    validate_output_path,
    write_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_IO = 4
EXIT_CHECK = 5

# trajectories written out in full by the trajectories subcommand
SAMPLE_TRAJECTORIES = 10
DEFAULT_N_TRAJ = 10000

CHECK_TOL = 1e-9
CHECK_TOL_ETA = 1e-12


class CheckFailure(Exception):
    """One or more invariants failed."""


def _dump(data: Dict[str, Any], out: Optional[str]) -> None:
    if out:
        write_json(validate_output_path(out), data)
        get_logger().info('wrote %s', out)
    else:
        print(json.dumps(to_jsonable(data), indent=2, sort_keys=True))


def run_cycle_command(
    config: SimulationConfig, args: argparse.Namespace
) -> None:
    if args.single:
        record = run_cycle(
            config.cycle, config.closure_tol, config.adiabaticity_threshold
        )
        iterations = 1
    else:
        record, iterations = find_limit_cycle(
            config.cycle,
            config.max_iters,
            config.tol,
            config.closure_tol,
            config.adiabaticity_threshold,
        )
    print(record)
    if args.out:
        data = record.to_dict()
        data['iterations'] = iterations
        _dump(data, args.out)


def run_sweep_command(
    config: SimulationConfig, args: argparse.Namespace
) -> None:
    result = run_sweep(config.sweep, show_progress=args.progress)
    print(result)
    out = args.out or config.sweep.output_path
    if out:
        path = export_results(result, out, args.format)
        if args.plot_script:
            emit_plot_script(path, args.plot_script)
    elif args.plot_script:
        raise ValueError('--plot-script needs a result file, use --out')
    result.check()


def run_trajectories_command(
    config: SimulationConfig, args: argparse.Namespace
) -> None:
    spec = config.cycle
    n_traj = args.n_traj or config.n_traj or DEFAULT_N_TRAJ
    seed = config.seed
    heating = ContactPhase.heating(spec)
    cooling = ContactPhase.cooling(spec)
    dist_b, _ = evolve_with_count(spec.initial, heating)
    stats_h = ensemble_statistics(spec.initial, heating, n_traj, seed)
    stats_c = ensemble_statistics(
        dist_b, cooling, n_traj, None if seed is None else seed + 1
    )
    samples_rng = make_rng(seed, 0)
    samples = [
        sample_trajectory(
            int(samples_rng.choice(MAX_LEVEL + 1, p=spec.initial.p)),
            heating,
            int(samples_rng.integers(0, 2 ** 32)),
        ).as_dict()
        for _ in range(SAMPLE_TRAJECTORIES)
    ]
    data = {
        'rng': RNG_ALGORITHM,
        'seed': seed,
        'heating': stats_h.as_dict(),
        'heating_expected': dist_b.p,
        'cooling': stats_c.as_dict(),
        'cooling_expected': evolve_with_count(dist_b, cooling)[0].p,
        'heating_samples': samples,
    }
    _dump(data, args.out)


def invariant_violations(config: SimulationConfig) -> List[str]:
    """Evaluate the cycle invariants on the configured limit cycle."""
    spec = config.cycle
    record, _ = find_limit_cycle(
        spec,
        config.max_iters,
        config.tol,
        config.closure_tol,
        config.adiabaticity_threshold,
    )
    field, constants = spec.field, spec.constants
    violations = []

    def expect(ok: bool, message: str, *values: Any) -> None:
        if not ok:
            violations.append(message.format(*values))

    expect(
        record.closed, 'limit cycle not closed: residual {}', record.residual
    )
    scale = max(abs(record.q_h), abs(record.w_bc), abs(record.w_da), 1.0)
    expect(
        abs(record.ledger.first_law_residual) <= CHECK_TOL * scale,
        'first law residual {}',
        record.ledger.first_law_residual,
    )
    if record.eta is not None:
        expected = efficiency_closed_form(field, constants)
        expect(
            abs(record.eta - expected) <= CHECK_TOL_ETA,
            'efficiency {} differs from closed form {}',
            record.eta,
            expected,
        )
    if record.eta_int is not None:
        expect(
            abs(record.eta_int - max_efficiency(field)) <= CHECK_TOL_ETA,
            'internal efficiency {} differs from {}',
            record.eta_int,
            max_efficiency(field),
        )
    expect(
        record.power
        <= record.power_bound * (1 + CHECK_TOL_ETA) + CHECK_TOL_ETA,
        'power {} exceeds bound {}',
        record.power,
        record.power_bound,
    )
    shift_h = record.dist_b.mean_level - record.dist_a.mean_level
    shift_c = record.dist_c.mean_level - record.dist_d.mean_level
    expect(
        abs(record.n_heating - shift_h) <= CHECK_TOL,
        'heating collisions {} differ from level shift {}',
        record.n_heating,
        shift_h,
    )
    expect(
        abs(record.n_cooling - shift_c) <= CHECK_TOL,
        'cooling collisions {} differ from level shift {}',
        record.n_cooling,
        shift_c,
    )
    expect(
        abs(record.n_heating - record.n_cooling) <= CHECK_TOL,
        'collision counts differ: heating {} cooling {}',
        record.n_heating,
        record.n_cooling,
    )
    expect(
        0 <= record.n_spin <= 2 * MAX_LEVEL + CHECK_TOL,
        'collision count {} outside [0, 12]',
        record.n_spin,
    )
    for report in record.reports:
        expect(report.passes, 'ramp not adiabatic: {}', report)
    for msg in violations:
        get_logger().warning(msg)
    return violations


def run_check_command(
    config: SimulationConfig, args: argparse.Namespace
) -> None:
    violations = invariant_violations(config)
    if args.sweep:
        violations.extend(run_sweep(config.sweep).check())
    field, constants = config.cycle.field, config.cycle.constants
    print(
        'closed-form efficiency {:.6f} +/- {:.6f}'.format(
            efficiency_closed_form(field, constants),
            efficiency_uncertainty(field, constants),
        )
    )
    if violations:
        for msg in violations:
            print('FAIL: {}'.format(msg))
        raise CheckFailure('{} invariant(s) violated'.format(len(violations)))
    print('all invariants hold')


COMMANDS = {
    'cycle': run_cycle_command,
    'sweep': run_sweep_command,
    'trajectories': run_trajectories_command,
    'check': run_check_command,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='spinotto',
        description='Seven-level spin Otto engine simulator',
    )
    parser.add_argument(
        '--version', action='version', version='%(prog)s ' + __version__
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', help="JSON configuration file")
    common.add_argument('--seed', type=int, help="master RNG seed")
    common.add_argument('--out', '-o', help="output file")
    common.add_argument(
        '--format', choices=FORMATS, help="result format, default from --out"
    )
    common.add_argument(
        '--verbose',
        action='store_true',
        help="flag, when specified log debug messages",
    )
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p_cycle = sub.add_parser('cycle', parents=[common], help="one limit cycle")
    p_cycle.add_argument(
        '--single',
        action='store_true',
        help="flag, run one cycle from the initial state instead",
    )
    p_sweep = sub.add_parser('sweep', parents=[common], help="cycle-time sweep")
    p_sweep.add_argument(
        '--plot-script', help="write a gnuplot script for the exported CSV"
    )
    p_sweep.add_argument(
        '--progress',
        action='store_true',
        help="flag, when specified show a progress bar",
    )
    p_traj = sub.add_parser(
        'trajectories', parents=[common], help="counting statistics ensemble"
    )
    p_traj.add_argument('--n-traj', type=int, help="trajectories per stroke")
    p_check = sub.add_parser('check', parents=[common], help="invariant suite")
    p_check.add_argument(
        '--sweep',
        action='store_true',
        help="flag, also validate the configured sweep",
    )
    return parser


def _fail(category: str, code: int, exc: BaseException) -> int:
    print('error[{}]: {}'.format(category, exc), file=sys.stderr)
    return code


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the subcommand, return the exit code."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        get_logger().setLevel(logging.DEBUG)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = config.with_seed(args.seed)
    except OSError as e:
        return _fail('io', EXIT_IO, e)
    except ValueError as e:
        return _fail('config', EXIT_CONFIG, e)
    try:
        COMMANDS[args.command](config, args)
    except CheckFailure as e:
        return _fail('check', EXIT_CHECK, e)
    except OSError as e:
        return _fail('io', EXIT_IO, e)
    except ValueError as e:
        return _fail('config', EXIT_CONFIG, e)
    except RuntimeError as e:
        return _fail('simulation', EXIT_SIMULATION, e)
    return EXIT_OK


def main() -> None:
    """Main."""
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
