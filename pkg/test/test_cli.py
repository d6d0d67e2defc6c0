"""command line test"""

import contextlib
import io
import os
import tempfile
import unittest

import pandas as pd

from spinotto.cli import (
    EXIT_CHECK,
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    EXIT_SIMULATION,
    SAMPLE_TRAJECTORIES,
    build_parser,
    invariant_violations,
    run,
)
from spinotto.config import load_config
from spinotto.sweep import COLUMNS
from spinotto.utils import read_json

HERE = os.path.dirname(os.path.abspath(__file__))
DATAFILES_PATH = os.path.join(HERE, 'data')


def config_file(name):
    return os.path.join(DATAFILES_PATH, '{}.config.json'.format(name))


def last_line(text):
    lines = text.strip().splitlines()
    return lines[-1] if lines else ''


def run_quietly(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run(argv)
    return code, out.getvalue(), err.getvalue()


class ParserTest(unittest.TestCase):
    def test_subcommands(self):
        parser = build_parser()
        args = parser.parse_args(['cycle', '--single', '--seed', '3'])
        self.assertEqual(args.command, 'cycle')
        self.assertTrue(args.single)
        self.assertEqual(args.seed, 3)
        args = parser.parse_args(['sweep', '-o', 'x.json', '--format', 'json'])
        self.assertEqual(args.out, 'x.json')
        self.assertEqual(args.format, 'json')
        args = parser.parse_args(['trajectories', '--n-traj', '10'])
        self.assertEqual(args.n_traj, 10)

    def test_bad_usage(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                run(['spin'])
        self.assertEqual(ctx.exception.code, 2)
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                run([])


class CycleCommandTest(unittest.TestCase):
    def test_limit_cycle(self):
        with tempfile.TemporaryDirectory(prefix='spinotto_tests') as tmpdir:
            out = os.path.join(tmpdir, 'cycle.json')
            code, stdout, _ = run_quietly(['cycle', '-o', out])
            self.assertEqual(code, EXIT_OK)
            self.assertIn('CycleRecord', stdout)
            data = read_json(out)
            self.assertTrue(data['closed'])
            self.assertGreaterEqual(data['iterations'], 1)
            self.assertEqual(data['tau_cycle'], 960.0)

    def test_single(self):
        code, stdout, _ = run_quietly(['cycle', '--single'])
        self.assertEqual(code, EXIT_OK)
        self.assertIn('tau_cycle=960.0', stdout)

    def test_not_converged(self):
        code, _, stderr = run_quietly(
            ['cycle', '--config', config_file('one_iteration')]
        )
        self.assertEqual(code, EXIT_SIMULATION)
        self.assertTrue(
            last_line(stderr).startswith('error[simulation]: limit cycle')
        )

    def test_missing_config(self):
        code, _, stderr = run_quietly(
            ['cycle', '--config', config_file('no_such')]
        )
        self.assertEqual(code, EXIT_IO)
        self.assertTrue(last_line(stderr).startswith('error[io]: '))

    def test_bad_config(self):
        for name in ('bad_field', 'unknown_key', 'malformed'):
            code, _, stderr = run_quietly(['cycle', '-c', config_file(name)])
            self.assertEqual(code, EXIT_CONFIG)
            self.assertTrue(last_line(stderr).startswith('error[config]: '))


class SweepCommandTest(unittest.TestCase):
    def test_csv_and_plot(self):
        with tempfile.TemporaryDirectory(prefix='spinotto_tests') as tmpdir:
            out = os.path.join(tmpdir, 'sweep.csv')
            script = os.path.join(tmpdir, 'sweep.gp')
            code, stdout, _ = run_quietly(
                [
                    'sweep',
                    '-c',
                    config_file('small_sweep'),
                    '-o',
                    out,
                    '--plot-script',
                    script,
                ]
            )
            self.assertEqual(code, EXIT_OK)
            self.assertIn('SweepResult: 4 points, 0 failed', stdout)
            frame = pd.read_csv(out)
            self.assertEqual(list(frame.columns), COLUMNS)
            self.assertEqual(len(frame), 4)
            self.assertTrue(os.path.exists(script))

    def test_seed_override(self):
        with tempfile.TemporaryDirectory(prefix='spinotto_tests') as tmpdir:
            out = os.path.join(tmpdir, 'sweep.json')
            code, _, _ = run_quietly(
                [
                    'sweep',
                    '-c',
                    config_file('small_sweep'),
                    '--seed',
                    '5',
                    '-o',
                    out,
                ]
            )
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(read_json(out)['metadata']['seed'], 5)

    def test_plot_script_needs_out(self):
        code, _, stderr = run_quietly(
            [
                'sweep',
                '-c',
                config_file('small_sweep'),
                '--plot-script',
                'sweep.gp',
            ]
        )
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn('--plot-script', stderr)


class TrajectoriesCommandTest(unittest.TestCase):
    def test_ensemble(self):
        with tempfile.TemporaryDirectory(prefix='spinotto_tests') as tmpdir:
            out = os.path.join(tmpdir, 'traj.json')
            code, _, _ = run_quietly(
                ['trajectories', '--n-traj', '500', '--seed', '4', '-o', out]
            )
            self.assertEqual(code, EXIT_OK)
            data = read_json(out)
            self.assertEqual(data['seed'], 4)
            self.assertEqual(data['heating']['n_traj'], 500)
            self.assertEqual(len(data['heating_samples']), SAMPLE_TRAJECTORIES)
            self.assertAlmostEqual(sum(data['heating_expected']), 1.0)

    def test_stdout(self):
        code, stdout, _ = run_quietly(['trajectories', '--n-traj', '100'])
        self.assertEqual(code, EXIT_OK)
        self.assertIn('"cooling"', stdout)


class CheckCommandTest(unittest.TestCase):
    def test_defaults_pass(self):
        self.assertEqual(invariant_violations(load_config()), [])
        code, stdout, _ = run_quietly(['check'])
        self.assertEqual(code, EXIT_OK)
        self.assertIn('closed-form efficiency 0.476112', stdout)
        self.assertIn('all invariants hold', stdout)

    def test_fast_ramp_fails(self):
        code, stdout, stderr = run_quietly(
            ['check', '-c', config_file('fast_ramp')]
        )
        self.assertEqual(code, EXIT_CHECK)
        self.assertIn('FAIL: ramp not adiabatic', stdout)
        self.assertEqual(
            last_line(stderr), 'error[check]: 2 invariant(s) violated'
        )


if __name__ == '__main__':
    unittest.main()
