"""cycle test"""

import math
import unittest

import numpy as np
from scipy.linalg import null_space
from testfixtures import LogCapture

from spinotto.cycle import (
    AdiabaticityReport,
    ConvergenceError,
    CycleRecord,
    adiabatic_ramp,
    adiabaticity,
    cycle_propagator,
    find_limit_cycle,
    projected_iterations,
    run_cycle,
    stationary_state,
)
from spinotto.model import (
    CouplingConstants,
    CycleSpec,
    FieldSchedule,
    LevelDistribution,
    RateTable,
)
from spinotto.thermo import efficiency_closed_form, max_efficiency

FIELD = FieldSchedule()
CONSTANTS = CouplingConstants()
ETA = efficiency_closed_form(FIELD, CONSTANTS)


def saturating_spec(**kwargs):
    return CycleSpec(100, 100, rates=RateTable.uniform(1.0), **kwargs)


def stationary_oracle(spec):
    values, vectors = np.linalg.eig(cycle_propagator(spec).T)
    vec = np.real(vectors[:, np.argmin(np.abs(values - 1))])
    return vec / vec.sum()


def null_space_oracle(spec):
    generator = cycle_propagator(spec) - np.eye(7)
    vec = null_space((generator / np.abs(generator).max()).T)[:, 0]
    return vec / vec.sum()


class AdiabaticityTest(unittest.TestCase):
    def test_reference_ramp(self):
        # 315 mG in 10 ms
        b_dot = (346.5 - 31.6) / 10.0
        a_low = adiabaticity(31.6, b_dot, 0.25)
        a_high = adiabaticity(346.5, b_dot, 0.25)
        self.assertAlmostEqual(a_low, 0.01434, delta=2e-4)
        self.assertAlmostEqual(a_high / a_low, (31.6 / 346.5) ** 2, places=12)
        self.assertEqual(adiabaticity(31.6, -b_dot, 0.25), a_low)
        self.assertEqual(adiabaticity(31.6, 0.0, 0.25), 0.0)

    def test_bad_args(self):
        with self.assertRaisesRegex(ValueError, 'b must be'):
            adiabaticity(0.0, 1.0, 0.25)
        with self.assertRaisesRegex(ValueError, 'g must be'):
            adiabaticity(31.6, 1.0, 0.0)

    def test_report(self):
        report = AdiabaticityReport(346.5, 31.6, 10.0, 0.25, 0.05)
        self.assertLess(report.a_at_b1, report.a_at_b2)
        self.assertEqual(report.max_a, report.a_at_b2)
        self.assertTrue(report.passes)
        up = AdiabaticityReport(31.6, 346.5, 10.0, 0.25, 0.05)
        self.assertEqual(up.a_at_b2, report.a_at_b2)
        fast = AdiabaticityReport(346.5, 31.6, 1.0, 0.25, 0.05)
        self.assertFalse(fast.passes)
        info = report.as_dict()
        self.assertEqual(info['passes'], True)
        self.assertEqual(info['from_b'], 346.5)

    def test_ramp_preserves_populations(self):
        dist = LevelDistribution.uniform()
        with LogCapture() as log:
            out, report = adiabatic_ramp(dist, 346.5, 31.6, 10.0)
        self.assertIs(out, dist)
        self.assertTrue(report.passes)
        self.assertEqual(
            [r for r in log.records if r.levelname == 'WARNING'], []
        )

    def test_fast_ramp_warns(self):
        dist = LevelDistribution.polarized(3)
        with LogCapture() as log:
            out, report = adiabatic_ramp(dist, 346.5, 31.6, 1.0)
        self.assertIs(out, dist)
        self.assertFalse(report.passes)
        warnings = [r for r in log.records if r.levelname == 'WARNING']
        self.assertEqual(len(warnings), 1)
        self.assertTrue(
            warnings[0]
            .getMessage()
            .startswith('ramp 346.5 -> 31.6 mG in 1.0 ms is not adiabatic')
        )

    def test_bad_ramp_time(self):
        with self.assertRaisesRegex(ValueError, 'tau must be'):
            adiabatic_ramp(LevelDistribution.uniform(), 346.5, 31.6, 0.0)


class RunCycleTest(unittest.TestCase):
    def test_full_inversion(self):
        record = run_cycle(saturating_spec())
        self.assertIsInstance(record, CycleRecord)
        np.testing.assert_allclose(
            record.dist_b.p, LevelDistribution.polarized(6).p, atol=1e-12
        )
        self.assertIs(record.dist_c, record.dist_b)
        np.testing.assert_allclose(
            record.dist_d.p, LevelDistribution.polarized(0).p, atol=1e-12
        )
        self.assertTrue(record.closed)
        self.assertAlmostEqual(record.n_heating, 6.0, delta=1e-6)
        self.assertAlmostEqual(record.n_cooling, 6.0, delta=1e-6)
        self.assertAlmostEqual(record.n_spin, 12.0, delta=1e-6)
        self.assertAlmostEqual(record.eta, ETA, delta=1e-9)
        self.assertAlmostEqual(
            record.eta_int, max_efficiency(FIELD), delta=1e-9
        )
        self.assertAlmostEqual(record.w_total, -record.w, delta=1e-6)
        self.assertAlmostEqual(record.sigma_w_sq, 0.0, delta=1e-3)
        self.assertAlmostEqual(record.power, record.w / 220.0, places=9)
        self.assertAlmostEqual(record.power_bound, record.power, delta=1e-6)

    def test_reference_cycle(self):
        spec = CycleSpec(470, 470, initial=LevelDistribution.polarized(0))
        record = run_cycle(spec)
        self.assertEqual(record.tau_cycle, 960.0)
        self.assertGreaterEqual(record.power, 24.0)
        self.assertLessEqual(record.power, 36.0)
        self.assertLessEqual(record.power, record.power_bound + 1e-9)
        self.assertGreater(record.fano, 0)
        self.assertGreater(record.q_h, 0)
        self.assertLess(record.q_c, 0)
        self.assertGreater(record.q_l, 0)

    def test_vanishing_strokes(self):
        record = run_cycle(CycleSpec(1e-13, 1e-13))
        self.assertAlmostEqual(record.n_spin, 0.0, delta=1e-12)
        self.assertAlmostEqual(record.power, 0.0, delta=1e-9)
        self.assertTrue(record.closed)

    def test_record_output(self):
        record = run_cycle(CycleSpec(200, 300))
        info = record.to_dict()
        for key in (
            'tau_h',
            'tau_c',
            'tau_cycle',
            'cycle_points',
            'distributions',
            'ledger',
            'eta',
            'eta_int',
            'power',
            'fano',
            'n_spin',
            'closed',
            'residual',
            'adiabaticity',
        ):
            self.assertIn(key, info)
        self.assertEqual(sorted(info['distributions']), ['A', 'B', 'C', 'D'])
        self.assertEqual(len(info['adiabaticity']), 2)
        self.assertEqual(info['tau_cycle'], 520.0)
        self.assertTrue(repr(record).startswith('CycleRecord: tau_h=200.0'))
        down, up = record.reports
        self.assertEqual((down.from_b, down.to_b), (346.5, 31.6))
        self.assertEqual((up.from_b, up.to_b), (31.6, 346.5))

    def test_fast_ramps_logged(self):
        spec = CycleSpec(100, 100, field=FieldSchedule(ramp_time=1.0))
        with LogCapture() as log:
            record = run_cycle(spec)
        warnings = [r for r in log.records if r.levelname == 'WARNING']
        self.assertEqual(len(warnings), 2)
        self.assertFalse(any(r.passes for r in record.reports))


class LimitCycleTest(unittest.TestCase):
    def test_propagator(self):
        matrix = cycle_propagator(CycleSpec(200, 300))
        self.assertEqual(matrix.shape, (7, 7))
        np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-12)
        self.assertTrue(np.all(matrix >= -1e-12))

    def test_saturated_start(self):
        record, iterations = find_limit_cycle(saturating_spec())
        self.assertEqual(iterations, 1)
        self.assertTrue(record.closed)
        self.assertAlmostEqual(record.n_spin, 12.0, delta=1e-6)

    def test_saturated_other_start(self):
        spec = saturating_spec(initial=LevelDistribution.uniform())
        record, iterations = find_limit_cycle(spec)
        self.assertLessEqual(iterations, 2)
        self.assertLess(
            record.dist_a.distance(LevelDistribution.polarized(0)), 1e-12
        )

    def test_stationary_oracle(self):
        for tau_h, tau_c in ((200, 200), (300, 120), (80, 400)):
            spec = CycleSpec(tau_h, tau_c, rates=RateTable.uniform(0.02))
            record, _ = find_limit_cycle(spec)
            np.testing.assert_allclose(
                record.dist_a.p, stationary_oracle(spec), atol=1e-10
            )
            self.assertTrue(record.closed)
            self.assertAlmostEqual(record.eta, ETA, delta=1e-12)

    def test_start_independent(self):
        spec = CycleSpec(250, 250)
        first, _ = find_limit_cycle(spec)
        second, _ = find_limit_cycle(
            spec.replace(initial=LevelDistribution.polarized(6))
        )
        self.assertLess(first.dist_a.distance(second.dist_a), 1e-12)

    def test_random_configs(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            rates = RateTable(
                rng.uniform(0.01, 0.05, 6), rng.uniform(0.01, 0.05, 6)
            )
            spec = CycleSpec(
                rng.uniform(50, 400),
                rng.uniform(50, 400),
                rates=rates,
                initial=LevelDistribution(rng.dirichlet(np.ones(7))),
            )
            record, _ = find_limit_cycle(spec)
            self.assertTrue(record.closed)
            self.assertAlmostEqual(record.eta, ETA, delta=1e-12)
            self.assertAlmostEqual(
                record.eta_int, max_efficiency(FIELD), delta=1e-12
            )
            scale = abs(record.q_h) + abs(record.q_c)
            self.assertAlmostEqual(
                record.ledger.first_law_residual / scale, 0.0, delta=1e-9
            )
            self.assertAlmostEqual(
                record.q_l,
                record.ledger.q1 - abs(record.ledger.q2) - record.w,
                delta=1e-9 * scale,
            )
            self.assertLessEqual(record.n_spin, 12.0 + 1e-9)
            self.assertLessEqual(record.power, record.power_bound + 1e-9)

    def test_vanishing_strokes(self):
        record, iterations = find_limit_cycle(CycleSpec(1e-13, 1e-13))
        self.assertEqual(iterations, 1)
        self.assertLess(
            record.dist_a.distance(LevelDistribution.polarized(0)), 1e-12
        )
        self.assertAlmostEqual(record.w, 0.0, delta=1e-6)
        self.assertTrue(record.closed)

    def test_short_strokes(self):
        for tau in (1e-6, 1e-3, 1e-2):
            with self.subTest(tau=tau):
                spec = CycleSpec(tau, tau)
                with LogCapture() as log:
                    record, iterations = find_limit_cycle(spec)
                self.assertEqual(iterations, 2)
                self.assertTrue(record.closed)
                np.testing.assert_allclose(
                    record.dist_a.p, null_space_oracle(spec), atol=1e-8
                )
                self.assertLess(abs(record.w), 1.0)
                self.assertLess(abs(record.power), 0.05)
                self.assertTrue(
                    any(
                        'solving for the fixed point directly' in r.getMessage()
                        for r in log.records
                    )
                )

    def test_stationary_state(self):
        spec = CycleSpec(200, 300, rates=RateTable.uniform(0.02))
        np.testing.assert_allclose(
            stationary_state(cycle_propagator(spec)),
            stationary_oracle(spec),
            atol=1e-12,
        )
        self.assertEqual(projected_iterations(np.eye(7), 1e-14), math.inf)
        with self.assertRaisesRegex(ValueError, 'identity'):
            stationary_state(np.eye(7))

    def test_not_converged(self):
        spec = CycleSpec(100, 100, rates=RateTable.uniform(0.01))
        with self.assertRaises(ConvergenceError) as ctx:
            find_limit_cycle(spec, max_iters=1)
        self.assertEqual(ctx.exception.iterations, 1)
        self.assertGreater(ctx.exception.residual, 1e-14)
        self.assertIn('not converged after 1 iterations', str(ctx.exception))

    def test_bad_args(self):
        spec = CycleSpec(100, 100)
        with self.assertRaisesRegex(ValueError, 'max_iters'):
            find_limit_cycle(spec, max_iters=0)
        with self.assertRaisesRegex(ValueError, 'tol'):
            find_limit_cycle(spec, tol=0.0)

    def test_logs_convergence(self):
        with LogCapture() as log:
            find_limit_cycle(CycleSpec(200, 200))
        infos = [r.getMessage() for r in log.records if r.levelname == 'INFO']
        self.assertTrue(
            any(m.startswith('limit cycle converged') for m in infos)
        )


if __name__ == '__main__':
    unittest.main()
