"""config test"""

import os
import unittest

from spinotto.config import SimulationConfig, load_config
from spinotto.model import LevelDistribution, RateTable

HERE = os.path.dirname(os.path.abspath(__file__))
DATAFILES_PATH = os.path.join(HERE, 'data')


class LoadConfigTest(unittest.TestCase):
    def test_defaults(self):
        config = load_config()
        self.assertEqual(config.cycle.tau_h, 470.0)
        self.assertEqual(config.cycle.tau_cycle, 960.0)
        self.assertEqual(config.cycle.field.b1, 346.5)
        self.assertEqual(config.cycle.field.b2, 31.6)
        self.assertEqual(config.cycle.initial, LevelDistribution.polarized(0))
        self.assertIsNone(config.seed)
        self.assertEqual(config.n_traj, 0)
        self.assertEqual(len(config.sweep.points()), 30)
        self.assertIn('SimulationConfig', repr(config))

    def test_reference_file(self):
        config = load_config(
            os.path.join(DATAFILES_PATH, 'reference.config.json')
        )
        defaults = load_config()
        self.assertEqual(config.seed, 20190321)
        self.assertEqual(config.sweep.seed, 20190321)
        self.assertEqual(
            config.cycle.rates.heating_rates.tolist(),
            defaults.cycle.rates.heating_rates.tolist(),
        )
        self.assertAlmostEqual(
            config.cycle.rates.inversion_time(heating=True), 450.0
        )
        self.assertEqual(config.sweep.points(), defaults.sweep.points())
        self.assertEqual(config.tol, 1e-14)

    def test_ladder_file(self):
        config = load_config(os.path.join(DATAFILES_PATH, 'ladder.config.json'))
        rates = config.cycle.rates
        self.assertEqual(rates.heating_rates[0], 0.02)
        self.assertEqual(rates.cooling_rates[5], 0.02)
        self.assertFalse(rates.is_symmetric)
        self.assertEqual(config.cycle.tau_h, 200.0)
        self.assertEqual(config.cycle.initial.p[1], 0.5)
        self.assertEqual(
            config.sweep.points(), [(100.0, 150.0), (200.0, 300.0)]
        )
        self.assertEqual(config.sweep.output_path, 'ladder.csv')
        self.assertEqual(config.sweep.n_traj, 100)
        self.assertEqual(config.parallel, 2)

    def test_with_seed(self):
        config = load_config(os.path.join(DATAFILES_PATH, 'ladder.config.json'))
        other = config.with_seed(99)
        self.assertEqual(other.seed, 99)
        self.assertEqual(other.sweep.seed, 99)
        self.assertEqual(other.sweep.points(), config.sweep.points())
        self.assertEqual(config.seed, 7)

    def test_missing_file(self):
        with self.assertRaises(OSError):
            load_config(os.path.join(DATAFILES_PATH, 'no_such.config.json'))

    def test_malformed_file(self):
        with self.assertRaisesRegex(ValueError, 'Cannot parse JSON'):
            load_config(os.path.join(DATAFILES_PATH, 'malformed.config.json'))

    def test_unknown_key(self):
        with self.assertRaisesRegex(ValueError, 'b3'):
            load_config(
                os.path.join(DATAFILES_PATH, 'unknown_key.config.json')
            )

    def test_invalid_field(self):
        with self.assertRaisesRegex(ValueError, 'b1 must be > b2'):
            load_config(os.path.join(DATAFILES_PATH, 'bad_field.config.json'))


class FromDictTest(unittest.TestCase):
    def test_empty(self):
        config = SimulationConfig.from_dict({})
        self.assertEqual(config.cycle.tau_cycle, 960.0)
        self.assertTrue(config.cycle.rates.is_symmetric)

    def test_uniform_rate(self):
        config = SimulationConfig.from_dict({'rates': {'uniform': 0.02}})
        self.assertEqual(
            config.cycle.rates.heating_rates.tolist(),
            RateTable.uniform(0.02).heating_rates.tolist(),
        )

    def test_bad_values(self):
        cases = [
            ([], 'JSON object'),
            ({'sweeps': {}}, 'Unknown config keys'),
            ({'field': []}, 'must be an object'),
            ({'field': {'b1': 'high'}}, 'field.b1 must be a number'),
            ({'constants': {'g_cs': True}}, 'constants.g_cs must be a number'),
            ({'constants': {'g_cs': 0}}, 'g_cs must be > 0'),
            ({'rates': {'uniform': 0.1, 'inversion_time': 10}}, 'one of'),
            ({'rates': {'heating': [0.1] * 6}}, 'together'),
            (
                {'rates': {'heating': [0.1] * 5, 'cooling': [0.1] * 6}},
                '6 entries',
            ),
            ({'rates': {'uniform': -1}}, '>= 0'),
            ({'cycle': {'tau_h': 0}}, 'tau_h must be > 0'),
            ({'cycle': {'initial_level': 7}}, 'level'),
            (
                {
                    'cycle': {
                        'initial_level': 0,
                        'initial': [1, 0, 0, 0, 0, 0, 0],
                    }
                },
                'not both',
            ),
            ({'cycle': {'initial': [0.5, 0.6, 0, 0, 0, 0, 0]}}, 'sum'),
            ({'limit_cycle': {'max_iters': 0}}, 'max_iters'),
            ({'limit_cycle': {'max_iters': 1.5}}, 'must be an integer'),
            ({'limit_cycle': {'tol': -1}}, 'tol'),
            ({'adiabaticity_threshold': 0}, 'adiabaticity_threshold'),
            ({'closure_tol': 0}, 'closure_tol'),
            ({'n_traj': -5}, 'n_traj'),
            ({'seed': -1}, 'seed'),
            ({'seed': 'abc'}, 'seed must be an integer'),
            ({'parallel': 0}, 'parallel'),
            ({'sweep': {'tau_pairs': [[1, 2, 3]]}}, 'tau_h, tau_c'),
            ({'sweep': {'tau_pairs': [[1, 2]], 'steps': 4}}, 'not both'),
            ({'sweep': {'steps': 1}}, 'steps'),
            ({'sweep': {'pairing': 'odd'}}, 'pairing'),
            ({'sweep': {'min': 500, 'max': 100}}, 'tau_max'),
        ]
        for data, msg in cases:
            with self.subTest(data=data):
                with self.assertRaisesRegex(ValueError, msg):
                    SimulationConfig.from_dict(data)


if __name__ == '__main__':
    unittest.main()
