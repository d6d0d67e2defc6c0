"""
Experiment configuration: one JSON document describing constants, fields,
rates, the reference cycle and the sweep grid.
"""
import numbers
from typing import Any, Dict, List, Mapping, Optional

from spinotto import (
    _DEFAULT_ADIABATICITY_THRESHOLD,
    _DEFAULT_CLOSURE_TOL,
    _DEFAULT_TAU_STROKE,
    _LIMIT_CYCLE_MAX_ITERS,
    _LIMIT_CYCLE_TOL,
)
from spinotto.model import (
    CouplingConstants,
    CycleSpec,
    FieldSchedule,
    LevelDistribution,
    RateTable,
)
from spinotto.sweep import SweepSpec
from spinotto.utils import read_json

SECTIONS = {
    'constants': ('g_cs', 'g_rb', 'temperature_nk'),
    'field': ('b1', 'b2', 'ramp_time', 'ramp_shape'),
    'rates': ('uniform', 'heating', 'cooling', 'inversion_time'),
    'cycle': ('tau_h', 'tau_c', 'bath_swap_time', 'initial_level', 'initial'),
    'limit_cycle': ('max_iters', 'tol'),
    'sweep': ('tau_pairs', 'min', 'max', 'steps', 'pairing', 'output_path'),
}
SCALARS = (
    'adiabaticity_threshold',
    'closure_tol',
    'n_traj',
    'seed',
    'parallel',
)


def _section(data: Mapping[str, Any], name: str) -> Dict[str, Any]:
    section = data.get(name, {})
    if not isinstance(section, Mapping):
        raise ValueError(
            'config section "{}" must be an object, found {}'.format(
                name, section
            )
        )
    unknown = sorted(set(section) - set(SECTIONS[name]))
    if unknown:
        raise ValueError(
            'Unknown keys in config section "{}": {}, expecting {}'.format(
                name, unknown, list(SECTIONS[name])
            )
        )
    return dict(section)


def _number(where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValueError('{} must be a number, found {}'.format(where, value))
    return float(value)


def _integer(where: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError('{} must be an integer, found {}'.format(where, value))
    return int(value)


def _numbers(where: str, value: Any) -> List[float]:
    if not isinstance(value, list):
        raise ValueError('{} must be a list, found {}'.format(where, value))
    return [_number(where, x) for x in value]


class SimulationConfig:
    """
    Validated configuration.

    :param cycle: Reference cycle; the sweep varies its stroke durations.
    :param sweep: Sweep grid built on ``cycle``.
    :param adiabaticity_threshold: Ramp adiabaticity threshold.
    :param closure_tol: Largest start-to-end distance of a closed cycle.
    :param max_iters: Limit-cycle iteration budget.
    :param tol: Limit-cycle convergence tolerance.
    :param n_traj: Trajectories per stochastic run.
    :param seed: Master RNG seed.
    :param parallel: Sweep worker threads.
    """

    def __init__(
        self,
        cycle: Optional[CycleSpec] = None,
        sweep: Optional[SweepSpec] = None,
        adiabaticity_threshold: float = _DEFAULT_ADIABATICITY_THRESHOLD,
        closure_tol: float = _DEFAULT_CLOSURE_TOL,
        max_iters: int = _LIMIT_CYCLE_MAX_ITERS,
        tol: float = _LIMIT_CYCLE_TOL,
        n_traj: int = 0,
        seed: Optional[int] = None,
        parallel: Optional[int] = None,
    ) -> None:
        """Initialize object."""
        self.cycle = (
            cycle
            if cycle is not None
            else CycleSpec(_DEFAULT_TAU_STROKE, _DEFAULT_TAU_STROKE)
        )
        self.adiabaticity_threshold = adiabaticity_threshold
        self.closure_tol = closure_tol
        self.max_iters = max_iters
        self.tol = tol
        self.n_traj = n_traj
        self.seed = seed
        self.parallel = parallel
        self.sweep = sweep if sweep is not None else self.sweep_spec()
        self.validate()

    def __repr__(self) -> str:
        repr = 'SimulationConfig: seed={}, n_traj={}'.format(
            self.seed, self.n_traj
        )
        repr = '{}\n {}'.format(repr, self.cycle)
        repr = '{}\n {}'.format(repr, self.sweep)
        return repr

    def validate(self) -> None:
        """Check the scalar settings; the nested objects validate themselves."""
        if not self.adiabaticity_threshold > 0:
            raise ValueError(
                'adiabaticity_threshold must be > 0, found {}'.format(
                    self.adiabaticity_threshold
                )
            )
        if not self.closure_tol > 0:
            raise ValueError(
                'closure_tol must be > 0, found {}'.format(self.closure_tol)
            )
        if self.max_iters < 1:
            raise ValueError(
                'limit_cycle.max_iters must be >= 1, found {}'.format(
                    self.max_iters
                )
            )
        if not self.tol > 0:
            raise ValueError(
                'limit_cycle.tol must be > 0, found {}'.format(self.tol)
            )
        if self.n_traj < 0:
            raise ValueError(
                'n_traj must be >= 0, found {}'.format(self.n_traj)
            )
        if self.seed is not None and self.seed < 0:
            raise ValueError('seed must be >= 0, found {}'.format(self.seed))
        if self.parallel is not None and self.parallel < 1:
            raise ValueError(
                'parallel must be >= 1, found {}'.format(self.parallel)
            )

    def sweep_spec(self, **kwargs: Any) -> SweepSpec:
        """Sweep over the reference cycle with this configuration's settings."""
        args: Dict[str, Any] = {
            'n_traj': self.n_traj,
            'seed': self.seed,
            'parallel': self.parallel,
            'max_iters': self.max_iters,
            'tol': self.tol,
            'closure_tol': self.closure_tol,
            'adiabaticity_threshold': self.adiabaticity_threshold,
        }
        args.update(kwargs)
        return SweepSpec(self.cycle, **args)

    def with_seed(self, seed: Optional[int]) -> 'SimulationConfig':
        """Copy with another master seed."""
        sweep = self.sweep
        return SimulationConfig(
            cycle=self.cycle,
            sweep=SweepSpec(
                sweep.base,
                tau_pairs=sweep.tau_pairs,
                tau_min=sweep.tau_min,
                tau_max=sweep.tau_max,
                steps=sweep.steps,
                pairing=sweep.pairing,
                n_traj=sweep.n_traj,
                seed=seed,
                output_path=sweep.output_path,
                parallel=sweep.parallel,
                max_iters=sweep.max_iters,
                tol=sweep.tol,
                closure_tol=sweep.closure_tol,
                adiabaticity_threshold=sweep.adiabaticity_threshold,
            ),
            adiabaticity_threshold=self.adiabaticity_threshold,
            closure_tol=self.closure_tol,
            max_iters=self.max_iters,
            tol=self.tol,
            n_traj=self.n_traj,
            seed=seed,
            parallel=self.parallel,
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'SimulationConfig':
        """Build from a parsed JSON document; every key is optional."""
        if not isinstance(data, Mapping):
            raise ValueError(
                'config must be a JSON object, found {}'.format(data)
            )
        unknown = sorted(set(data) - set(SECTIONS) - set(SCALARS))
        if unknown:
            raise ValueError('Unknown config keys: {}'.format(unknown))

        section = _section(data, 'constants')
        constants = CouplingConstants(
            **{k: _number('constants.' + k, v) for k, v in section.items()}
        )

        section = _section(data, 'field')
        field_args: Dict[str, Any] = {}
        for key, value in section.items():
            if key == 'ramp_shape':
                field_args[key] = value
            else:
                field_args[key] = _number('field.' + key, value)
        field = FieldSchedule(**field_args)

        rates = cls._rates(_section(data, 'rates'))

        section = _section(data, 'cycle')
        if 'initial_level' in section and 'initial' in section:
            raise ValueError(
                'Specify either cycle.initial_level or cycle.initial, not both'
            )
        if 'initial' in section:
            initial = LevelDistribution(
                _numbers('cycle.initial', section['initial'])
            )
        else:
            initial = LevelDistribution.polarized(
                _integer('cycle.initial_level', section.get('initial_level', 0))
            )
        cycle_args = {
            k: _number('cycle.' + k, section[k])
            for k in ('tau_h', 'tau_c', 'bath_swap_time')
            if k in section
        }
        cycle = CycleSpec(
            tau_h=cycle_args.get('tau_h', _DEFAULT_TAU_STROKE),
            tau_c=cycle_args.get('tau_c', _DEFAULT_TAU_STROKE),
            field=field,
            rates=rates,
            constants=constants,
            initial=initial,
            **(
                {'bath_swap_time': cycle_args['bath_swap_time']}
                if 'bath_swap_time' in cycle_args
                else {}
            ),
        )

        limit_cycle = _section(data, 'limit_cycle')
        config = cls(
            cycle=cycle,
            sweep=None,
            adiabaticity_threshold=_number(
                'adiabaticity_threshold',
                data.get(
                    'adiabaticity_threshold', _DEFAULT_ADIABATICITY_THRESHOLD
                ),
            ),
            closure_tol=_number(
                'closure_tol', data.get('closure_tol', _DEFAULT_CLOSURE_TOL)
            ),
            max_iters=_integer(
                'limit_cycle.max_iters',
                limit_cycle.get('max_iters', _LIMIT_CYCLE_MAX_ITERS),
            ),
            tol=_number(
                'limit_cycle.tol', limit_cycle.get('tol', _LIMIT_CYCLE_TOL)
            ),
            n_traj=_integer('n_traj', data.get('n_traj', 0)),
            seed=(
                _integer('seed', data['seed'])
                if data.get('seed') is not None
                else None
            ),
            parallel=(
                _integer('parallel', data['parallel'])
                if data.get('parallel') is not None
                else None
            ),
        )

        section = _section(data, 'sweep')
        sweep_args: Dict[str, Any] = {}
        if 'tau_pairs' in section:
            pairs = section['tau_pairs']
            if not isinstance(pairs, list) or any(
                not isinstance(p, list) or len(p) != 2 for p in pairs
            ):
                raise ValueError(
                    'sweep.tau_pairs must be a list of [tau_h, tau_c] pairs, '
                    'found {}'.format(pairs)
                )
            sweep_args['tau_pairs'] = [
                tuple(_numbers('sweep.tau_pairs', p)) for p in pairs
            ]
        if 'min' in section:
            sweep_args['tau_min'] = _number('sweep.min', section['min'])
        if 'max' in section:
            sweep_args['tau_max'] = _number('sweep.max', section['max'])
        if 'steps' in section:
            sweep_args['steps'] = _integer('sweep.steps', section['steps'])
        if 'pairing' in section:
            sweep_args['pairing'] = section['pairing']
        if 'output_path' in section:
            sweep_args['output_path'] = str(section['output_path'])
        config.sweep = config.sweep_spec(**sweep_args)
        return config

    @staticmethod
    def _rates(section: Mapping[str, Any]) -> RateTable:
        given = [k for k in ('uniform', 'inversion_time') if k in section]
        ladders = [k for k in ('heating', 'cooling') if k in section]
        if len(given) + (1 if ladders else 0) > 1:
            raise ValueError(
                'Specify one of rates.uniform, rates.inversion_time or '
                'rates.heating/rates.cooling, found {}'.format(sorted(section))
            )
        if 'uniform' in section:
            return RateTable.uniform(
                _number('rates.uniform', section['uniform'])
            )
        if 'inversion_time' in section:
            return RateTable.calibrated(
                _number('rates.inversion_time', section['inversion_time'])
            )
        if ladders:
            if len(ladders) != 2:
                raise ValueError(
                    'rates.heating and rates.cooling must be given together'
                )
            return RateTable(
                _numbers('rates.heating', section['heating']),
                _numbers('rates.cooling', section['cooling']),
            )
        return RateTable.uniform()


def load_config(path: Optional[str] = None) -> SimulationConfig:
    """
    Read a JSON configuration file; without a path, return the defaults.

    :raises OSError: when the file is missing.
    :raises ValueError: when the file does not parse or fails validation.
    """
    if path is None:
        return SimulationConfig()
    return SimulationConfig.from_dict(read_json(path))
