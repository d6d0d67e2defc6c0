"""
Spin-exchange contact dynamics: rate-equation integration, exact-jump
trajectory sampling and collision counting.

During a contact phase the engine is a one-directional birth (heating)
or death (cooling) chain over the seven levels; the far end of the ladder
is absorbing.
"""
import math
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import chisquare

from spinotto.model import (
    CLAMP_TOL,
    LEVELS,
    MAX_LEVEL,
    NUM_LEVELS,
    CycleSpec,
    LevelDistribution,
    RateTable,
    validate_level,
)
from spinotto.utils import get_logger

RNG_ALGORITHM = 'numpy.random.Philox'

# integrator step in units of the fastest rate, and minimum steps per phase
STEP_RATE_FRACTION = 0.01
MIN_STEPS = 100

# expected counts below this are pooled before the chi-square test
MIN_EXPECTED_COUNT = 5.0


class Direction(Enum):
    """Direction of quantum transfer while in contact with the bath."""

    HEATING = 'heating'
    COOLING = 'cooling'

    def __repr__(self) -> str:
        return '<%s.%s>' % (self.__class__.__name__, self.name)

    @property
    def step(self) -> int:
        """Change of level index per collision."""
        return 1 if self is Direction.HEATING else -1

    @property
    def absorbing_level(self) -> int:
        return MAX_LEVEL if self is Direction.HEATING else 0


class IntegrationError(RuntimeError):
    """
    Raised when an integrator step produces a probability below the
    clamping tolerance.
    """

    def __init__(
        self, step: int, time: float, h: float, vector: np.ndarray
    ) -> None:
        self.step = step
        self.time = time
        self.h = h
        self.vector = np.array(vector)
        super().__init__(
            'negative probability at step {} (t = {} ms, h = {} ms): {}'.format(
                step, time, h, self.vector
            )
        )


class ContactPhase:
    """
    Engine in contact with one polarized bath at constant field.

    :param direction: Heating or cooling.
    :param duration: Contact time, ms.
    :param field: Magnetic field during contact, mG.
    :param rates: Collision rate table; only the ladder matching
        ``direction`` is active.
    """

    def __init__(
        self,
        direction: Union[str, Direction],
        duration: float,
        field: float,
        rates: RateTable,
    ) -> None:
        """Initialize object."""
        try:
            self._direction = Direction(
                direction.value
                if isinstance(direction, Direction)
                else direction
            )
        except ValueError as e:
            raise ValueError(
                'direction must be heating or cooling, found {}'.format(
                    direction
                )
            ) from e
        self._duration = float(duration)
        self._field = float(field)
        self._rates = rates
        self.validate()

    def validate(self) -> None:
        if not self._duration >= 0 or not math.isfinite(self._duration):
            raise ValueError(
                'duration must be finite and >= 0, found {}'.format(
                    self._duration
                )
            )
        if not self._field > 0:
            raise ValueError('field must be > 0, found {}'.format(self._field))
        if not isinstance(self._rates, RateTable):
            raise ValueError('rates must be a RateTable')

    @classmethod
    def heating(cls, spec: CycleSpec) -> 'ContactPhase':
        """Heating stroke A -> B of a cycle."""
        return cls(Direction.HEATING, spec.tau_h, spec.field.b1, spec.rates)

    @classmethod
    def cooling(cls, spec: CycleSpec) -> 'ContactPhase':
        """Cooling stroke C -> D of a cycle."""
        return cls(Direction.COOLING, spec.tau_c, spec.field.b2, spec.rates)

    def __repr__(self) -> str:
        return 'ContactPhase({}, duration={}, field={})'.format(
            self._direction.value, self._duration, self._field
        )

    def with_duration(self, duration: float) -> 'ContactPhase':
        return ContactPhase(self._direction, duration, self._field, self._rates)

    @property
    def direction(self) -> Direction:
        return self._direction

    @property
    def duration(self) -> float:
        return self._duration

    @property
    def field(self) -> float:
        return self._field

    @property
    def rates(self) -> RateTable:
        return self._rates

    @property
    def active_rates(self) -> np.ndarray:
        """Outgoing collision rate of each level, 1/ms."""
        return self._rates.level_rates(self._direction is Direction.HEATING)

    def generator(self) -> np.ndarray:
        """
        Rate matrix ``Q`` of the chain in row convention,
        ``dp/dt = p @ Q``.
        """
        rates = self.active_rates
        q = np.zeros((NUM_LEVELS, NUM_LEVELS))
        step = self._direction.step
        for n in LEVELS:
            if rates[n] > 0:
                q[n, n] = -rates[n]
                q[n, n + step] = rates[n]
        return q

    def step_size(self) -> Tuple[float, int]:
        """Integrator step ``h`` and number of steps covering the phase."""
        if self._duration == 0:
            return 0.0, 0
        h_max = self._duration / MIN_STEPS
        fastest = self._rates.max_rate
        if fastest > 0:
            h_max = min(h_max, STEP_RATE_FRACTION / fastest)
        n_steps = int(math.ceil(self._duration / h_max - 1e-9))
        return self._duration / n_steps, n_steps


def _augmented_step_matrix(phase: ContactPhase, h: float) -> np.ndarray:
    """
    One classical Runge-Kutta step of the joint (p, N) system as a matrix.

    The last component accumulates the active collision rate, so it counts
    collisions along with the populations.
    """
    a = np.zeros((NUM_LEVELS + 1, NUM_LEVELS + 1))
    a[:NUM_LEVELS, :NUM_LEVELS] = phase.generator()
    a[:NUM_LEVELS, NUM_LEVELS] = phase.active_rates
    ha = h * a
    term = np.eye(NUM_LEVELS + 1)
    step = np.eye(NUM_LEVELS + 1)
    for order in range(1, 5):
        term = term @ ha / order
        step = step + term
    return step


def evolve_with_count(
    dist: LevelDistribution, phase: ContactPhase
) -> Tuple[LevelDistribution, float]:
    """
    Integrate the rate equations over one contact phase.

    :return: Final distribution and mean number of collisions.
    """
    h, n_steps = phase.step_size()
    if n_steps == 0:
        return dist, 0.0
    get_logger().debug(
        '%s phase: duration %s ms, %d steps of %s ms',
        phase.direction.value,
        phase.duration,
        n_steps,
        h,
    )
    step = _augmented_step_matrix(phase, h)
    x = np.zeros(NUM_LEVELS + 1)
    x[:NUM_LEVELS] = dist.p
    if step[:NUM_LEVELS, :NUM_LEVELS].min() >= 0:
        # a nonnegative step keeps every population nonnegative
        x = x @ np.linalg.matrix_power(step, n_steps)
        return LevelDistribution(x[:NUM_LEVELS]), float(x[NUM_LEVELS])
    for i in range(n_steps):
        x = x @ step
        if x[:NUM_LEVELS].min() < -CLAMP_TOL:
            raise IntegrationError(i + 1, (i + 1) * h, h, x[:NUM_LEVELS])
    return LevelDistribution(x[:NUM_LEVELS]), float(x[NUM_LEVELS])


def evolve_master(
    dist: LevelDistribution, phase: ContactPhase
) -> LevelDistribution:
    """
    Distribution after ``phase.duration`` ms of contact.

    :param dist: Distribution at the start of contact.
    :param phase: Contact phase.
    """
    return evolve_with_count(dist, phase)[0]


def stroke_propagator(phase: ContactPhase) -> np.ndarray:
    """
    Transition matrix of a whole contact phase in row convention, with the
    collision counter as the last row and column.
    """
    h, n_steps = phase.step_size()
    if n_steps == 0:
        return np.eye(NUM_LEVELS + 1)
    return np.linalg.matrix_power(_augmented_step_matrix(phase, h), n_steps)


def population_series(
    dist: LevelDistribution,
    phase: ContactPhase,
    times: Union[Sequence[float], np.ndarray],
) -> np.ndarray:
    """
    Populations on a time grid within one contact phase.

    :param dist: Distribution at the start of contact.
    :param phase: Contact phase; ``times`` must lie in ``[0, duration]``.
    :param times: Nondecreasing sample times, ms.

    :return: Array of shape ``(len(times), 7)``.
    """
    grid = np.asarray(times, dtype=float)
    if grid.ndim != 1:
        raise ValueError('times must be one-dimensional')
    if len(grid) > 0:
        if grid[0] < 0 or grid[-1] > phase.duration:
            raise ValueError(
                'times must lie in [0, {}], found [{}, {}]'.format(
                    phase.duration, grid[0], grid[-1]
                )
            )
        if np.any(np.diff(grid) < 0):
            raise ValueError('times must be nondecreasing')
    out = np.zeros((len(grid), NUM_LEVELS))
    current = dist
    t_prev = 0.0
    for i, t in enumerate(grid):
        current = evolve_master(current, phase.with_duration(t - t_prev))
        out[i] = current.p
        t_prev = t
    return out


def mean_collision_rate(
    dist: LevelDistribution, phase: ContactPhase
) -> float:
    """Mean collision rate of ``dist`` under the active ladder, 1/ms."""
    return float(np.dot(dist.p, phase.active_rates))


def collision_count(spec: CycleSpec) -> float:
    """
    Mean number of collisions over one cycle started from
    ``spec.initial``: heating collisions plus cooling collisions.
    """
    dist_b, n_heating = evolve_with_count(
        spec.initial, ContactPhase.heating(spec)
    )
    _, n_cooling = evolve_with_count(dist_b, ContactPhase.cooling(spec))
    return n_heating + n_cooling


def make_rng(
    seed: Optional[int], index: Optional[int] = None
) -> np.random.Generator:
    """
    Counter-based generator; ``index`` selects an independent stream
    derived from ``seed``.
    """
    if index is None:
        seq = np.random.SeedSequence(seed)
    else:
        seq = np.random.SeedSequence(seed, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


class TrajectoryRecord:
    """Jump record of one atom during one contact phase."""

    def __init__(
        self,
        start: int,
        direction: Direction,
        duration: float,
        jump_times: Sequence[float],
    ) -> None:
        """Initialize object."""
        self._start = start
        self._direction = direction
        self._duration = duration
        self._jump_times = tuple(float(t) for t in jump_times)

    def __repr__(self) -> str:
        return (
            'TrajectoryRecord({}, start={}, levels={}, jump_times={})'.format(
                self._direction.value,
                self._start,
                self.levels,
                self._jump_times,
            )
        )

    @property
    def start(self) -> int:
        return self._start

    @property
    def direction(self) -> Direction:
        return self._direction

    @property
    def duration(self) -> float:
        return self._duration

    @property
    def jump_times(self) -> Tuple[float, ...]:
        """Collision times, ms, in increasing order."""
        return self._jump_times

    @property
    def levels(self) -> Tuple[int, ...]:
        """Visited levels, starting level included."""
        step = self._direction.step
        return tuple(
            self._start + step * i for i in range(len(self._jump_times) + 1)
        )

    @property
    def quanta_exchanged(self) -> int:
        return len(self._jump_times)

    @property
    def final_level(self) -> int:
        return self.levels[-1]

    def as_dict(self) -> Dict[str, Any]:
        return {
            'direction': self._direction.value,
            'duration': self._duration,
            'start': self._start,
            'levels': list(self.levels),
            'jump_times': list(self._jump_times),
            'quanta_exchanged': self.quanta_exchanged,
        }


def _sample_path(
    start: int, phase: ContactPhase, rng: np.random.Generator
) -> TrajectoryRecord:
    rates = phase.active_rates
    step = phase.direction.step
    level = start
    t = 0.0
    jumps = []
    while rates[level] > 0:
        t += rng.exponential(1.0 / rates[level])
        if t > phase.duration:
            break
        jumps.append(t)
        level += step
    return TrajectoryRecord(start, phase.direction, phase.duration, jumps)


def sample_trajectory(
    start: int, phase: ContactPhase, rng_seed: int
) -> TrajectoryRecord:
    """
    Exact-jump sample of one atom's collisions during ``phase``.

    Waiting times at each level are exponential with that level's active
    rate; the absorbing end of the ladder stops the chain.

    :param start: Initial level index.
    :param phase: Contact phase.
    :param rng_seed: Seed of the Philox generator.
    """
    return _sample_path(validate_level(start), phase, make_rng(rng_seed))


def sample_levels(
    start: np.ndarray, phase: ContactPhase, rng: np.random.Generator
) -> np.ndarray:
    """
    Final levels of many independent atoms after ``phase``.

    Every round draws one waiting time per atom, so the stream consumed
    depends only on the number of atoms.
    """
    level = np.array(start, dtype=int)
    rates = phase.active_rates
    step = phase.direction.step
    elapsed = np.zeros(len(level))
    active = np.ones(len(level), dtype=bool)
    for _ in range(MAX_LEVEL):
        rate = rates[level]
        draws = rng.standard_exponential(len(level))
        with np.errstate(divide='ignore'):
            elapsed = elapsed + np.where(rate > 0, draws / rate, np.inf)
        jumped = active & (elapsed <= phase.duration)
        level = level + step * jumped
        active = jumped
        if not active.any():
            break
    return level


def pooled_chisquare(
    observed: np.ndarray, expected_p: np.ndarray
) -> Tuple[float, float]:
    """
    Chi-square goodness of fit of level counts against probabilities,
    pooling bins with small expected counts.

    :return: statistic and p-value.
    """
    observed = np.asarray(observed, dtype=float)
    total = observed.sum()
    expected = np.asarray(expected_p, dtype=float) * total
    expected = expected * total / expected.sum()
    small = expected < MIN_EXPECTED_COUNT
    f_obs = list(observed[~small])
    f_exp = list(expected[~small])
    if small.any():
        pooled_obs = observed[small].sum()
        pooled_exp = expected[small].sum()
        if pooled_exp >= MIN_EXPECTED_COUNT or not f_exp:
            f_obs.append(pooled_obs)
            f_exp.append(pooled_exp)
        else:
            largest = int(np.argmax(f_exp))
            f_obs[largest] += pooled_obs
            f_exp[largest] += pooled_exp
    if len(f_obs) < 2:
        return 0.0, 1.0
    stat, pvalue = chisquare(f_obs, f_exp)
    return float(stat), float(pvalue)


class EnsembleStatistics:
    """Counting statistics of an ensemble of sampled trajectories."""

    def __init__(
        self,
        initial_levels: np.ndarray,
        final_levels: np.ndarray,
        phase: ContactPhase,
        seed: Optional[int],
    ) -> None:
        """Initialize object."""
        self._initial = np.asarray(initial_levels, dtype=int)
        self._final = np.asarray(final_levels, dtype=int)
        self._phase = phase
        self._seed = seed
        self._counts = np.bincount(self._final, minlength=NUM_LEVELS)
        self._quanta = np.abs(self._final - self._initial)

    def __repr__(self) -> str:
        return (
            'EnsembleStatistics: n_traj={}, mean_quanta={:.6g}, '
            'var_quanta={:.6g}, final={}'.format(
                self.n_traj,
                self.mean_quanta,
                self.var_quanta,
                self._counts.tolist(),
            )
        )

    @property
    def n_traj(self) -> int:
        return len(self._final)

    @property
    def seed(self) -> Optional[int]:
        return self._seed

    @property
    def phase(self) -> ContactPhase:
        return self._phase

    @property
    def counts(self) -> np.ndarray:
        """Number of atoms ending in each level."""
        return self._counts

    @property
    def final(self) -> LevelDistribution:
        """Empirical final distribution."""
        return LevelDistribution(self._counts / self.n_traj)

    @property
    def quanta(self) -> np.ndarray:
        """Quanta exchanged by each atom."""
        return self._quanta

    @property
    def mean_quanta(self) -> float:
        return float(self._quanta.mean())

    @property
    def var_quanta(self) -> float:
        return float(self._quanta.var())

    @property
    def stderr_quanta(self) -> float:
        """Standard error of :attr:`mean_quanta`."""
        return math.sqrt(self.var_quanta / self.n_traj)

    def chi_square(self, expected: LevelDistribution) -> Tuple[float, float]:
        """Goodness of fit of the final levels against ``expected``."""
        return pooled_chisquare(self._counts, expected.p)

    def as_dict(self) -> Dict[str, Any]:
        return {
            'direction': self._phase.direction.value,
            'duration': self._phase.duration,
            'n_traj': self.n_traj,
            'seed': self._seed,
            'rng': RNG_ALGORITHM,
            'final': self.final.p,
            'counts': self._counts,
            'mean_quanta': self.mean_quanta,
            'var_quanta': self.var_quanta,
            'quanta_histogram': np.bincount(
                self._quanta, minlength=NUM_LEVELS
            ),
        }


def ensemble_statistics(
    start: LevelDistribution,
    phase: ContactPhase,
    n_traj: int,
    rng_seed: Optional[int],
) -> EnsembleStatistics:
    """
    Sample ``n_traj`` atoms with initial levels drawn from ``start``.

    :param start: Initial level distribution.
    :param phase: Contact phase.
    :param n_traj: Number of trajectories, at least 1.
    :param rng_seed: Seed of the Philox generator.
    """
    if not isinstance(n_traj, (int, np.integer)) or n_traj < 1:
        raise ValueError(
            'n_traj must be an integer >= 1, found {}'.format(n_traj)
        )
    rng = make_rng(rng_seed)
    initial = rng.choice(NUM_LEVELS, size=int(n_traj), p=start.p)
    final = sample_levels(initial, phase, rng)
    return EnsembleStatistics(initial, final, phase, rng_seed)
