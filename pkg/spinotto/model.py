"""
Engine model: physical constants, unit conventions, the seven-level
Zeeman ladder, and the value types shared by every other module.

Units: magnetic field in mG, time in ms, energy in k_B*nK,
power in k_B*nK/ms.  Level index ``n = 3 - m_F`` so that ``n = 0`` is the
lowest-energy state ``m_F = +3`` and heating always increments ``n``.
"""
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import numpy as np
import scipy
from scipy.constants import physical_constants

from spinotto import (
    _DEFAULT_B1,
    _DEFAULT_B2,
    _DEFAULT_BATH_SWAP_TIME,
    _DEFAULT_G_CS,
    _DEFAULT_G_RB,
    _DEFAULT_RAMP_TIME,
    _DEFAULT_RATE,
    _DEFAULT_TEMPERATURE_NK,
)

NUM_LEVELS = 7
MAX_LEVEL = NUM_LEVELS - 1
LEVELS = np.arange(NUM_LEVELS)

SUM_TOL = 1e-9
CLAMP_TOL = 1e-12

MU_B = physical_constants['Bohr magneton'][0]  # J/T
K_B = physical_constants['Boltzmann constant'][0]  # J/K
HBAR = physical_constants['reduced Planck constant'][0]  # J s
CONSTANTS_VERSION = 'CODATA (scipy {})'.format(scipy.__version__)

TESLA_PER_MG = 1e-7
SECONDS_PER_MS = 1e-3
KELVIN_PER_NK = 1e-9

# k_B*nK per mG for a unit Lande factor: mu_B / k_B in nK/mG
ENERGY_PER_MG = MU_B * TESLA_PER_MG / (K_B * KELVIN_PER_NK)


def m_f(n: Union[int, np.ndarray]) -> Union[int, np.ndarray]:
    """Magnetic quantum number of level index ``n``."""
    return 3 - n


def validate_level(n: Any) -> int:
    """Check a level index, return it as int."""
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)):
        raise ValueError(
            'level index must be an integer in [0, {}], found {}'.format(
                MAX_LEVEL, n
            )
        )
    if n < 0 or n > MAX_LEVEL:
        raise ValueError(
            'level index must be an integer in [0, {}], found {}'.format(
                MAX_LEVEL, n
            )
        )
    return int(n)


class LevelDistribution:
    """
    Probability vector over the seven quasi-spin levels.

    Instances are immutable: the underlying array is read-only.
    Entries in ``[-1e-12, 0)`` are clamped to zero and the vector is
    renormalized; anything more negative is rejected.

    :param p: Sequence of 7 probabilities indexed by ``n``.
    """

    def __init__(self, p: Union[Sequence[float], np.ndarray]) -> None:
        """Initialize object."""
        arr = np.array(p, dtype=float)
        if arr.shape != (NUM_LEVELS,):
            raise ValueError(
                'distribution must have {} entries, found shape {}'.format(
                    NUM_LEVELS, arr.shape
                )
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(
                'distribution has non-finite entries: {}'.format(arr)
            )
        if arr.min() < -CLAMP_TOL:
            raise ValueError(
                'distribution has negative entries beyond {}: {}'.format(
                    CLAMP_TOL, arr
                )
            )
        if abs(arr.sum() - 1.0) > SUM_TOL:
            raise ValueError(
                'distribution must sum to 1 within {}, found sum {}'.format(
                    SUM_TOL, arr.sum()
                )
            )
        if arr.min() < 0:
            arr = np.clip(arr, 0.0, None)
            arr = arr / arr.sum()
        arr.setflags(write=False)
        self._p = arr

    @classmethod
    def polarized(cls, n: int) -> 'LevelDistribution':
        """All population in level ``n``."""
        n = validate_level(n)
        p = np.zeros(NUM_LEVELS)
        p[n] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls) -> 'LevelDistribution':
        """Equal population in every level."""
        return cls(np.full(NUM_LEVELS, 1.0 / NUM_LEVELS))

    @classmethod
    def from_m_f(cls, populations: Mapping[int, float]) -> 'LevelDistribution':
        """Build from a mapping ``m_F -> probability``; missing levels are 0."""
        p = np.zeros(NUM_LEVELS)
        for mf, prob in populations.items():
            p[validate_level(m_f(mf))] = prob
        return cls(p)

    def __repr__(self) -> str:
        return 'LevelDistribution({})'.format(
            np.array2string(self._p, precision=6, separator=', ')
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LevelDistribution):
            return NotImplemented
        return bool(np.array_equal(self._p, other._p))

    def __hash__(self) -> int:
        return hash(self._p.tobytes())

    @property
    def p(self) -> np.ndarray:
        """Read-only probability vector indexed by ``n``."""
        return self._p

    @property
    def m_f(self) -> np.ndarray:
        """Magnetic quantum numbers matching the entries of :attr:`p`."""
        return m_f(LEVELS)

    @property
    def mean_level(self) -> float:
        """Mean level index, i.e. mean number of stored quanta."""
        return float(np.dot(LEVELS, self._p))

    def tail(self, k: int) -> float:
        """Probability of level ``n >= k``."""
        return float(self._p[validate_level(k) :].sum())

    def distance(self, other: 'LevelDistribution') -> float:
        """Max-norm distance to another distribution."""
        return float(np.max(np.abs(self._p - other.p)))

    def as_dict(self) -> Dict[str, Any]:
        return {'n': LEVELS.tolist(), 'm_f': self.m_f.tolist(), 'p': self._p}


class CouplingConstants:
    """
    Lande-factor derived energy scales.

    :param g_cs: Engine (Cs) Lande factor magnitude.
    :param g_rb: Bath (Rb) Lande factor magnitude.
    :param temperature_nk: Kinetic bath temperature, metadata only.
    """

    def __init__(
        self,
        g_cs: float = _DEFAULT_G_CS,
        g_rb: float = _DEFAULT_G_RB,
        temperature_nk: float = _DEFAULT_TEMPERATURE_NK,
    ) -> None:
        """Initialize object."""
        self._g_cs = float(g_cs)
        self._g_rb = float(g_rb)
        self._temperature_nk = float(temperature_nk)
        self.validate()

    def validate(self) -> None:
        """
        Check arguments correctness and consistency.

        * both Lande magnitudes positive
        * ratio gamma in (0, 1]
        """
        if not self._g_cs > 0:
            raise ValueError('g_cs must be > 0, found {}'.format(self._g_cs))
        if not self._g_rb > 0:
            raise ValueError('g_rb must be > 0, found {}'.format(self._g_rb))
        if self.gamma > 1:
            raise ValueError(
                'gamma = g_cs/g_rb must be in (0, 1], found {}'.format(
                    self.gamma
                )
            )
        if not self._temperature_nk >= 0:
            raise ValueError(
                'temperature_nk must be >= 0, found {}'.format(
                    self._temperature_nk
                )
            )

    def __repr__(self) -> str:
        return 'CouplingConstants(g_cs={}, g_rb={}, gamma={})'.format(
            self._g_cs, self._g_rb, self.gamma
        )

    @property
    def g_cs(self) -> float:
        return self._g_cs

    @property
    def g_rb(self) -> float:
        return self._g_rb

    @property
    def temperature_nk(self) -> float:
        return self._temperature_nk

    @property
    def lambda_(self) -> float:
        """Engine energy per quantum per field, k_B*nK/mG."""
        return self._g_cs * ENERGY_PER_MG

    @property
    def kappa(self) -> float:
        """Bath energy per quantum per field, k_B*nK/mG."""
        return self._g_rb * ENERGY_PER_MG

    @property
    def gamma(self) -> float:
        """Ratio lambda/kappa."""
        return self.lambda_ / self.kappa

    def as_dict(self) -> Dict[str, float]:
        return {
            'g_cs': self._g_cs,
            'g_rb': self._g_rb,
            'lambda': self.lambda_,
            'kappa': self.kappa,
            'gamma': self.gamma,
            'temperature_nk': self._temperature_nk,
        }


class RateTable:
    """
    Spin-exchange collision rates, 1/ms.

    ``heating_rates[n]`` is the rate of ``n -> n+1`` for ``n = 0..5`` while
    the bath is high-energy polarized; ``cooling_rates[n-1]`` is the rate of
    ``n -> n-1`` for ``n = 1..6`` while it is low-energy polarized.
    """

    def __init__(
        self,
        heating_rates: Union[Sequence[float], np.ndarray],
        cooling_rates: Union[Sequence[float], np.ndarray],
    ) -> None:
        """Initialize object."""
        heating = np.array(heating_rates, dtype=float)
        cooling = np.array(cooling_rates, dtype=float)
        for name, rates in (
            ('heating_rates', heating),
            ('cooling_rates', cooling),
        ):
            if rates.shape != (MAX_LEVEL,):
                raise ValueError(
                    '{} must have {} entries, found shape {}'.format(
                        name, MAX_LEVEL, rates.shape
                    )
                )
            if not np.all(np.isfinite(rates)) or np.any(rates < 0):
                raise ValueError(
                    '{} must be finite and >= 0, found {}'.format(name, rates)
                )
            rates.setflags(write=False)
        self._heating = heating
        self._cooling = cooling

    @classmethod
    def uniform(
        cls, rate: float = _DEFAULT_RATE, cooling_rate: Optional[float] = None
    ) -> 'RateTable':
        """Same rate for every step; cooling defaults to the heating rate."""
        if cooling_rate is None:
            cooling_rate = rate
        return cls(
            np.full(MAX_LEVEL, float(rate)),
            np.full(MAX_LEVEL, float(cooling_rate)),
        )

    @classmethod
    def calibrated(cls, inversion_time: float) -> 'RateTable':
        """
        Uniform table whose mean time for a full six-quantum inversion
        from a polarized state equals ``inversion_time`` ms.
        """
        if not inversion_time > 0:
            raise ValueError(
                'inversion_time must be > 0, found {}'.format(inversion_time)
            )
        return cls.uniform(MAX_LEVEL / inversion_time)

    def __repr__(self) -> str:
        return 'RateTable(heating={}, cooling={})'.format(
            self._heating.tolist(), self._cooling.tolist()
        )

    @property
    def heating_rates(self) -> np.ndarray:
        return self._heating

    @property
    def cooling_rates(self) -> np.ndarray:
        return self._cooling

    @property
    def max_rate(self) -> float:
        return float(max(self._heating.max(), self._cooling.max()))

    @property
    def is_symmetric(self) -> bool:
        """Cooling ladder is the mirror image of the heating ladder."""
        return bool(np.array_equal(self._cooling, self._heating[::-1]))

    def level_rates(self, heating: bool) -> np.ndarray:
        """
        Outgoing rate of every level in the active direction;
        the absorbing level has rate 0.
        """
        out = np.zeros(NUM_LEVELS)
        if heating:
            out[:MAX_LEVEL] = self._heating
        else:
            out[1:] = self._cooling
        return out

    def inversion_time(self, heating: bool) -> float:
        """Mean time of six collisions from the polarized start, ms."""
        rates = self._heating if heating else self._cooling
        if np.any(rates == 0):
            return float('inf')
        return float(np.sum(1.0 / rates))

    def as_dict(self) -> Dict[str, Any]:
        return {'heating': self._heating, 'cooling': self._cooling}


class RampShape(Enum):
    """Supported magnetic field ramp profiles."""

    LINEAR = 'linear'

    def __repr__(self) -> str:
        return '<%s.%s>' % (self.__class__.__name__, self.name)


class FieldSchedule:
    """
    Magnetic fields of the two contact phases and the ramp between them.

    :param b1: Field during heating, mG.
    :param b2: Field during cooling, mG.
    :param ramp_time: Duration of each ramp, ms.
    :param ramp_shape: Ramp profile, only ``'linear'`` is implemented.
    """

    def __init__(
        self,
        b1: float = _DEFAULT_B1,
        b2: float = _DEFAULT_B2,
        ramp_time: float = _DEFAULT_RAMP_TIME,
        ramp_shape: Union[str, RampShape] = RampShape.LINEAR,
    ) -> None:
        """Initialize object."""
        self._b1 = float(b1)
        self._b2 = float(b2)
        self._ramp_time = float(ramp_time)
        try:
            self._ramp_shape = RampShape(
                ramp_shape.value
                if isinstance(ramp_shape, RampShape)
                else ramp_shape
            )
        except ValueError as e:
            raise ValueError(
                'unsupported ramp_shape {}, expecting one of {}'.format(
                    ramp_shape, [s.value for s in RampShape]
                )
            ) from e
        self.validate()

    def validate(self) -> None:
        """Require b1 > b2 > 0 and a positive ramp time."""
        if not self._b2 > 0:
            raise ValueError('b2 must be > 0, found {}'.format(self._b2))
        if not self._b1 > self._b2:
            raise ValueError(
                'b1 must be > b2, found b1={}, b2={}'.format(self._b1, self._b2)
            )
        if not self._ramp_time > 0:
            raise ValueError(
                'ramp_time must be > 0, found {}'.format(self._ramp_time)
            )

    def __repr__(self) -> str:
        return (
            'FieldSchedule(b1={}, b2={}, ramp_time={}, ramp_shape={})'.format(
                self._b1, self._b2, self._ramp_time, self._ramp_shape.value
            )
        )

    @property
    def b1(self) -> float:
        return self._b1

    @property
    def b2(self) -> float:
        return self._b2

    @property
    def ramp_time(self) -> float:
        return self._ramp_time

    @property
    def ramp_shape(self) -> RampShape:
        return self._ramp_shape

    @property
    def ramp_speed(self) -> float:
        """Magnitude of dB/dt along either ramp, mG/ms."""
        return (self._b1 - self._b2) / self._ramp_time

    def as_dict(self) -> Dict[str, Any]:
        return {
            'b1': self._b1,
            'b2': self._b2,
            'ramp_time': self._ramp_time,
            'ramp_shape': self._ramp_shape.value,
        }


class CycleSpec:
    """
    One Otto cycle: heating contact, ramp down, bath swap, cooling contact,
    ramp up.  The bath swap is dynamically instantaneous, its duration is
    informational and not part of the cycle time.

    :param tau_h: Heating contact duration, ms.
    :param tau_c: Cooling contact duration, ms.
    :param field: Field schedule, defaults to the reference fields.
    :param rates: Collision rate table, defaults to the calibrated table.
    :param constants: Coupling constants.
    :param bath_swap_time: Polarization swap duration, ms.
    :param initial: Distribution at point A, defaults to level 0.
    """

    def __init__(
        self,
        tau_h: float,
        tau_c: float,
        field: Optional[FieldSchedule] = None,
        rates: Optional[RateTable] = None,
        constants: Optional[CouplingConstants] = None,
        bath_swap_time: float = _DEFAULT_BATH_SWAP_TIME,
        initial: Optional[LevelDistribution] = None,
    ) -> None:
        """Initialize object."""
        self._tau_h = float(tau_h)
        self._tau_c = float(tau_c)
        self._field = field if field is not None else FieldSchedule()
        self._rates = rates if rates is not None else RateTable.uniform()
        self._constants = (
            constants if constants is not None else CouplingConstants()
        )
        self._bath_swap_time = float(bath_swap_time)
        self._initial = (
            initial if initial is not None else LevelDistribution.polarized(0)
        )
        self.validate()

    def validate(self) -> None:
        """Require positive contact durations, nonnegative swap time."""
        if not self._tau_h > 0:
            raise ValueError('tau_h must be > 0, found {}'.format(self._tau_h))
        if not self._tau_c > 0:
            raise ValueError('tau_c must be > 0, found {}'.format(self._tau_c))
        if not self._bath_swap_time >= 0:
            raise ValueError(
                'bath_swap_time must be >= 0, found {}'.format(
                    self._bath_swap_time
                )
            )
        if not isinstance(self._initial, LevelDistribution):
            raise ValueError('initial must be a LevelDistribution')

    def __repr__(self) -> str:
        repr = 'CycleSpec: tau_h={}, tau_c={}, tau_cycle={}'.format(
            self._tau_h, self._tau_c, self.tau_cycle
        )
        repr = '{}\n\t field={}'.format(repr, self._field)
        repr = '{}\n\t rates={}'.format(repr, self._rates)
        repr = '{}\n\t constants={}'.format(repr, self._constants)
        return repr

    def replace(self, **kwargs: Any) -> 'CycleSpec':
        """Copy with some constructor arguments replaced."""
        args = {
            'tau_h': self._tau_h,
            'tau_c': self._tau_c,
            'field': self._field,
            'rates': self._rates,
            'constants': self._constants,
            'bath_swap_time': self._bath_swap_time,
            'initial': self._initial,
        }
        for key in kwargs:
            if key not in args:
                raise ValueError('Unknown CycleSpec argument: {}'.format(key))
        args.update(kwargs)
        return CycleSpec(**args)

    @property
    def tau_h(self) -> float:
        return self._tau_h

    @property
    def tau_c(self) -> float:
        return self._tau_c

    @property
    def field(self) -> FieldSchedule:
        return self._field

    @property
    def rates(self) -> RateTable:
        return self._rates

    @property
    def constants(self) -> CouplingConstants:
        return self._constants

    @property
    def bath_swap_time(self) -> float:
        return self._bath_swap_time

    @property
    def initial(self) -> LevelDistribution:
        return self._initial

    @property
    def tau_cycle(self) -> float:
        """tau_h + tau_c + 2 * ramp_time; the bath swap is not counted."""
        return self._tau_h + self._tau_c + 2 * self._field.ramp_time

    @property
    def cycle_points(self) -> Dict[str, float]:
        """Timestamps of the cycle points within one cycle, ms."""
        t_b = self._tau_h
        t_c = t_b + self._field.ramp_time
        t_d = t_c + self._tau_c
        return {
            'A': 0.0,
            'B': t_b,
            'C': t_c,
            'D': t_d,
            'A_next': self.tau_cycle,
        }


def zeeman_energy(n: int, b: float, c: CouplingConstants) -> float:
    """
    Zeeman energy ``n * lambda * b`` of level ``n``, in k_B*nK.

    :param n: Level index in [0, 6].
    :param b: Magnetic field, mG.
    :param c: Coupling constants.
    """
    n = validate_level(n)
    if not b > 0:
        raise ValueError('b must be > 0, found {}'.format(b))
    return n * c.lambda_ * b


def level_energies(b: float, c: CouplingConstants) -> np.ndarray:
    """Energies of all seven levels at field ``b``, k_B*nK."""
    return LEVELS * c.lambda_ * b


def mean_energy(
    dist: LevelDistribution, b: float, c: CouplingConstants
) -> float:
    """Mean Zeeman energy of a distribution at field ``b``."""
    return float(np.dot(dist.p, level_energies(b, c)))


def energy_variance(
    dist: LevelDistribution, b: float, c: CouplingConstants
) -> float:
    """Second central moment of the Zeeman energy under ``dist``."""
    energies = level_energies(b, c)
    mean = np.dot(dist.p, energies)
    # central form avoids cancellation between the two raw moments
    return float(np.dot(dist.p, (energies - mean) ** 2))
