"""
Thermodynamic observables of one Otto cycle.

Sign conventions: heat into the engine is positive, so ``q_h >= 0`` and
``q_c <= 0``; stroke works are signed energy changes of the engine, so
the expansion stroke B -> C is negative.  The produced work reported in
records is ``w = q_h - |q_c|``.
"""
import math
from typing import Any, Dict, Optional, Union

import numpy as np

from spinotto.kinetics import (
    RNG_ALGORITHM,
    ContactPhase,
    make_rng,
    sample_levels,
)
from spinotto.model import (
    LEVELS,
    NUM_LEVELS,
    CouplingConstants,
    CycleSpec,
    FieldSchedule,
    LevelDistribution,
    energy_variance,
)

# field calibration uncertainties, mG
SIGMA_B1 = 0.2
SIGMA_B2 = 0.1


def _level_shift(p_i: LevelDistribution, p_f: LevelDistribution) -> float:
    """Change of the mean level index from ``p_i`` to ``p_f``."""
    return float(np.dot(LEVELS, p_f.p - p_i.p))


def heat_engine_side(
    p_i: LevelDistribution,
    p_f: LevelDistribution,
    b: float,
    c: CouplingConstants,
) -> float:
    """
    Heat absorbed by the engine while populations change from ``p_i`` to
    ``p_f`` at constant field ``b``.
    """
    return _level_shift(p_i, p_f) * c.lambda_ * b


def work_stroke(
    dist: LevelDistribution, b_from: float, b_to: float, c: CouplingConstants
) -> float:
    """Engine energy change over a ramp at fixed ``dist``."""
    return dist.mean_level * c.lambda_ * (b_to - b_from)


def heat_leak(
    p_a: LevelDistribution,
    p_b: LevelDistribution,
    f: FieldSchedule,
    c: CouplingConstants,
) -> float:
    """
    Bath energy lost to elastic collisions over a closed cycle.

    Assumes ``p_d == p_a`` and ``p_c == p_b``.
    """
    return _level_shift(p_a, p_b) * (c.kappa - c.lambda_) * (f.b1 - f.b2)


class HeatLedger:
    """
    Energy bookkeeping of one cycle, k_B*nK.

    ``q1`` and ``q2`` are the bath-side energies: each quantum carries
    ``kappa * B`` in the bath but only ``lambda * B`` in the engine.
    """

    def __init__(
        self,
        q_h: float,
        q_c: float,
        w_bc: float,
        w_da: float,
        constants: CouplingConstants,
    ) -> None:
        """Initialize object."""
        self._q_h = float(q_h)
        self._q_c = float(q_c)
        self._w_bc = float(w_bc)
        self._w_da = float(w_da)
        self._q1 = self._q_h / constants.gamma
        self._q2 = self._q_c / constants.gamma
        self._q_l = (self._q1 - abs(self._q2)) - (self._q_h - abs(self._q_c))

    @classmethod
    def from_cycle(
        cls,
        p_a: LevelDistribution,
        p_b: LevelDistribution,
        p_c: LevelDistribution,
        p_d: LevelDistribution,
        f: FieldSchedule,
        c: CouplingConstants,
    ) -> 'HeatLedger':
        """Ledger of the four cycle-point distributions."""
        return cls(
            q_h=heat_engine_side(p_a, p_b, f.b1, c),
            q_c=heat_engine_side(p_c, p_d, f.b2, c),
            w_bc=work_stroke(p_b, f.b1, f.b2, c),
            w_da=work_stroke(p_d, f.b2, f.b1, c),
            constants=c,
        )

    def __repr__(self) -> str:
        return (
            'HeatLedger(q_h={:.6g}, q_c={:.6g}, q1={:.6g}, q2={:.6g}, '
            'q_l={:.6g}, w_bc={:.6g}, w_da={:.6g})'.format(
                self._q_h,
                self._q_c,
                self._q1,
                self._q2,
                self._q_l,
                self._w_bc,
                self._w_da,
            )
        )

    @property
    def q_h(self) -> float:
        return self._q_h

    @property
    def q_c(self) -> float:
        return self._q_c

    @property
    def q1(self) -> float:
        """Energy given by the hot bath."""
        return self._q1

    @property
    def q2(self) -> float:
        """Energy taken by the cold bath, signed like ``q_c``."""
        return self._q2

    @property
    def q_l(self) -> float:
        return self._q_l

    @property
    def w_bc(self) -> float:
        return self._w_bc

    @property
    def w_da(self) -> float:
        return self._w_da

    @property
    def w(self) -> float:
        """Produced work ``q_h - |q_c|``."""
        return self._q_h - abs(self._q_c)

    @property
    def first_law_residual(self) -> float:
        """``q_h + q_c + w_bc + w_da``; zero over a closed cycle."""
        return self._q_h + self._q_c + self._w_bc + self._w_da

    def as_dict(self) -> Dict[str, float]:
        return {
            'q_h': self._q_h,
            'q_c': self._q_c,
            'q1': self._q1,
            'q2': self._q2,
            'q_l': self._q_l,
            'w_bc': self._w_bc,
            'w_da': self._w_da,
            'w': self.w,
        }


def efficiency(ledger: HeatLedger) -> Optional[float]:
    """
    Efficiency including the heat leak, ``w / (q_h + q_l)``.
    ``None`` when no heat is drawn.
    """
    denominator = ledger.q_h + ledger.q_l
    if not denominator > 0:
        return None
    return ledger.w / denominator


def internal_efficiency(
    source: Union[HeatLedger, FieldSchedule]
) -> Optional[float]:
    """
    Engine-side efficiency ``1 - |q_c|/q_h`` of a ledger, or the
    population-preserving value ``1 - b2/b1`` of a field schedule.
    """
    if isinstance(source, FieldSchedule):
        return max_efficiency(source)
    if not source.q_h > 0:
        return None
    return 1.0 - abs(source.q_c) / source.q_h


def max_efficiency(f: FieldSchedule) -> float:
    """Efficiency of a loss-free engine, ``1 - b2/b1``."""
    return 1.0 - f.b2 / f.b1


def efficiency_closed_form(f: FieldSchedule, c: CouplingConstants) -> float:
    """Efficiency of any closed cycle, independent of timing and rates."""
    span = f.b1 - f.b2
    return c.gamma * span / (span + c.gamma * f.b2)


def efficiency_uncertainty(
    f: FieldSchedule,
    c: CouplingConstants,
    sigma_b1: float = SIGMA_B1,
    sigma_b2: float = SIGMA_B2,
) -> float:
    """
    Standard deviation of :func:`efficiency_closed_form` from independent
    field uncertainties, first-order propagation.
    """
    denominator = (f.b1 - f.b2 + c.gamma * f.b2) ** 2
    d_b1 = c.gamma ** 2 * f.b2 / denominator
    d_b2 = -(c.gamma ** 2) * f.b1 / denominator
    return math.hypot(d_b1 * sigma_b1, d_b2 * sigma_b2)


def power(w_total: float, tau_cycle: float) -> float:
    """Mean power ``|w| / tau_cycle``, k_B*nK/ms."""
    if not tau_cycle > 0:
        raise ValueError('tau_cycle must be > 0, found {}'.format(tau_cycle))
    return abs(w_total) / tau_cycle


def power_bound(
    ledger: HeatLedger, f: FieldSchedule, tau_cycle: float
) -> float:
    """Upper bound ``q_h (1 - b2/b1) / tau_cycle`` on the power."""
    if not tau_cycle > 0:
        raise ValueError('tau_cycle must be > 0, found {}'.format(tau_cycle))
    return ledger.q_h / tau_cycle * max_efficiency(f)


def work_fluctuations(
    p_a: LevelDistribution,
    p_b: LevelDistribution,
    p_c: LevelDistribution,
    p_d: LevelDistribution,
    f: FieldSchedule,
    c: CouplingConstants,
) -> float:
    """
    Work variance as the sum of the heat variances of both contact strokes,
    each taken as the sum of its endpoint energy variances.
    Correlations between endpoints are ignored.
    """
    sigma_q_h = energy_variance(p_b, f.b1, c) + energy_variance(p_a, f.b1, c)
    sigma_q_c = energy_variance(p_d, f.b2, c) + energy_variance(p_c, f.b2, c)
    return sigma_q_h + sigma_q_c


def fano_factor(sigma_p_sq: float, p: float) -> Optional[float]:
    """``sigma_p_sq / p``; ``None`` unless the engine produces power."""
    if not p > 0:
        return None
    return sigma_p_sq / p


class WorkStatistics:
    """
    Work produced by individually sampled atoms over one cycle.

    This is the trajectory-level estimator: it keeps the correlation between
    the energies at the start and end of each stroke.
    """

    def __init__(
        self,
        q_h: np.ndarray,
        q_c: np.ndarray,
        tau_cycle: float,
        seed: Optional[int],
    ) -> None:
        """Initialize object."""
        self._q_h = np.asarray(q_h, dtype=float)
        self._q_c = np.asarray(q_c, dtype=float)
        self._tau_cycle = tau_cycle
        self._seed = seed

    def __repr__(self) -> str:
        return 'WorkStatistics: n_traj={}, mean_w={:.6g}, var_w={:.6g}'.format(
            self.n_traj, self.mean_w, self.var_w
        )

    @property
    def n_traj(self) -> int:
        return len(self._q_h)

    @property
    def work(self) -> np.ndarray:
        """Produced work of each atom, ``q_h + q_c``."""
        return self._q_h + self._q_c

    @property
    def mean_w(self) -> float:
        return float(self.work.mean())

    @property
    def var_w(self) -> float:
        return float(self.work.var())

    @property
    def var_q_h(self) -> float:
        return float(self._q_h.var())

    @property
    def var_q_c(self) -> float:
        return float(self._q_c.var())

    @property
    def sigma_p_sq(self) -> float:
        return self.var_w / self._tau_cycle ** 2

    @property
    def fano(self) -> Optional[float]:
        return fano_factor(self.sigma_p_sq, self.mean_w / self._tau_cycle)

    def as_dict(self) -> Dict[str, Any]:
        return {
            'estimator': 'trajectory',
            'n_traj': self.n_traj,
            'seed': self._seed,
            'rng': RNG_ALGORITHM,
            'mean_w': self.mean_w,
            'var_w': self.var_w,
            'var_q_h': self.var_q_h,
            'var_q_c': self.var_q_c,
            'sigma_p_sq': self.sigma_p_sq,
            'fano': self.fano,
        }


def trajectory_work_statistics(
    spec: CycleSpec,
    n_traj: int,
    rng_seed: Optional[int],
    rng: Optional[np.random.Generator] = None,
) -> WorkStatistics:
    """
    Sample whole cycles atom by atom: initial level from ``spec.initial``,
    then the heating and the cooling stroke.

    :param spec: Cycle to sample.
    :param n_traj: Number of atoms.
    :param rng_seed: Seed of the Philox generator, recorded in the result.
    :param rng: Generator to draw from instead of one seeded by ``rng_seed``.
    """
    if not isinstance(n_traj, (int, np.integer)) or n_traj < 1:
        raise ValueError(
            'n_traj must be an integer >= 1, found {}'.format(n_traj)
        )
    if rng is None:
        rng = make_rng(rng_seed)
    lam = spec.constants.lambda_
    level_a = rng.choice(NUM_LEVELS, size=int(n_traj), p=spec.initial.p)
    level_b = sample_levels(level_a, ContactPhase.heating(spec), rng)
    level_d = sample_levels(level_b, ContactPhase.cooling(spec), rng)
    q_h = (level_b - level_a) * lam * spec.field.b1
    q_c = (level_d - level_b) * lam * spec.field.b2
    return WorkStatistics(q_h, q_c, spec.tau_cycle, rng_seed)
