"""
The four-stroke cycle: heating contact, ramp down, bath swap,
cooling contact, ramp up.
"""
import math
from typing import Any, Dict, Optional, Tuple

import numpy as np

from spinotto import (
    _DEFAULT_ADIABATICITY_THRESHOLD,
    _DEFAULT_CLOSURE_TOL,
    _DEFAULT_G_CS,
    _LIMIT_CYCLE_MAX_ITERS,
    _LIMIT_CYCLE_TOL,
)
from spinotto.kinetics import ContactPhase, evolve_with_count, stroke_propagator
from spinotto.model import (
    HBAR,
    MU_B,
    NUM_LEVELS,
    SECONDS_PER_MS,
    TESLA_PER_MG,
    CycleSpec,
    LevelDistribution,
)
from spinotto.thermo import (
    HeatLedger,
    efficiency,
    fano_factor,
    internal_efficiency,
    power,
    power_bound,
    work_fluctuations,
)
from spinotto.utils import get_logger

POLISH_ITERS = 1000
# projected cycle count above which the fixed point is solved directly
DIRECT_SOLVE_ITERS = 1000
# smallest gap below the unit eigenvalue that still counts as a simple root
SIMPLE_ROOT_GAP = 1e-15


class ConvergenceError(RuntimeError):
    """Limit-cycle iteration did not converge."""

    def __init__(self, residual: float, iterations: int) -> None:
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            'limit cycle not converged after {} iterations, '
            'last residual {}'.format(iterations, residual)
        )


def adiabaticity(b: float, b_dot: float, g: float) -> float:
    """
    Ratio of the field change rate to the Larmor frequency,
    ``hbar * |dB/dt| / (g * mu_B * B**2)``.

    :param b: Field, mG.
    :param b_dot: Field change rate, mG/ms.
    :param g: Lande factor magnitude.
    """
    if not b > 0:
        raise ValueError('b must be > 0, found {}'.format(b))
    if not g > 0:
        raise ValueError('g must be > 0, found {}'.format(g))
    b_tesla = b * TESLA_PER_MG
    b_dot_tesla = abs(b_dot) * TESLA_PER_MG / SECONDS_PER_MS
    return HBAR * b_dot_tesla / (g * MU_B * b_tesla ** 2)


class AdiabaticityReport:
    """
    Adiabaticity of one linear ramp.  ``a_at_b1`` is taken at the
    high-field end, ``a_at_b2`` at the low-field end, where it peaks.
    """

    def __init__(
        self,
        from_b: float,
        to_b: float,
        tau: float,
        g: float,
        threshold: float,
    ) -> None:
        """Initialize object."""
        self._from_b = from_b
        self._to_b = to_b
        self._tau = tau
        self._threshold = threshold
        b_dot = (to_b - from_b) / tau
        self._a_at_b1 = adiabaticity(max(from_b, to_b), b_dot, g)
        self._a_at_b2 = adiabaticity(min(from_b, to_b), b_dot, g)

    def __repr__(self) -> str:
        return (
            'AdiabaticityReport({} -> {} mG in {} ms: A={:.4g}..{:.4g}, '
            'threshold={}, passes={})'.format(
                self._from_b,
                self._to_b,
                self._tau,
                self._a_at_b1,
                self._a_at_b2,
                self._threshold,
                self.passes,
            )
        )

    @property
    def from_b(self) -> float:
        return self._from_b

    @property
    def to_b(self) -> float:
        return self._to_b

    @property
    def tau(self) -> float:
        return self._tau

    @property
    def threshold(self) -> float:
        return self._threshold

    @property
    def a_at_b1(self) -> float:
        return self._a_at_b1

    @property
    def a_at_b2(self) -> float:
        return self._a_at_b2

    @property
    def max_a(self) -> float:
        return max(self._a_at_b1, self._a_at_b2)

    @property
    def passes(self) -> bool:
        return self.max_a < self._threshold

    def as_dict(self) -> Dict[str, Any]:
        return {
            'from_b': self._from_b,
            'to_b': self._to_b,
            'tau': self._tau,
            'a_at_b1': self._a_at_b1,
            'a_at_b2': self._a_at_b2,
            'max_a': self.max_a,
            'threshold': self._threshold,
            'passes': self.passes,
        }


def adiabatic_ramp(
    dist: LevelDistribution,
    from_b: float,
    to_b: float,
    tau: float,
    g: float = _DEFAULT_G_CS,
    threshold: float = _DEFAULT_ADIABATICITY_THRESHOLD,
) -> Tuple[LevelDistribution, AdiabaticityReport]:
    """
    Linear field ramp.  Populations are preserved: the returned
    distribution is ``dist`` itself.  A ramp failing the adiabaticity
    threshold is logged, not corrected.

    :param dist: Distribution before the ramp.
    :param from_b: Initial field, mG.
    :param to_b: Final field, mG.
    :param tau: Ramp time, ms.
    :param g: Lande factor magnitude of the engine.
    :param threshold: Largest acceptable adiabaticity parameter.
    """
    if not tau > 0:
        raise ValueError('tau must be > 0, found {}'.format(tau))
    report = AdiabaticityReport(from_b, to_b, tau, g, threshold)
    if not report.passes:
        get_logger().warning(
            'ramp %s -> %s mG in %s ms is not adiabatic: A = %.4g >= %s',
            from_b,
            to_b,
            tau,
            report.max_a,
            threshold,
        )
    return dist, report


class CycleRecord:
    """
    Distributions at the four cycle points and every observable
    derived from them.
    """

    def __init__(
        self,
        spec: CycleSpec,
        dist_b: LevelDistribution,
        dist_d: LevelDistribution,
        n_heating: float,
        n_cooling: float,
        ramp_down: AdiabaticityReport,
        ramp_up: AdiabaticityReport,
        closure_tol: float = _DEFAULT_CLOSURE_TOL,
    ) -> None:
        """Initialize object."""
        self._spec = spec
        self._dist_a = spec.initial
        self._dist_b = dist_b
        self._dist_c = dist_b
        self._dist_d = dist_d
        self._n_heating = n_heating
        self._n_cooling = n_cooling
        self._ramp_down = ramp_down
        self._ramp_up = ramp_up
        self._closure_tol = closure_tol
        field = spec.field
        constants = spec.constants
        tau_cycle = spec.tau_cycle

        self._ledger = HeatLedger.from_cycle(
            self._dist_a,
            self._dist_b,
            self._dist_c,
            self._dist_d,
            field,
            constants,
        )
        self._residual = self._dist_a.distance(self._dist_d)
        self._power = power(self._ledger.w, tau_cycle)
        self._power_bound = power_bound(self._ledger, field, tau_cycle)
        self._sigma_w_sq = work_fluctuations(
            self._dist_a,
            self._dist_b,
            self._dist_c,
            self._dist_d,
            field,
            constants,
        )
        self._sigma_p_sq = self._sigma_w_sq / tau_cycle ** 2
        self._fano = fano_factor(self._sigma_p_sq, self._power)

    def __repr__(self) -> str:
        repr = 'CycleRecord: tau_h={}, tau_c={}, tau_cycle={}'.format(
            self.tau_h, self.tau_c, self.tau_cycle
        )
        repr = '{}\n q_h={:.6g} q_c={:.6g} q_l={:.6g} w={:.6g}'.format(
            repr, self.q_h, self.q_c, self.q_l, self.w
        )
        repr = '{}\n eta={} eta_int={} power={:.6g} fano={}'.format(
            repr, self.eta, self.eta_int, self.power, self.fano
        )
        repr = '{}\n n_spin={:.6g} closed={} residual={:.3g}'.format(
            repr, self.n_spin, self.closed, self.residual
        )
        return repr

    @property
    def spec(self) -> CycleSpec:
        return self._spec

    @property
    def dist_a(self) -> LevelDistribution:
        return self._dist_a

    @property
    def dist_b(self) -> LevelDistribution:
        return self._dist_b

    @property
    def dist_c(self) -> LevelDistribution:
        return self._dist_c

    @property
    def dist_d(self) -> LevelDistribution:
        return self._dist_d

    @property
    def ledger(self) -> HeatLedger:
        return self._ledger

    @property
    def q_h(self) -> float:
        return self._ledger.q_h

    @property
    def q_c(self) -> float:
        return self._ledger.q_c

    @property
    def q_l(self) -> float:
        return self._ledger.q_l

    @property
    def w_bc(self) -> float:
        return self._ledger.w_bc

    @property
    def w_da(self) -> float:
        return self._ledger.w_da

    @property
    def w_total(self) -> float:
        """Signed net work on the engine, ``w_bc + w_da``."""
        return self._ledger.w_bc + self._ledger.w_da

    @property
    def w(self) -> float:
        """Produced work ``q_h - |q_c|``."""
        return self._ledger.w

    @property
    def eta(self) -> Optional[float]:
        return efficiency(self._ledger)

    @property
    def eta_int(self) -> Optional[float]:
        return internal_efficiency(self._ledger)

    @property
    def power(self) -> float:
        return self._power

    @property
    def power_bound(self) -> float:
        return self._power_bound

    @property
    def sigma_w_sq(self) -> float:
        return self._sigma_w_sq

    @property
    def sigma_p_sq(self) -> float:
        return self._sigma_p_sq

    @property
    def fano(self) -> Optional[float]:
        return self._fano

    @property
    def n_heating(self) -> float:
        """Mean collisions during A -> B."""
        return self._n_heating

    @property
    def n_cooling(self) -> float:
        """Mean collisions during C -> D."""
        return self._n_cooling

    @property
    def n_spin(self) -> float:
        return self._n_heating + self._n_cooling

    @property
    def residual(self) -> float:
        """Max-norm distance between the start and end of the cycle."""
        return self._residual

    @property
    def closed(self) -> bool:
        return self._residual < self._closure_tol

    @property
    def tau_h(self) -> float:
        return self._spec.tau_h

    @property
    def tau_c(self) -> float:
        return self._spec.tau_c

    @property
    def tau_cycle(self) -> float:
        return self._spec.tau_cycle

    @property
    def cycle_points(self) -> Dict[str, float]:
        return self._spec.cycle_points

    @property
    def reports(self) -> Tuple[AdiabaticityReport, AdiabaticityReport]:
        """Adiabaticity of the ramp down and the ramp up."""
        return self._ramp_down, self._ramp_up

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tau_h': self.tau_h,
            'tau_c': self.tau_c,
            'tau_cycle': self.tau_cycle,
            'bath_swap_time': self._spec.bath_swap_time,
            'cycle_points': self.cycle_points,
            'distributions': {
                'A': self._dist_a.p,
                'B': self._dist_b.p,
                'C': self._dist_c.p,
                'D': self._dist_d.p,
            },
            'm_f': self._dist_a.m_f,
            'ledger': self._ledger.as_dict(),
            'eta': self.eta,
            'eta_int': self.eta_int,
            'power': self._power,
            'power_bound': self._power_bound,
            'sigma_w_sq': self._sigma_w_sq,
            'sigma_p_sq': self._sigma_p_sq,
            'fano': self._fano,
            'n_heating': self._n_heating,
            'n_cooling': self._n_cooling,
            'n_spin': self.n_spin,
            'closed': self.closed,
            'residual': self._residual,
            'adiabaticity': [r.as_dict() for r in self.reports],
        }


def run_cycle(
    spec: CycleSpec,
    closure_tol: float = _DEFAULT_CLOSURE_TOL,
    adiabaticity_threshold: float = _DEFAULT_ADIABATICITY_THRESHOLD,
) -> CycleRecord:
    """
    Run one cycle from ``spec.initial``.

    :param spec: Cycle description.
    :param closure_tol: Largest start-to-end distance of a closed cycle.
    :param adiabaticity_threshold: Threshold passed to both ramps.
    """
    field = spec.field
    g = spec.constants.g_cs
    dist_b, n_heating = evolve_with_count(
        spec.initial, ContactPhase.heating(spec)
    )
    dist_c, ramp_down = adiabatic_ramp(
        dist_b, field.b1, field.b2, field.ramp_time, g, adiabaticity_threshold
    )
    get_logger().debug(
        'bath swap: %s ms, no collisions', spec.bath_swap_time
    )
    dist_d, n_cooling = evolve_with_count(dist_c, ContactPhase.cooling(spec))
    _, ramp_up = adiabatic_ramp(
        dist_d, field.b2, field.b1, field.ramp_time, g, adiabaticity_threshold
    )
    return CycleRecord(
        spec,
        dist_b,
        dist_d,
        n_heating,
        n_cooling,
        ramp_down,
        ramp_up,
        closure_tol,
    )


def cycle_propagator(spec: CycleSpec) -> np.ndarray:
    """
    One-cycle transition matrix of the populations, row convention.
    Ramps and the bath swap leave populations unchanged.
    """
    heating = stroke_propagator(ContactPhase.heating(spec))
    cooling = stroke_propagator(ContactPhase.cooling(spec))
    return heating[:NUM_LEVELS, :NUM_LEVELS] @ cooling[:NUM_LEVELS, :NUM_LEVELS]


def slowest_mode(propagator: np.ndarray) -> float:
    """Second largest eigenvalue modulus of a one-cycle propagator."""
    moduli = np.sort(np.abs(np.linalg.eigvals(propagator)))[::-1]
    return float(min(moduli[1], 1.0))


def projected_iterations(propagator: np.ndarray, tol: float) -> float:
    """
    Cycles needed for the slowest mode to decay below ``tol`` from an
    order-one start; ``inf`` when the unit eigenvalue is not simple.
    """
    slowest = slowest_mode(propagator)
    if slowest <= 0:
        return 1.0
    if slowest >= 1 - SIMPLE_ROOT_GAP:
        return math.inf
    return max(math.log(tol) / math.log(slowest), 1.0)


def stationary_state(propagator: np.ndarray) -> np.ndarray:
    """
    Solve ``p (P - I) = 0`` with ``sum(p) = 1`` by least squares.

    The generator is rescaled to unit magnitude so that nearly static
    cycles stay well conditioned.
    """
    generator = propagator - np.eye(len(propagator))
    scale = np.abs(generator).max()
    if scale == 0:
        raise ValueError('propagator is the identity, no unique fixed point')
    a = np.vstack([generator.T / scale, np.ones(len(propagator))])
    b = np.zeros(len(propagator) + 1)
    b[-1] = 1.0
    p = np.clip(np.linalg.lstsq(a, b, rcond=None)[0], 0.0, None)
    return p / p.sum()


def find_limit_cycle(
    spec: CycleSpec,
    max_iters: int = _LIMIT_CYCLE_MAX_ITERS,
    tol: float = _LIMIT_CYCLE_TOL,
    closure_tol: float = _DEFAULT_CLOSURE_TOL,
    adiabaticity_threshold: float = _DEFAULT_ADIABATICITY_THRESHOLD,
) -> Tuple[CycleRecord, int]:
    """
    Repeat the cycle, feeding the end state back as the next start, until
    the start state stops changing.

    The first cycle starts from ``spec.initial``.  If it does not
    converge and the slowest mode of the cycle would need more than
    ``DIRECT_SOLVE_ITERS`` cycles to decay, as for strokes much shorter
    than the collision time, the next cycle starts from the stationary
    state of the one-cycle propagator instead of the first end state.

    Iterations count the cycles run, up to and including the first whose
    start state moved by less than ``tol``.  The first change is measured
    against ``spec.initial`` itself, so a start that is not already the
    fixed point takes at least 2 iterations, even when both strokes
    saturate.  A directly solved fixed point is reached in 2.

    :param spec: Cycle description; ``spec.initial`` seeds the iteration.
    :param max_iters: Largest number of cycles to run.
    :param tol: Max-norm change of the start state that counts as converged.

    :return: Record of the converged cycle and the iteration count.
    """
    if not isinstance(max_iters, (int, np.integer)) or max_iters < 1:
        raise ValueError(
            'max_iters must be an integer >= 1, found {}'.format(max_iters)
        )
    if not tol > 0:
        raise ValueError('tol must be > 0, found {}'.format(tol))
    propagator = cycle_propagator(spec)

    def advance(p: np.ndarray) -> Tuple[np.ndarray, float]:
        p_next = p @ propagator
        p_next = p_next / p_next.sum()
        return p_next, float(np.max(np.abs(p_next - p)))

    p, residual = advance(spec.initial.p)
    converged_at = 1 if residual < tol else None
    if converged_at is None and max_iters > 1:
        projected = projected_iterations(propagator, tol)
        if DIRECT_SOLVE_ITERS < projected < math.inf:
            get_logger().info(
                'limit cycle: about %.3g cycles needed at tau_cycle %s ms, '
                'solving for the fixed point directly',
                projected,
                spec.tau_cycle,
            )
            p = stationary_state(propagator)
    iteration = 1
    while converged_at is None and iteration < max_iters:
        iteration += 1
        p, residual = advance(p)
        if residual < tol:
            converged_at = iteration
    if converged_at is None:
        raise ConvergenceError(residual, max_iters)
    # keep iterating while the change still shrinks, down to rounding
    for _ in range(POLISH_ITERS):
        if residual == 0:
            break
        p, step = advance(p)
        if step >= residual:
            break
        residual = step
    get_logger().info(
        'limit cycle converged: tau_cycle %s ms, %d iterations, residual %.3g',
        spec.tau_cycle,
        converged_at,
        residual,
    )
    record = run_cycle(
        spec.replace(initial=LevelDistribution(p)),
        closure_tol,
        adiabaticity_threshold,
    )
    return record, converged_at
