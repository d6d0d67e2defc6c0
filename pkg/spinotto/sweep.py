"""Cycle-time sweeps, their results, and result files."""

import math
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from multiprocessing import cpu_count
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

try:
    import xarray as xr

    XARRAY_INSTALLED = True
except ImportError:
    XARRAY_INSTALLED = False

from spinotto import (
    _DEFAULT_ADIABATICITY_THRESHOLD,
    _DEFAULT_CLOSURE_TOL,
    _DEFAULT_SWEEP_MAX,
    _DEFAULT_SWEEP_MIN,
    _DEFAULT_SWEEP_STEPS,
    _LIMIT_CYCLE_MAX_ITERS,
    _LIMIT_CYCLE_TOL,
    _SIG_FIGS,
)
from spinotto._version import __version__
from spinotto.cycle import CycleRecord, find_limit_cycle
from spinotto.kinetics import (
    RNG_ALGORITHM,
    ContactPhase,
    Direction,
    evolve_with_count,
    make_rng,
)
from spinotto.model import (
    CONSTANTS_VERSION,
    LEVELS,
    MAX_LEVEL,
    CycleSpec,
    LevelDistribution,
    m_f,
)
from spinotto.thermo import (
    WorkStatistics,
    efficiency_closed_form,
    max_efficiency,
    trajectory_work_statistics,
)
from spinotto.utils import (
    array_digest,
    get_logger,
    read_json,
    validate_output_path,
    write_json,
)

SCHEMA_VERSION = 1

COLUMNS = [
    'tau_cycle_ms',
    'tau_h_ms',
    'tau_c_ms',
    'q_h',
    'q_c',
    'q_l',
    'w',
    'eta',
    'eta_int',
    'power',
    'sigma_p_sq',
    'fano',
    'n_spin',
    'closed',
    'residual',
]

PAIRINGS = ('equal', 'closure')
FORMATS = ('csv', 'json')

# post-hoc validator tolerances
ETA_SPREAD_TOL = 1e-9
FIRST_LAW_TOL = 1e-9
ETA_INT_TOL = 1e-12

CLOSURE_COUNT_TOL = 1e-12
CLOSURE_MAX_BISECTIONS = 200


class ClosureError(RuntimeError):
    """No split of the contact budget equalizes the collision counts."""

    def __init__(
        self,
        message: str,
        counts_low: Tuple[float, float],
        counts_high: Tuple[float, float],
    ) -> None:
        self.counts_low = counts_low
        self.counts_high = counts_high
        super().__init__(
            '{}; (heating, cooling) counts at all-cooling split {}, '
            'at all-heating split {}'.format(message, counts_low, counts_high)
        )


def _stroke_counts(
    base: CycleSpec, tau_h: float, tau_c: float
) -> Tuple[float, float]:
    """
    Collision counts of each stroke started from its own polarized state.
    """
    heating = ContactPhase(Direction.HEATING, tau_h, base.field.b1, base.rates)
    cooling = ContactPhase(Direction.COOLING, tau_c, base.field.b2, base.rates)
    _, n_heating = evolve_with_count(LevelDistribution.polarized(0), heating)
    _, n_cooling = evolve_with_count(
        LevelDistribution.polarized(MAX_LEVEL), cooling
    )
    return n_heating, n_cooling


def pair_strokes_for_closure(
    base: CycleSpec, tau_cycle: float, tol: float = CLOSURE_COUNT_TOL
) -> Tuple[float, float]:
    """
    Split the contact time ``tau_cycle - 2 * ramp_time`` between heating
    and cooling so that both strokes, each started from its polarized
    state, exchange the same mean number of quanta.

    :param base: Cycle providing fields, ramp time and rates.
    :param tau_cycle: Total cycle time, ms.
    :param tol: Accepted difference of the two counts.

    :return: ``(tau_h, tau_c)``.
    """
    budget = tau_cycle - 2 * base.field.ramp_time
    if not budget > 0:
        raise ValueError(
            'tau_cycle must exceed twice the ramp time {}, found {}'.format(
                2 * base.field.ramp_time, tau_cycle
            )
        )
    if base.rates.is_symmetric:
        return budget / 2, budget / 2

    def mismatch(fraction: float) -> Tuple[float, Tuple[float, float]]:
        counts = _stroke_counts(
            base, fraction * budget, (1 - fraction) * budget
        )
        return counts[0] - counts[1], counts

    f_low, counts_low = mismatch(0.0)
    f_high, counts_high = mismatch(1.0)
    if abs(f_low) <= tol and abs(f_high) <= tol:
        return budget / 2, budget / 2
    if f_low >= -tol or f_high <= tol:
        raise ClosureError(
            'closure needs an empty stroke for tau_cycle {} ms'.format(
                tau_cycle
            ),
            counts_low,
            counts_high,
        )
    low, high = 0.0, 1.0
    fraction = 0.5
    for _ in range(CLOSURE_MAX_BISECTIONS):
        fraction = 0.5 * (low + high)
        f_mid, _ = mismatch(fraction)
        if abs(f_mid) <= tol:
            break
        if f_mid < 0:
            low = fraction
        else:
            high = fraction
        if high - low < np.finfo(float).eps:
            break
    get_logger().debug(
        'closure split for tau_cycle %s ms: heating fraction %.12g',
        tau_cycle,
        fraction,
    )
    return fraction * budget, (1 - fraction) * budget


class SweepSpec:
    """
    Cycle-time sweep.

    Points are either explicit ``(tau_h, tau_c)`` pairs or generated from
    ``tau_min``, ``tau_max`` and ``steps``.  With ``pairing='equal'`` the
    generated value is the stroke duration ``tau_h = tau_c``; with
    ``pairing='closure'`` it is the cycle time, split by
    :func:`pair_strokes_for_closure`.

    :param base: Cycle providing everything but the stroke durations.
    :param tau_pairs: Explicit stroke durations, ms.
    :param tau_min: First generated value, ms.
    :param tau_max: Last generated value, ms.
    :param steps: Number of generated points, at least 2.
    :param pairing: ``'equal'`` or ``'closure'``.
    :param n_traj: Atoms sampled per point for the trajectory work
        estimator; 0 disables sampling.
    :param seed: Master seed; point ``i`` uses its own derived stream.
    :param output_path: Default result file.
    :param parallel: Number of worker threads, defaults to the CPU count.
    """

    def __init__(
        self,
        base: CycleSpec,
        tau_pairs: Optional[Sequence[Tuple[float, float]]] = None,
        tau_min: Optional[float] = None,
        tau_max: Optional[float] = None,
        steps: Optional[int] = None,
        pairing: str = 'equal',
        n_traj: int = 0,
        seed: Optional[int] = None,
        output_path: Optional[str] = None,
        parallel: Optional[int] = None,
        max_iters: int = _LIMIT_CYCLE_MAX_ITERS,
        tol: float = _LIMIT_CYCLE_TOL,
        closure_tol: float = _DEFAULT_CLOSURE_TOL,
        adiabaticity_threshold: float = _DEFAULT_ADIABATICITY_THRESHOLD,
    ) -> None:
        """Initialize object."""
        self.base = base
        self.tau_pairs = (
            [(float(h), float(c)) for h, c in tau_pairs]
            if tau_pairs is not None
            else None
        )
        generated = (
            tau_min is not None or tau_max is not None or steps is not None
        )
        if self.tau_pairs is None or generated:
            self.tau_min = _DEFAULT_SWEEP_MIN if tau_min is None else tau_min
            self.tau_max = _DEFAULT_SWEEP_MAX if tau_max is None else tau_max
            self.steps = _DEFAULT_SWEEP_STEPS if steps is None else steps
        else:
            self.tau_min = self.tau_max = self.steps = None
        self.pairing = pairing
        self.n_traj = n_traj
        self.seed = seed
        self.output_path = output_path
        self.parallel = parallel
        self.max_iters = max_iters
        self.tol = tol
        self.closure_tol = closure_tol
        self.adiabaticity_threshold = adiabaticity_threshold
        self.validate()

    def __repr__(self) -> str:
        if self.tau_pairs is not None:
            grid = 'tau_pairs={}'.format(self.tau_pairs)
        else:
            grid = 'tau_min={}, tau_max={}, steps={}, pairing={}'.format(
                self.tau_min, self.tau_max, self.steps, self.pairing
            )
        return 'SweepSpec({}, n_traj={}, seed={})'.format(
            grid, self.n_traj, self.seed
        )

    def validate(self) -> None:
        """
        Check arguments correctness and consistency.

        * explicit pairs and a generated grid are mutually exclusive
        * all durations positive, steps >= 2
        * closure pairing needs cycle times longer than both ramps
        """
        if not isinstance(self.base, CycleSpec):
            raise ValueError('base must be a CycleSpec')
        if self.tau_pairs is not None:
            if self.tau_min is not None:
                raise ValueError(
                    'Specify either tau_pairs or tau_min/tau_max/steps, '
                    'not both'
                )
            for tau_h, tau_c in self.tau_pairs:
                if not (tau_h > 0 and tau_c > 0):
                    raise ValueError(
                        'stroke durations must be > 0, found {}'.format(
                            (tau_h, tau_c)
                        )
                    )
        else:
            if self.pairing not in PAIRINGS:
                raise ValueError(
                    'pairing must be one of {}, found {}'.format(
                        PAIRINGS, self.pairing
                    )
                )
            if (
                not isinstance(self.steps, (int, np.integer))
                or isinstance(self.steps, bool)
                or self.steps < 2
            ):
                raise ValueError(
                    'steps must be an integer >= 2, found {}'.format(self.steps)
                )
            if not self.tau_min > 0:
                raise ValueError(
                    'tau_min must be > 0, found {}'.format(self.tau_min)
                )
            if not self.tau_max > self.tau_min:
                raise ValueError(
                    'tau_max must be > tau_min, found {} <= {}'.format(
                        self.tau_max, self.tau_min
                    )
                )
            if (
                self.pairing == 'closure'
                and not self.tau_min > 2 * self.base.field.ramp_time
            ):
                raise ValueError(
                    'closure pairing sweeps the cycle time, tau_min must '
                    'exceed {}, found {}'.format(
                        2 * self.base.field.ramp_time, self.tau_min
                    )
                )
        if (
            not isinstance(self.n_traj, (int, np.integer))
            or isinstance(self.n_traj, bool)
            or self.n_traj < 0
        ):
            raise ValueError(
                'n_traj must be a nonnegative integer, found {}'.format(
                    self.n_traj
                )
            )
        if self.seed is not None and (
            not isinstance(self.seed, (int, np.integer)) or self.seed < 0
        ):
            raise ValueError(
                'seed must be a nonnegative integer, found {}'.format(self.seed)
            )
        if self.parallel is not None and (
            not isinstance(self.parallel, (int, np.integer))
            or self.parallel < 1
        ):
            raise ValueError(
                'parallel must be a positive integer, found {}'.format(
                    self.parallel
                )
            )

    def points(self) -> List[Tuple[float, float]]:
        """Stroke durations ``(tau_h, tau_c)`` of every sweep point."""
        if self.tau_pairs is not None:
            return list(self.tau_pairs)
        values = np.linspace(self.tau_min, self.tau_max, self.steps)
        if self.pairing == 'equal':
            return [(float(v), float(v)) for v in values]
        return [pair_strokes_for_closure(self.base, float(v)) for v in values]


class SweepPoint:
    """Outcome of one sweep point: a converged record or an error."""

    def __init__(
        self,
        index: int,
        tau_h: float,
        tau_c: float,
        tau_cycle: float,
        record: Optional[CycleRecord] = None,
        iterations: Optional[int] = None,
        work_statistics: Optional[WorkStatistics] = None,
        error: Optional[str] = None,
    ) -> None:
        """Initialize object."""
        self.index = index
        self.tau_h = tau_h
        self.tau_c = tau_c
        self.tau_cycle = tau_cycle
        self.record = record
        self.iterations = iterations
        self.work_statistics = work_statistics
        self.error = error

    def __repr__(self) -> str:
        status = 'error: {}'.format(self.error) if self.error else 'ok'
        return 'SweepPoint({}, tau_h={}, tau_c={}, {})'.format(
            self.index, self.tau_h, self.tau_c, status
        )

    @property
    def ok(self) -> bool:
        return self.record is not None

    def values(self) -> Dict[str, Any]:
        """Row of the result table; observables are ``None`` on failure."""
        row: Dict[str, Any] = {name: None for name in COLUMNS}
        row['tau_cycle_ms'] = self.tau_cycle
        row['tau_h_ms'] = self.tau_h
        row['tau_c_ms'] = self.tau_c
        row['closed'] = False
        rec = self.record
        if rec is not None:
            row.update(
                {
                    'q_h': rec.q_h,
                    'q_c': rec.q_c,
                    'q_l': rec.q_l,
                    'w': rec.w,
                    'eta': rec.eta,
                    'eta_int': rec.eta_int,
                    'power': rec.power,
                    'sigma_p_sq': rec.sigma_p_sq,
                    'fano': rec.fano,
                    'n_spin': rec.n_spin,
                    'closed': rec.closed,
                    'residual': rec.residual,
                }
            )
        return row


class SweepResult:
    """
    Container for the outcome of :func:`run_sweep`; rows are sorted by
    cycle time.
    """

    def __init__(
        self, spec: SweepSpec, points: Sequence[SweepPoint]
    ) -> None:
        """Initialize object."""
        self._spec = spec
        self._rows = sorted(points, key=lambda p: (p.tau_cycle, p.index))

    def __repr__(self) -> str:
        repr = 'SweepResult: {} points, {} failed'.format(
            len(self._rows), len(self.failures)
        )
        argmax = self.argmax_power
        if argmax is not None:
            best = self._rows[argmax]
            repr = '{}\n max power {:.6g} at tau_cycle {} ms'.format(
                repr, best.record.power, best.tau_cycle  # type: ignore
            )
        repr = '{}\n fano crossing: {}'.format(repr, self.fano_crossing)
        return repr

    @property
    def spec(self) -> SweepSpec:
        return self._spec

    @property
    def rows(self) -> List[SweepPoint]:
        return self._rows

    @property
    def failures(self) -> List[SweepPoint]:
        return [row for row in self._rows if not row.ok]

    @property
    def argmax_power(self) -> Optional[int]:
        """Row index of the largest power, failed rows excluded."""
        best = None
        for i, row in enumerate(self._rows):
            if row.ok and (
                best is None
                or row.record.power  # type: ignore
                > self._rows[best].record.power  # type: ignore
            ):
                best = i
        return best

    @property
    def fano_crossing(self) -> Optional[float]:
        """
        Cycle time where the Fano factor first crosses 1, linearly
        interpolated between the bracketing rows.
        """
        usable = [
            (row.tau_cycle, row.record.fano)
            for row in self._rows
            if row.ok and row.record.fano is not None  # type: ignore
        ]
        for (t0, f0), (t1, f1) in zip(usable, usable[1:]):
            if f0 == 1.0:
                return t0
            if (f0 - 1.0) * (f1 - 1.0) < 0:
                return t0 + (1.0 - f0) * (t1 - t0) / (f1 - f0)
        if usable and usable[-1][1] == 1.0:
            return usable[-1][0]
        return None

    @property
    def metadata(self) -> Dict[str, Any]:
        base = self._spec.base
        argmax = self.argmax_power
        return {
            'spinotto_version': __version__,
            'schema_version': SCHEMA_VERSION,
            'columns': COLUMNS,
            'sig_figs': _SIG_FIGS,
            'seed': self._spec.seed,
            'rng': RNG_ALGORITHM,
            'n_traj': self._spec.n_traj,
            'constants_version': CONSTANTS_VERSION,
            'constants': base.constants.as_dict(),
            'field': base.field.as_dict(),
            'rates': base.rates.as_dict(),
            'rate_table_hash': array_digest(
                base.rates.heating_rates, base.rates.cooling_rates
            ),
            'bath_swap_time': base.bath_swap_time,
            'pairing': (
                self._spec.pairing if self._spec.tau_pairs is None else None
            ),
            'argmax_power': argmax,
            'tau_cycle_max_power': (
                self._rows[argmax].tau_cycle if argmax is not None else None
            ),
            'fano_crossing': self.fano_crossing,
            'eta_closed_form': efficiency_closed_form(
                base.field, base.constants
            ),
        }

    def to_frame(self) -> pd.DataFrame:
        """One row per sweep point with the exported columns."""
        return pd.DataFrame(
            [row.values() for row in self._rows], columns=COLUMNS
        )

    def populations_xr(self) -> 'xr.Dataset':
        """
        Populations at the four cycle points as an xarray Dataset with
        dimensions ``tau_cycle``, ``point`` and ``level``.
        """
        if not XARRAY_INSTALLED:
            raise RuntimeError(
                'Package "xarray" is not installed, cannot produce '
                'xarray data structures.'
            )
        ok = [row for row in self._rows if row.ok]
        data = np.array(
            [
                [
                    row.record.dist_a.p,  # type: ignore
                    row.record.dist_b.p,  # type: ignore
                    row.record.dist_c.p,  # type: ignore
                    row.record.dist_d.p,  # type: ignore
                ]
                for row in ok
            ]
        ).reshape(len(ok), 4, len(LEVELS))
        return xr.Dataset(
            {'population': (['tau_cycle', 'point', 'level'], data)},
            coords={
                'tau_cycle': [row.tau_cycle for row in ok],
                'point': ['A', 'B', 'C', 'D'],
                'level': LEVELS,
                'm_f': ('level', m_f(LEVELS)),
            },
            attrs={'spinotto_version': __version__},
        )

    def check(self) -> List[str]:
        """
        Post-hoc validators over the converged rows; returns the
        violations found, each also logged as a warning.
        """
        violations = []
        base = self._spec.base
        ok = [
            row.record
            for row in self._rows
            if row.ok and row.record.closed  # type: ignore
        ]
        etas = [rec.eta for rec in ok if rec.eta is not None]
        if etas and max(etas) - min(etas) >= ETA_SPREAD_TOL:
            violations.append(
                'efficiency spread {} exceeds {}'.format(
                    max(etas) - min(etas), ETA_SPREAD_TOL
                )
            )
        eta_int = max_efficiency(base.field)
        for rec in ok:
            scale = max(
                abs(rec.q_h), abs(rec.q_c), abs(rec.w_bc), abs(rec.w_da), 1.0
            )
            if abs(rec.ledger.first_law_residual) > FIRST_LAW_TOL * scale:
                violations.append(
                    'first law violated at tau_cycle {}: residual {}'.format(
                        rec.tau_cycle, rec.ledger.first_law_residual
                    )
                )
            if (
                rec.eta_int is not None
                and abs(rec.eta_int - eta_int) > ETA_INT_TOL
            ):
                violations.append(
                    'internal efficiency {} differs from {} '
                    'at tau_cycle {}'.format(
                        rec.eta_int, eta_int, rec.tau_cycle
                    )
                )
            if rec.power > rec.power_bound * (1 + ETA_INT_TOL) + ETA_INT_TOL:
                violations.append(
                    'power {} exceeds bound {} at tau_cycle {}'.format(
                        rec.power, rec.power_bound, rec.tau_cycle
                    )
                )
        saturated = [
            rec
            for rec in ok
            if rec.tau_h >= base.rates.inversion_time(heating=True)
            and rec.tau_c >= base.rates.inversion_time(heating=False)
        ]
        sigma_p = [math.sqrt(rec.sigma_p_sq) for rec in saturated]
        for (rec0, s0), (rec1, s1) in zip(
            zip(saturated, sigma_p), zip(saturated[1:], sigma_p[1:])
        ):
            if s1 > s0:
                violations.append(
                    'sigma_P increases from {} to {} between tau_cycle {} '
                    'and {}'.format(s0, s1, rec0.tau_cycle, rec1.tau_cycle)
                )
        for msg in violations:
            get_logger().warning(msg)
        return violations


def _run_point(
    spec: SweepSpec, index: int, tau_h: float, tau_c: float
) -> SweepPoint:
    cycle = spec.base.replace(tau_h=tau_h, tau_c=tau_c)
    get_logger().info(
        'start point %u: tau_h %s ms, tau_c %s ms', index + 1, tau_h, tau_c
    )
    try:
        record, iterations = find_limit_cycle(
            cycle,
            max_iters=spec.max_iters,
            tol=spec.tol,
            closure_tol=spec.closure_tol,
            adiabaticity_threshold=spec.adiabaticity_threshold,
        )
        work_statistics = None
        if spec.n_traj > 0:
            work_statistics = trajectory_work_statistics(
                record.spec,
                spec.n_traj,
                spec.seed,
                rng=make_rng(spec.seed, index),
            )
    except (ValueError, RuntimeError) as e:
        get_logger().warning(
            'point %u (tau_h %s ms, tau_c %s ms) failed: %s',
            index + 1,
            tau_h,
            tau_c,
            e,
        )
        return SweepPoint(index, tau_h, tau_c, cycle.tau_cycle, error=str(e))
    get_logger().info('finish point %u', index + 1)
    return SweepPoint(
        index,
        tau_h,
        tau_c,
        cycle.tau_cycle,
        record=record,
        iterations=iterations,
        work_statistics=work_statistics,
    )


def run_sweep(
    spec: SweepSpec, show_progress: bool = False
) -> SweepResult:
    """
    Find the limit cycle at every sweep point.

    Points run on a thread pool; a failing point is recorded in its row
    and does not stop the sweep.

    :param spec: Sweep description.
    :param show_progress: Use tqdm progress bar to show sweep progress.
    """
    points = spec.points()
    parallel = spec.parallel if spec.parallel is not None else cpu_count()
    if parallel > len(points) > 0:
        get_logger().info(
            'Requested %u parallel workers but only %u points, '
            'will run all points in parallel.',
            parallel,
            len(points),
        )
        parallel = len(points)
    parallel = max(parallel, 1)

    if show_progress:
        try:
            import tqdm

            get_logger().propagate = False
        except ImportError:
            get_logger().warning(
                (
                    'Package tqdm not installed, cannot show progress '
                    'information. Please install tqdm with '
                    "'pip install tqdm'"
                )
            )
            show_progress = False

    results = []
    pbar = None
    with ThreadPoolExecutor(max_workers=parallel) as executor:
        futures = [
            executor.submit(_run_point, spec, i, tau_h, tau_c)
            for i, (tau_h, tau_c) in enumerate(points)
        ]
        if show_progress:
            pbar = tqdm.tqdm(total=len(futures), desc='sweep')
        for future in as_completed(futures):
            results.append(future.result())
            if pbar is not None:
                pbar.update(1)
    if pbar is not None:
        pbar.close()
        get_logger().propagate = True
    return SweepResult(spec, results)


def _infer_format(path: str, format: Optional[str]) -> str:
    if format is None:
        ext = os.path.splitext(path)[1].lower().lstrip('.')
        format = ext if ext in FORMATS else 'csv'
    if format not in FORMATS:
        raise ValueError(
            'format must be one of {}, found {}'.format(FORMATS, format)
        )
    return format


def export_results(
    result: SweepResult, path: str, format: Optional[str] = None
) -> str:
    """
    Write the sweep table as CSV or JSON.

    CSV has one header row with the fixed column order, absent values as
    empty fields.  JSON holds the same rows plus a metadata block, the
    per-point iteration counts, errors and trajectory statistics.

    :param result: Sweep result.
    :param path: Output file; parent directories are created.
    :param format: ``'csv'`` or ``'json'``, inferred from the extension
        when omitted.

    :return: The real path of the written file.
    """
    format = _infer_format(path, format)
    path = validate_output_path(path)
    if format == 'csv':
        frame = result.to_frame()
        try:
            frame.to_csv(
                path,
                index=False,
                float_format='%.{}g'.format(_SIG_FIGS),
                na_rep='',
            )
        except (IOError, OSError) as e:
            raise OSError('Cannot write CSV file: {}'.format(path)) from e
    else:
        rows = []
        for row in result.rows:
            values = row.values()
            values['iterations'] = row.iterations
            values['error'] = row.error
            if row.work_statistics is not None:
                values['trajectory'] = row.work_statistics.as_dict()
            rows.append(values)
        write_json(path, {'metadata': result.metadata, 'rows': rows})
    get_logger().info('wrote %s', path)
    return path


def read_results(path: str) -> pd.DataFrame:
    """Load an exported CSV or JSON sweep table."""
    if not os.path.exists(path):
        raise OSError('no such file {}'.format(path))
    if _infer_format(path, None) == 'json':
        data = read_json(path)
        try:
            rows = data['rows']
        except (KeyError, TypeError) as e:
            raise ValueError('not a sweep result file: {}'.format(path)) from e
        frame = pd.DataFrame(rows)
        for name in COLUMNS:
            if name not in frame:
                frame[name] = None
        return frame[COLUMNS]
    try:
        return pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ValueError('Cannot parse CSV file {}: {}'.format(path, e)) from e


PANELS = [
    ('power', 'P / k_B (nK/ms)'),
    ('eta', 'efficiency'),
    ('fano', 'Fano factor F_P'),
]


def emit_plot_script(result_path: str, out_path: str) -> str:
    """
    Write a gnuplot script drawing power, efficiency and Fano factor
    against cycle time from an exported CSV file.  The script is never run.

    :return: The real path of the script.
    """
    if not os.path.exists(result_path):
        raise OSError('no such file {}'.format(result_path))
    try:
        with open(result_path, 'r') as fd:
            header = fd.readline().strip().split(',')
    except (IOError, OSError) as e:
        raise OSError('Cannot read file: {}'.format(result_path)) from e
    missing = [
        name for name in ['tau_cycle_ms'] + [p[0] for p in PANELS]
        if name not in header
    ]
    if missing:
        raise ValueError(
            'result file {} lacks columns {}'.format(result_path, missing)
        )
    column = {name: header.index(name) + 1 for name in header}
    data = os.path.realpath(result_path).replace("'", "''")
    image = os.path.splitext(os.path.realpath(out_path))[0] + '.png'

    lines = [
        '# power, efficiency and Fano factor vs cycle time',
        '# data: {}'.format(data),
        "set datafile separator ','",
        "set datafile missing ''",
        'set terminal pngcairo size 800,1200',
        "set output '{}'".format(image.replace("'", "''")),
        'set multiplot layout 3,1',
        "set xlabel 'cycle time (ms)'",
        'set grid',
    ]
    for name, label in PANELS:
        lines.append("set ylabel '{}'".format(label))
        if name == 'fano':
            lines.append(
                'set arrow from graph 0, first 1 to graph 1, first 1 '
                'nohead dt 2'
            )
        lines.append(
            "plot '{}' skip 1 using {}:{} with linespoints pt 7 notitle".format(
                data, column['tau_cycle_ms'], column[name]
            )
        )
    lines.extend(['unset multiplot', 'unset output'])
    out_path = validate_output_path(out_path)
    try:
        with open(out_path, 'w') as fd:
            fd.write('\n'.join(lines) + '\n')
    except (IOError, OSError) as e:
        raise OSError('Cannot write plot script: {}'.format(out_path)) from e
    get_logger().info('wrote %s', out_path)
    return out_path
