# pylint: disable=wrong-import-position
"""SpinOtto Module"""

_DEFAULT_B1 = 346.5
_DEFAULT_B2 = 31.6
_DEFAULT_RAMP_TIME = 10.0
_DEFAULT_BATH_SWAP_TIME = 4.4
_DEFAULT_G_CS = 0.25
_DEFAULT_G_RB = 0.5
_DEFAULT_TEMPERATURE_NK = 950.0
# uniform rate with sum(1/rate) over the six steps equal to 450 ms
_DEFAULT_RATE = 6.0 / 450.0
_DEFAULT_ADIABATICITY_THRESHOLD = 0.05
_DEFAULT_CLOSURE_TOL = 1e-9
_LIMIT_CYCLE_MAX_ITERS = 100000
_LIMIT_CYCLE_TOL = 1e-14
_SIG_FIGS = 12
# reference cycle: 960 ms including both ramps
_DEFAULT_TAU_STROKE = 470.0
_DEFAULT_SWEEP_MIN = 50.0
_DEFAULT_SWEEP_MAX = 1500.0
_DEFAULT_SWEEP_STEPS = 30


from ._version import __version__  # noqa
from .config import SimulationConfig, load_config  # noqa
from .cycle import (  # noqa
    AdiabaticityReport,
    ConvergenceError,
    CycleRecord,
    adiabatic_ramp,
    adiabaticity,
    find_limit_cycle,
    run_cycle,
)
from .kinetics import (  # noqa
    ContactPhase,
    Direction,
    EnsembleStatistics,
    IntegrationError,
    TrajectoryRecord,
    collision_count,
    ensemble_statistics,
    evolve_master,
    mean_collision_rate,
    population_series,
    sample_trajectory,
)
from .model import (  # noqa
    CouplingConstants,
    CycleSpec,
    FieldSchedule,
    LevelDistribution,
    RateTable,
    energy_variance,
    mean_energy,
    zeeman_energy,
)
from .sweep import (  # noqa
    ClosureError,
    SweepResult,
    SweepSpec,
    emit_plot_script,
    export_results,
    pair_strokes_for_closure,
    read_results,
    run_sweep,
)
from .thermo import (  # noqa
    HeatLedger,
    WorkStatistics,
    efficiency,
    efficiency_closed_form,
    efficiency_uncertainty,
    fano_factor,
    heat_engine_side,
    heat_leak,
    internal_efficiency,
    power,
    power_bound,
    trajectory_work_statistics,
    work_fluctuations,
    work_stroke,
)
from .utils import show_versions  # noqa

__all__ = [
    'LevelDistribution',
    'CouplingConstants',
    'RateTable',
    'FieldSchedule',
    'CycleSpec',
    'zeeman_energy',
    'mean_energy',
    'energy_variance',
    'Direction',
    'ContactPhase',
    'TrajectoryRecord',
    'EnsembleStatistics',
    'IntegrationError',
    'evolve_master',
    'population_series',
    'sample_trajectory',
    'ensemble_statistics',
    'mean_collision_rate',
    'collision_count',
    'AdiabaticityReport',
    'CycleRecord',
    'ConvergenceError',
    'adiabaticity',
    'adiabatic_ramp',
    'run_cycle',
    'find_limit_cycle',
    'HeatLedger',
    'WorkStatistics',
    'heat_engine_side',
    'work_stroke',
    'heat_leak',
    'efficiency',
    'efficiency_closed_form',
    'efficiency_uncertainty',
    'internal_efficiency',
    'power',
    'power_bound',
    'work_fluctuations',
    'fano_factor',
    'trajectory_work_statistics',
    'SimulationConfig',
    'load_config',
    'SweepSpec',
    'SweepResult',
    'ClosureError',
    'run_sweep',
    'pair_strokes_for_closure',
    'export_results',
    'read_results',
    'emit_plot_script',
    'show_versions',
]
