"""Optimal taxation under government reputation.

Static and dynamic revenue/tax-mix schedules as functions of the public
belief about the government's honesty, Bayesian belief dynamics under noisy
delivery signals, comparative statics in monitoring quality, enforcement,
and type persistence, and seeded Monte Carlo path simulation.
"""

from .economy import (
    Allocation,
    Economy,
    EconomyPrimitives,
    GridSpec,
    Instruments,
    build_feasible_set,
    net_of_tax_product,
    revenue_components,
    revenue_general,
    solve_allocation_general,
    solve_allocation_quant,
)
from .errors import (
    BracketingError,
    ConfigError,
    ConvergenceError,
    EconomyDomainError,
    ReputaxError,
)
from .monitoring import (
    BeliefStep,
    InformativenessReport,
    MonitoringTech,
    TransitionMatrix,
    apply_enforcement,
    bayes_posterior,
    informativeness_diagnostic,
    one_step_kernel,
    propagate_prior,
    signal_prob,
    threshold_tech,
)
from .static_solver import (
    CutoffReport,
    FrontierPoint,
    InstrumentCosts,
    StaticSolution,
    enumerate_frontier,
    select_mix_by_cost,
    solve_static,
    static_cutoff,
    static_welfare,
)
from .dynamic_solver import (
    ContractionReport,
    PolicySchedule,
    ShapeReport,
    SolverConfig,
    ValueFunction,
    VFIResult,
    bellman_apply,
    bellman_modulus,
    continuation_value,
    contraction_test,
    dynamic_cutoff,
    shape_diagnostics,
    solve_vfi,
)
from .experiments import (
    FigureTables,
    MixInfoReport,
    SweepResult,
    instrument_specific_variant,
    replicate_figures,
    sweep_enforcement,
    sweep_garbling,
    sweep_persistence,
)
from .simulator import (
    HistoryReport,
    SimConfig,
    SimPath,
    SimulationOutput,
    long_run_stats,
    simulate_paths,
    verify_history_dependence,
)

__version__ = "0.1.0"
