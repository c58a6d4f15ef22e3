"""Python bindings for the laseruav planner."""

from ._laseruav import (  # noqa: F401
    DoubleCirclePlan,
    DomainError,
    Error,
    GeometryError,
    InfeasibleError,
    InputError,
    ScenarioConfig,
    SolverError,
    audit,
    load_config,
    plan_double_circle,
    run_method,
    sum_throughput,
    water_fill,
)

__all__ = [name for name in dir() if not name.startswith("_")]
