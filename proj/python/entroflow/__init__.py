"""Python front end to the entroflow solver."""

from ._core import (
    ConfigError,
    InvariantViolation,
    Ln_eps,
    PreconditionError,
    SolverFailure,
    check,
    moreau,
    oracle_max_difference,
    preset,
    preset_names,
    prox,
    rho,
    run,
    step_guard,
    yosida,
)

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "Ln_eps",
    "PreconditionError",
    "SolverFailure",
    "check",
    "moreau",
    "oracle_max_difference",
    "preset",
    "preset_names",
    "prox",
    "rho",
    "run",
    "step_guard",
    "yosida",
]
