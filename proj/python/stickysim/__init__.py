"""Python front end of the sticky diffusion simulator."""

from ._stickysim import (
    Error,
    ParseError,
    ValidationError,
    __version__,
    commands,
    masses,
    rerun,
    run,
    simulate_path,
    sticky_atom,
    sticky_cdf,
    validate,
)

__all__ = [
    "Error",
    "ParseError",
    "ValidationError",
    "__version__",
    "commands",
    "masses",
    "rerun",
    "run",
    "simulate_path",
    "sticky_atom",
    "sticky_cdf",
    "validate",
]
