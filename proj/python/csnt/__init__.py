"""Compressible non-Newtonian Stokes solver on the periodic torus."""

from ._core import (
    ConfigError,
    ConstitutiveModel,
    DataError,
    Error,
    SolverError,
    bmo_norm,
    constant_state_decay,
    diagnose,
    git_blob_sha1,
    gronwall_compare,
    gronwall_envelope,
    log_inequality_ratio,
    parse_config,
    pk,
    read_snapshot,
    run,
    set_threads,
    solve_momentum,
    truncation,
)

__all__ = [
    "ConfigError",
    "ConstitutiveModel",
    "DataError",
    "Error",
    "SolverError",
    "bmo_norm",
    "constant_state_decay",
    "diagnose",
    "git_blob_sha1",
    "gronwall_compare",
    "gronwall_envelope",
    "log_inequality_ratio",
    "parse_config",
    "pk",
    "read_snapshot",
    "run",
    "set_threads",
    "solve_momentum",
    "truncation",
]
