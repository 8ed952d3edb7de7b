"""Dynamic-logic joint detection and tracking in clutter."""

from ._dltrack import (
    ConfigError,
    DataError,
    Error,
    SizeLimitError,
    config_hash,
    log_likelihood,
    resolved_config,
    simulate,
    track,
    verify,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "SizeLimitError",
    "config_hash",
    "log_likelihood",
    "resolved_config",
    "simulate",
    "track",
    "verify",
]
