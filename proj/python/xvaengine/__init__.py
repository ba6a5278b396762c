"""Incremental XVA engine (Python front end to the C++ core)."""

from ._core import (  # noqa: F401
    ArgumentError,
    ConfigError,
    IdentityError,
    PreconditionError,
    RegimeError,
    RunConfig,
    StepSizeError,
    TableMismatch,
    UnsupportedError,
    XvaError,
    bs_price,
    call_price_replacement,
    closed_form_price,
    load_config,
    norm_cdf,
    parse_config,
    price,
    table,
    verify,
)

__all__ = [n for n in dir() if not n.startswith("_")]
