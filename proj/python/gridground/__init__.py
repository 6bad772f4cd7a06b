"""Python bindings for the gridground core."""

from ._core import (
    Config,
    GridgroundError,
    Params,
    Session,
    evaluate,
    expression,
    generate,
    parse,
    train,
)

__all__ = [
    "Config",
    "GridgroundError",
    "Params",
    "Session",
    "evaluate",
    "expression",
    "generate",
    "parse",
    "train",
]
