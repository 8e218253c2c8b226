"""Backward schemes for discretely reflected BSDEs and optimal switching."""

from ._core import (
    CapacityError,
    ParseError,
    build_grids,
    converge,
    eval_expression,
    in_domain,
    oracle,
    parse_expression,
    project,
    solve,
    truncated_normal_lambda,
    validate,
)

__all__ = [
    "CapacityError",
    "ParseError",
    "build_grids",
    "converge",
    "eval_expression",
    "in_domain",
    "oracle",
    "parse_expression",
    "project",
    "solve",
    "truncated_normal_lambda",
    "validate",
]
