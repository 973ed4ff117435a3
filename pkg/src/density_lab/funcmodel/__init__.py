from .expr import (
    MAX_DERIVATIVE_ORDER,
    DerivativeError,
    ParseError,
    ScalarField,
    apply_function,
    parse_expression,
)
from .phi import (
    ComplexFrequency,
    MapCheckError,
    MapPhi,
    StripError,
    as_frequency,
    eval_exponential,
    make_phi,
    pairing,
)
from .presets import SINGULAR_AT_ZERO, WEIGHT_PRESETS, preset_weight

__all__ = [
    "MAX_DERIVATIVE_ORDER",
    "ComplexFrequency",
    "DerivativeError",
    "MapCheckError",
    "MapPhi",
    "ParseError",
    "SINGULAR_AT_ZERO",
    "ScalarField",
    "StripError",
    "WEIGHT_PRESETS",
    "apply_function",
    "as_frequency",
    "eval_exponential",
    "make_phi",
    "pairing",
    "parse_expression",
    "preset_weight",
]
