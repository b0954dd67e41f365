"""Pattern-recurrence sequential prediction toolkit."""

from ._core import (
    Prediction,
    RecurrenceTrace,
    backward_estimate,
    dequantize,
    divergence_certificate,
    forward_predict,
    markov_limit_reference,
    quantize,
    run_cli,
    same_cell,
    sample_markov_path,
    validate_schedule,
)

__all__ = [
    "Prediction",
    "RecurrenceTrace",
    "backward_estimate",
    "dequantize",
    "divergence_certificate",
    "forward_predict",
    "markov_limit_reference",
    "quantize",
    "run_cli",
    "same_cell",
    "sample_markov_path",
    "validate_schedule",
]
