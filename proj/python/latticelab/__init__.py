"""Python access to the latticelab core: metrics, envelopes, convergence
checks, witnesses and the counterexample generators."""

from ._core import (
    __version__,
    discreteness_constant,
    isolation_radii,
    inf_convolution,
    hat_check,
    lip_counterexample,
    jump_witness,
    block_witness,
    buo_equals_order,
    run_cli,
    LimitInLp,
    HorizonExhausted,
)

__all__ = [
    "__version__",
    "discreteness_constant",
    "isolation_radii",
    "inf_convolution",
    "hat_check",
    "lip_counterexample",
    "jump_witness",
    "block_witness",
    "buo_equals_order",
    "run_cli",
    "LimitInLp",
    "HorizonExhausted",
]
