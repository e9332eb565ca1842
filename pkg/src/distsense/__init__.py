"""Noise-insensitive probe design and verification for distributed quantum sensor networks."""

from .advantage import build_alternating, enumerate_blocks, product_advantage_sweep
from .branch_sim import (
    BlockDecomposition,
    BranchState,
    evolve,
    parity_fisher,
    probe_state,
    product_state,
    qfi_mixed,
    qfi_pure,
    twirl,
)
from .field_model import (
    FourierSine,
    PointSources,
    SensorArray,
    Tabulated,
    Taylor,
    fourier_extremal_positions,
    rank_report,
    sample_coefficients,
)
from .oracle import statevector_oracle
from .probe_designer import (
    DesignProblem,
    ProbePair,
    design,
    noiseless_optimum,
    optimal_probe,
    optimal_probe_integer,
    perp_decompose,
)

__version__ = "0.1.0"

__all__ = [
    "BlockDecomposition", "BranchState", "DesignProblem", "FourierSine", "PointSources",
    "ProbePair", "SensorArray", "Tabulated", "Taylor", "build_alternating", "design",
    "enumerate_blocks", "evolve", "fourier_extremal_positions", "noiseless_optimum",
    "optimal_probe", "optimal_probe_integer", "parity_fisher", "perp_decompose",
    "probe_state", "product_advantage_sweep", "product_state", "qfi_mixed", "qfi_pure",
    "rank_report", "sample_coefficients", "statevector_oracle", "twirl",
]
