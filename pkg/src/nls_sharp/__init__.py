"""Split-step NLS simulator with weighted-norm, ray-tracing and WKB diagnostics."""
from .grid import Grid, GridMismatch, WaveField, inner_product, l2_norm, make_grid, spectral_gradient
from .kernels import BACKEND
from .potentials import (
    AnisotropicQuadratic,
    Harmonic,
    InvertedHarmonic,
    SoftLinear,
    SoftPower,
    Stark,
    Zero,
    classify,
    eval_potential,
    grad_bound_lemma_check,
    self_adjointness_guard,
)
from .propagator import BlowupDetected, GuardRejected, SimulationParams, Trajectory, evolve, strang_step

__version__ = "0.1.0"
