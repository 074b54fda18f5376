"""Noisy quantum homodyne tomography: simulation, deconvolving
filtered-back-projection estimation, and adaptive bandwidth selection."""

__version__ = "0.1.0"

from .adapt import LepskiConfig, SelectionResult, default_grid, deviation_bound, lepski_functional, select
from .estimate import (
    EstimateResult,
    direct_estimate,
    estimate_curve,
    grid_estimate,
    l2_error,
    oracle_bandwidth,
    relative_sup,
    sup_error,
)
from .harness import ExperimentConfig, ExperimentReport, reference_config, run_experiment, run_from_manifest
from .simulate import HomodyneDataset, NoiseModel, conditional_density, gamma_from_eta, sample_homodyne
from .states import DensityMatrix, StateSpec, WignerGrid, analytic_state, analytic_wigner
from .tomography import Sinogram, backproject, filter_sinogram, kernel_fourier, kernel_real, radon

__all__ = [
    "DensityMatrix",
    "EstimateResult",
    "ExperimentConfig",
    "ExperimentReport",
    "HomodyneDataset",
    "LepskiConfig",
    "NoiseModel",
    "SelectionResult",
    "Sinogram",
    "StateSpec",
    "WignerGrid",
    "analytic_state",
    "analytic_wigner",
    "backproject",
    "conditional_density",
    "default_grid",
    "deviation_bound",
    "direct_estimate",
    "estimate_curve",
    "filter_sinogram",
    "gamma_from_eta",
    "grid_estimate",
    "kernel_fourier",
    "kernel_real",
    "l2_error",
    "lepski_functional",
    "oracle_bandwidth",
    "radon",
    "reference_config",
    "relative_sup",
    "run_experiment",
    "run_from_manifest",
    "sample_homodyne",
    "select",
    "sup_error",
]
