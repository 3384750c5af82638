"""Exact boson-sampling simulation, interferometer characterization and visibility analysis."""

__version__ = "0.1.0"

from .core import (
    ModeConfiguration,
    TransferMatrix,
    balanced_splitter,
    enumerate_output_configurations,
    published_matrix,
    random_unitary,
    validate,
)
from .permanent import permanent, permanent_glynn, permanent_naive, permanent_nonneg, permanent_ryser
from .scattering import GramMatrix, full_distribution, p_classical, p_partial, p_quantum, sample
from .coherent import coherent_p0, coherent_pinf, coherent_visibility
from .characterize import characterize, reconstruct, simulate_probes
from .source import DetectionModel, SourceModel, gram_from_delays, hom_scan, predict_measured_table
from .analysis import l1_distance, spdc_sweep, visibility, visibility_table

__all__ = [
    "DetectionModel",
    "GramMatrix",
    "ModeConfiguration",
    "SourceModel",
    "TransferMatrix",
    "balanced_splitter",
    "characterize",
    "coherent_p0",
    "coherent_pinf",
    "coherent_visibility",
    "enumerate_output_configurations",
    "full_distribution",
    "gram_from_delays",
    "hom_scan",
    "l1_distance",
    "p_classical",
    "p_partial",
    "p_quantum",
    "permanent",
    "permanent_glynn",
    "permanent_naive",
    "permanent_nonneg",
    "permanent_ryser",
    "predict_measured_table",
    "published_matrix",
    "random_unitary",
    "reconstruct",
    "sample",
    "simulate_probes",
    "spdc_sweep",
    "validate",
    "visibility",
    "visibility_table",
]
