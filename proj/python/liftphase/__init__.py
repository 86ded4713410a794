"""Spectrogram phase retrieval by lifting and angular synchronization."""

import json as _json

from ._liftphase import (
    ConfigError,
    DecompositionFailure,
    DegenerateSpectrum,
    DimensionError,
    Error,
    GridError,
    IoError,
    MeasurementGrid,
    NonConvergence,
    SchemaError,
    ZeroSignal,
    aligned_vector_error,
    default_reconstruction_points,
    experiment_names,
    fourier_samples,
    half_step_grid,
    measure,
    paper_grid,
    recover,
    signal_names,
    spectrogram,
    synthesize,
)
from ._liftphase import _run_experiment


def run_experiment(name, out_dir=None, rank_tol=None):
    """Run a named experiment and return its metrics as a dict."""
    return _json.loads(_run_experiment(name, out_dir, rank_tol))


__all__ = [
    "ConfigError",
    "DecompositionFailure",
    "DegenerateSpectrum",
    "DimensionError",
    "Error",
    "GridError",
    "IoError",
    "MeasurementGrid",
    "NonConvergence",
    "SchemaError",
    "ZeroSignal",
    "aligned_vector_error",
    "default_reconstruction_points",
    "experiment_names",
    "fourier_samples",
    "half_step_grid",
    "measure",
    "paper_grid",
    "recover",
    "run_experiment",
    "signal_names",
    "spectrogram",
    "synthesize",
]
