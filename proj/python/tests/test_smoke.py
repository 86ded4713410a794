import numpy as np
import pytest

import liftphase as lp


def test_paper_grid():
    grid = lp.paper_grid()
    assert grid.num_frequencies == 61
    assert grid.num_shifts == 11
    assert grid.delta == 7
    assert grid.shifts[5] == 0.0
    assert grid.frequencies[0] == -15.0


def test_measure_shape_and_zero_signal():
    grid = lp.half_step_grid(21, 7, 0.05, 3)
    b = lp.measure("gaussian", grid, method="series")
    assert b.shape == (147,)
    assert np.all(b >= 0)
    assert not np.any(lp.measure("zero", grid, method="series"))


def test_series_matches_quadrature():
    q = lp.spectrogram("gaussian", 0.1, 2.5)
    s = lp.spectrogram("gaussian", 0.1, 2.5, method="series", delta=15)
    assert abs(s - q) <= 1e-8 * q


def test_recover_small_grid():
    grid = lp.half_step_grid(21, 7, 0.05, 3)
    b = lp.measure("gaussian", grid, method="series")
    out = lp.recover(b, grid)
    truth = lp.fourier_samples("gaussian", grid.frequencies)
    assert out["f_hat"].dtype == np.complex128
    assert out["diagnostics"]["synchronized"]
    # 147 measurements for 369 band unknowns: the coarse grid leaves the tail
    # diagonals poorly determined, so only a loose bound is expected here.
    assert lp.aligned_vector_error(truth, out["f_hat"]) < 0.1
    assert out["diagnostics"]["fit_residual"] < 1e-10


def test_recovery_ignores_global_phase():
    grid = lp.half_step_grid(21, 7, 0.05, 3)
    b = lp.measure("modulated", grid, method="series")
    a = lp.recover(b, grid)["f_hat"]
    scaled = lp.recover(16.0 * b, grid)["f_hat"]
    np.testing.assert_allclose(np.abs(scaled), 4.0 * np.abs(a), rtol=0, atol=1e-8 * np.abs(a).max() * 4)


def test_synthesize_constant():
    freqs = lp.paper_grid().frequencies
    f_hat = np.zeros(61, dtype=complex)
    f_hat[30] = 2.0
    values = lp.synthesize(freqs, f_hat)
    assert values.shape == (82,)
    np.testing.assert_allclose(values, 1.0, atol=1e-15)


def test_errors_map_to_python_exceptions():
    with pytest.raises(lp.ConfigError):
        lp.measure("sawtooth", lp.paper_grid())
    with pytest.raises(lp.GridError):
        lp.synthesize(lp.paper_grid().frequencies, np.zeros(61, dtype=complex), [0.5])
    with pytest.raises(lp.SchemaError):
        lp.recover(np.ones(10), lp.paper_grid())
    with pytest.raises(lp.SchemaError):
        lp.recover(-np.ones(671), lp.paper_grid())
    assert issubclass(lp.SchemaError, lp.Error)


def test_experiment_paper_1(tmp_path):
    metrics = lp.run_experiment("paper-1", out_dir=tmp_path)
    assert metrics["rank"] == 671
    assert metrics["aligned_error"] <= 5e-3
    assert (tmp_path / "metrics.json").exists()
