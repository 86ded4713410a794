#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "liftphase/errors.hpp"
#include "liftphase/experiment.hpp"
#include "liftphase/forward.hpp"
#include "liftphase/recovery.hpp"
#include "liftphase/synthesis.hpp"

namespace py = pybind11;
namespace lp = liftphase;

namespace {

py::dict diagnostics_dict(const lp::RecoveryDiagnostics& d) {
  py::dict out;
  out["residual"] = d.residual;
  out["fit_residual"] = d.fit_residual;
  out["eigen_gap"] = d.eigen_gap;
  out["rank"] = d.rank;
  out["clamped_mass"] = d.clamped_mass;
  out["clamp_warning"] = d.clamp_warning;
  out["synchronized"] = d.synchronized;
  out["power_iterations"] = d.power_iterations;
  return out;
}

std::optional<lp::NoiseSpec> noise_spec(double level, std::uint64_t seed) {
  if (level > 0.0) return lp::NoiseSpec{seed, level};
  return std::nullopt;
}

Eigen::VectorXd measure(const std::string& signal, const lp::MeasurementGrid& grid,
                        const std::string& method, const std::string& window, double noise_level,
                        std::uint64_t seed) {
  const lp::SpectrogramData d = lp::measure(lp::make_signal(signal), lp::make_window(window), grid,
                                            lp::parse_method(method), noise_spec(noise_level, seed));
  return Eigen::Map<const Eigen::VectorXd>(d.b.data(), static_cast<Eigen::Index>(d.b.size()));
}

py::dict recover(const Eigen::VectorXd& b, const lp::MeasurementGrid& grid,
                 const std::string& window, double rank_tol, double magnitude_floor) {
  lp::SpectrogramData data;
  data.grid = grid;
  data.provenance = lp::Provenance::file;
  data.b.assign(b.data(), b.data() + b.size());
  lp::RecoveryConfig cfg;
  cfg.rank_tol = rank_tol;
  cfg.magnitude_floor = magnitude_floor;
  lp::RecoveredSpectrum s;
  {
    py::gil_scoped_release release;
    s = lp::recover(data, lp::make_window(window), grid, cfg);
  }
  py::dict out;
  out["frequencies"] = s.frequencies;
  out["f_hat"] = s.f_hat;
  out["diagnostics"] = diagnostics_dict(s.diagnostics);
  return out;
}

Eigen::VectorXcd synthesize(const std::vector<double>& frequencies, const Eigen::VectorXcd& f_hat,
                            std::optional<std::vector<double>> points) {
  const std::vector<double> x = points ? *points : lp::default_reconstruction_points();
  const lp::PhysicalReconstruction r = lp::synthesize(frequencies, f_hat, x);
  return Eigen::Map<const Eigen::VectorXcd>(r.values.data(),
                                            static_cast<Eigen::Index>(r.values.size()));
}

std::string run_experiment(const std::string& name, std::optional<std::filesystem::path> out_dir,
                           std::optional<double> rank_tol) {
  lp::ExperimentConfig cfg = lp::experiment_preset(name);
  if (rank_tol) cfg.recovery.rank_tol = *rank_tol;
  cfg.validate();
  lp::ExperimentResult result;
  {
    py::gil_scoped_release release;
    result = lp::run_experiment(cfg);
  }
  if (out_dir) {
    cfg.out_dir = *out_dir;
    lp::write_experiment(cfg, result);
  }
  return lp::metrics_json(cfg, result).dump();
}

}  // namespace

PYBIND11_MODULE(_liftphase, m) {
  m.doc() = "Spectrogram phase retrieval by lifting and angular synchronization";

  auto error = py::register_exception<lp::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<lp::NonConvergence>(m, "NonConvergence", error);
  py::register_exception<lp::DecompositionFailure>(m, "DecompositionFailure", error);
  py::register_exception<lp::DimensionError>(m, "DimensionError", error);
  py::register_exception<lp::DegenerateSpectrum>(m, "DegenerateSpectrum", error);
  py::register_exception<lp::GridError>(m, "GridError", error);
  py::register_exception<lp::ZeroSignal>(m, "ZeroSignal", error);
  py::register_exception<lp::SchemaError>(m, "SchemaError", error);
  py::register_exception<lp::ConfigError>(m, "ConfigError", error);
  py::register_exception<lp::IoError>(m, "IoError", error);

  py::class_<lp::MeasurementGrid>(m, "MeasurementGrid")
      .def(py::init([](std::vector<double> shifts, std::vector<double> frequencies, int delta) {
             return lp::MeasurementGrid{std::move(shifts), std::move(frequencies), delta};
           }),
           py::arg("shifts"), py::arg("frequencies"), py::arg("delta") = 7)
      .def_readwrite("shifts", &lp::MeasurementGrid::shifts)
      .def_readwrite("frequencies", &lp::MeasurementGrid::frequencies)
      .def_readwrite("delta", &lp::MeasurementGrid::delta)
      .def_property_readonly("num_shifts", &lp::MeasurementGrid::num_shifts)
      .def_property_readonly("num_frequencies", &lp::MeasurementGrid::num_frequencies)
      .def("validate", &lp::MeasurementGrid::validate, py::arg("window_half_width") = 0.5)
      .def(py::self == py::self)
      .def("__repr__", [](const lp::MeasurementGrid& g) {
        return "MeasurementGrid(N=" + std::to_string(g.num_frequencies()) +
               ", K=" + std::to_string(g.num_shifts()) + ", delta=" + std::to_string(g.delta) + ")";
      });

  m.def("paper_grid", &lp::paper_grid, "61 frequencies in [-15, 15], 11 shifts, delta = 7");
  m.def("half_step_grid", &lp::half_step_grid, py::arg("num_frequencies"), py::arg("num_shifts"),
        py::arg("shift_spacing"), py::arg("delta"));
  m.def("signal_names", &lp::signal_names);
  m.def("experiment_names", &lp::experiment_names);

  m.def(
      "fourier_samples",
      [](const std::string& signal, const std::vector<double>& frequencies) {
        return lp::fourier_samples(lp::make_signal(signal), frequencies);
      },
      py::arg("signal"), py::arg("frequencies"));
  m.def(
      "spectrogram",
      [](const std::string& signal, double shift, double omega, const std::string& method,
         int delta, const std::string& window) {
        const lp::Signal f = lp::make_signal(signal);
        const lp::Window g = lp::make_window(window);
        return lp::parse_method(method) == lp::MeasurementMethod::quadrature
                   ? lp::spectrogram_quadrature(f, g, shift, omega)
                   : lp::spectrogram_series(f, g, shift, omega, delta);
      },
      py::arg("signal"), py::arg("shift"), py::arg("omega"), py::arg("method") = "quadrature",
      py::arg("delta") = 7, py::arg("window") = "gaussian");
  m.def("measure", &measure, py::arg("signal"), py::arg("grid"),
        py::arg("method") = "quadrature", py::arg("window") = "gaussian",
        py::arg("noise_level") = 0.0, py::arg("seed") = 0,
        "Stacked spectrogram b of length N K, shift-major");
  m.def("recover", &recover, py::arg("b"), py::arg("grid"), py::arg("window") = "gaussian",
        py::arg("rank_tol") = 1e-10, py::arg("magnitude_floor") = 1e-6,
        "Recovered Fourier samples, defined up to a global phase, with diagnostics");
  m.def("synthesize", &synthesize, py::arg("frequencies"), py::arg("f_hat"),
        py::arg("points") = py::none());
  m.def("default_reconstruction_points", &lp::default_reconstruction_points);
  m.def("aligned_vector_error", &lp::aligned_vector_error, py::arg("reference"),
        py::arg("estimate"));
  m.def("_run_experiment", &run_experiment, py::arg("name"), py::arg("out_dir") = py::none(),
        py::arg("rank_tol") = py::none());
}
