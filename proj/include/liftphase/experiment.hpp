#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "liftphase/forward.hpp"
#include "liftphase/io.hpp"
#include "liftphase/recovery.hpp"
#include "liftphase/synthesis.hpp"

namespace liftphase {

/// Grid parameters. `preset == "paper"` selects paper_grid() and ignores the
/// explicit fields apart from delta.
struct GridSpec {
  std::string preset = "paper";
  std::size_t num_frequencies = 61;
  std::size_t num_shifts = 11;
  double shift_spacing = 0.5 / 11.0;
  int delta = 7;

  MeasurementGrid build() const;
};

/// Uniform reconstruction points start + p * spacing, p = 0..count-1.
struct PointsSpec {
  std::size_t count = 82;
  double start = -1.0;
  double spacing = 1.0 / 40.96;

  std::vector<double> build() const;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::string signal = "gaussian";
  std::string window = "gaussian";
  GridSpec grid;
  MeasurementMethod method = MeasurementMethod::quadrature;
  std::optional<NoiseSpec> noise;
  RecoveryConfig recovery;
  PointsSpec points;
  std::filesystem::path out_dir = "out";
  bool dump_system = false;
  /// Reference error for the preset, copied into metrics for comparison.
  std::optional<double> reference_error;

  /// ConfigError for unknown names, invalid tolerances or grid parameters.
  void validate() const;
  /// Drops a zero-level noise spec so that it serializes like no noise.
  void normalize();
};

/// "paper-1" (gaussian specimen) or "paper-2" (modulated specimen) on the
/// paper grid with quadrature measurements. ConfigError for other names.
ExperimentConfig experiment_preset(std::string_view name);
std::vector<std::string> experiment_names();

json to_json(const ExperimentConfig& cfg);
/// Overlays the keys present in `doc` on `base`. Unknown keys are a
/// ConfigError so that typos do not silently fall back to defaults.
ExperimentConfig config_from_json(const json& doc, ExperimentConfig base = {});

struct StageTimings {
  double measure = 0.0;
  double factorize = 0.0;
  double solve = 0.0;
  double synthesize = 0.0;
  double total = 0.0;
};

struct ExperimentResult {
  SpectrogramData measurement;
  RecoveredSpectrum spectrum;
  PhysicalReconstruction reconstruction;
  /// Absent when the reference signal is zero on the reconstruction grid.
  std::optional<AlignedError> error;
  std::optional<double> spectrum_error;
  StageTimings timings;
};

/// measure -> recover -> synthesize -> compare against the ground truth.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Deterministic summary: configuration, errors and diagnostics. Timings
/// are kept out so that repeated runs produce identical files.
json metrics_json(const ExperimentConfig& cfg, const ExperimentResult& result);
json timings_json(const StageTimings& t);

/// Writes config.json, measurement.json, spectrum.json, reconstruction.csv
/// and metrics.json into cfg.out_dir (plus system.bin when dump_system is
/// set). Timings are not written, so every file is reproducible.
void write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace liftphase
