// Command-line front end: simulate, recover and experiment subcommands.
//
// Exit codes: 0 success, 1 usage, 2 configuration, 3 file IO,
// 4 numerical failure, 5 malformed input file.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "liftphase/errors.hpp"
#include "liftphase/experiment.hpp"
#include "liftphase/io.hpp"
#include "liftphase/lifting.hpp"
#include "liftphase/recovery.hpp"
#include "liftphase/synthesis.hpp"

namespace lp = liftphase;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kIo = 3, kNumerical = 4, kSchema = 5 };

struct Overrides {
  std::string config_path;
  std::optional<std::string> signal;
  std::optional<std::string> window;
  std::optional<std::string> method;
  std::optional<int> delta;
  std::optional<double> noise_level;
  std::optional<std::uint64_t> seed;
  std::optional<double> rank_tol;
  std::optional<std::string> out;
  bool dump_system = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool measurement_flags) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  cmd->add_option("--signal", o.signal, "Signal name (gaussian, modulated, zero)");
  cmd->add_option("--window", o.window, "Window name (gaussian)");
  if (measurement_flags) {
    cmd->add_option("--method", o.method, "Measurement model")
        ->check(CLI::IsMember({"quadrature", "series"}));
    cmd->add_option("--delta", o.delta, "Truncation radius");
    cmd->add_option("--noise-level", o.noise_level, "Relative multiplicative noise level");
    cmd->add_option("--seed", o.seed, "Noise seed");
  }
  cmd->add_option("--out", o.out, "Output directory");
}

/// Preset, then config file, then flags.
lp::ExperimentConfig resolve(lp::ExperimentConfig cfg, const Overrides& o) {
  if (!o.config_path.empty()) cfg = lp::config_from_json(lp::read_json_file(o.config_path), cfg);
  if (o.signal) cfg.signal = *o.signal;
  if (o.window) cfg.window = *o.window;
  if (o.method) cfg.method = lp::parse_method(*o.method);
  if (o.delta) cfg.grid.delta = *o.delta;
  if (o.noise_level || o.seed) {
    lp::NoiseSpec spec = cfg.noise.value_or(lp::NoiseSpec{});
    if (o.noise_level) spec.level = *o.noise_level;
    if (o.seed) spec.seed = *o.seed;
    cfg.noise = spec;
  }
  if (o.rank_tol) cfg.recovery.rank_tol = *o.rank_tol;
  if (o.out) cfg.out_dir = *o.out;
  if (o.dump_system) cfg.dump_system = true;
  cfg.normalize();
  cfg.validate();
  return cfg;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw lp::IoError("cannot create '" + dir.string() + "': " + ec.message());
}

int cmd_simulate(const Overrides& o) {
  lp::ExperimentConfig cfg = resolve({}, o);
  const auto data = lp::measure(lp::make_signal(cfg.signal), lp::make_window(cfg.window),
                                cfg.grid.build(), cfg.method, cfg.noise);
  ensure_dir(cfg.out_dir);
  const auto path = cfg.out_dir / "measurement.json";
  lp::write_json_file(path, lp::to_json(data));
  const auto [lo, hi] = std::minmax_element(data.b.begin(), data.b.end());
  std::printf("N=%zu K=%zu entries=%zu min=%.6g max=%.6g\nwrote %s\n",
              data.grid.num_frequencies(), data.grid.num_shifts(), data.b.size(), *lo, *hi,
              path.string().c_str());
  return kOk;
}

int cmd_recover(const std::string& measurement_path, const Overrides& o) {
  lp::ExperimentConfig cfg = resolve({}, o);
  bool truth_known = o.signal.has_value();
  if (!o.config_path.empty()) {
    const auto doc = lp::read_json_file(o.config_path);
    truth_known = truth_known || doc.contains("signal") || doc.contains("experiment");
  }
  const lp::SpectrogramData data = lp::spectrogram_from_json(lp::read_json_file(measurement_path));
  const lp::Window g = lp::make_window(cfg.window);
  const auto spectrum = lp::recover(data, g, data.grid, cfg.recovery);
  const auto rec = lp::synthesize(spectrum, cfg.points.build());

  ensure_dir(cfg.out_dir);
  lp::write_json_file(cfg.out_dir / "spectrum.json", lp::to_json(spectrum));
  const lp::Signal truth = lp::make_signal(truth_known ? cfg.signal : std::string("zero"));
  std::ostringstream csv;
  lp::write_reconstruction_csv(csv, rec, truth);
  lp::write_text_file(cfg.out_dir / "reconstruction.csv", csv.str());
  if (cfg.dump_system) {
    const auto sys = lp::factorize(g, data.grid);
    std::ofstream bin(cfg.out_dir / "system.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw lp::IoError("cannot open system.bin for writing");
    lp::write_system_dump(bin, sys->system(), sys->system().materialize());
  }

  const auto& d = spectrum.diagnostics;
  std::printf("residual=%.6g fit_residual=%.6g eigen_gap=%.6g rank=%zu\n", d.residual,
              d.fit_residual, d.eigen_gap, d.rank);
  if (d.clamp_warning) {
    std::printf("warning: clamped diagonal mass %.6g exceeds 1%% of the trace\n", d.clamped_mass);
  }
  if (truth_known) {
    try {
      std::printf("aligned_error=%.6g\n", lp::aligned_relative_error(rec, truth).error);
    } catch (const lp::ZeroSignal&) {
      std::printf("aligned_error=undefined (reference signal is zero)\n");
    }
  }
  std::printf("wrote %s\n", cfg.out_dir.string().c_str());
  return kOk;
}

int cmd_experiment(const std::string& name, const Overrides& o, bool print_timings) {
  lp::ExperimentConfig cfg = resolve(lp::experiment_preset(name), o);
  const auto result = lp::run_experiment(cfg);
  lp::write_experiment(cfg, result);
  const auto& d = result.spectrum.diagnostics;
  std::printf("experiment=%s signal=%s method=%s\n", cfg.name.c_str(), cfg.signal.c_str(),
              lp::to_string(cfg.method).c_str());
  if (result.error) std::printf("aligned_error=%.6g\n", result.error->error);
  if (cfg.reference_error) std::printf("reference_error=%.6g\n", *cfg.reference_error);
  std::printf("residual=%.6g fit_residual=%.6g eigen_gap=%.6g rank=%zu\n", d.residual,
              d.fit_residual, d.eigen_gap, d.rank);
  if (d.clamp_warning) {
    std::printf("warning: clamped diagonal mass %.6g exceeds 1%% of the trace\n", d.clamped_mass);
  }
  if (print_timings) std::printf("timings=%s\n", lp::timings_json(result.timings).dump().c_str());
  std::printf("wrote %s\n", cfg.out_dir.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrogram phase retrieval by lifting and angular synchronization"};
  app.require_subcommand(1);

  Overrides sim_o;
  auto* sim = app.add_subcommand("simulate", "Simulate spectrogram measurements");
  add_common(sim, sim_o, true);

  Overrides rec_o;
  std::string measurement_path;
  auto* rec = app.add_subcommand("recover", "Recover a signal from a measurement file");
  rec->add_option("measurement", measurement_path, "Measurement JSON file")->required();
  add_common(rec, rec_o, false);
  rec->add_option("--rank-tol", rec_o.rank_tol, "Relative singular-value cutoff");
  rec->add_flag("--dump-system", rec_o.dump_system, "Write the lifted matrix to system.bin");

  Overrides exp_o;
  std::string exp_name;
  bool print_timings = false;
  auto* exp = app.add_subcommand("experiment", "Run a named end-to-end experiment");
  exp->add_option("name", exp_name, "paper-1 or paper-2")->required();
  add_common(exp, exp_o, true);
  exp->add_option("--rank-tol", exp_o.rank_tol, "Relative singular-value cutoff");
  exp->add_flag("--dump-system", exp_o.dump_system, "Write the lifted matrix to system.bin");
  exp->add_flag("--timings", print_timings, "Print per-stage wall-clock times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return cmd_simulate(sim_o);
    if (*rec) return cmd_recover(measurement_path, rec_o);
    if (*exp) return cmd_experiment(exp_name, exp_o, print_timings);
  } catch (const lp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const lp::GridError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const lp::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const lp::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kSchema;
  } catch (const lp::DimensionError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kSchema;
  } catch (const lp::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
