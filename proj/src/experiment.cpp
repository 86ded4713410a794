#include "liftphase/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "liftphase/errors.hpp"
#include "liftphase/lifting.hpp"

namespace liftphase {

// ---------------------------------------------------------------------------
// Configuration

MeasurementGrid GridSpec::build() const {
  if (preset == "paper") {
    MeasurementGrid g = paper_grid();
    g.delta = delta;
    return g;
  }
  if (!preset.empty() && preset != "custom") {
    throw ConfigError("unknown grid preset '" + preset + "'");
  }
  try {
    return half_step_grid(num_frequencies, num_shifts, shift_spacing, delta);
  } catch (const GridError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<double> PointsSpec::build() const {
  std::vector<double> x(count);
  for (std::size_t p = 0; p < count; ++p) x[p] = start + static_cast<double>(p) * spacing;
  return x;
}

void ExperimentConfig::validate() const {
  make_signal(signal);
  const Window g = make_window(window);
  try {
    grid.build().validate(g.half_width());
  } catch (const GridError& e) {
    throw ConfigError(e.what());
  }
  recovery.validate();
  if (noise && !(noise->level >= 0.0 && std::isfinite(noise->level))) {
    throw ConfigError("noise level must be finite and >= 0");
  }
  const auto x = points.build();
  if (x.size() < 2 || !(points.spacing > 0.0) || x.front() < -1.0 || x.back() > 1.0) {
    throw ConfigError("reconstruction points must be >= 2 increasing values in [-1, 1]");
  }
}

void ExperimentConfig::normalize() {
  if (noise && noise->level == 0.0) noise.reset();
}

std::vector<std::string> experiment_names() { return {"paper-1", "paper-2"}; }

ExperimentConfig experiment_preset(std::string_view name) {
  ExperimentConfig cfg;
  cfg.name = std::string(name);
  cfg.out_dir = std::string(name);
  if (name == "paper-1") {
    cfg.signal = "gaussian";
    cfg.reference_error = 1.47e-3;
  } else if (name == "paper-2") {
    cfg.signal = "modulated";
    cfg.reference_error = 1.872e-2;
  } else {
    throw ConfigError("unknown experiment '" + std::string(name) + "' (expected paper-1 or paper-2)");
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json noise = nullptr;
  if (cfg.noise) noise = {{"seed", cfg.noise->seed}, {"level", cfg.noise->level}};
  return {{"name", cfg.name},
          {"signal", cfg.signal},
          {"window", cfg.window},
          {"grid",
           {{"preset", cfg.grid.preset},
            {"num_frequencies", cfg.grid.num_frequencies},
            {"num_shifts", cfg.grid.num_shifts},
            {"shift_spacing", cfg.grid.shift_spacing},
            {"delta", cfg.grid.delta}}},
          {"method", to_string(cfg.method)},
          {"noise", noise},
          {"recovery",
           {{"rank_tol", cfg.recovery.rank_tol},
            {"magnitude_floor", cfg.recovery.magnitude_floor},
            {"power_tol", cfg.recovery.power_tol},
            {"max_iters", cfg.recovery.max_iters},
            {"seed", cfg.recovery.seed}}},
          {"points",
           {{"count", cfg.points.count},
            {"start", cfg.points.start},
            {"spacing", cfg.points.spacing}}},
          {"output", {{"dir", cfg.out_dir.string()}, {"dump_system", cfg.dump_system}}},
          {"reference_error", cfg.reference_error ? json(*cfg.reference_error) : json(nullptr)}};
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void overlay(const json& obj, const char* key, T& target) {
  const auto it = obj.find(key);
  if (it != obj.end()) target = it->template get<T>();
}

ExperimentConfig parse_config(const json& doc, ExperimentConfig cfg) {
  reject_unknown(doc,
                 {"name", "experiment", "signal", "window", "grid", "method", "noise", "recovery",
                  "points", "output", "reference_error"},
                 "config");
  // A named experiment supplies the defaults the remaining keys override.
  if (doc.contains("experiment")) {
    cfg = experiment_preset(doc.at("experiment").get<std::string>());
  }
  overlay(doc, "name", cfg.name);
  overlay(doc, "signal", cfg.signal);
  overlay(doc, "window", cfg.window);
  if (doc.contains("method")) cfg.method = parse_method(doc.at("method").get<std::string>());
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    if (g.is_string()) {
      cfg.grid.preset = g.get<std::string>();
    } else {
      reject_unknown(g, {"preset", "num_frequencies", "num_shifts", "shift_spacing", "delta"},
                     "grid");
      cfg.grid.preset = g.contains("preset") ? g.at("preset").get<std::string>() : "custom";
      overlay(g, "num_frequencies", cfg.grid.num_frequencies);
      overlay(g, "num_shifts", cfg.grid.num_shifts);
      overlay(g, "shift_spacing", cfg.grid.shift_spacing);
      overlay(g, "delta", cfg.grid.delta);
    }
  }
  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    if (n.is_null()) {
      cfg.noise.reset();
    } else {
      reject_unknown(n, {"seed", "level"}, "noise");
      NoiseSpec spec = cfg.noise.value_or(NoiseSpec{});
      overlay(n, "seed", spec.seed);
      overlay(n, "level", spec.level);
      cfg.noise = spec;
    }
  }
  if (doc.contains("recovery")) {
    const json& r = doc.at("recovery");
    reject_unknown(r, {"rank_tol", "magnitude_floor", "power_tol", "max_iters", "seed"},
                   "recovery");
    overlay(r, "rank_tol", cfg.recovery.rank_tol);
    overlay(r, "magnitude_floor", cfg.recovery.magnitude_floor);
    overlay(r, "power_tol", cfg.recovery.power_tol);
    overlay(r, "max_iters", cfg.recovery.max_iters);
    overlay(r, "seed", cfg.recovery.seed);
  }
  if (doc.contains("points")) {
    const json& p = doc.at("points");
    reject_unknown(p, {"count", "start", "spacing"}, "points");
    overlay(p, "count", cfg.points.count);
    overlay(p, "start", cfg.points.start);
    overlay(p, "spacing", cfg.points.spacing);
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, {"dir", "dump_system"}, "output");
    if (o.contains("dir")) cfg.out_dir = o.at("dir").get<std::string>();
    overlay(o, "dump_system", cfg.dump_system);
  }
  if (doc.contains("reference_error")) {
    const json& r = doc.at("reference_error");
    cfg.reference_error = r.is_null() ? std::nullopt : std::optional<double>(r.get<double>());
  }
  cfg.normalize();
  return cfg;
}

}  // namespace

ExperimentConfig config_from_json(const json& doc, ExperimentConfig base) {
  try {
    return parse_config(doc, std::move(base));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point& mark) {
  const auto now = Clock::now();
  const double s = std::chrono::duration<double>(now - mark).count();
  mark = now;
  return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Signal f = make_signal(cfg.signal);
  const Window g = make_window(cfg.window);
  const MeasurementGrid grid = cfg.grid.build();

  ExperimentResult out;
  const auto start = Clock::now();
  auto mark = start;

  out.measurement = measure(f, g, grid, cfg.method, cfg.noise);
  out.timings.measure = seconds_since(mark);

  if (std::any_of(out.measurement.b.begin(), out.measurement.b.end(),
                  [](double v) { return v != 0.0; })) {
    factorize(g, grid);
  }
  out.timings.factorize = seconds_since(mark);

  out.spectrum = recover(out.measurement, g, grid, cfg.recovery);
  out.timings.solve = seconds_since(mark);

  const auto points = cfg.points.build();
  out.reconstruction = synthesize(out.spectrum, points);
  try {
    out.error = aligned_relative_error(out.reconstruction, f);
    out.spectrum_error = aligned_vector_error(fourier_samples(f, grid.frequencies), out.spectrum.f_hat);
  } catch (const ZeroSignal&) {
    out.error.reset();
    out.spectrum_error.reset();
  }
  out.timings.synthesize = seconds_since(mark);
  out.timings.total = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

json metrics_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  const auto& d = result.spectrum.diagnostics;
  const auto& b = result.measurement.b;
  const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"experiment", cfg.name},
          {"signal", cfg.signal},
          {"window", cfg.window},
          {"method", to_string(cfg.method)},
          {"N", result.measurement.grid.num_frequencies()},
          {"K", result.measurement.grid.num_shifts()},
          {"delta", result.measurement.grid.delta},
          {"measurement_min", *lo},
          {"measurement_max", *hi},
          {"aligned_error", result.error ? json(result.error->error) : json(nullptr)},
          {"alignment_phase", result.error ? json(result.error->theta) : json(nullptr)},
          {"spectrum_error", opt(result.spectrum_error)},
          {"reference_error", opt(cfg.reference_error)},
          {"residual", d.residual},
          {"fit_residual", d.fit_residual},
          {"eigen_gap", std::isfinite(d.eigen_gap) ? json(d.eigen_gap) : json(nullptr)},
          {"rank", d.rank},
          {"clamped_mass", d.clamped_mass},
          {"clamp_warning", d.clamp_warning},
          {"synchronized", d.synchronized},
          {"power_iterations", d.power_iterations}};
}

json timings_json(const StageTimings& t) {
  return {{"measure_s", t.measure},
          {"factorize_s", t.factorize},
          {"solve_s", t.solve},
          {"synthesize_s", t.synthesize},
          {"total_s", t.total}};
}

void write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create '" + cfg.out_dir.string() + "': " + ec.message());
  const auto& dir = cfg.out_dir;
  // The output directory is left out so runs into different directories
  // produce identical files.
  json echoed = to_json(cfg);
  echoed["output"].erase("dir");
  write_json_file(dir / "config.json", echoed);
  write_json_file(dir / "measurement.json", to_json(result.measurement));
  write_json_file(dir / "spectrum.json", to_json(result.spectrum));
  std::ostringstream csv;
  write_reconstruction_csv(csv, result.reconstruction, make_signal(cfg.signal));
  write_text_file(dir / "reconstruction.csv", csv.str());
  write_json_file(dir / "metrics.json", metrics_json(cfg, result));
  if (cfg.dump_system) {
    const auto sys = factorize(make_window(cfg.window), cfg.grid.build());
    std::ofstream bin(dir / "system.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw IoError("cannot open system.bin for writing");
    write_system_dump(bin, sys->system(), sys->system().materialize());
  }
}

}  // namespace liftphase
