#include "liftphase/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "liftphase/errors.hpp"

namespace liftphase {

namespace {

const json& require(const json& doc, const char* key) {
  if (!doc.is_object()) throw SchemaError("expected a JSON object");
  const auto it = doc.find(key);
  if (it == doc.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

double as_real(const json& v, const char* what) {
  if (!v.is_number()) throw SchemaError(std::string(what) + " must be a number");
  return v.get<double>();
}

std::vector<double> real_array(const json& v, const char* what) {
  if (!v.is_array()) throw SchemaError(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_real(e, what));
  return out;
}

// Type errors raised by the json library surface as SchemaError.
template <class Fn>
auto schema_guard(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const MeasurementGrid& grid) {
  return {{"shifts", grid.shifts}, {"frequencies", grid.frequencies}, {"delta", grid.delta}};
}

MeasurementGrid grid_from_json(const json& doc) {
  MeasurementGrid grid;
  grid.shifts = real_array(require(doc, "shifts"), "grid.shifts");
  grid.frequencies = real_array(require(doc, "frequencies"), "grid.frequencies");
  const json& delta = require(doc, "delta");
  if (!delta.is_number_integer()) throw SchemaError("grid.delta must be an integer");
  grid.delta = delta.get<int>();
  return grid;
}

json to_json(const SpectrogramData& data) {
  json noise = nullptr;
  if (data.noise) noise = {{"seed", data.noise->seed}, {"level", data.noise->level}};
  return {{"grid", to_json(data.grid)},
          {"method", to_string(data.method)},
          {"noise", noise},
          {"b", data.b}};
}

namespace {

SpectrogramData parse_spectrogram(const json& doc) {
  SpectrogramData data;
  data.grid = grid_from_json(require(doc, "grid"));
  const json& method = require(doc, "method");
  if (!method.is_string()) throw SchemaError("method must be a string");
  try {
    data.method = parse_method(method.get<std::string>());
  } catch (const ConfigError& e) {
    throw SchemaError(e.what());
  }
  data.provenance = Provenance::file;
  const json& noise = require(doc, "noise");
  if (!noise.is_null()) {
    const json& seed = require(noise, "seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      throw SchemaError("noise.seed must be a non-negative integer");
    }
    data.noise = NoiseSpec{seed.get<std::uint64_t>(), as_real(require(noise, "level"), "noise.level")};
  }
  data.b = real_array(require(doc, "b"), "b");
  data.validate();
  return data;
}

}  // namespace

SpectrogramData spectrogram_from_json(const json& doc) {
  return schema_guard([&] { return parse_spectrogram(doc); });
}

json to_json(const RecoveredSpectrum& spectrum) {
  json f_hat = json::array();
  for (Eigen::Index j = 0; j < spectrum.f_hat.size(); ++j) {
    f_hat.push_back({spectrum.f_hat[j].real(), spectrum.f_hat[j].imag()});
  }
  const auto& d = spectrum.diagnostics;
  return {{"frequencies", spectrum.frequencies},
          {"f_hat", f_hat},
          {"diagnostics",
           {{"residual", finite_or_null(d.residual)},
            {"fit_residual", finite_or_null(d.fit_residual)},
            {"eigen_gap", finite_or_null(d.eigen_gap)},
            {"rank", d.rank},
            {"clamped_mass", d.clamped_mass},
            {"clamp_warning", d.clamp_warning},
            {"synchronized", d.synchronized},
            {"power_iterations", d.power_iterations}}}};
}

namespace {

RecoveredSpectrum parse_spectrum(const json& doc) {
  RecoveredSpectrum out;
  out.frequencies = real_array(require(doc, "frequencies"), "frequencies");
  const json& f_hat = require(doc, "f_hat");
  if (!f_hat.is_array() || f_hat.size() != out.frequencies.size()) {
    throw SchemaError("f_hat must be an array matching frequencies");
  }
  out.f_hat.resize(static_cast<Eigen::Index>(f_hat.size()));
  for (std::size_t j = 0; j < f_hat.size(); ++j) {
    const json& pair = f_hat[j];
    if (!pair.is_array() || pair.size() != 2) throw SchemaError("f_hat entries must be [re, im]");
    out.f_hat[static_cast<Eigen::Index>(j)] = {as_real(pair[0], "f_hat"), as_real(pair[1], "f_hat")};
  }
  const json& d = require(doc, "diagnostics");
  const auto real_or_nan = [](const json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : as_real(v, "diagnostic");
  };
  out.diagnostics.residual = real_or_nan(require(d, "residual"));
  out.diagnostics.fit_residual =
      d.contains("fit_residual") ? real_or_nan(d["fit_residual"]) : out.diagnostics.residual;
  out.diagnostics.eigen_gap = real_or_nan(require(d, "eigen_gap"));
  out.diagnostics.rank = require(d, "rank").get<std::size_t>();
  out.diagnostics.clamped_mass = d.value("clamped_mass", 0.0);
  out.diagnostics.clamp_warning = d.value("clamp_warning", false);
  out.diagnostics.synchronized = d.value("synchronized", false);
  out.diagnostics.power_iterations = d.value("power_iterations", std::size_t{0});
  return out;
}

}  // namespace

RecoveredSpectrum spectrum_from_json(const json& doc) {
  return schema_guard([&] { return parse_spectrum(doc); });
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace liftphase
