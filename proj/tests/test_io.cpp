#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "liftphase/errors.hpp"
#include "liftphase/experiment.hpp"
#include "liftphase/io.hpp"

using namespace liftphase;

namespace {

SpectrogramData sample_data() {
  SpectrogramData d;
  d.grid = half_step_grid(5, 3, 0.1, 2);
  d.method = MeasurementMethod::series;
  d.noise = NoiseSpec{7, 0.01};
  for (int i = 0; i < 15; ++i) d.b.push_back(1.0 / (3.0 + i) + 1e-17 * i);
  return d;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "liftphase_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("json") {
  TEST_CASE("measurement round trip is lossless") {
    const SpectrogramData d = sample_data();
    const SpectrogramData back = spectrogram_from_json(json::parse(to_json(d).dump()));
    CHECK(back.grid == d.grid);
    CHECK(back.method == d.method);
    CHECK(back.noise == d.noise);
    CHECK(back.b == d.b);
    CHECK(back.provenance == Provenance::file);
  }

  TEST_CASE("noise-free data serializes noise as null") {
    SpectrogramData d = sample_data();
    d.noise.reset();
    const json doc = to_json(d);
    CHECK(doc["noise"].is_null());
    CHECK_FALSE(spectrogram_from_json(doc).noise.has_value());
  }

  TEST_CASE("schema violations") {
    const json good = to_json(sample_data());
    json neg = good;
    neg["b"][2] = -1.0;
    CHECK_THROWS_AS(spectrogram_from_json(neg), SchemaError);
    json shortened = good;
    shortened["b"].erase(0);
    CHECK_THROWS_AS(spectrogram_from_json(shortened), SchemaError);
    json missing = good;
    missing.erase("grid");
    CHECK_THROWS_AS(spectrogram_from_json(missing), SchemaError);
    json typed = good;
    typed["b"][0] = "x";
    CHECK_THROWS_AS(spectrogram_from_json(typed), SchemaError);
    json method = good;
    method["method"] = "fft";
    CHECK_THROWS(spectrogram_from_json(method));
  }

  TEST_CASE("spectrum round trip") {
    RecoveredSpectrum s;
    s.frequencies = {-0.5, 0.0, 0.5};
    s.f_hat.resize(3);
    s.f_hat << cplx{0.1, -0.2}, cplx{1.0 / 3.0, 0.0}, cplx{-1e-300, 7.0};
    s.diagnostics.residual = 1.5e-8;
    s.diagnostics.eigen_gap = std::numeric_limits<double>::infinity();
    s.diagnostics.rank = 3;
    s.diagnostics.synchronized = true;
    const json doc = to_json(s);
    CHECK(doc["diagnostics"]["eigen_gap"].is_null());
    const RecoveredSpectrum back = spectrum_from_json(json::parse(doc.dump()));
    CHECK(back.frequencies == s.frequencies);
    CHECK(back.f_hat == s.f_hat);
    CHECK(back.diagnostics.rank == 3);
    CHECK(back.diagnostics.residual == s.diagnostics.residual);
  }

  TEST_CASE("files") {
    const auto path = scratch("m.json");
    write_json_file(path, to_json(sample_data()));
    CHECK(spectrogram_from_json(read_json_file(path)).b == sample_data().b);
    CHECK_THROWS_AS(read_json_file(scratch("missing.json")), IoError);
    const auto broken = scratch("broken.json");
    write_text_file(broken, "{not json");
    CHECK_THROWS_AS(read_json_file(broken), SchemaError);
    CHECK_THROWS_AS(write_json_file(scratch("no/such/dir/x.json"), json::object()), IoError);
  }
}

TEST_SUITE("experiment config") {
  TEST_CASE("presets") {
    const ExperimentConfig p1 = experiment_preset("paper-1");
    CHECK(p1.signal == "gaussian");
    CHECK(p1.grid.preset == "paper");
    CHECK(p1.method == MeasurementMethod::quadrature);
    CHECK(p1.reference_error == doctest::Approx(1.47e-3));
    CHECK(experiment_preset("paper-2").signal == "modulated");
    CHECK(experiment_preset("paper-2").reference_error == doctest::Approx(1.872e-2));
    CHECK_THROWS_AS(experiment_preset("paper-3"), ConfigError);
    CHECK(p1.grid.build() == paper_grid());
  }

  TEST_CASE("overlay and round trip") {
    const ExperimentConfig base = experiment_preset("paper-1");
    const json doc = {{"signal", "modulated"},
                      {"recovery", {{"rank_tol", 1e-6}}},
                      {"noise", {{"seed", 3}, {"level", 0.01}}}};
    const ExperimentConfig cfg = config_from_json(doc, base);
    CHECK(cfg.signal == "modulated");
    CHECK(cfg.recovery.rank_tol == 1e-6);
    CHECK(cfg.recovery.magnitude_floor == base.recovery.magnitude_floor);
    CHECK(cfg.noise == NoiseSpec{3, 0.01});
    CHECK(cfg.grid.delta == 7);

    const ExperimentConfig again = config_from_json(to_json(cfg));
    CHECK(to_json(again) == to_json(cfg));
  }

  TEST_CASE("experiment key loads the preset") {
    const ExperimentConfig cfg = config_from_json({{"experiment", "paper-2"}});
    CHECK(cfg.signal == "modulated");
    CHECK(cfg.name == "paper-2");
  }

  TEST_CASE("unknown keys and bad values") {
    CHECK_THROWS_AS(config_from_json({{"sigal", "gaussian"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"recovery", {{"rank_toll", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"method", 3}}), ConfigError);
    ExperimentConfig cfg;
    cfg.signal = "sawtooth";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.grid.preset = "custom";
    cfg.grid.num_frequencies = 20;
    CHECK_THROWS(cfg.validate());
  }

  TEST_CASE("zero noise normalizes away") {
    ExperimentConfig cfg = experiment_preset("paper-1");
    cfg.noise = NoiseSpec{5, 0.0};
    cfg.normalize();
    CHECK_FALSE(cfg.noise.has_value());
    CHECK(to_json(cfg) == to_json(experiment_preset("paper-1")));
  }
}
