#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "liftphase/forward.hpp"
#include "liftphase/recovery.hpp"

namespace liftphase {

using nlohmann::json;

/// {grid: {shifts, frequencies, delta}, method, noise: {seed, level} | null, b}
json to_json(const SpectrogramData& data);
/// SchemaError on missing or mistyped fields, a length other than N*K, or
/// negative entries. The loaded data has provenance `file`.
SpectrogramData spectrogram_from_json(const json& doc);

json to_json(const MeasurementGrid& grid);
MeasurementGrid grid_from_json(const json& doc);

/// {frequencies, f_hat: [[re, im]], diagnostics: {...}}; non-finite
/// diagnostics are written as null.
json to_json(const RecoveredSpectrum& spectrum);
RecoveredSpectrum spectrum_from_json(const json& doc);

/// IoError if the file cannot be read; SchemaError if it is not JSON.
json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline. IoError on failure.
void write_json_file(const std::filesystem::path& path, const json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace liftphase
