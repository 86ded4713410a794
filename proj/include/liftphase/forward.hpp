#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "liftphase/signals.hpp"

namespace liftphase {

/// Shifts l_1..l_K, frequencies omega_1..omega_N and truncation radius delta.
struct MeasurementGrid {
  std::vector<double> shifts;
  std::vector<double> frequencies;
  int delta = 7;

  std::size_t num_shifts() const { return shifts.size(); }
  std::size_t num_frequencies() const { return frequencies.size(); }

  /// Throws GridError unless delta >= 1, both lists are non-empty and
  /// finite, and every shift lies in [a-1, 1-a] for the window half-width a.
  void validate(double window_half_width) const;

  /// 2*omega_j as integers; GridError if some frequency is not a multiple
  /// of 1/2.
  std::vector<long> twice_indices() const;
  /// True when frequencies step by exactly 1/2 from omega_1 upward.
  bool is_consecutive_half_steps() const;
  /// n = (N-1)/4 for the symmetric half-step grid {-n, ..., n}; GridError
  /// if the frequencies are not that grid.
  long half_range() const;

  bool operator==(const MeasurementGrid&) const = default;
};

/// Symmetric half-step grid: N = 4n + 1 frequencies (j - 2n - 1)/2 and K
/// shifts spaced `shift_spacing` apart, centered at 0.
MeasurementGrid half_step_grid(std::size_t num_frequencies, std::size_t num_shifts,
                               double shift_spacing, int delta);

/// 61 frequencies in [-15, 15], 11 shifts spaced 0.5/11, delta = 7.
MeasurementGrid paper_grid();

enum class MeasurementMethod { quadrature, series };
enum class Provenance { quadrature, series, file };

std::string to_string(MeasurementMethod m);
MeasurementMethod parse_method(std::string_view name);

struct NoiseSpec {
  std::uint64_t seed = 0;
  double level = 0.0;  // relative half-width of the uniform perturbation
  bool operator==(const NoiseSpec&) const = default;
};

/// Stacked spectrogram b = (b_{1,1}, ..., b_{1,N}, b_{2,1}, ..., b_{K,N}).
struct SpectrogramData {
  MeasurementGrid grid;
  MeasurementMethod method = MeasurementMethod::quadrature;
  Provenance provenance = Provenance::quadrature;
  std::optional<NoiseSpec> noise;
  std::vector<double> b;

  /// Entry for shift k and frequency j (both zero-based).
  double at(std::size_t k, std::size_t j) const { return b[k * grid.num_frequencies() + j]; }
  /// SchemaError unless length is N*K and all entries are finite and >= 0.
  void validate() const;
};

/// |int f(t) g(t - l) exp(-2 pi i omega t) dt|^2 by adaptive quadrature over
/// the intersection of the supports.
double spectrogram_quadrature(const Signal& f, const Window& g, double shift, double omega);

/// 1/4 |sum_m exp(-pi i l m) f^(m/2) g^(m/2 - omega)|^2 over the integers m
/// with |m - 2 omega| <= 2 delta.
double spectrogram_series(const Signal& f, const Window& g, double shift, double omega,
                          int delta);

/// Same sum with f^ read from a precomputed lattice. g^ is read from
/// `window_lattice` when m - 2 omega is an integer inside it, and evaluated
/// directly otherwise.
double spectrogram_series(const FourierLattice& signal_lattice, const Window& g,
                          const FourierLattice* window_lattice, double shift, double omega,
                          int delta);

/// Measures every (shift, frequency) pair and stacks the result. With
/// `noise`, entry e becomes max(0, e (1 + eps)) with eps uniform in
/// [-level, level]; a zero level is treated as no noise.
SpectrogramData measure(const Signal& f, const Window& g, const MeasurementGrid& grid,
                        MeasurementMethod method,
                        std::optional<NoiseSpec> noise = std::nullopt);

/// Multiplicative uniform noise as used by measure(), applied in flat order.
void apply_noise(std::vector<double>& b, const NoiseSpec& noise);

/// ||a - b|| / ||b||; 0 when both are zero.
double relative_l2(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace liftphase
