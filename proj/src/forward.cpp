#include "liftphase/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "liftphase/errors.hpp"

namespace liftphase {

namespace {

constexpr double kShiftSlack = 1e-12;
constexpr double kLatticeSlack = 1e-9;

long nearest_twice_index(double omega) { return std::lround(2.0 * omega); }

bool is_half_integer(double omega) {
  return std::abs(2.0 * omega - static_cast<double>(nearest_twice_index(omega))) <= kLatticeSlack;
}

// Integers m with |m - 2 omega| <= 2 delta.
std::pair<long, long> truncation_range(double omega, int delta) {
  const double centre = 2.0 * omega;
  const double width = 2.0 * delta;
  const long lo = static_cast<long>(std::ceil(centre - width - kLatticeSlack));
  const long hi = static_cast<long>(std::floor(centre + width + kLatticeSlack));
  return {lo, hi};
}

void check_shift(const Window& g, double shift) {
  const double limit = 1.0 - g.half_width();
  if (!std::isfinite(shift) || std::abs(shift) > limit + kShiftSlack) {
    throw GridError("shift " + std::to_string(shift) + " outside [" + std::to_string(-limit) +
                    ", " + std::to_string(limit) + "]");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// MeasurementGrid

void MeasurementGrid::validate(double window_half_width) const {
  if (delta < 1) throw GridError("truncation radius delta must be >= 1");
  if (shifts.empty()) throw GridError("grid has no shifts");
  if (frequencies.empty()) throw GridError("grid has no frequencies");
  const double limit = 1.0 - window_half_width;
  for (double l : shifts) {
    if (!std::isfinite(l) || std::abs(l) > limit + kShiftSlack) {
      throw GridError("shift " + std::to_string(l) + " outside [" + std::to_string(-limit) +
                      ", " + std::to_string(limit) + "]");
    }
  }
  for (double w : frequencies) {
    if (!std::isfinite(w)) throw GridError("non-finite frequency");
  }
}

std::vector<long> MeasurementGrid::twice_indices() const {
  std::vector<long> out;
  out.reserve(frequencies.size());
  for (double w : frequencies) {
    if (!is_half_integer(w)) {
      throw GridError("frequency " + std::to_string(w) + " is not on the half-integer lattice");
    }
    out.push_back(nearest_twice_index(w));
  }
  return out;
}

bool MeasurementGrid::is_consecutive_half_steps() const {
  for (double w : frequencies) {
    if (!std::isfinite(w) || !is_half_integer(w)) return false;
  }
  for (std::size_t j = 1; j < frequencies.size(); ++j) {
    if (nearest_twice_index(frequencies[j]) != nearest_twice_index(frequencies[j - 1]) + 1) {
      return false;
    }
  }
  return !frequencies.empty();
}

long MeasurementGrid::half_range() const {
  const std::size_t n_freq = frequencies.size();
  if (n_freq % 4 != 1 || !is_consecutive_half_steps()) {
    throw GridError("frequencies are not the symmetric half-step grid {-n, ..., n}");
  }
  const long n = static_cast<long>((n_freq - 1) / 4);
  if (nearest_twice_index(frequencies.front()) != -2 * n) {
    throw GridError("frequencies are not the symmetric half-step grid {-n, ..., n}");
  }
  return n;
}

MeasurementGrid half_step_grid(std::size_t num_frequencies, std::size_t num_shifts,
                               double shift_spacing, int delta) {
  if (num_frequencies % 4 != 1) throw GridError("N must satisfy N = 1 (mod 4)");
  if (num_shifts == 0) throw GridError("grid has no shifts");
  MeasurementGrid grid;
  grid.delta = delta;
  const long n = static_cast<long>((num_frequencies - 1) / 4);
  for (std::size_t j = 1; j <= num_frequencies; ++j) {
    grid.frequencies.push_back(0.5 * static_cast<double>(static_cast<long>(j) - 2 * n - 1));
  }
  const double centre = 0.5 * static_cast<double>(num_shifts + 1);
  for (std::size_t k = 1; k <= num_shifts; ++k) {
    grid.shifts.push_back((static_cast<double>(k) - centre) * shift_spacing);
  }
  return grid;
}

MeasurementGrid paper_grid() { return half_step_grid(61, 11, 0.5 / 11.0, 7); }

std::string to_string(MeasurementMethod m) {
  return m == MeasurementMethod::quadrature ? "quadrature" : "series";
}

MeasurementMethod parse_method(std::string_view name) {
  if (name == "quadrature") return MeasurementMethod::quadrature;
  if (name == "series") return MeasurementMethod::series;
  throw ConfigError("unknown measurement method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// SpectrogramData

void SpectrogramData::validate() const {
  const std::size_t expected = grid.num_shifts() * grid.num_frequencies();
  if (b.size() != expected) {
    throw SchemaError("measurement vector has " + std::to_string(b.size()) +
                      " entries, expected N*K = " + std::to_string(expected));
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!std::isfinite(b[i]) || b[i] < 0.0) {
      throw SchemaError("measurement entry " + std::to_string(i) + " is negative or not finite");
    }
  }
}

// ---------------------------------------------------------------------------
// Spectrogram evaluation

double spectrogram_quadrature(const Signal& f, const Window& g, double shift, double omega) {
  check_shift(g, shift);
  const double lo = std::max(-1.0, shift - g.half_width());
  const double hi = std::min(1.0, shift + g.half_width());
  const auto integrand = [&](double t) {
    return f(t) * g(t - shift) * std::polar(1.0, -2.0 * kPi * omega * t);
  };
  const auto r = integrate_complex(integrand, {lo, hi, kFourierQuadratureTol, 4000});
  return std::norm(r.value);
}

double spectrogram_series(const FourierLattice& signal_lattice, const Window& g,
                          const FourierLattice* window_lattice, double shift, double omega,
                          int delta) {
  check_shift(g, shift);
  if (delta < 1) throw GridError("truncation radius delta must be >= 1");
  const auto [lo, hi] = truncation_range(omega, delta);
  const bool on_lattice = is_half_integer(omega);
  const long omega2 = nearest_twice_index(omega);
  cplx sum{};
  for (long m = lo; m <= hi; ++m) {
    cplx ghat;
    if (on_lattice && window_lattice != nullptr && window_lattice->contains(m - omega2)) {
      ghat = window_lattice->at(m - omega2);
    } else {
      ghat = g.fourier(0.5 * static_cast<double>(m) - omega);
    }
    sum += std::polar(1.0, -kPi * shift * static_cast<double>(m)) * signal_lattice.at(m) * ghat;
  }
  return 0.25 * std::norm(sum);
}

double spectrogram_series(const Signal& f, const Window& g, double shift, double omega,
                          int delta) {
  if (delta < 1) throw GridError("truncation radius delta must be >= 1");
  const auto [lo, hi] = truncation_range(omega, delta);
  const FourierLattice lattice = FourierLattice::of(f, lo, hi);
  return spectrogram_series(lattice, g, nullptr, shift, omega, delta);
}

void apply_noise(std::vector<double>& b, const NoiseSpec& noise) {
  if (!(noise.level >= 0.0) || !std::isfinite(noise.level)) {
    throw ConfigError("noise level must be finite and >= 0");
  }
  SplitMix64 rng(noise.seed);
  for (double& v : b) {
    const double eps = rng.uniform(-noise.level, noise.level);
    v = std::max(0.0, v * (1.0 + eps));
  }
}

SpectrogramData measure(const Signal& f, const Window& g, const MeasurementGrid& grid,
                        MeasurementMethod method, std::optional<NoiseSpec> noise) {
  grid.validate(g.half_width());
  const std::size_t n_freq = grid.num_frequencies();
  const std::size_t total = n_freq * grid.num_shifts();

  SpectrogramData data;
  data.grid = grid;
  data.method = method;
  data.provenance =
      method == MeasurementMethod::quadrature ? Provenance::quadrature : Provenance::series;
  data.b.assign(total, 0.0);

  // Lattice caches are filled before the fan-out and only read inside it.
  FourierLattice signal_lattice;
  std::optional<FourierLattice> window_lattice;
  if (method == MeasurementMethod::series) {
    long lo = std::numeric_limits<long>::max();
    long hi = std::numeric_limits<long>::min();
    for (double w : grid.frequencies) {
      const auto [a, b] = truncation_range(w, grid.delta);
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
    signal_lattice = FourierLattice::of(f, lo, hi);
    if (std::all_of(grid.frequencies.begin(), grid.frequencies.end(), is_half_integer)) {
      window_lattice = FourierLattice::of(g, -2L * grid.delta, 2L * grid.delta);
    }
  }

  parallel_for(total, [&](std::size_t idx) {
    const std::size_t k = idx / n_freq;
    const std::size_t j = idx % n_freq;
    try {
      if (method == MeasurementMethod::quadrature) {
        data.b[idx] = spectrogram_quadrature(f, g, grid.shifts[k], grid.frequencies[j]);
      } else {
        data.b[idx] = spectrogram_series(signal_lattice, g,
                                         window_lattice ? &*window_lattice : nullptr,
                                         grid.shifts[k], grid.frequencies[j], grid.delta);
      }
    } catch (const NonConvergence& e) {
      throw NonConvergence("measurement (k=" + std::to_string(k + 1) + ", j=" +
                           std::to_string(j + 1) + "): " + e.what());
    }
  });

  if (noise && noise->level > 0.0) {
    apply_noise(data.b, *noise);
    data.noise = noise;
  }
  return data;
}

double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("relative_l2: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

}  // namespace liftphase
