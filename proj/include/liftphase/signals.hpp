#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "liftphase/kernels.hpp"

namespace liftphase {

using ComplexFunction = std::function<cplx(double)>;

/// Absolute tolerance for the Fourier-transform quadratures of signals and
/// windows. Tighter than the kernel default because spectrogram values are
/// compared at relative 1e-6 down to magnitudes near 1e-12.
inline constexpr double kFourierQuadratureTol = 1e-13;

/// A function supported in [-1, 1] with evaluation and Fourier-transform
/// evaluation, f^(xi) = int f(t) exp(-2 pi i xi t) dt.
///
/// The Fourier transform is computed by quadrature over [-1, 1] unless a
/// closed form is supplied at construction.
class Signal {
 public:
  Signal(std::string name, ComplexFunction evaluator,
         std::optional<ComplexFunction> closed_form_fourier = std::nullopt);

  const std::string& name() const { return name_; }

  /// f(t), zero for |t| > 1.
  cplx operator()(double t) const;
  cplx fourier(double xi) const;
  cplx fourier_quadrature(double xi) const;
  bool has_closed_form() const { return closed_form_.has_value(); }

  /// e^{i theta} f.
  Signal rotated(double theta) const;

 private:
  std::string name_;
  ComplexFunction evaluator_;
  std::optional<ComplexFunction> closed_form_;
};

/// Window g supported in [-a, a] with a < 1, normalized to unit L2 norm.
class Window {
 public:
  /// `shape` is the unnormalized profile; the normalization constant c is
  /// computed by quadrature of |shape|^2 over [-a, a].
  Window(std::string name, double half_width, ComplexFunction shape);

  const std::string& name() const { return name_; }
  double half_width() const { return half_width_; }
  double normalization() const { return normalization_; }

  cplx operator()(double t) const;
  cplx fourier(double xi) const;

 private:
  std::string name_;
  double half_width_;
  ComplexFunction shape_;
  double normalization_ = 1.0;
};

/// f(x) = 2^{1/4} exp(-25 (4x/3)^2) on [-1, 1].
Signal gaussian_specimen();
/// f(x) = 2^{1/4} exp(-8 pi x^2) cos(24 x) on [-1, 1].
Signal modulated_specimen();
Signal zero_signal();
/// g(x) = c 2^{1/4} exp(-16 pi x^2) on [-1/2, 1/2].
Window gaussian_window();

/// Registry lookups; ConfigError for unknown names.
Signal make_signal(std::string_view name);
Window make_window(std::string_view name);
std::vector<std::string> signal_names();
std::vector<std::string> window_names();

/// f^(omega_j) for each frequency.
ComplexVector fourier_samples(const Signal& s, std::span<const double> frequencies);

/// Fourier values on the half-integer lattice xi = m/2 for twice-indices
/// m in [lo, hi], evaluated once and then read-only.
class FourierLattice {
 public:
  FourierLattice() = default;
  FourierLattice(long lo, long hi, const ComplexFunction& transform);

  static FourierLattice of(const Signal& s, long lo, long hi);
  static FourierLattice of(const Window& g, long lo, long hi);

  long lo() const { return lo_; }
  long hi() const { return hi_; }
  bool contains(long m) const { return m >= lo_ && m <= hi_; }
  /// Value at xi = m/2. Throws std::out_of_range outside [lo, hi].
  cplx at(long m) const;

 private:
  long lo_ = 0;
  long hi_ = -1;
  std::vector<cplx> values_;
};

}  // namespace liftphase
