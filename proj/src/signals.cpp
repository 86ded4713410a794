#include "liftphase/signals.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "liftphase/errors.hpp"

namespace liftphase {

namespace {

constexpr std::size_t kFourierPanels = 4000;

cplx fourier_by_quadrature(const ComplexFunction& f, double lo, double hi, double xi) {
  const auto integrand = [&](double t) {
    return f(t) * std::polar(1.0, -2.0 * kPi * xi * t);
  };
  return integrate_complex(integrand, {lo, hi, kFourierQuadratureTol, kFourierPanels}).value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Signal

Signal::Signal(std::string name, ComplexFunction evaluator,
               std::optional<ComplexFunction> closed_form_fourier)
    : name_(std::move(name)),
      evaluator_(std::move(evaluator)),
      closed_form_(std::move(closed_form_fourier)) {}

cplx Signal::operator()(double t) const {
  if (std::abs(t) > 1.0) return {};
  return evaluator_(t);
}

cplx Signal::fourier(double xi) const {
  return closed_form_ ? (*closed_form_)(xi) : fourier_quadrature(xi);
}

cplx Signal::fourier_quadrature(double xi) const {
  return fourier_by_quadrature([this](double t) { return (*this)(t); }, -1.0, 1.0, xi);
}

Signal Signal::rotated(double theta) const {
  const cplx phase = std::polar(1.0, theta);
  std::optional<ComplexFunction> closed;
  if (closed_form_) {
    closed = [phase, cf = *closed_form_](double xi) { return phase * cf(xi); };
  }
  return Signal(name_, [phase, ev = evaluator_](double t) { return phase * ev(t); },
                std::move(closed));
}

// ---------------------------------------------------------------------------
// Window

Window::Window(std::string name, double half_width, ComplexFunction shape)
    : name_(std::move(name)), half_width_(half_width), shape_(std::move(shape)) {
  if (!(half_width_ > 0.0 && half_width_ < 1.0)) {
    throw std::invalid_argument("window half-width must lie in (0, 1)");
  }
  const auto energy = integrate_complex(
      [this](double t) { return cplx{std::norm(shape_(t)), 0.0}; },
      {-half_width_, half_width_, 1e-14, kFourierPanels});
  if (!(energy.value.real() > 0.0)) throw std::invalid_argument("window has zero energy");
  normalization_ = 1.0 / std::sqrt(energy.value.real());
}

cplx Window::operator()(double t) const {
  if (std::abs(t) > half_width_) return {};
  return normalization_ * shape_(t);
}

cplx Window::fourier(double xi) const {
  return fourier_by_quadrature([this](double t) { return (*this)(t); }, -half_width_,
                               half_width_, xi);
}

// ---------------------------------------------------------------------------
// Catalog

namespace {
constexpr double kFourthRootTwo = 1.18920711500272106671749997056;  // 2^{1/4}
}

Signal gaussian_specimen() {
  return Signal("gaussian", [](double x) {
    const double s = 4.0 * x / 3.0;
    return cplx{kFourthRootTwo * std::exp(-25.0 * s * s), 0.0};
  });
}

Signal modulated_specimen() {
  return Signal("modulated", [](double x) {
    return cplx{kFourthRootTwo * std::exp(-8.0 * kPi * x * x) * std::cos(24.0 * x), 0.0};
  });
}

Signal zero_signal() {
  return Signal("zero", [](double) { return cplx{}; }, [](double) { return cplx{}; });
}

Window gaussian_window() {
  return Window("gaussian", 0.5, [](double x) {
    return cplx{kFourthRootTwo * std::exp(-16.0 * kPi * x * x), 0.0};
  });
}

Signal make_signal(std::string_view name) {
  if (name == "gaussian") return gaussian_specimen();
  if (name == "modulated") return modulated_specimen();
  if (name == "zero") return zero_signal();
  throw ConfigError("unknown signal '" + std::string(name) + "'");
}

Window make_window(std::string_view name) {
  if (name == "gaussian") return gaussian_window();
  throw ConfigError("unknown window '" + std::string(name) + "'");
}

std::vector<std::string> signal_names() { return {"gaussian", "modulated", "zero"}; }
std::vector<std::string> window_names() { return {"gaussian"}; }

ComplexVector fourier_samples(const Signal& s, std::span<const double> frequencies) {
  ComplexVector out(static_cast<Eigen::Index>(frequencies.size()));
  for (double w : frequencies) {
    if (!std::isfinite(w)) throw std::invalid_argument("fourier_samples: non-finite frequency");
  }
  parallel_for(frequencies.size(), [&](std::size_t j) {
    out[static_cast<Eigen::Index>(j)] = s.fourier(frequencies[j]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// FourierLattice

FourierLattice::FourierLattice(long lo, long hi, const ComplexFunction& transform)
    : lo_(lo), hi_(hi) {
  if (hi < lo) throw std::invalid_argument("FourierLattice: empty index range");
  values_.resize(static_cast<std::size_t>(hi - lo + 1));
  parallel_for(values_.size(), [&](std::size_t k) {
    values_[k] = transform(0.5 * static_cast<double>(lo + static_cast<long>(k)));
  });
}

FourierLattice FourierLattice::of(const Signal& s, long lo, long hi) {
  return FourierLattice(lo, hi, [&s](double xi) { return s.fourier(xi); });
}

FourierLattice FourierLattice::of(const Window& g, long lo, long hi) {
  return FourierLattice(lo, hi, [&g](double xi) { return g.fourier(xi); });
}

cplx FourierLattice::at(long m) const {
  if (!contains(m)) {
    throw std::out_of_range("FourierLattice: twice-index " + std::to_string(m) +
                            " outside [" + std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
  }
  return values_[static_cast<std::size_t>(m - lo_)];
}

}  // namespace liftphase
