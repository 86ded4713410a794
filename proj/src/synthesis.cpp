#include "liftphase/synthesis.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "liftphase/errors.hpp"

namespace liftphase {

namespace {

void check_points(std::span<const double> points) {
  if (points.size() < 2) throw GridError("reconstruction needs at least two points");
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (!std::isfinite(points[p]) || std::abs(points[p]) > 1.0) {
      throw GridError("reconstruction point " + std::to_string(points[p]) +
                      " lies outside [-1, 1]");
    }
    if (p > 0 && !(points[p] > points[p - 1])) {
      throw GridError("reconstruction points must be strictly increasing");
    }
  }
}

void check_lattice(std::span<const double> frequencies) {
  MeasurementGrid probe;
  probe.frequencies.assign(frequencies.begin(), frequencies.end());
  if (!probe.is_consecutive_half_steps()) {
    throw GridError("spectrum frequencies are not a half-integer lattice segment");
  }
}

}  // namespace

PhysicalReconstruction synthesize(std::span<const double> frequencies, const ComplexVector& f_hat,
                                  std::span<const double> points) {
  if (static_cast<std::size_t>(f_hat.size()) != frequencies.size()) {
    throw DimensionError("spectrum and frequency list differ in length");
  }
  check_lattice(frequencies);
  check_points(points);
  PhysicalReconstruction out;
  out.points.assign(points.begin(), points.end());
  out.values.assign(points.size(), cplx{});
  parallel_for(points.size(), [&](std::size_t p) {
    cplx s{};
    for (std::size_t j = 0; j < frequencies.size(); ++j) {
      s += f_hat[static_cast<Eigen::Index>(j)] * std::polar(1.0, 2.0 * kPi * frequencies[j] * points[p]);
    }
    out.values[p] = 0.5 * s;
  });
  return out;
}

PhysicalReconstruction synthesize(const RecoveredSpectrum& spectrum,
                                  std::span<const double> points) {
  return synthesize(spectrum.frequencies, spectrum.f_hat, points);
}

std::vector<double> default_reconstruction_points() {
  std::vector<double> x(82);
  for (std::size_t p = 0; p < x.size(); ++p) x[p] = -1.0 + static_cast<double>(p) / 40.96;
  return x;
}

std::vector<cplx> sample(const Signal& f, std::span<const double> points) {
  std::vector<cplx> out;
  out.reserve(points.size());
  for (double x : points) out.push_back(f(x));
  return out;
}

AlignedError aligned_relative_error(const PhysicalReconstruction& rec,
                                    std::span<const cplx> truth_values) {
  if (truth_values.size() != rec.values.size()) {
    throw DimensionError("aligned error: sample counts differ");
  }
  double truth_sq = 0.0;
  cplx inner{};
  for (std::size_t p = 0; p < rec.values.size(); ++p) {
    truth_sq += std::norm(truth_values[p]);
    inner += std::conj(rec.values[p]) * truth_values[p];
  }
  if (!(truth_sq > 0.0)) throw ZeroSignal("reference signal vanishes on the reconstruction grid");
  AlignedError out;
  out.theta = std::arg(inner);
  const cplx phase = std::polar(1.0, out.theta);
  double err_sq = 0.0;
  for (std::size_t p = 0; p < rec.values.size(); ++p) {
    err_sq += std::norm(truth_values[p] - phase * rec.values[p]);
  }
  out.error = std::sqrt(err_sq / truth_sq);
  return out;
}

AlignedError aligned_relative_error(const PhysicalReconstruction& rec, const Signal& truth) {
  const auto values = sample(truth, rec.points);
  return aligned_relative_error(rec, values);
}

void write_reconstruction_csv(std::ostream& out, const PhysicalReconstruction& rec,
                              const Signal& truth) {
  const auto truth_values = sample(truth, rec.points);
  double theta = 0.0;
  try {
    theta = aligned_relative_error(rec, truth_values).theta;
  } catch (const ZeroSignal&) {
    theta = 0.0;
  }
  const cplx phase = std::polar(1.0, theta);
  out << "x,f_true_re,f_true_im,f_rec_re,f_rec_im\n";
  char line[160];
  for (std::size_t p = 0; p < rec.points.size(); ++p) {
    const cplx v = phase * rec.values[p];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", rec.points[p],
                  truth_values[p].real(), truth_values[p].imag(), v.real(), v.imag());
    out << line;
  }
  if (!out) throw IoError("failed writing reconstruction CSV");
}

}  // namespace liftphase
