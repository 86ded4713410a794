#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "liftphase/kernels.hpp"
#include "liftphase/recovery.hpp"
#include "liftphase/signals.hpp"

namespace liftphase {

/// Samples of a reconstructed signal on increasing points in [-1, 1].
struct PhysicalReconstruction {
  std::vector<double> points;
  std::vector<cplx> values;
};

/// f_rec(x) = 1/2 sum_j f^(omega_j) exp(2 pi i omega_j x), the period-2
/// Fourier series whose coefficients are the half-integer samples. GridError
/// unless the frequencies are consecutive half steps and the points are
/// strictly increasing in [-1, 1] with at least two of them.
PhysicalReconstruction synthesize(std::span<const double> frequencies, const ComplexVector& f_hat,
                                  std::span<const double> points);
PhysicalReconstruction synthesize(const RecoveredSpectrum& spectrum,
                                  std::span<const double> points);

/// 82 points x_p = -1 + p / 40.96, p = 0..81.
std::vector<double> default_reconstruction_points();

/// Samples of f at the given points.
std::vector<cplx> sample(const Signal& f, std::span<const double> points);

struct AlignedError {
  double error = 0.0;
  /// theta* = arg(sum_p conj(f_rec(x_p)) f_true(x_p)); e^{i theta*} f_rec is
  /// the aligned reconstruction.
  double theta = 0.0;
};

/// min over theta of ||f_true - e^{i theta} f_rec|| / ||f_true|| on the
/// reconstruction points. ZeroSignal if f_true vanishes there.
AlignedError aligned_relative_error(const PhysicalReconstruction& rec, const Signal& truth);
AlignedError aligned_relative_error(const PhysicalReconstruction& rec,
                                    std::span<const cplx> truth_values);

/// CSV with header x,f_true_re,f_true_im,f_rec_re,f_rec_im; f_rec is
/// written after alignment. Values use 17 significant digits.
void write_reconstruction_csv(std::ostream& out, const PhysicalReconstruction& rec,
                              const Signal& truth);

}  // namespace liftphase
