#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "liftphase/forward.hpp"
#include "liftphase/kernels.hpp"
#include "liftphase/lifting.hpp"
#include "liftphase/signals.hpp"

namespace liftphase {

struct RecoveryConfig {
  /// Singular values below rank_tol * sigma_max are discarded.
  double rank_tol = 1e-10;
  /// Off-diagonal entries with |F_ij| below this fraction of max |F_ij| carry
  /// no phase information into the synchronization matrix.
  double magnitude_floor = 1e-6;
  double power_tol = 1e-10;
  std::size_t max_iters = 100000;
  std::uint64_t seed = kPowerIterationSeed;

  /// ConfigError unless all tolerances are positive and the floor is in (0, 1).
  void validate() const;
};

/// Clamped diagonal mass above this fraction of the trace sets clamp_warning.
inline constexpr double kClampWarningFraction = 0.01;
/// Synchronization is refused when lambda_1 / lambda_2 falls below this.
inline constexpr double kMinEigenGap = 1.0 + 1e-6;

struct BandSolution {
  BandedHermitian f;
  /// ||forward_lifted(f) - b|| / ||b|| for the returned (clamped) f, 0 for b = 0.
  double residual = 0.0;
  /// Same quantity before the diagonal is clamped: how well the
  /// least-squares solution itself fits b.
  double fit_residual = 0.0;
  std::size_t rank = 0;
  double clamped_mass = 0.0;
  bool clamp_warning = false;
};

struct RecoveryDiagnostics {
  double residual = 0.0;
  double fit_residual = 0.0;
  /// lambda_1 / lambda_2 of the synchronization matrix; infinite when
  /// lambda_2 <= 0 and NaN when synchronization was skipped.
  double eigen_gap = 0.0;
  std::size_t rank = 0;
  double clamped_mass = 0.0;
  bool clamp_warning = false;
  bool synchronized = false;
  std::size_t power_iterations = 0;
};

struct RecoveredSpectrum {
  std::vector<double> frequencies;
  /// Recovered f^(omega_j), defined up to one global unimodular factor. The
  /// gauge is fixed so that the largest-magnitude entry is real and positive.
  ComplexVector f_hat;
  RecoveryDiagnostics diagnostics;
};

/// A lifted system together with the SVD of its materialized matrix M.
class FactoredSystem {
 public:
  explicit FactoredSystem(LiftedSystem system);

  const LiftedSystem& system() const { return system_; }
  const SvdFactorization& svd() const { return svd_; }

 private:
  LiftedSystem system_;
  SvdFactorization svd_;
};

/// Assembles and factors the system for (g, grid), reusing an earlier
/// factorization for the same window and grid. Concurrent callers with the
/// same key wait on a single computation.
std::shared_ptr<const FactoredSystem> factorize(const Window& g, const MeasurementGrid& grid);
void clear_factorization_cache();
std::size_t factorization_cache_size();

/// Minimum-norm least-squares solve for the band of F, followed by the
/// Hermitian projection (F + F*)/2 and clamping of negative diagonal entries.
BandSolution solve_band(const FactoredSystem& sys, const SpectrogramData& data,
                        const RecoveryConfig& cfg = {});
BandSolution solve_band(const LiftedSystem& sys, const SpectrogramData& data,
                        const RecoveryConfig& cfg = {});

/// Magnitudes sqrt(F_jj) and phases from the leading eigenvector of the
/// phase-normalized band matrix. Throws DegenerateSpectrum when no
/// off-diagonal entry clears the floor or the eigen-gap is below
/// kMinEigenGap, NonConvergence if the power iteration stalls.
RecoveredSpectrum angular_synchronize(const BandedHermitian& f, const RecoveryConfig& cfg = {},
                                      std::vector<double> frequencies = {});

/// factorize -> solve_band -> angular_synchronize. All-zero measurements
/// short-circuit to a zero spectrum without synchronization.
RecoveredSpectrum recover(const SpectrogramData& data, const Window& g,
                          const MeasurementGrid& grid, const RecoveryConfig& cfg = {});

/// min over theta of ||a - e^{i theta} b|| / ||a||.
double aligned_vector_error(const ComplexVector& reference, const ComplexVector& estimate);

}  // namespace liftphase
