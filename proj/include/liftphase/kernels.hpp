#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace liftphase {

using cplx = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Band storage
// ---------------------------------------------------------------------------

/// Square matrix stored by diagonals. Offsets run from -half_width to
/// +half_width; the diagonal at offset d holds entries (i, i+d) and has
/// length dim - |d|. Entries outside the band are identically zero.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t dim, std::size_t half_width);

  std::size_t dim() const { return dim_; }
  std::size_t half_width() const { return half_width_; }
  bool in_band(std::size_t i, std::size_t j) const;

  /// Zero outside the band.
  cplx operator()(std::size_t i, std::size_t j) const;
  /// Throws DimensionError outside the band.
  cplx& at(std::size_t i, std::size_t j);

  std::span<cplx> diagonal(long offset);
  std::span<const cplx> diagonal(long offset) const;

  ComplexVector apply(const ComplexVector& x) const;
  ComplexMatrix to_dense() const;
  /// Keeps only the in-band part of `a`.
  static BandedMatrix from_dense(const ComplexMatrix& a, std::size_t half_width);

 private:
  std::size_t index(std::size_t i, std::size_t j) const;

  std::size_t dim_ = 0;
  std::size_t half_width_ = 0;
  std::vector<std::size_t> offset_start_;
  std::vector<cplx> data_;
};

/// Hermitian band matrix. Only offsets 0..half_width are stored; the lower
/// triangle is read back as the conjugate of the upper one and the diagonal
/// is kept real, so Hermitian symmetry holds exactly.
class BandedHermitian {
 public:
  BandedHermitian() = default;
  BandedHermitian(std::size_t dim, std::size_t half_width);

  std::size_t dim() const { return dim_; }
  std::size_t half_width() const { return half_width_; }
  bool in_band(std::size_t i, std::size_t j) const;

  cplx operator()(std::size_t i, std::size_t j) const;
  /// Sets (i,j) and implicitly (j,i). For i == j only the real part is kept.
  void set(std::size_t i, std::size_t j, cplx value);

  double diagonal(std::size_t i) const;
  double trace() const;
  double max_abs() const;
  double one_norm() const;
  double frobenius_norm() const;

  ComplexVector apply(const ComplexVector& x) const;
  ComplexMatrix to_dense() const;

  /// (A + A*) / 2 restricted to A's band.
  static BandedHermitian hermitian_part(const BandedMatrix& a);
  /// Band restriction of f f*, i.e. entry (i,j) = f_i conj(f_j).
  static BandedHermitian outer(const ComplexVector& f, std::size_t half_width);

 private:
  std::size_t index(std::size_t i, std::size_t j) const;  // requires i <= j

  std::size_t dim_ = 0;
  std::size_t half_width_ = 0;
  std::vector<std::size_t> offset_start_;
  std::vector<cplx> data_;
};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureSpec {
  double lo = 0.0;
  double hi = 1.0;
  double abs_tol = 1e-10;
  std::size_t max_subdivisions = 2000;
};

struct QuadratureResult {
  cplx value;
  double error_estimate = 0.0;
  std::size_t panels = 0;
};

using ComplexIntegrand = std::function<cplx(double)>;

/// Globally adaptive Gauss-Kronrod (7/15) integration of a complex-valued
/// function. The panel with the largest error estimate is bisected until
/// the summed estimate drops below spec.abs_tol. Throws NonConvergence if
/// the panel budget runs out first.
QuadratureResult integrate_complex(const ComplexIntegrand& integrand,
                                   const QuadratureSpec& spec);

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

struct LeastSquaresResult {
  ComplexVector x;
  double residual_norm = 0.0;
  std::size_t numerical_rank = 0;
};

/// Thin SVD kept around so repeated right-hand sides reuse one factorization.
class SvdFactorization {
 public:
  explicit SvdFactorization(const ComplexMatrix& a);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Eigen::VectorXd& singular_values() const { return sigma_; }
  std::size_t numerical_rank(double rank_tol) const;

  /// Minimum-norm least-squares solution, discarding singular values below
  /// rank_tol * sigma_max.
  LeastSquaresResult solve(const ComplexVector& b, double rank_tol) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  ComplexMatrix u_;
  Eigen::VectorXd sigma_;
  ComplexMatrix v_;  // right singular vectors, of R* when qr_ is set
  std::shared_ptr<const Eigen::HouseholderQR<ComplexMatrix>> qr_;  // wide inputs: a* = Q R
};

LeastSquaresResult min_norm_least_squares(const ComplexMatrix& a,
                                          const ComplexVector& b,
                                          double rank_tol = 1e-10);

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// SplitMix64 stream. Used instead of <random> distributions so that seeded
/// sequences are identical across standard library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Eigenvectors
// ---------------------------------------------------------------------------

/// Seed for the perturbation of the all-ones starting vector.
inline constexpr std::uint64_t kPowerIterationSeed = 0x5eed'1f7d'2024'0001ULL;

struct PowerIterationOptions {
  double tol = 1e-10;
  std::size_t max_iters = 20000;
  std::uint64_t seed = kPowerIterationSeed;
};

struct EigenPair {
  ComplexVector vector;
  double value = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Hermitian matrix-vector product used by the power iteration.
struct HermitianOperator {
  std::size_t dim = 0;
  double one_norm = 0.0;
  std::function<ComplexVector(const ComplexVector&)> apply;
};

HermitianOperator as_operator(const ComplexMatrix& h);
HermitianOperator as_operator(const BandedHermitian& h);

/// Power iteration on H + (||H||_1 + 1) I, which is positive definite, so
/// the iteration converges to the algebraically largest eigenvalue of H.
/// Stops once ||Hv - lambda v|| <= tol; throws NonConvergence otherwise.
EigenPair leading_eigenvector(const HermitianOperator& h,
                              const PowerIterationOptions& options = {});
EigenPair leading_eigenvector(const ComplexMatrix& h,
                              const PowerIterationOptions& options = {});
EigenPair leading_eigenvector(const BandedHermitian& h,
                              const PowerIterationOptions& options = {});

/// Largest eigenvalue on the orthogonal complement of `leading`. Runs the
/// same shifted iteration with re-orthogonalization; never throws, the
/// `converged` flag reports whether the residual test was met.
EigenPair next_eigenvector(const HermitianOperator& h, const ComplexVector& leading,
                           const PowerIterationOptions& options = {});

// ---------------------------------------------------------------------------
// Parallel fan-out
// ---------------------------------------------------------------------------

/// Worker count: LIFTPHASE_THREADS if set and positive, else the hardware
/// concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Each index is handled by exactly one
/// worker, so results written to per-index slots are deterministic. If any
/// call throws, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace liftphase
