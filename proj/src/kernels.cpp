#include "liftphase/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "liftphase/errors.hpp"

namespace liftphase {

namespace {

std::vector<std::size_t> diagonal_starts(std::size_t dim, std::size_t w, bool lower) {
  // Offsets are stored contiguously, lowest offset first.
  std::vector<std::size_t> starts;
  std::size_t pos = 0;
  const long lo = lower ? -static_cast<long>(w) : 0;
  for (long d = lo; d <= static_cast<long>(w); ++d) {
    starts.push_back(pos);
    pos += dim - static_cast<std::size_t>(std::labs(d));
  }
  starts.push_back(pos);
  return starts;
}

std::size_t clamp_width(std::size_t dim, std::size_t w) {
  return dim == 0 ? 0 : std::min(w, dim - 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// BandedMatrix

BandedMatrix::BandedMatrix(std::size_t dim, std::size_t half_width)
    : dim_(dim), half_width_(clamp_width(dim, half_width)) {
  offset_start_ = diagonal_starts(dim_, half_width_, true);
  data_.assign(offset_start_.back(), cplx{});
}

bool BandedMatrix::in_band(std::size_t i, std::size_t j) const {
  if (i >= dim_ || j >= dim_) return false;
  return (i > j ? i - j : j - i) <= half_width_;
}

std::size_t BandedMatrix::index(std::size_t i, std::size_t j) const {
  const long d = static_cast<long>(j) - static_cast<long>(i);
  return offset_start_[static_cast<std::size_t>(d + static_cast<long>(half_width_))] +
         std::min(i, j);
}

cplx BandedMatrix::operator()(std::size_t i, std::size_t j) const {
  return in_band(i, j) ? data_[index(i, j)] : cplx{};
}

cplx& BandedMatrix::at(std::size_t i, std::size_t j) {
  if (!in_band(i, j)) {
    throw DimensionError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                         ") lies outside the band");
  }
  return data_[index(i, j)];
}

std::span<cplx> BandedMatrix::diagonal(long offset) {
  if (std::labs(offset) > static_cast<long>(half_width_)) {
    throw DimensionError("diagonal offset outside the band");
  }
  const auto k = static_cast<std::size_t>(offset + static_cast<long>(half_width_));
  return {data_.data() + offset_start_[k], offset_start_[k + 1] - offset_start_[k]};
}

std::span<const cplx> BandedMatrix::diagonal(long offset) const {
  return const_cast<BandedMatrix*>(this)->diagonal(offset);
}

ComplexVector BandedMatrix::apply(const ComplexVector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw DimensionError("banded apply: vector length mismatch");
  }
  ComplexVector y = ComplexVector::Zero(static_cast<Eigen::Index>(dim_));
  const long w = static_cast<long>(half_width_);
  for (long d = -w; d <= w; ++d) {
    const auto diag = diagonal(d);
    for (std::size_t t = 0; t < diag.size(); ++t) {
      const std::size_t i = d >= 0 ? t : t + static_cast<std::size_t>(-d);
      const std::size_t j = d >= 0 ? t + static_cast<std::size_t>(d) : t;
      y[static_cast<Eigen::Index>(i)] += diag[t] * x[static_cast<Eigen::Index>(j)];
    }
  }
  return y;
}

ComplexMatrix BandedMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      if (in_band(i, j)) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data_[index(i, j)];
    }
  }
  return a;
}

BandedMatrix BandedMatrix::from_dense(const ComplexMatrix& a, std::size_t half_width) {
  if (a.rows() != a.cols()) throw DimensionError("from_dense: matrix is not square");
  BandedMatrix out(static_cast<std::size_t>(a.rows()), half_width);
  for (std::size_t i = 0; i < out.dim(); ++i) {
    for (std::size_t j = 0; j < out.dim(); ++j) {
      if (out.in_band(i, j)) out.at(i, j) = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// BandedHermitian

BandedHermitian::BandedHermitian(std::size_t dim, std::size_t half_width)
    : dim_(dim), half_width_(clamp_width(dim, half_width)) {
  offset_start_ = diagonal_starts(dim_, half_width_, false);
  data_.assign(offset_start_.back(), cplx{});
}

bool BandedHermitian::in_band(std::size_t i, std::size_t j) const {
  if (i >= dim_ || j >= dim_) return false;
  return (i > j ? i - j : j - i) <= half_width_;
}

std::size_t BandedHermitian::index(std::size_t i, std::size_t j) const {
  return offset_start_[j - i] + i;
}

cplx BandedHermitian::operator()(std::size_t i, std::size_t j) const {
  if (!in_band(i, j)) return {};
  return i <= j ? data_[index(i, j)] : std::conj(data_[index(j, i)]);
}

void BandedHermitian::set(std::size_t i, std::size_t j, cplx value) {
  if (!in_band(i, j)) {
    throw DimensionError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                         ") lies outside the band");
  }
  if (i == j) {
    data_[index(i, i)] = cplx{value.real(), 0.0};
  } else if (i < j) {
    data_[index(i, j)] = value;
  } else {
    data_[index(j, i)] = std::conj(value);
  }
}

double BandedHermitian::diagonal(std::size_t i) const { return data_[index(i, i)].real(); }

double BandedHermitian::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += diagonal(i);
  return t;
}

double BandedHermitian::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double BandedHermitian::one_norm() const {
  double best = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    const std::size_t lo = j >= half_width_ ? j - half_width_ : 0;
    const std::size_t hi = std::min(dim_ - 1, j + half_width_);
    double col = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) col += std::abs((*this)(i, j));
    best = std::max(best, col);
  }
  return best;
}

double BandedHermitian::frobenius_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    s += diagonal(i) * diagonal(i);
    const std::size_t hi = std::min(dim_ - 1, i + half_width_);
    for (std::size_t j = i + 1; j <= hi; ++j) s += 2.0 * std::norm(data_[index(i, j)]);
  }
  return std::sqrt(s);
}

ComplexVector BandedHermitian::apply(const ComplexVector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw DimensionError("banded apply: vector length mismatch");
  }
  ComplexVector y = ComplexVector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    y[ii] += diagonal(i) * x[ii];
    const std::size_t hi = std::min(dim_ - 1, i + half_width_);
    for (std::size_t j = i + 1; j <= hi; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const cplx a = data_[index(i, j)];
      y[ii] += a * x[jj];
      y[jj] += std::conj(a) * x[ii];
    }
  }
  return y;
}

ComplexMatrix BandedHermitian::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j);
    }
  }
  return a;
}

BandedHermitian BandedHermitian::hermitian_part(const BandedMatrix& a) {
  BandedHermitian h(a.dim(), a.half_width());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const std::size_t hi = std::min(a.dim() - 1, i + a.half_width());
    for (std::size_t j = i; j <= hi; ++j) {
      h.set(i, j, 0.5 * (a(i, j) + std::conj(a(j, i))));
    }
  }
  return h;
}

BandedHermitian BandedHermitian::outer(const ComplexVector& f, std::size_t half_width) {
  const auto n = static_cast<std::size_t>(f.size());
  BandedHermitian h(n, half_width);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = n == 0 ? 0 : std::min(n - 1, i + h.half_width());
    for (std::size_t j = i; j <= hi; ++j) {
      h.set(i, j, f[static_cast<Eigen::Index>(i)] * std::conj(f[static_cast<Eigen::Index>(j)]));
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

// Kronrod 15-point abscissae (positive half) and weights; the Gauss 7-point
// rule uses the odd-indexed abscissae.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  cplx value;
  double error;
};

Panel gauss_kronrod(const ComplexIntegrand& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const cplx fc = f(center);
  cplx kronrod = fc * kWgk[7];
  cplx gauss = fc * kWg[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = half * kXgk[k];
    const cplx pair = f(center - dx) + f(center + dx);
    kronrod += pair * kWgk[k];
    if (k % 2 == 1) gauss += pair * kWg[k / 2];
  }
  kronrod *= half;
  gauss *= half;
  const double error = std::abs(kronrod - gauss);
  if (!std::isfinite(kronrod.real()) || !std::isfinite(kronrod.imag())) {
    throw NonConvergence("integrand is not finite on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  return {lo, hi, kronrod, error};
}

}  // namespace

QuadratureResult integrate_complex(const ComplexIntegrand& integrand,
                                   const QuadratureSpec& spec) {
  if (!(spec.lo < spec.hi)) throw std::invalid_argument("quadrature: require lo < hi");
  if (!(spec.abs_tol > 0.0)) throw std::invalid_argument("quadrature: require tolerance > 0");
  if (spec.max_subdivisions == 0) throw std::invalid_argument("quadrature: empty panel budget");

  // Panels stay sorted by position; the worst one is found by a linear scan
  // (first maximum wins), which keeps the refinement order deterministic.
  std::vector<Panel> panels{gauss_kronrod(integrand, spec.lo, spec.hi)};
  auto total_error = [&] {
    double e = 0.0;
    for (const auto& p : panels) e += p.error;
    return e;
  };

  double error = total_error();
  while (error > spec.abs_tol) {
    if (panels.size() >= spec.max_subdivisions) {
      throw NonConvergence("quadrature: tolerance " + std::to_string(spec.abs_tol) +
                           " not met within " + std::to_string(spec.max_subdivisions) +
                           " panels (estimate " + std::to_string(error) + ")");
    }
    const auto worst = std::max_element(
        panels.begin(), panels.end(),
        [](const Panel& a, const Panel& b) { return a.error < b.error; });
    const Panel old = *worst;
    const double mid = 0.5 * (old.lo + old.hi);
    *worst = gauss_kronrod(integrand, mid, old.hi);
    panels.insert(worst, gauss_kronrod(integrand, old.lo, mid));
    error = total_error();
  }

  QuadratureResult result{{}, error, panels.size()};
  for (const auto& p : panels) result.value += p.value;
  return result;
}

// ---------------------------------------------------------------------------
// Least squares

SvdFactorization::SvdFactorization(const ComplexMatrix& a)
    : rows_(static_cast<std::size_t>(a.rows())), cols_(static_cast<std::size_t>(a.cols())) {
  if (a.rows() == 0 || a.cols() == 0) throw DimensionError("svd: empty matrix");
  if (a.cols() > a.rows()) {
    // Wide matrix: a* = Q R, so a = R* Q* and the SVD of the square R*
    // gives a = U S (Q W)*.
    // Q is kept in Householder form and applied to solutions only.
    qr_ = std::make_shared<Eigen::HouseholderQR<ComplexMatrix>>(a.adjoint());
    const Eigen::Index m = a.rows();
    const ComplexMatrix r_adj =
        qr_->matrixQR().topRows(m).template triangularView<Eigen::Upper>().adjoint();
    Eigen::BDCSVD<ComplexMatrix> svd(r_adj, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw DecompositionFailure("svd did not converge");
    u_ = svd.matrixU();
    sigma_ = svd.singularValues();
    v_ = svd.matrixV();
    return;
  }
  Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw DecompositionFailure("svd did not converge");
  u_ = svd.matrixU();
  sigma_ = svd.singularValues();
  v_ = svd.matrixV();
}

std::size_t SvdFactorization::numerical_rank(double rank_tol) const {
  if (sigma_.size() == 0 || sigma_[0] == 0.0) return 0;
  const double cut = rank_tol * sigma_[0];
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(sigma_.size()) && sigma_[static_cast<Eigen::Index>(r)] > cut) ++r;
  return r;
}

LeastSquaresResult SvdFactorization::solve(const ComplexVector& b, double rank_tol) const {
  if (!(rank_tol > 0.0)) throw std::invalid_argument("least squares: require rank_tol > 0");
  if (static_cast<std::size_t>(b.size()) != rows_) {
    throw DimensionError("least squares: right-hand side has length " +
                         std::to_string(b.size()) + ", expected " + std::to_string(rows_));
  }
  const std::size_t r = numerical_rank(rank_tol);
  const auto rr = static_cast<Eigen::Index>(r);
  LeastSquaresResult out;
  out.numerical_rank = r;
  const ComplexVector coeffs = u_.leftCols(rr).adjoint() * b;
  const ComplexVector scaled = coeffs.cwiseQuotient(sigma_.head(rr).cast<cplx>());
  if (qr_) {
    ComplexVector y = ComplexVector::Zero(static_cast<Eigen::Index>(cols_));
    y.head(v_.rows()) = v_.leftCols(rr) * scaled;
    out.x = qr_->householderQ() * y;
  } else {
    out.x = v_.leftCols(rr) * scaled;
  }
  out.residual_norm = (b - u_.leftCols(rr) * coeffs).norm();
  return out;
}

LeastSquaresResult min_norm_least_squares(const ComplexMatrix& a, const ComplexVector& b,
                                          double rank_tol) {
  return SvdFactorization(a).solve(b, rank_tol);
}

// ---------------------------------------------------------------------------
// Random numbers

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Eigenvectors

namespace {

ComplexVector start_vector(std::size_t n, std::uint64_t seed) {
  ComplexVector v(static_cast<Eigen::Index>(n));
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = rng.uniform() - 0.5;
    const double im = rng.uniform() - 0.5;
    v[static_cast<Eigen::Index>(i)] = cplx{1.0 + 0.25 * re, 0.25 * im};
  }
  return v.normalized();
}

EigenPair shifted_power_iteration(const HermitianOperator& h, const ComplexVector* deflate,
                                  const PowerIterationOptions& options) {
  if (h.dim == 0) throw DimensionError("eigenvector of an empty matrix");
  if (options.max_iters == 0) throw std::invalid_argument("power iteration: max_iters must be >= 1");
  const double shift = h.one_norm + 1.0;
  ComplexVector v = start_vector(h.dim, options.seed);
  auto project = [&](ComplexVector& x) {
    if (deflate != nullptr) x -= (*deflate) * deflate->dot(x);
  };
  project(v);
  if (v.norm() == 0.0) v = ComplexVector::Ones(static_cast<Eigen::Index>(h.dim));
  v.normalize();

  EigenPair out;
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    ComplexVector hv = h.apply(v);
    project(hv);
    const double lambda = v.dot(hv).real();
    const double residual = (hv - lambda * v).norm();
    out.vector = v;
    out.value = lambda;
    out.residual = residual;
    out.iterations = it;
    if (residual <= options.tol) {
      out.converged = true;
      return out;
    }
    ComplexVector next = hv + shift * v;
    project(next);
    const double norm = next.norm();
    if (norm == 0.0) break;
    v = next / norm;
  }
  return out;
}

}  // namespace

HermitianOperator as_operator(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw DimensionError("eigenvector: matrix is not square");
  const double one_norm = h.cwiseAbs().colwise().sum().maxCoeff();
  return {static_cast<std::size_t>(h.rows()), one_norm,
          [&h](const ComplexVector& x) -> ComplexVector { return h * x; }};
}

HermitianOperator as_operator(const BandedHermitian& h) {
  return {h.dim(), h.one_norm(), [&h](const ComplexVector& x) { return h.apply(x); }};
}

EigenPair leading_eigenvector(const HermitianOperator& h, const PowerIterationOptions& options) {
  EigenPair pair = shifted_power_iteration(h, nullptr, options);
  if (!pair.converged) {
    throw NonConvergence("power iteration: residual " + std::to_string(pair.residual) +
                         " above " + std::to_string(options.tol) + " after " +
                         std::to_string(pair.iterations) + " iterations");
  }
  return pair;
}

EigenPair leading_eigenvector(const ComplexMatrix& h, const PowerIterationOptions& options) {
  return leading_eigenvector(as_operator(h), options);
}

EigenPair leading_eigenvector(const BandedHermitian& h, const PowerIterationOptions& options) {
  return leading_eigenvector(as_operator(h), options);
}

EigenPair next_eigenvector(const HermitianOperator& h, const ComplexVector& leading,
                           const PowerIterationOptions& options) {
  if (static_cast<std::size_t>(leading.size()) != h.dim) {
    throw DimensionError("next_eigenvector: leading vector length mismatch");
  }
  if (h.dim < 2) return {};
  const ComplexVector unit = leading.normalized();
  return shifted_power_iteration(h, &unit, options);
}

// ---------------------------------------------------------------------------
// Parallel fan-out

std::size_t worker_count() {
  if (const char* env = std::getenv("LIFTPHASE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace liftphase
