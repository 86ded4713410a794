#include "liftphase/recovery.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include "liftphase/errors.hpp"

namespace liftphase {

void RecoveryConfig::validate() const {
  if (!(rank_tol > 0.0) || !std::isfinite(rank_tol)) throw ConfigError("rank_tol must be > 0");
  if (!(magnitude_floor > 0.0 && magnitude_floor < 1.0)) {
    throw ConfigError("magnitude_floor must lie in (0, 1)");
  }
  if (!(power_tol > 0.0) || !std::isfinite(power_tol)) throw ConfigError("power_tol must be > 0");
  if (max_iters == 0) throw ConfigError("max_iters must be > 0");
}

// ---------------------------------------------------------------------------
// Factorization cache

FactoredSystem::FactoredSystem(LiftedSystem system)
    : system_(std::move(system)), svd_(system_.materialize()) {}

namespace {

using FactoredPtr = std::shared_ptr<const FactoredSystem>;

struct FactorizationCache {
  std::mutex mutex;
  std::map<std::string, std::shared_future<FactoredPtr>> entries;
};

FactorizationCache& cache() {
  static FactorizationCache c;
  return c;
}

void append_hex(std::string& key, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a,", v);
  key += buf;
}

std::string cache_key(const Window& g, const MeasurementGrid& grid) {
  std::string key = g.name() + "|";
  append_hex(key, g.half_width());
  append_hex(key, g.normalization());
  key += "|" + std::to_string(grid.delta) + "|";
  for (double l : grid.shifts) append_hex(key, l);
  key += "|";
  for (double w : grid.frequencies) append_hex(key, w);
  return key;
}

}  // namespace

FactoredPtr factorize(const Window& g, const MeasurementGrid& grid) {
  const std::string key = cache_key(g, grid);
  auto& c = cache();
  std::promise<FactoredPtr> promise;
  std::shared_future<FactoredPtr> future;
  bool owner = false;
  {
    std::lock_guard lock(c.mutex);
    const auto it = c.entries.find(key);
    if (it == c.entries.end()) {
      future = promise.get_future().share();
      c.entries.emplace(key, future);
      owner = true;
    } else {
      future = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(std::make_shared<const FactoredSystem>(assemble_system(g, grid)));
    } catch (...) {
      {
        std::lock_guard lock(c.mutex);
        c.entries.erase(key);
      }
      promise.set_exception(std::current_exception());
    }
  }
  return future.get();
}

void clear_factorization_cache() {
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  c.entries.clear();
}

std::size_t factorization_cache_size() {
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  return c.entries.size();
}

// ---------------------------------------------------------------------------
// Band solve

namespace {

double residual_of(const LiftedSystem& sys, const BandedHermitian& f, const std::vector<double>& b) {
  const Eigen::VectorXd fitted = forward_lifted(sys, f);
  const double r =
      relative_l2(std::vector<double>(fitted.data(), fitted.data() + fitted.size()), b);
  return std::isfinite(r) ? r : 0.0;  // b = 0 and F = 0
}

BandSolution solve_with(const LiftedSystem& sys, const SvdFactorization& svd,
                        const SpectrogramData& data, const RecoveryConfig& cfg) {
  cfg.validate();
  if (data.b.size() != sys.rows()) {
    throw DimensionError("measurement vector has " + std::to_string(data.b.size()) +
                         " entries, system expects " + std::to_string(sys.rows()));
  }
  ComplexVector rhs(static_cast<Eigen::Index>(data.b.size()));
  for (std::size_t i = 0; i < data.b.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = data.b[i];

  const LeastSquaresResult ls = svd.solve(rhs, cfg.rank_tol);
  BandSolution out;
  out.rank = ls.numerical_rank;
  out.f = BandedHermitian::hermitian_part(sys.coordinates().unflatten(ls.x));
  out.fit_residual = residual_of(sys, out.f, data.b);

  for (std::size_t j = 0; j < out.f.dim(); ++j) {
    const double d = out.f.diagonal(j);
    if (d < 0.0) {
      out.clamped_mass += -d;
      out.f.set(j, j, 0.0);
    }
  }
  const double trace = out.f.trace();
  out.clamp_warning = out.clamped_mass > kClampWarningFraction * trace && out.clamped_mass > 0.0;

  out.residual = out.clamped_mass > 0.0 ? residual_of(sys, out.f, data.b) : out.fit_residual;
  return out;
}

}  // namespace

BandSolution solve_band(const FactoredSystem& sys, const SpectrogramData& data,
                        const RecoveryConfig& cfg) {
  return solve_with(sys.system(), sys.svd(), data, cfg);
}

BandSolution solve_band(const LiftedSystem& sys, const SpectrogramData& data,
                        const RecoveryConfig& cfg) {
  const SvdFactorization svd(sys.materialize());
  return solve_with(sys, svd, data, cfg);
}

// ---------------------------------------------------------------------------
// Angular synchronization

RecoveredSpectrum angular_synchronize(const BandedHermitian& f, const RecoveryConfig& cfg,
                                      std::vector<double> frequencies) {
  cfg.validate();
  const std::size_t n = f.dim();
  if (!frequencies.empty() && frequencies.size() != n) {
    throw DimensionError("frequency list does not match F");
  }
  const double peak = f.max_abs();
  if (!(peak > 0.0)) throw DegenerateSpectrum("F is identically zero");

  BandedHermitian phases(n, f.half_width());
  const double cut = cfg.magnitude_floor * peak;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    phases.set(i, i, 1.0);
    const std::size_t hi = std::min(n - 1, i + f.half_width());
    for (std::size_t j = i + 1; j <= hi; ++j) {
      const cplx v = f(i, j);
      const double mag = std::abs(v);
      if (mag >= cut && mag > 0.0) {
        phases.set(i, j, v / mag);
        ++kept;
      }
    }
  }
  if (kept == 0) {
    throw DegenerateSpectrum("no off-diagonal entry of F clears the magnitude floor");
  }

  const PowerIterationOptions opts{cfg.power_tol, cfg.max_iters, cfg.seed};
  const HermitianOperator op = as_operator(phases);
  const EigenPair lead = leading_eigenvector(op, opts);
  const EigenPair second = next_eigenvector(op, lead.vector, opts);
  const double gap = second.value > 0.0 ? lead.value / second.value
                                        : std::numeric_limits<double>::infinity();
  if (gap < kMinEigenGap) {
    throw DegenerateSpectrum("eigen-gap " + std::to_string(gap) +
                             " too small for reliable synchronization");
  }

  RecoveredSpectrum out;
  out.frequencies = std::move(frequencies);
  out.f_hat.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const cplx v = lead.vector[jj];
    const cplx unit = std::abs(v) > 0.0 ? v / std::abs(v) : cplx{1.0, 0.0};
    out.f_hat[jj] = std::sqrt(std::max(f.diagonal(j), 0.0)) * unit;
  }
  Eigen::Index anchor = 0;
  out.f_hat.cwiseAbs().maxCoeff(&anchor);
  if (std::abs(out.f_hat[anchor]) > 0.0) {
    out.f_hat *= std::conj(out.f_hat[anchor]) / std::abs(out.f_hat[anchor]);
    out.f_hat[anchor] = std::abs(out.f_hat[anchor]);
  }
  out.diagnostics.eigen_gap = gap;
  out.diagnostics.synchronized = true;
  out.diagnostics.power_iterations = lead.iterations + second.iterations;
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

RecoveredSpectrum recover(const SpectrogramData& data, const Window& g,
                          const MeasurementGrid& grid, const RecoveryConfig& cfg) {
  cfg.validate();
  data.validate();
  if (!(data.grid == grid)) {
    throw DimensionError("measurement grid differs from the recovery grid");
  }
  grid.validate(g.half_width());

  const bool all_zero = std::all_of(data.b.begin(), data.b.end(), [](double v) { return v == 0.0; });
  if (all_zero) {
    RecoveredSpectrum out;
    out.frequencies = grid.frequencies;
    out.f_hat = ComplexVector::Zero(static_cast<Eigen::Index>(grid.num_frequencies()));
    out.diagnostics.eigen_gap = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const auto factored = factorize(g, grid);
  const BandSolution band = solve_band(*factored, data, cfg);
  RecoveredSpectrum out = angular_synchronize(band.f, cfg, grid.frequencies);
  out.diagnostics.residual = band.residual;
  out.diagnostics.fit_residual = band.fit_residual;
  out.diagnostics.rank = band.rank;
  out.diagnostics.clamped_mass = band.clamped_mass;
  out.diagnostics.clamp_warning = band.clamp_warning;
  return out;
}

double aligned_vector_error(const ComplexVector& reference, const ComplexVector& estimate) {
  if (reference.size() != estimate.size()) throw DimensionError("aligned error: length mismatch");
  const double ref_norm = reference.norm();
  if (!(ref_norm > 0.0)) throw ZeroSignal("reference vector is zero");
  const cplx inner = estimate.dot(reference);  // sum conj(estimate) * reference
  const cplx phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : cplx{1.0, 0.0};
  return (reference - phase * estimate).norm() / ref_norm;
}

}  // namespace liftphase
