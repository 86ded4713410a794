// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "liftphase/experiment.hpp"
#include "liftphase/forward.hpp"
#include "liftphase/lifting.hpp"
#include "liftphase/recovery.hpp"
#include "liftphase/synthesis.hpp"

namespace fs = std::filesystem;
using namespace liftphase;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct ExperimentOutcome {
  ExperimentResult result;
  double seconds = 0.0;
};

ExperimentOutcome timed_experiment(const std::string& name) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutcome out{run_experiment(experiment_preset(name)), 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void criterion_experiment(int id, const std::string& name, double bound,
                          const ExperimentOutcome& run) {
  const double err = run.result.error ? run.result.error->error : std::nan("");
  const double ref = *experiment_preset(name).reference_error;
  const bool ok = err <= bound && run.seconds <= 60.0;
  std::string detail = fmt("experiment %s: aligned error %.3e (bound %.0e, reference %.3e), %.1f s",
                           name.c_str(), err, bound, ref, run.seconds);
  if (run.result.spectrum.diagnostics.clamp_warning) {
    detail += fmt(", clamped diagonal mass %.2e", run.result.spectrum.diagnostics.clamped_mass);
  }
  report(id, ok, detail);
}

void criterion_series(const Window& g) {
  constexpr int kDelta = 15;
  SplitMix64 rng(2024);
  std::string detail;
  bool ok = true;
  std::vector<std::pair<double, double>> points(50);
  for (auto& [l, w] : points) {
    l = rng.uniform(-0.5, 0.5);
    w = rng.uniform(-15.0, 15.0);
  }
  for (const Signal& f : {gaussian_specimen(), modulated_specimen()}) {
    int bad = 0;
    double worst = 0.0, worst_wide = 0.0;
    for (const auto& [l, w] : points) {
      const double q = spectrogram_quadrature(f, g, l, w);
      const double scale = std::max(q, 1e-12);
      const double rel = std::abs(q - spectrogram_series(f, g, l, w, kDelta)) / scale;
      worst = std::max(worst, rel);
      if (rel > 1e-6) ++bad;
      worst_wide = std::max(worst_wide, std::abs(q - spectrogram_series(f, g, l, w, 25)) / scale);
    }
    ok = ok && bad == 0;
    detail += fmt("%s%s: %d/50 above 1e-6, worst %.2e (delta 25: %.2e)",
                  detail.empty() ? "" : "; ", f.name().c_str(), bad, worst, worst_wide);
  }
  report(3, ok, "series(delta=15) vs quadrature at 50 random (l, omega): " + detail);
}

void criterion_rank(const FactoredSystem& sys) {
  const Eigen::VectorXd& s = sys.svd().singular_values();
  const std::size_t nk = sys.system().rows();
  const std::size_t rank = sys.svd().numerical_rank(1e-10);
  // M has NK rows, so it has exactly NK singular values and sigma_{NK+1} = 0.
  const double next = s.size() > static_cast<Eigen::Index>(nk) ? s[static_cast<Eigen::Index>(nk)] : 0.0;
  const double last = s[static_cast<Eigen::Index>(nk) - 1];
  const double cliff = next > 0.0 ? last / next : std::numeric_limits<double>::infinity();
  report(4, rank == 671 && cliff >= 1e6,
         fmt("rank(M) = %zu of %zu x %zu, sigma_1 = %.3e, sigma_671 = %.3e, sigma_672 = %.1e, "
             "cliff %.1e",
             rank, sys.system().rows(), sys.system().cols(), s[0], last, next, cliff));
}

void criterion_lifted(const LiftedSystem& sys, const MeasurementGrid& grid, const Window& g,
                      const SpectrogramData& quad) {
  const Signal f = gaussian_specimen();
  const BandedHermitian band =
      BandedHermitian::outer(fourier_samples(f, grid.frequencies), sys.band_half_width());
  const Eigen::VectorXd lifted = forward_lifted(sys, band);
  const Eigen::VectorXd series = to_eigen(measure(f, g, grid, MeasurementMethod::series).b);
  const Eigen::VectorXd q = to_eigen(quad.b);
  const double rs = (lifted - series).norm() / series.norm();
  const double rq = (lifted - q).norm() / q.norm();
  report(5, rs <= 1e-10 && rq <= 1e-4,
         fmt("forward_lifted vs series %.2e (<= 1e-10), vs quadrature %.2e (<= 1e-4)", rs, rq));
}

void criterion_synchronization() {
  SplitMix64 rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ComplexVector f(21);
    for (Eigen::Index j = 0; j < 21; ++j) {
      f[j] = std::polar(0.1 + 0.9 * rng.uniform(), rng.uniform(-kPi, kPi));
    }
    const RecoveredSpectrum r = angular_synchronize(BandedHermitian::outer(f, 6));
    worst = std::max(worst, aligned_vector_error(f, r.f_hat));
  }
  report(6, worst <= 1e-10, fmt("100 rank-one bands (N=21, delta=3): worst error %.2e", worst));
}

void criterion_gauge(const MeasurementGrid& grid, const Window& g, const SpectrogramData& quad,
                     const ExperimentResult& exp1) {
  const Signal f = gaussian_specimen();
  const SpectrogramData rotated = measure(f.rotated(0.9), g, grid, MeasurementMethod::quadrature);
  const double meas = relative_l2(rotated.b, quad.b);

  PhysicalReconstruction turned = exp1.reconstruction;
  for (cplx& v : turned.values) v *= std::polar(1.0, -2.3);
  const double gauge =
      std::abs(aligned_relative_error(turned, f).error - exp1.error->error);

  SpectrogramData scaled = quad;
  for (double& v : scaled.b) v *= 16.0;
  const RecoveredSpectrum a = recover(quad, g, grid);
  const RecoveredSpectrum b = recover(scaled, g, grid);
  const double peak = a.f_hat.cwiseAbs().maxCoeff();
  double mag = 0.0, phase = 0.0;
  for (Eigen::Index j = 0; j < a.f_hat.size(); ++j) {
    mag = std::max(mag, std::abs(std::abs(b.f_hat[j]) - 4.0 * std::abs(a.f_hat[j])) / (4.0 * peak));
    if (std::abs(a.f_hat[j]) > 1e-6 * peak) {
      phase = std::max(phase, std::abs(b.f_hat[j] / std::abs(b.f_hat[j]) -
                                       a.f_hat[j] / std::abs(a.f_hat[j])));
    }
  }
  report(7, meas <= 1e-12 && gauge <= 1e-12 && mag <= 1e-8 && phase <= 1e-8,
         fmt("measurement phase invariance %.1e, alignment gauge %.1e, scale c=4 magnitudes "
             "%.1e phases %.1e",
             meas, gauge, mag, phase));
}

void criterion_cost(const LiftedSystem& sys) {
  std::size_t mults = 0;
  forward_lifted(sys, BandedHermitian(sys.num_frequencies(), sys.band_half_width()), &mults);
  const std::size_t k = sys.num_shifts(), n = sys.num_frequencies();
  const std::size_t w = 4 * static_cast<std::size_t>(sys.delta()) + 1;
  constexpr std::size_t c = 2;
  const std::size_t bound = c * k * w * w * n;
  report(8, mults <= bound,
         fmt("forward_lifted used %zu complex multiplications <= %zu (c = 2), structured storage "
             "%zu values vs %zu for dense M",
             mults, bound, sys.structured_storage(), sys.rows() * sys.cols()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
  std::size_t other = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++other;
  if (names.size() != other || names.empty()) return false;
  for (const auto& n : names) {
    if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) return false;
  }
  files += names.size();
  return true;
}

void criterion_determinism() {
  const fs::path root = fs::current_path() / "acceptance_runs";
  fs::remove_all(root);
  bool ok = true;
  std::size_t files = 0;
  for (const std::string name : {"paper-1", "paper-2"}) {
    for (const char* threads : {"1", "3"}) {
      const std::string cmd = std::string("LIFTPHASE_THREADS=") + threads + " \"" +
                              LIFTPHASE_CLI_PATH + "\" experiment " + name + " --out \"" +
                              (root / (name + "-" + threads)).string() + "\" > /dev/null";
      ok = ok && std::system(cmd.c_str()) == 0;
    }
    ok = ok && same_tree(root / (name + "-1"), root / (name + "-3"), files);
  }
  report(9, ok, fmt("repeated CLI runs (1 and 3 threads) byte-identical across %zu file pairs",
                    files));
}

}  // namespace

int main() {
  const MeasurementGrid grid = paper_grid();
  const Window g = gaussian_window();

  const ExperimentOutcome exp1 = timed_experiment("paper-1");
  criterion_experiment(1, "paper-1", 5e-3, exp1);
  const ExperimentOutcome exp2 = timed_experiment("paper-2");
  criterion_experiment(2, "paper-2", 5e-2, exp2);

  criterion_series(g);

  const auto factored = factorize(g, grid);
  criterion_rank(*factored);
  criterion_lifted(factored->system(), grid, g, exp1.result.measurement);
  criterion_synchronization();
  criterion_gauge(grid, g, exp1.result.measurement, exp1.result);
  criterion_cost(factored->system());
  criterion_determinism();

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
