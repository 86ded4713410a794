#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "liftphase/errors.hpp"
#include "liftphase/kernels.hpp"

using namespace liftphase;

namespace {

ComplexVector random_vector(SplitMix64& rng, Eigen::Index n, double min_abs = 0.0) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = min_abs + (1.0 - min_abs) * rng.uniform();
    v[i] = std::polar(r, rng.uniform(-kPi, kPi));
  }
  return v;
}

ComplexMatrix random_matrix(SplitMix64& rng, Eigen::Index rows, Eigen::Index cols) {
  ComplexMatrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  }
  return a;
}

/// Distance between a and b after the best global phase.
double phase_distance(const ComplexVector& a, const ComplexVector& b) {
  const cplx inner = b.dot(a);
  const cplx u = std::abs(inner) > 0 ? inner / std::abs(inner) : cplx{1, 0};
  return (a - u * b).norm() / a.norm();
}

}  // namespace

TEST_SUITE("band storage") {
  TEST_CASE("banded matrix round-trips through dense form") {
    SplitMix64 rng(1);
    const std::size_t n = 9, w = 3;
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if ((i > j ? i - j : j - i) <= w) a(i, j) = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      }
    }
    const BandedMatrix b = BandedMatrix::from_dense(a, w);
    CHECK(b.to_dense() == a);
    CHECK(b(0, 8) == cplx{0, 0});
    CHECK(b.diagonal(-3).size() == n - 3);
    CHECK_THROWS_AS(BandedMatrix(n, w).at(0, 5), DimensionError);

    const ComplexVector x = random_vector(rng, n);
    CHECK((b.apply(x) - a * x).norm() <= 1e-14);
  }

  TEST_CASE("banded Hermitian is exactly Hermitian") {
    SplitMix64 rng(2);
    BandedHermitian h(7, 2);
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = i; j < std::min<std::size_t>(7, i + 3); ++j) {
        h.set(i, j, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
      }
    }
    for (std::size_t i = 0; i < 7; ++i) {
      CHECK(h(i, i).imag() == 0.0);
      for (std::size_t j = 0; j < 7; ++j) CHECK(h(i, j) == std::conj(h(j, i)));
    }
    CHECK(h(0, 3) == cplx{0, 0});
    const ComplexMatrix d = h.to_dense();
    CHECK(d == d.adjoint());
    const ComplexVector x = random_vector(rng, 7);
    CHECK((h.apply(x) - d * x).norm() <= 1e-14);
  }

  TEST_CASE("outer product keeps f_i conj(f_j) on the band") {
    SplitMix64 rng(3);
    const ComplexVector f = random_vector(rng, 6);
    const BandedHermitian h = BandedHermitian::outer(f, 2);
    CHECK(std::abs(h(1, 3) - f[1] * std::conj(f[3])) == 0.0);
    CHECK(h(0, 4) == cplx{0, 0});
    CHECK(h.diagonal(2) == doctest::Approx(std::norm(f[2])).epsilon(1e-15));
  }

  TEST_CASE("Hermitian part averages A and A*") {
    BandedMatrix a(3, 1);
    a.at(0, 1) = {1, 2};
    a.at(1, 0) = {3, 4};
    a.at(1, 1) = {5, 6};
    const BandedHermitian h = BandedHermitian::hermitian_part(a);
    CHECK(h(0, 1) == cplx{2, -1});
    CHECK(h(1, 1) == cplx{5, 0});
  }
}

TEST_SUITE("quadrature") {
  TEST_CASE("constant integrand") {
    const auto r = integrate_complex([](double) { return cplx{1, 0}; }, {0.0, 1.0});
    CHECK(std::abs(r.value - cplx{1, 0}) <= 1e-14);
  }

  TEST_CASE("full-period exponential integrates to zero") {
    const auto r = integrate_complex([](double t) { return std::polar(1.0, 2 * kPi * t); },
                                     {-1.0, 1.0});
    CHECK(std::abs(r.value) <= 1e-12);
  }

  TEST_CASE("truncated Gaussian matches the erf closed form") {
    // erf(2 sqrt(pi)) / 4, evaluated to 30 digits offline.
    const double oracle = 0.24999986620883451005;
    const auto r = integrate_complex([](double t) { return cplx{std::exp(-16 * kPi * t * t), 0}; },
                                     {-0.5, 0.5, 1e-13});
    CHECK(std::abs(r.value.real() - oracle) <= 1e-13);
    CHECK(r.value.imag() == 0.0);
    CHECK(std::abs(r.value.real() - std::erf(2 * std::sqrt(kPi)) / 4) <= 1e-13);
  }

  TEST_CASE("halving the tolerance never loosens the estimate") {
    const ComplexIntegrand f = [](double t) {
      return std::exp(-30 * t * t) * std::polar(1.0, -2 * kPi * 7.3 * t);
    };
    double tol = 1e-4;
    QuadratureResult prev = integrate_complex(f, {-1.0, 1.0, tol});
    for (int i = 0; i < 12; ++i) {
      tol /= 2;
      const QuadratureResult next = integrate_complex(f, {-1.0, 1.0, tol});
      CHECK(next.error_estimate <= prev.error_estimate);
      CHECK(std::abs(next.value - prev.value) <= next.error_estimate + prev.error_estimate + 1e-15);
      prev = next;
    }
  }

  TEST_CASE("panel budget exhaustion raises NonConvergence") {
    const ComplexIntegrand f = [](double t) { return std::polar(1.0, 400 * t * t); };
    CHECK_THROWS_AS(integrate_complex(f, {-1.0, 1.0, 1e-14, 3}), NonConvergence);
  }

  TEST_CASE("invalid specifications are rejected") {
    const ComplexIntegrand one = [](double) { return cplx{1, 0}; };
    CHECK_THROWS_AS(integrate_complex(one, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(integrate_complex(one, {0.0, 1.0, 0.0}), std::invalid_argument);
  }
}

TEST_SUITE("least squares") {
  TEST_CASE("identity system") {
    ComplexVector b(3);
    b << cplx{1, 0}, cplx{0, 1}, cplx{-2, 0};
    const auto r = min_norm_least_squares(ComplexMatrix::Identity(3, 3), b);
    CHECK((r.x - b).norm() <= 1e-15);
    CHECK(r.residual_norm <= 1e-15);
    CHECK(r.numerical_rank == 3);
  }

  TEST_CASE("overdetermined averaging") {
    ComplexMatrix a(2, 1);
    a << 1, 1;
    ComplexVector b(2);
    b << 1, 3;
    const auto r = min_norm_least_squares(a, b);
    CHECK(std::abs(r.x[0] - cplx{2, 0}) <= 1e-14);
    CHECK(r.residual_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  }

  TEST_CASE("rank-deficient systems return the pseudoinverse solution") {
    SplitMix64 rng(11);
    const Eigen::Index shapes[][3] = {{12, 20, 5}, {30, 18, 7}, {50, 50, 23}, {40, 45, 40}};
    for (const auto& s : shapes) {
      const ComplexMatrix a = random_matrix(rng, s[0], s[2]) * random_matrix(rng, s[2], s[1]);
      const ComplexVector b = random_vector(rng, s[0]);
      const auto r = min_norm_least_squares(a, b);
      const ComplexVector oracle = a.completeOrthogonalDecomposition().pseudoInverse() * b;
      CHECK(r.numerical_rank == static_cast<std::size_t>(s[2]));
      CHECK((r.x - oracle).norm() <= 1e-10 * oracle.norm());
      // Any null-space perturbation keeps the residual and increases the norm.
      const Eigen::FullPivLU<ComplexMatrix> lu(a);
      const ComplexMatrix kernel = lu.kernel();
      if (kernel.cols() > 0 && lu.rank() < a.cols()) {
        const ComplexVector other = r.x + kernel.col(0) * 0.1;
        CHECK((a * other - b).norm() == doctest::Approx(r.residual_norm).epsilon(1e-8));
        CHECK(other.norm() > r.x.norm());
      }
    }
  }

  TEST_CASE("a factorization serves several right-hand sides") {
    SplitMix64 rng(12);
    const ComplexMatrix a = random_matrix(rng, 8, 15);
    const SvdFactorization svd(a);
    CHECK(svd.rows() == 8);
    CHECK(svd.cols() == 15);
    CHECK(svd.numerical_rank(1e-10) == 8);
    for (int t = 0; t < 3; ++t) {
      const ComplexVector b = random_vector(rng, 8);
      const auto r = svd.solve(b, 1e-10);
      CHECK((a * r.x - b).norm() <= 1e-12);
      CHECK((r.x - a.completeOrthogonalDecomposition().pseudoInverse() * b).norm() <= 1e-12);
    }
    CHECK_THROWS_AS(svd.solve(ComplexVector::Zero(3), 1e-10), DimensionError);
  }
}

TEST_SUITE("eigenvectors") {
  TEST_CASE("diagonal matrix") {
    ComplexMatrix h = ComplexMatrix::Zero(2, 2);
    h(0, 0) = 3;
    h(1, 1) = 1;
    const EigenPair p = leading_eigenvector(h);
    CHECK(p.value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(p.vector[1]) <= 1e-10);
    CHECK(std::abs(p.vector[0]) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("rank-one projector") {
    SplitMix64 rng(21);
    ComplexVector u = random_vector(rng, 10, 0.2);
    u.normalize();
    const ComplexMatrix h = u * u.adjoint();
    const EigenPair p = leading_eigenvector(h);
    CHECK(p.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.residual <= 1e-10);
    CHECK(phase_distance(u, p.vector) <= 1e-10);
  }

  TEST_CASE("phase matrix of a random vector matches a dense eigensolver") {
    SplitMix64 rng(22);
    const ComplexVector f = random_vector(rng, 21, 0.1);
    const BandedHermitian outer = BandedHermitian::outer(f, 6);
    BandedHermitian phases(21, 6);
    for (std::size_t i = 0; i < 21; ++i) {
      for (std::size_t j = i; j <= std::min<std::size_t>(20, i + 6); ++j) {
        const cplx v = outer(i, j);
        phases.set(i, j, v / std::abs(v));
      }
    }
    const EigenPair p = leading_eigenvector(phases);
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> dense(phases.to_dense());
    const ComplexVector oracle = dense.eigenvectors().col(20);
    CHECK(p.value == doctest::Approx(dense.eigenvalues()[20]).epsilon(1e-10));
    CHECK(phase_distance(oracle, p.vector) <= 1e-8);

    ComplexVector unit_f(21), unit_v(21);
    for (Eigen::Index j = 0; j < 21; ++j) {
      unit_f[j] = f[j] / std::abs(f[j]);
      unit_v[j] = p.vector[j] / std::abs(p.vector[j]);
    }
    CHECK(phase_distance(unit_f, unit_v) <= 1e-8);
  }

  TEST_CASE("Rayleigh quotient equals the eigenvalue") {
    SplitMix64 rng(23);
    const ComplexMatrix a = random_matrix(rng, 12, 12);
    const ComplexMatrix h = a + a.adjoint();
    const PowerIterationOptions opts{1e-10, 200000};
    const EigenPair p = leading_eigenvector(h, opts);
    const double rq = (p.vector.adjoint() * h * p.vector)(0, 0).real() / p.vector.squaredNorm();
    CHECK(std::abs(rq - p.value) <= 1e-10);
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> dense(h);
    CHECK(p.value == doctest::Approx(dense.eigenvalues().maxCoeff()).epsilon(1e-9));

    SUBCASE("scaling H by c > 0 leaves the eigenvector unchanged") {
      const EigenPair q = leading_eigenvector(ComplexMatrix(2.5 * h), opts);
      CHECK(q.value == doctest::Approx(2.5 * p.value).epsilon(1e-9));
      CHECK(phase_distance(p.vector, q.vector) <= 1e-8);
    }
  }

  TEST_CASE("next eigenvector on the orthogonal complement") {
    ComplexMatrix h = ComplexMatrix::Zero(3, 3);
    h(0, 0) = 5;
    h(1, 1) = 3;
    h(2, 2) = 1;
    const HermitianOperator op = as_operator(h);
    const EigenPair lead = leading_eigenvector(op);
    const EigenPair next = next_eigenvector(op, lead.vector);
    CHECK(lead.value == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(next.value == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(next.converged);
    CHECK(std::abs(next.vector[1]) == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("power iteration reports stalls") {
    ComplexMatrix h = ComplexMatrix::Identity(4, 4);
    h(3, 3) = 1.0 - 1e-9;
    CHECK_THROWS_AS(leading_eigenvector(h, {1e-14, 5}), NonConvergence);
  }
}

TEST_SUITE("utilities") {
  TEST_CASE("SplitMix64 reference output") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 100; ++i) {
      const double u = a.uniform();
      CHECK(u == b.uniform());
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("parallel_for visits every index once and rethrows the lowest failure") {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);

    try {
      parallel_for(50, [](std::size_t i) {
        if (i == 17 || i == 31) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "17");
    }
  }
}
