#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "siph/matrix.hpp"
#include "siph/rng.hpp"
#include "siph/scaling.hpp"

using namespace siph;

namespace {

std::vector<ScalingFamily> all_families() {
  return {ScalingFamily::gamma(1.5),
          ScalingFamily::positive_stable(0.6),
          ScalingFamily::inverse_gaussian(0.8),
          ScalingFamily::pvf(1.2, 0.5),
          ScalingFamily::compound_poisson_gamma(1.1, 0.7, true),
          ScalingFamily::compound_poisson_gamma(1.1, 0.7, false),
          ScalingFamily::discrete({0.5, 1.0, 2.0}, {0.2, 0.5, 0.3}),
          ScalingFamily::degenerate(1.3)};
}

double mc_laplace(const ScalingFamily& f, double u, long n, std::uint64_t seed,
                  double* sd_out) {
  Rng rng(seed);
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double v = std::exp(-u * f.sample(rng));
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  // A point-mass family makes every sample equal; roundoff can then push the
  // raw variance a hair below zero, so clamp before the square root.
  *sd_out = std::sqrt(std::max(0.0, s2 / n - mean * mean) / n);
  return mean;
}

}  // namespace

TEST_CASE("laplace transform is one at zero and decreasing") {
  for (const ScalingFamily& f : all_families()) {
    CHECK(f.laplace(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 1.0;
    for (double u : {0.2, 0.7, 1.5, 4.0, 11.0}) {
      const double v = f.laplace(u);
      CHECK(v > 0.0);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("canonical closed forms at a spot point") {
  // gamma shape 1.5: (1+u)^{-3/2} at u = 3 is 1/8
  CHECK(ScalingFamily::gamma(1.5).laplace(3.0) == doctest::Approx(0.125).epsilon(1e-14));
  // stable 0.5 at u = 4: exp(-2)
  CHECK(ScalingFamily::positive_stable(0.5).laplace(4.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  // degenerate point mass
  CHECK(ScalingFamily::degenerate(2.0).laplace(1.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("samples reproduce the laplace transform") {
  std::uint64_t seed = 1000;
  for (const ScalingFamily& f : all_families()) {
    for (double u : {0.5, 2.0}) {
      double sd = 0.0;
      const double mc = mc_laplace(f, u, 200000, ++seed, &sd);
      CHECK(std::abs(mc - f.laplace(u)) < 4.0 * sd + 1e-12);
    }
  }
}

TEST_CASE("laplace_deriv matches a finite difference") {
  for (const ScalingFamily& f : all_families()) {
    for (double u : {0.3, 1.0, 2.7}) {
      const double fd = oracle::deriv([&](double v) { return f.laplace(v); }, u, 1e-5);
      CHECK(f.laplace_deriv(u) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("density integrates to one minus the atom at zero") {
  struct Row {
    ScalingFamily f;
    double tol;
  };
  const std::vector<Row> rows = {{ScalingFamily::gamma(1.5), 1e-8},
                                 {ScalingFamily::gamma(0.7), 1e-8},
                                 {ScalingFamily::inverse_gaussian(0.8), 1e-8},
                                 {ScalingFamily::positive_stable(0.6), 1e-5},
                                 {ScalingFamily::pvf(1.2, 0.5), 1e-4},
                                 {ScalingFamily::compound_poisson_gamma(1.1, 0.7, true), 1e-4},
                                 {ScalingFamily::compound_poisson_gamma(1.1, 0.7, false), 1e-4}};
  for (const Row& row : rows) {
    REQUIRE(row.f.has_density());
    const double mass = oracle::integrate_positive([&](double th) { return row.f.density(th); });
    CHECK(mass == doctest::Approx(1.0 - row.f.mass_at_zero()).epsilon(row.tol));
  }
}

TEST_CASE("density reproduces the laplace transform by quadrature") {
  struct Row {
    ScalingFamily f;
    double tol;
  };
  const std::vector<Row> rows = {{ScalingFamily::gamma(2.2), 1e-8},
                                 {ScalingFamily::inverse_gaussian(1.1), 1e-8},
                                 {ScalingFamily::positive_stable(0.5), 1e-5},
                                 {ScalingFamily::pvf(0.9, 0.4), 1e-4},
                                 {ScalingFamily::compound_poisson_gamma(0.8, 0.6, false), 1e-4}};
  for (const Row& row : rows) {
    for (double u : {0.4, 1.3}) {
      const double mixed = oracle::integrate_positive(
                               [&](double th) { return std::exp(-u * th) * row.f.density(th); }) +
                           row.f.mass_at_zero();
      CHECK(mixed == doctest::Approx(row.f.laplace(u)).epsilon(row.tol));
    }
  }
}

TEST_CASE("gamma density is the textbook formula") {
  const ScalingFamily f = ScalingFamily::gamma(1.5);
  for (double x : {0.1, 0.9, 3.0}) {
    const double want = std::pow(x, 0.5) * std::exp(-x) / std::tgamma(1.5);
    CHECK(f.density(x) == doctest::Approx(want).epsilon(1e-12));
    CHECK(f.log_density(x) == doctest::Approx(std::log(want)).epsilon(1e-10));
  }
}

TEST_CASE("inverse gaussian density is the textbook formula") {
  const double s2 = 0.8;
  const ScalingFamily f = ScalingFamily::inverse_gaussian(s2);
  for (double x : {0.2, 1.0, 2.5}) {
    const double want = std::exp(-(x - 1.0) * (x - 1.0) / (2.0 * s2 * x)) /
                        std::sqrt(2.0 * 3.141592653589793 * s2 * x * x * x);
    CHECK(f.density(x) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("stable density: Levy closed form at alpha one half") {
  // laplace exp(-sqrt(u)) is the Levy law with density
  // x^{-3/2} exp(-1/(4x)) / (2 sqrt(pi))
  for (double x : {0.05, 0.3, 1.0, 4.0}) {
    const double want =
        std::pow(x, -1.5) * std::exp(-0.25 / x) / (2.0 * std::sqrt(3.141592653589793));
    CHECK(stable_density(x, 0.5) == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("stable cdf integrates the density") {
  for (double alpha : {0.4, 0.7}) {
    for (double x : {0.5, 1.5}) {
      const double integral =
          oracle::simpson([&](double t) { return stable_density(t, alpha); }, 1e-9, x, 4000);
      CHECK(stable_cdf(x, alpha) == doctest::Approx(integral).epsilon(1e-6));
    }
  }
}

TEST_CASE("matrix transform on a one-by-one matrix is the scalar transform") {
  for (const ScalingFamily& f : all_families()) {
    for (double u : {0.2, 1.0, 3.5}) {
      Matrix m(1, 1);
      m(0, 0) = u;
      CHECK(f.laplace_matrix(m)(0, 0) == doctest::Approx(f.laplace(u)).epsilon(1e-10));
      CHECK(f.laplace_matrix_deriv(m)(0, 0) ==
            doctest::Approx(f.laplace_deriv(u)).epsilon(1e-9));
    }
  }
}

TEST_CASE("matrix transform acts eigenvalue-wise on diagonal matrices") {
  Matrix d(3, 3);
  d(0, 0) = 0.3;
  d(1, 1) = 1.0;
  d(2, 2) = 4.0;
  for (const ScalingFamily& f : all_families()) {
    const Matrix l = f.laplace_matrix(d);
    for (int i = 0; i < 3; ++i) {
      CHECK(l(i, i) == doctest::Approx(f.laplace(d(i, i))).epsilon(1e-10));
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(std::abs(l(i, j)) < 1e-10);
    }
  }
}

TEST_CASE("matrix transform matches the mixture oracle on a non-normal matrix") {
  // M = z(-T) for a sub-intensity T, the argument shape used everywhere
  const Matrix t =
      Matrix::from_rows({{-2.0, 1.5, 0.0}, {0.0, -3.0, 2.0}, {0.2, 0.0, -1.0}});
  Matrix m = t;
  m *= -0.8;
  struct Row {
    ScalingFamily f;
    double tol;
  };
  const std::vector<Row> rows = {{ScalingFamily::gamma(1.7), 1e-7},
                                 {ScalingFamily::inverse_gaussian(0.9), 1e-7},
                                 {ScalingFamily::positive_stable(0.6), 1e-4},
                                 {ScalingFamily::pvf(1.2, 0.5), 1e-4}};
  for (const Row& row : rows) {
    const Matrix closed = row.f.laplace_matrix(m);
    Matrix mixed(3, 3);
    const double atom = row.f.mass_at_zero();
    for (int i = 0; i < 3; ++i) mixed(i, i) = atom;
    // entrywise integration of expm(-theta m) against the density
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        mixed(i, j) += oracle::integrate_positive(
            [&](double th) {
              Matrix a = m;
              a *= -th;
              return row.f.density(th) * oracle::taylor_expm(a)(i, j);
            },
            20.0, 1200);
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(closed(i, j) == doctest::Approx(mixed(i, j)).epsilon(row.tol));
  }
}

TEST_CASE("higher matrix derivatives: closed forms where they exist") {
  Matrix d(2, 2);
  d(0, 0) = 0.4;
  d(1, 1) = 2.0;

  const ScalingFamily g = ScalingFamily::gamma(1.5);
  for (int n : {1, 2, 3}) {
    const Matrix ln = g.laplace_matrix_deriv_n(d, n);
    for (int i = 0; i < 2; ++i) {
      // (-1)^n alpha (alpha+1) ... (alpha+n-1) (1+u)^{-alpha-n}
      double coef = 1.0;
      for (int k = 0; k < n; ++k) coef *= 1.5 + k;
      const double want =
          (n % 2 ? -1.0 : 1.0) * coef * std::pow(1.0 + d(i, i), -1.5 - n);
      CHECK(ln(i, i) == doctest::Approx(want).epsilon(1e-10));
    }
  }

  const ScalingFamily disc = ScalingFamily::discrete({0.5, 2.0}, {0.4, 0.6});
  const Matrix l2 = disc.laplace_matrix_deriv_n(d, 2);
  for (int i = 0; i < 2; ++i) {
    const double u = d(i, i);
    const double want =
        0.4 * 0.25 * std::exp(-0.5 * u) + 0.6 * 4.0 * std::exp(-2.0 * u);
    CHECK(l2(i, i) == doctest::Approx(want).epsilon(1e-10));
  }

  CHECK_THROWS_AS(ScalingFamily::positive_stable(0.6).laplace_matrix_deriv_n(d, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::inverse_gaussian(1.0).laplace_matrix_deriv_n(d, 2),
                  std::invalid_argument);
}

TEST_CASE("unshifted compound Poisson carries an atom at zero") {
  const double rho = 1.1;
  const ScalingFamily f = ScalingFamily::compound_poisson_gamma(rho, 0.7, false);
  CHECK(f.mass_at_zero() == doctest::Approx(std::exp(-rho)).epsilon(1e-12));
  Rng rng(555);
  long zeros = 0;
  const long n = 200000;
  for (long i = 0; i < n; ++i) zeros += f.sample(rng) == 0.0;
  const double p = std::exp(-rho);
  CHECK(std::abs(static_cast<double>(zeros) / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  // the shifted variant is strictly positive
  const ScalingFamily g = ScalingFamily::compound_poisson_gamma(rho, 0.7, true);
  CHECK(g.mass_at_zero() == 0.0);
  for (int i = 0; i < 1000; ++i) CHECK(g.sample(rng) > 0.0);
}

TEST_CASE("family constructors reject invalid parameters") {
  CHECK_THROWS_AS(ScalingFamily::gamma(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::positive_stable(1.2), std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::positive_stable(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::inverse_gaussian(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::pvf(1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::discrete({1.0, 2.0}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::discrete({1.0, -2.0}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::discrete({1.0, 2.0}, {0.9, 0.9}), std::invalid_argument);
  CHECK_THROWS_AS(ScalingFamily::degenerate(0.0), std::invalid_argument);
}

TEST_CASE("discrete and degenerate densities are refused") {
  CHECK_FALSE(ScalingFamily::discrete({1.0}, {1.0}).has_density());
  CHECK_FALSE(ScalingFamily::degenerate(1.0).has_density());
  CHECK_THROWS_AS(ScalingFamily::degenerate(1.0).density(1.0), std::domain_error);
}
