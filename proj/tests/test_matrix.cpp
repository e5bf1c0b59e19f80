#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "siph/matrix.hpp"
#include "siph/rng.hpp"

using namespace siph;

namespace {

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("matmul matches the definition") {
  Rng rng(1);
  for (int n : {1, 2, 3, 5, 9}) {
    const Matrix a = random_matrix(rng, n, n + 1);
    const Matrix b = random_matrix(rng, n + 1, n);
    const Matrix c = a * b;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double want = 0.0;
        for (int k = 0; k < n + 1; ++k) want += a(i, k) * b(k, j);
        CHECK(c(i, j) == doctest::Approx(want).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("matmul_into accumulate adds on top") {
  Rng rng(2);
  const Matrix a = random_matrix(rng, 4, 4);
  const Matrix b = random_matrix(rng, 4, 4);
  Matrix c = random_matrix(rng, 4, 4);
  const Matrix c0 = c;
  matmul_into(a, b, c, true);
  const Matrix ab = a * b;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(c(i, j) == doctest::Approx(c0(i, j) + ab(i, j)).epsilon(1e-13));
}

TEST_CASE("matvec, vecmat and dot agree with loops") {
  Rng rng(3);
  const Matrix a = random_matrix(rng, 3, 5);
  std::vector<double> x = {1.0, -2.0, 0.5, 3.0, -1.0};
  const std::vector<double> ax = matvec(a, x);
  for (int i = 0; i < 3; ++i) {
    double want = 0.0;
    for (int j = 0; j < 5; ++j) want += a(i, j) * x[j];
    CHECK(ax[i] == doctest::Approx(want));
  }
  std::vector<double> u = {2.0, -1.0, 0.25};
  const std::vector<double> ua = vecmat(u, a);
  for (int j = 0; j < 5; ++j) {
    double want = 0.0;
    for (int i = 0; i < 3; ++i) want += u[i] * a(i, j);
    CHECK(ua[j] == doctest::Approx(want));
  }
  CHECK(dot(x, x) == doctest::Approx(1 + 4 + 0.25 + 9 + 1));
  CHECK(dot(x.data(), x.data(), 5) == doctest::Approx(dot(x, x)));
}

TEST_CASE("lu solve reproduces known solutions") {
  Rng rng(4);
  for (int n : {1, 2, 4, 8}) {
    const Matrix a = random_matrix(rng, n, n) + 3.0 * Matrix::identity(n);
    const Matrix x_true = random_matrix(rng, n, 2);
    const Matrix b = a * x_true;
    const Matrix x = solve(a, b);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(x(i, j) == doctest::Approx(x_true(i, j)).epsilon(1e-10));
  }
}

TEST_CASE("inverse times original is the identity") {
  Rng rng(5);
  const Matrix a = random_matrix(rng, 6, 6) + 4.0 * Matrix::identity(6);
  const Matrix ai = inverse(a);
  const Matrix prod = a * ai;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(prod(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
}

TEST_CASE("singular systems are reported") {
  Matrix a = Matrix::from_rows({{1.0, 2.0}, {2.0, 4.0}});
  const Lu lu = lu_factor(a);
  CHECK(lu.singular);
}

TEST_CASE("norms and transpose") {
  const Matrix a = Matrix::from_rows({{1.0, -7.0}, {2.0, 3.0}});
  CHECK(a.one_norm() == doctest::Approx(10.0));  // max column abs-sum
  CHECK(a.max_abs() == doctest::Approx(7.0));
  const Matrix at = a.transpose();
  CHECK(at(0, 1) == 2.0);
  CHECK(at(1, 0) == -7.0);
}

TEST_CASE("pivoting handles a zero leading entry") {
  const Matrix a = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const Matrix b = Matrix::from_rows({{3.0}, {5.0}});
  const Matrix x = solve(a, b);
  CHECK(x(0, 0) == doctest::Approx(5.0));
  CHECK(x(1, 0) == doctest::Approx(3.0));
}
