#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "siph/phase.hpp"
#include "siph/rng.hpp"

using namespace siph;

namespace {

PhaseParams coxian3() {
  PhaseParams p;
  p.pi = {1.0, 0.0, 0.0};
  p.t = Matrix::from_rows({{-2.0, 1.5, 0.0}, {0.0, -3.0, 2.0}, {0.0, 0.0, -1.0}});
  return p;
}

PhaseParams general2() {
  PhaseParams p;
  p.pi = {0.4, 0.6};
  p.t = Matrix::from_rows({{-1.0, 0.3}, {0.5, -2.0}});
  return p;
}

}  // namespace

TEST_CASE("survival and density match the Taylor-series oracle") {
  for (const PhaseParams& p : {coxian3(), general2()}) {
    for (double y : {0.01, 0.3, 1.0, 2.5, 7.0}) {
      CHECK(ph_survival(p, y) ==
            doctest::Approx(oracle::phase_survival_taylor(p.pi, p.t, y)).epsilon(1e-11));
      CHECK(ph_density(p, y) ==
            doctest::Approx(oracle::phase_density_taylor(p.pi, p.t, y)).epsilon(1e-11));
    }
  }
}

TEST_CASE("density is minus the derivative of survival") {
  const PhaseParams p = general2();
  for (double y : {0.2, 1.0, 3.0}) {
    const double d = oracle::deriv([&](double t) { return ph_survival(p, t); }, y, 1e-4);
    CHECK(ph_density(p, y) == doctest::Approx(-d).epsilon(1e-8));
  }
}

TEST_CASE("exponential special case is exact") {
  PhaseParams p;
  p.pi = {1.0};
  p.t = Matrix::from_rows({{-2.0}});
  CHECK(ph_survival(p, 1.3) == doctest::Approx(std::exp(-2.6)).epsilon(1e-14));
  CHECK(ph_density(p, 1.3) == doctest::Approx(2.0 * std::exp(-2.6)).epsilon(1e-14));
  CHECK(ph_mean(p) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("mean equals the integral of the survival function") {
  for (const PhaseParams& p : {coxian3(), general2()}) {
    const double integral =
        oracle::simpson([&](double y) { return ph_survival(p, y); }, 0.0, 60.0, 20000);
    CHECK(ph_mean(p) == doctest::Approx(integral).epsilon(1e-8));
  }
}

TEST_CASE("intensity families: h inverts hinv and lambda is its derivative") {
  const std::vector<Intensity> families = {
      Intensity::constant(),          Intensity::pareto(1.3),
      Intensity::weibull(2.2),        Intensity::lognormal(1.8),
      Intensity::loglogistic(1.4, 2.0), Intensity::gompertz(0.7)};
  for (const Intensity& f : families) {
    for (double y : {0.05, 0.4, 1.0, 3.0, 9.0}) {
      CHECK(f.h(f.hinv(y)) == doctest::Approx(y).epsilon(1e-9));
      const double d = oracle::deriv([&](double t) { return f.hinv(t); }, y, 1e-5 * (1.0 + y));
      CHECK(f.lambda(y) == doctest::Approx(d).epsilon(1e-6));
    }
    CHECK(f.hinv(0.0) == doctest::Approx(0.0));
  }
}

TEST_CASE("intensity parameter round trip") {
  const Intensity f = Intensity::loglogistic(1.4, 2.0);
  const std::vector<double> p = f.params();
  REQUIRE(p.size() == 2);
  const Intensity g = f.with_params({2.8, 1.0});
  CHECK(g.params()[0] == doctest::Approx(2.8));
  CHECK(g.params()[1] == doctest::Approx(1.0));
  CHECK(g.family() == f.family());
  CHECK(Intensity::constant().params().empty());
}

TEST_CASE("time change identity: transformed survival equals base at hinv") {
  const PhaseParams p = general2();
  for (const Intensity& f : {Intensity::weibull(1.7), Intensity::pareto(0.8)}) {
    for (double y : {0.2, 1.0, 4.0}) {
      CHECK(iph_survival(p, f, y) == doctest::Approx(ph_survival(p, f.hinv(y))).epsilon(1e-12));
      // density picks up the lambda factor
      CHECK(iph_density(p, f, y) ==
            doctest::Approx(ph_density(p, f.hinv(y)) * f.lambda(y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sampled absorption times reproduce the survival curve") {
  const PhaseParams p = coxian3();
  Rng rng(77);
  const long n = 200000;
  std::vector<double> ys(n);
  double mean = 0.0;
  for (long i = 0; i < n; ++i) {
    ys[i] = ph_sample(p, rng);
    mean += ys[i];
  }
  mean /= n;
  CHECK(std::abs(mean - ph_mean(p)) < 0.02);
  for (double y : {0.3, 1.0, 2.5}) {
    long count = 0;
    for (double v : ys) count += v > y;
    const double emp = static_cast<double>(count) / n;
    const double want = ph_survival(p, y);
    CHECK(std::abs(emp - want) < 4.0 * std::sqrt(want * (1 - want) / n) + 1e-12);
  }
}

TEST_CASE("inhomogeneous sampling matches the transformed survival") {
  const PhaseParams p = general2();
  const Intensity f = Intensity::weibull(2.0);
  Rng rng(78);
  const long n = 100000;
  for (double y : {0.4, 0.9, 1.6}) {
    long count = 0;
    Rng r2(rng.next_u64());
    for (long i = 0; i < n; ++i) count += iph_sample(p, f, r2) > y;
    const double emp = static_cast<double>(count) / n;
    const double want = iph_survival(p, f, y);
    CHECK(std::abs(emp - want) < 4.0 * std::sqrt(want * (1 - want) / n) + 1e-12);
  }
}

TEST_CASE("validate rejects malformed parameters") {
  PhaseParams p = general2();
  p.pi = {0.5, 0.6};  // sums above one
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  PhaseParams q = general2();
  q.t(0, 1) = -0.1;  // negative off-diagonal
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);

  PhaseParams r = general2();
  r.t(0, 0) = 1.0;  // positive diagonal
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);

  PhaseParams s = general2();
  s.t(1, 0) = 3.0;  // row sum above zero
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  CHECK_NOTHROW(general2().validate());
  CHECK_NOTHROW(coxian3().validate());
}

TEST_CASE("intensity factories reject invalid parameters") {
  CHECK_THROWS_AS(Intensity::weibull(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Intensity::pareto(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(Intensity::lognormal(1.0), std::invalid_argument);  // needs gamma > 1
  CHECK_THROWS_AS(Intensity::loglogistic(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Intensity::gompertz(0.0), std::invalid_argument);
}
