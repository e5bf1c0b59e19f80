#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "em_internal.hpp"
#include "oracles.hpp"
#include "siph/em.hpp"
#include "siph/rng.hpp"
#include "siph/siph.hpp"

using namespace siph;
using detail::MixWeights;
using detail::MvData;
using detail::ThetaGrid;
using detail::UniData;
using detail::UniStats;

namespace {

PhaseParams general2() {
  PhaseParams p;
  p.pi = {0.4, 0.6};
  p.t = Matrix::from_rows({{-1.0, 0.3}, {0.5, -2.0}});
  return p;
}

PhaseParams expo1(double rate) {
  PhaseParams p;
  p.pi = {1.0};
  p.t = Matrix(1, 1);
  p.t(0, 0) = -rate;
  return p;
}

std::vector<double> pi_row(const PhaseParams& p, double s) {
  Matrix m = p.t;
  m *= s;
  const Matrix e = oracle::taylor_expm(m);
  std::vector<double> out(p.dim(), 0.0);
  for (int k = 0; k < p.dim(); ++k)
    for (int l = 0; l < p.dim(); ++l) out[l] += p.pi[k] * e(k, l);
  return out;
}

std::vector<double> exp_col(const PhaseParams& p, double s, const std::vector<double>& v) {
  Matrix m = p.t;
  m *= s;
  const Matrix e = oracle::taylor_expm(m);
  std::vector<double> out(p.dim(), 0.0);
  for (int k = 0; k < p.dim(); ++k)
    for (int l = 0; l < p.dim(); ++l) out[k] += e(k, l) * v[l];
  return out;
}

// Conditional-statistic kernel int_0^s (pi exp(Tu))_k (exp(T(s-u)) v)_l du
// done with plain Simpson; independent of the propagator convolution blocks.
double conv_kl(const PhaseParams& p, double s, const std::vector<double>& v, int k, int l) {
  return oracle::simpson(
      [&](double u) { return pi_row(p, u)[k] * exp_col(p, s - u, v)[l]; }, 0.0, s, 600);
}

struct RowStats {
  std::vector<double> b, soj, exitc;
  Matrix jump;
  double like = 0.0;
};

// Exact-row statistics at one scaling value theta, straight from the
// definitions of the conditional expectations given absorption at theta z.
RowStats exact_row_oracle(const PhaseParams& p, double theta, double z) {
  const int d = p.dim();
  const double s = theta * z;
  const std::vector<double> t = p.exit();
  RowStats r{std::vector<double>(d), std::vector<double>(d), std::vector<double>(d), Matrix(d, d)};
  const std::vector<double> dt = exp_col(p, s, t);
  const std::vector<double> pr = pi_row(p, s);
  double f = 0.0;
  for (int k = 0; k < d; ++k) f += p.pi[k] * dt[k];
  r.like = theta * f;
  for (int k = 0; k < d; ++k) {
    r.b[k] = p.pi[k] * dt[k] / f;
    r.soj[k] = conv_kl(p, s, t, k, k) / f;
    r.exitc[k] = pr[k] * t[k] / f;
    for (int l = 0; l < d; ++l)
      if (l != k) r.jump(k, l) = p.t(k, l) * conv_kl(p, s, t, k, l) / f;
  }
  return r;
}

// Censored-row statistics: the window part integrates against the survival
// vector and the tail part runs the chain from exp(Ts) to absorption.
RowStats censored_row_oracle(const PhaseParams& p, double theta, double z) {
  const int d = p.dim();
  const double s = theta * z;
  const std::vector<double> t = p.exit();
  const std::vector<double> ones(d, 1.0);
  RowStats r{std::vector<double>(d), std::vector<double>(d), std::vector<double>(d), Matrix(d, d)};
  const std::vector<double> de = exp_col(p, s, ones);
  const std::vector<double> pr = pi_row(p, s);
  double surv = 0.0;
  for (int k = 0; k < d; ++k) surv += p.pi[k] * de[k];
  r.like = surv;
  const Matrix inv_negt = inverse(p.t * (-1.0));
  std::vector<double> q(d, 0.0);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) q[k] += pr[l] * inv_negt(l, k);
  for (int k = 0; k < d; ++k) {
    r.b[k] = p.pi[k] * de[k] / surv;
    r.soj[k] = (conv_kl(p, s, ones, k, k) + q[k]) / surv;
    r.exitc[k] = t[k] * q[k] / surv;
    for (int l = 0; l < d; ++l)
      if (l != k) r.jump(k, l) = p.t(k, l) * (conv_kl(p, s, ones, k, l) + q[k]) / surv;
  }
  return r;
}

ThetaGrid point_grid(double theta) {
  QuadratureConfig cfg;
  return ThetaGrid::build(ScalingFamily::degenerate(theta), cfg);
}

void check_trace_monotone(const std::vector<double>& trace) {
  REQUIRE(!trace.empty());
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1] - 1e-8);
}

}  // namespace

TEST_CASE("gamma grid reweighting reproduces gamma moments at other shapes") {
  QuadratureConfig cfg;
  cfg.n_nodes = 100;
  ThetaGrid g = ThetaGrid::build(ScalingFamily::gamma(1.5), cfg);
  for (double a : {0.9, 1.5, 2.4}) {
    MixWeights mw = detail::mixing_weights(g, ScalingFamily::gamma(a));
    CHECK(mw.raw_mass == doctest::Approx(1.0).epsilon(1e-6));
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < g.theta.size(); ++j) {
      m1 += mw.w[j] * g.theta[j];
      m2 += mw.w[j] * g.theta[j] * g.theta[j];
    }
    CHECK(m1 == doctest::Approx(a).epsilon(1e-6));
    CHECK(m2 == doctest::Approx(a * (a + 1.0)).epsilon(1e-5));
  }
}

TEST_CASE("log grids integrate the scaling density") {
  QuadratureConfig cfg;
  cfg.n_nodes = 100;
  ThetaGrid g = ThetaGrid::build(ScalingFamily::inverse_gaussian(0.8), cfg);
  MixWeights mw = detail::mixing_weights(g, ScalingFamily::inverse_gaussian(0.8));
  CHECK(mw.raw_mass == doctest::Approx(1.0).epsilon(1e-7));
  double m1 = 0.0;
  for (std::size_t j = 0; j < g.theta.size(); ++j) m1 += mw.w[j] * g.theta[j];
  CHECK(m1 == doctest::Approx(1.0).epsilon(1e-6));  // unit-mean family
}

TEST_CASE("power-scaled grid reweighting matches the transform quadrature") {
  QuadratureConfig cfg;
  cfg.n_nodes = 120;
  ThetaGrid g = ThetaGrid::build_mml(0.6, cfg);
  for (double a : {0.5, 0.7}) {
    MixWeights mw = detail::mixing_weights_mml(g, a);
    CHECK(mw.raw_mass == doctest::Approx(1.0).epsilon(1e-6));
    for (double u : {0.4, 1.1}) {
      double lt = 0.0;
      for (std::size_t j = 0; j < g.theta.size(); ++j) lt += mw.w[j] * std::exp(-u * g.theta[j]);
      const double want = oracle::integrate_positive(
          [&](double th) { return std::exp(mml_theta_log_density(th, a)) * std::exp(-u * th); },
          24.0, 3000);
      CHECK(lt == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("grid construction rejects unusable configurations") {
  QuadratureConfig small;
  small.n_nodes = 5;
  CHECK_THROWS_AS(ThetaGrid::build(ScalingFamily::gamma(1.0), small), std::invalid_argument);
  CHECK_THROWS_AS(ThetaGrid::build_mml(0.5, small), std::invalid_argument);
  QuadratureConfig cfg;
  CHECK_THROWS_AS(ThetaGrid::build_mml(1.0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(ThetaGrid::build(ScalingFamily::positive_stable(1.0), cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(ThetaGrid::build(ScalingFamily::pvf(1.0, 0.5), cfg), std::invalid_argument);
  CHECK_THROWS_AS(
      ThetaGrid::build(ScalingFamily::compound_poisson_gamma(1.0, 0.5, true), cfg),
      std::invalid_argument);
}

TEST_CASE("conditional sweep matches the Simpson oracle on a point grid") {
  const PhaseParams p = general2();
  const double theta = 1.4;
  ThetaGrid grid = point_grid(theta);
  const std::vector<double> mixw = {1.0};

  UniData ud;
  ud.z = {0.6, 1.1};
  ud.censored = {0, 1};
  ud.w = {1.0, 1.0};
  ud.any_censored = true;

  const UniStats s = detail::estep_uni(p, grid, mixw, ud);
  const RowStats ex = exact_row_oracle(p, theta, 0.6);
  const RowStats ce = censored_row_oracle(p, theta, 1.1);

  CHECK(s.wsum == doctest::Approx(2.0));
  CHECK(s.bad_index == -1);
  CHECK(s.loglik == doctest::Approx(std::log(ex.like) + std::log(ce.like)).epsilon(1e-10));
  CHECK(s.node_post[0] == doctest::Approx(2.0).epsilon(1e-10));
  for (int k = 0; k < 2; ++k) {
    CHECK(s.b[k] == doctest::Approx(ex.b[k] + ce.b[k]).epsilon(1e-7));
    CHECK(s.ztheta[k] == doctest::Approx(ex.soj[k] + ce.soj[k]).epsilon(1e-7));
    CHECK(s.nexit[k] == doctest::Approx(ex.exitc[k] + ce.exitc[k]).epsilon(1e-7));
    for (int l = 0; l < 2; ++l)
      if (l != k)
        CHECK(s.njump(k, l) == doctest::Approx(ex.jump(k, l) + ce.jump(k, l)).epsilon(1e-7));
  }
}

TEST_CASE("conditional sweep mixes nodes by posterior weight") {
  const PhaseParams p = general2();
  QuadratureConfig cfg;
  ThetaGrid grid = ThetaGrid::build(ScalingFamily::discrete({0.7, 1.8}, {0.4, 0.6}), cfg);
  const std::vector<double> mixw = detail::mixing_weights(grid, ScalingFamily::discrete({0.7, 1.8}, {0.4, 0.6})).w;

  UniData ud;
  ud.z = {0.9};
  ud.censored = {0};
  ud.w = {1.0};

  const UniStats s = detail::estep_uni(p, grid, mixw, ud);
  const RowStats r1 = exact_row_oracle(p, 0.7, 0.9);
  const RowStats r2 = exact_row_oracle(p, 1.8, 0.9);
  const double f1 = 0.4 * r1.like, f2 = 0.6 * r2.like;
  const double fn = f1 + f2;
  CHECK(s.loglik == doctest::Approx(std::log(fn)).epsilon(1e-10));
  CHECK(s.node_post[0] == doctest::Approx(f1 / fn).epsilon(1e-9));
  CHECK(s.node_post[1] == doctest::Approx(f2 / fn).epsilon(1e-9));
  for (int k = 0; k < 2; ++k) {
    const double want_b = (f1 * r1.b[k] + f2 * r2.b[k]) / fn;
    const double want_soj = (f1 * r1.soj[k] + f2 * r2.soj[k]) / fn;
    CHECK(s.b[k] == doctest::Approx(want_b).epsilon(1e-7));
    CHECK(s.ztheta[k] == doctest::Approx(want_soj).epsilon(1e-7));
  }
}

TEST_CASE("conditional sweep reports the first impossible row") {
  const PhaseParams p = expo1(1.0);
  ThetaGrid grid = point_grid(1.0);
  UniData ud;
  ud.z = {1.0, 1e9};  // second row beyond any representable propagator
  ud.censored = {0, 0};
  ud.w = {1.0, 1.0};
  const UniStats s = detail::estep_uni(p, grid, {1.0}, ud);
  CHECK(std::isinf(s.loglik));
  CHECK(s.bad_index == 1);
}

TEST_CASE("mixture loglik agrees with the closed-form finite mixture") {
  const PhaseParams p = general2();
  const ScalingFamily sc = ScalingFamily::discrete({0.6, 1.3, 2.1}, {0.3, 0.4, 0.3});
  QuadratureConfig cfg;
  ThetaGrid grid = ThetaGrid::build(sc, cfg);
  const std::vector<double> mixw = detail::mixing_weights(grid, sc).w;

  SiphModel m;
  m.phase = p;
  m.intensity = Intensity::constant();
  m.scaling = sc;
  std::vector<Observation> data;
  data.push_back({0.5, false, {}});
  data.push_back({1.4, true, {}});
  data.push_back({2.3, false, {}});

  UniData ud;
  for (const Observation& o : data) {
    ud.z.push_back(o.y);
    ud.censored.push_back(o.censored ? 1 : 0);
    ud.w.push_back(1.0);
    ud.any_censored |= o.censored;
  }
  const double via_grid = detail::mixture_loglik_uni(p, grid, mixw, ud);
  const double via_model = siph_loglik(m, data);
  CHECK(via_grid == doctest::Approx(via_model).epsilon(1e-10));

  const UniStats s = detail::estep_uni(p, grid, mixw, ud);
  CHECK(s.loglik == doctest::Approx(via_grid).epsilon(1e-12));
}

TEST_CASE("shared sweep decouples margins on a point grid") {
  const std::vector<PhaseParams> phases = {expo1(1.0), expo1(0.8)};
  ThetaGrid grid = point_grid(1.0);
  MvData md;
  md.z = {{0.5, 1.2}, {0.9, 0.4}};
  md.w = {1.0, 1.0};
  const detail::MvStats s = detail::estep_shared(phases, grid, {1.0}, md);
  double want = 0.0;
  for (int n = 0; n < 2; ++n)
    want += std::log(1.0 * std::exp(-md.z[0][n])) + std::log(0.8 * std::exp(-0.8 * md.z[1][n]));
  CHECK(s.loglik == doctest::Approx(want).epsilon(1e-10));
  CHECK(s.wsum == doctest::Approx(2.0));
  // exponential margins spend the whole scaled horizon in their single state
  CHECK(s.margin[0].ztheta[0] == doctest::Approx(0.5 + 1.2).epsilon(1e-9));
  CHECK(s.margin[1].ztheta[0] == doctest::Approx(0.9 + 0.4).epsilon(1e-9));
  CHECK(s.margin[0].nexit[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.margin[0].b[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("shared-shock sweep decouples margins on point grids") {
  const std::array<PhaseParams, 2> phases = {expo1(1.0), expo1(2.0)};
  ThetaGrid g0 = point_grid(0.5), g1 = point_grid(0.25), g2 = point_grid(0.75);
  const std::vector<double> w1 = {1.0};
  MvData md;
  md.z = {{0.8, 1.5}, {0.6, 0.9}};
  md.w = {1.0, 1.0};
  const double eta1 = 1.0, eta2 = 1.0;
  const double th1 = (0.5 + 0.25) / eta1, th2 = (0.5 + 0.75) / eta2;
  const detail::CorrStats s =
      detail::estep_corr(phases, {&g0, &g1, &g2}, {&w1, &w1, &w1}, eta1, eta2, md);
  double want = 0.0;
  for (int n = 0; n < 2; ++n) {
    want += std::log(th1 * 1.0 * std::exp(-1.0 * th1 * md.z[0][n]));
    want += std::log(th2 * 2.0 * std::exp(-2.0 * th2 * md.z[1][n]));
  }
  CHECK(s.loglik == doctest::Approx(want).epsilon(1e-10));
  CHECK(s.bad_index == -1);
  CHECK(s.margin[0].ztheta[0] == doctest::Approx(th1 * (0.8 + 1.5)).epsilon(1e-9));
  CHECK(s.margin[1].ztheta[0] == doctest::Approx(th2 * (0.6 + 0.9)).epsilon(1e-9));
  CHECK(s.post_w0[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.post_w1[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("phase maximisation matches the closed-form ratios") {
  PhaseParams p = general2();
  UniStats s(2, 1);
  s.b = {2.0, 1.0};
  s.ztheta = {4.0, 2.0};
  s.njump(0, 1) = 3.0;
  s.njump(1, 0) = 1.0;
  s.nexit = {1.0, 2.0};
  s.wsum = 3.0;
  detail::mstep_phase(p, s);
  CHECK(p.pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(p.pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(p.t(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(p.t(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.t(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(p.t(1, 1) == doctest::Approx(-1.5).epsilon(1e-12));
  p.validate();

  // a state the posterior never visited keeps its generator row
  PhaseParams q = general2();
  UniStats empty_row(2, 1);
  empty_row.b = {1.0, 0.0};
  empty_row.ztheta = {2.0, 0.0};
  empty_row.njump(0, 1) = 1.0;
  empty_row.nexit = {1.0, 0.0};
  empty_row.wsum = 1.0;
  const double keep0 = q.t(1, 0), keep1 = q.t(1, 1);
  detail::mstep_phase(q, empty_row);
  CHECK(q.t(1, 0) == keep0);
  CHECK(q.t(1, 1) == keep1);
}

TEST_CASE("random initial phases are valid and mean-matched") {
  Rng rng(5);
  for (int p : {1, 3, 5}) {
    PhaseParams ph = detail::init_phase(p, EmOptions::Structure::general, rng, 2.5);
    ph.validate();
    CHECK(ph_mean(ph) == doctest::Approx(2.5).epsilon(1e-9));
  }
  PhaseParams cox = detail::init_phase(4, EmOptions::Structure::coxian, rng, 1.0);
  cox.validate();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (j != i && j != i + 1) CHECK(cox.t(i, j) == 0.0);
  CHECK(cox.pi[0] > 0.0);
}

TEST_CASE("single-state fit recovers the exponential rate") {
  Rng rng(17);
  std::vector<Observation> data;
  double mean = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double y = rng.exponential() / 2.0;
    data.push_back({y, false, {}});
    mean += y;
  }
  mean /= 200.0;
  EmOptions opt;
  opt.max_iter = 50;
  const FitReport r = em_cph(data, 1, ScalingFamily::degenerate(1.0), opt);
  CHECK(r.converged);
  check_trace_monotone(r.loglik_trace);
  const SiphModel& m = std::get<SiphModel>(r.model);
  CHECK(m.phase.t(0, 0) == doctest::Approx(-1.0 / mean).epsilon(1e-6));
  const double want_ll = 200.0 * (std::log(1.0 / mean) - 1.0);
  CHECK(r.loglik() == doctest::Approx(want_ll).epsilon(1e-9));
  CHECK(r.iterations == static_cast<int>(r.loglik_trace.size()) - 1);
}

TEST_CASE("fit drivers keep the objective non-decreasing") {
  Rng rng(23);
  SiphModel truth;
  truth.phase = general2();
  truth.intensity = Intensity::weibull(1.3);
  truth.scaling = ScalingFamily::gamma(1.6);
  std::vector<Observation> data;
  for (int i = 0; i < 60; ++i) data.push_back({siph_sample(truth, rng), false, {}});
  data[5].censored = true;
  data[20].censored = true;

  EmOptions opt;
  opt.max_iter = 12;
  opt.tol = 1e-14;  // run the full budget
  opt.quad.n_nodes = 40;
  opt.inner_evals = 8;

  SUBCASE("scaled fit with intensity update") {
    const FitReport r = em_siph(data, 2, Intensity::weibull(1.0), ScalingFamily::gamma(1.0), opt);
    check_trace_monotone(r.loglik_trace);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 12);
    CHECK(r.loglik_trace.size() == 13);
    CHECK(r.loglik() >= r.loglik_trace.front());
    const SiphModel& m = std::get<SiphModel>(r.model);
    m.validate();
    CHECK(m.intensity.params()[0] > 0.0);
  }

  SUBCASE("inverse gaussian scaling") {
    const FitReport r = em_cph(data, 2, ScalingFamily::inverse_gaussian(1.0), opt);
    check_trace_monotone(r.loglik_trace);
    const SiphModel& m = std::get<SiphModel>(r.model);
    CHECK(m.scaling.sigma2() > 0.0);
  }

  SUBCASE("deterministic restarts") {
    const FitReport a = em_siph(data, 2, Intensity::weibull(1.0), ScalingFamily::gamma(1.0), opt);
    const FitReport b = em_siph(data, 2, Intensity::weibull(1.0), ScalingFamily::gamma(1.0), opt);
    REQUIRE(a.loglik_trace.size() == b.loglik_trace.size());
    for (std::size_t i = 0; i < a.loglik_trace.size(); ++i)
      CHECK(a.loglik_trace[i] == b.loglik_trace[i]);
  }
}

TEST_CASE("covariate coefficients move toward the generating tilt") {
  Rng rng(29);
  SiphModel truth;
  truth.phase = expo1(1.0);
  truth.intensity = Intensity::constant();
  truth.scaling = ScalingFamily::gamma(2.5);
  truth.beta = {0.8};
  std::vector<Observation> data;
  for (int i = 0; i < 500; ++i) {
    const double x = i % 2 == 0 ? -1.0 : 1.0;
    data.push_back({siph_sample(truth, rng, {x}), false, {x}});
  }
  EmOptions opt;
  opt.max_iter = 40;
  opt.quad.n_nodes = 50;
  const FitReport r = em_siph(data, 1, Intensity::constant(), ScalingFamily::gamma(1.5), opt);
  check_trace_monotone(r.loglik_trace);
  const SiphModel& m = std::get<SiphModel>(r.model);
  REQUIRE(m.beta.size() == 1);
  CHECK(std::abs(m.beta[0] - 0.8) < 0.25);
}

TEST_CASE("time-transformed fit tracks a synthetic sample") {
  Rng rng(31);
  SiphModel truth;
  truth.phase = general2();
  truth.intensity = Intensity::gompertz(0.8);
  truth.scaling = ScalingFamily::gamma(1.6);
  std::vector<Observation> data;
  for (int i = 0; i < 400; ++i) data.push_back({siph_sample(truth, rng), false, {}});

  EmOptions opt;
  opt.max_iter = 40;
  opt.quad.n_nodes = 60;
  opt.inner_evals = 10;
  const FitReport r =
      em_siph(data, 2, Intensity::gompertz(1.2), ScalingFamily::gamma(1.0), opt);
  check_trace_monotone(r.loglik_trace);
  const SiphModel& m = std::get<SiphModel>(r.model);
  CHECK(m.intensity.family() == Intensity::Family::gompertz);
  CHECK(m.intensity.params()[0] > 0.0);

  // fitted and generating survival stay close where the sample lives
  std::vector<double> ys;
  for (const Observation& o : data) ys.push_back(o.y);
  std::sort(ys.begin(), ys.end());
  for (double q : {0.25, 0.5, 0.75}) {
    const double y = ys[static_cast<std::size_t>(q * 399)];
    CHECK(std::abs(siph_survival(m, y) - siph_survival(truth, y)) < 0.08);
  }
}

TEST_CASE("power-scaled fit improves and stays inside the index window") {
  Rng rng(37);
  const PhaseParams truth = general2();
  std::vector<Observation> data;
  for (int i = 0; i < 100; ++i) data.push_back({mml_sample(truth, 0.75, rng), false, {}});
  EmOptions opt;
  opt.max_iter = 15;
  opt.quad.n_nodes = 60;
  const FitReport r = em_mml(data, 2, 0.6, opt);
  check_trace_monotone(r.loglik_trace);
  const MmlModel& m = std::get<MmlModel>(r.model);
  CHECK(m.alpha > 0.02);
  CHECK(m.alpha <= 0.99);
  CHECK(r.loglik() >= r.loglik_trace.front());
}

TEST_CASE("shared and shared-shock fits improve over their starts") {
  Rng rng(41);
  SharedModel truth;
  truth.margins = {expo1(1.0), expo1(0.6)};
  truth.intensities = {Intensity::constant(), Intensity::constant()};
  truth.scaling = ScalingFamily::gamma(1.4);
  std::vector<MvObservation> data;
  for (int i = 0; i < 80; ++i) data.push_back({shared_sample(truth, rng)});

  EmOptions opt;
  opt.max_iter = 10;
  opt.tol = 1e-14;
  opt.quad.n_nodes = 30;
  opt.inner_evals = 6;

  SUBCASE("shared scaling") {
    const FitReport r = em_mv_cph(data, {1, 2}, ScalingFamily::gamma(1.0), opt);
    check_trace_monotone(r.loglik_trace);
    const SharedModel& m = std::get<SharedModel>(r.model);
    CHECK(m.dim() == 2);
    CHECK(m.scaling.alpha() > 0.0);
  }

  SUBCASE("shared scaling with transforms") {
    const FitReport r = em_mv_siph(data, {1, 1},
                                   {Intensity::weibull(1.0), Intensity::weibull(1.0)},
                                   ScalingFamily::gamma(1.0), opt);
    check_trace_monotone(r.loglik_trace);
    const SharedModel& m = std::get<SharedModel>(r.model);
    CHECK(m.intensities[0].params()[0] > 0.0);
  }

  SUBCASE("shared gamma shock") {
    const FitReport r = em_corr_cph(data, {1, 1}, 1.0, 1.0, 1.0, opt);
    check_trace_monotone(r.loglik_trace);
    const CorrelatedGammaModel& m = std::get<CorrelatedGammaModel>(r.model);
    m.validate();
    CHECK(m.eta1 == doctest::Approx(2.0));  // frozen at the initial shape sum
    CHECK(m.eta2 == doctest::Approx(2.0));
    CHECK(m.scaling_correlation() > 0.0);
    CHECK(m.scaling_correlation() < 1.0);
  }
}

TEST_CASE("density approximation recovers a member of the family") {
  const double a = 1.5;
  auto target = [&](double y) { return a * std::pow(1.0 + y, -a - 1.0); };
  EmOptions opt;
  opt.max_iter = 120;
  opt.tol = 1e-12;
  opt.quad.n_nodes = 60;
  const FitReport r =
      approximate_density(target, 0.0, 60.0, 48, 1, Intensity::constant(),
                          ScalingFamily::gamma(1.0), opt);
  check_trace_monotone(r.loglik_trace);
  const SiphModel& m = std::get<SiphModel>(r.model);
  CHECK(m.scaling.alpha() == doctest::Approx(1.5).epsilon(0.12));
  for (double y : {0.5, 2.0, 5.0}) {
    CHECK(std::abs(siph_density(m, y) - target(y)) < 5e-3);
  }
}

TEST_CASE("density approximation reports mass lost off the grid") {
  auto target = [](double y) { return 1.5 * std::pow(1.0 + y, -2.5); };
  EmOptions opt;
  opt.max_iter = 3;
  const FitReport r = approximate_density(target, 0.0, 2.0, 24, 1, Intensity::constant(),
                                          ScalingFamily::gamma(1.0), opt);
  CHECK(r.note.find("target mass on the grid is") != std::string::npos);
}

TEST_CASE("narrow scaling grids are reported in the note") {
  Rng rng(47);
  std::vector<Observation> data;
  for (int i = 0; i < 40; ++i) data.push_back({rng.exponential(), false, {}});
  EmOptions opt;
  opt.max_iter = 3;
  opt.quad.n_nodes = 20;
  opt.quad.log_range = 1.0;
  const FitReport r = em_cph(data, 1, ScalingFamily::inverse_gaussian(1.0), opt);
  CHECK(r.note.find("scaling grid captures mass") != std::string::npos);
}

TEST_CASE("fit drivers validate their inputs") {
  std::vector<Observation> data = {{1.0, false, {}}, {2.0, false, {}}};
  EmOptions bad;
  bad.max_iter = 0;
  CHECK_THROWS_AS(em_cph(data, 1, ScalingFamily::gamma(1.0), bad), std::invalid_argument);
  bad = EmOptions{};
  bad.tol = 0.0;
  CHECK_THROWS_AS(em_cph(data, 1, ScalingFamily::gamma(1.0), bad), std::invalid_argument);
  bad = EmOptions{};
  bad.inner_evals = 2;
  CHECK_THROWS_AS(em_cph(data, 1, ScalingFamily::gamma(1.0), bad), std::invalid_argument);

  CHECK_THROWS_AS(em_cph({}, 1, ScalingFamily::gamma(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(em_cph({{-1.0, false, {}}}, 1, ScalingFamily::gamma(1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(em_cph(data, 0, ScalingFamily::gamma(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(em_cph(data, 1, ScalingFamily::pvf(1.0, 0.5)), std::invalid_argument);

  CHECK_THROWS_AS(em_mml(data, 1, 1.5), std::invalid_argument);
  std::vector<Observation> with_x = {{1.0, false, {1.0}}, {2.0, false, {1.0}}};
  CHECK_THROWS_AS(em_mml(with_x, 1, 0.5), std::invalid_argument);
  std::vector<Observation> ragged = {{1.0, false, {1.0}}, {2.0, false, {}}};
  CHECK_THROWS_AS(em_siph(ragged, 1, Intensity::constant(), ScalingFamily::gamma(1.0)),
                  std::invalid_argument);

  std::vector<MvObservation> mv = {{{1.0, 2.0}}, {{0.5, 0.7}}};
  CHECK_THROWS_AS(em_mv_cph(mv, {1, 1, 1}, ScalingFamily::gamma(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(em_mv_cph(mv, {1}, ScalingFamily::gamma(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(em_corr_cph(mv, {1, 1}, -1.0, 1.0, 1.0), std::invalid_argument);
  std::vector<MvObservation> mv_bad = {{{1.0, -2.0}}};
  CHECK_THROWS_AS(em_mv_cph(mv_bad, {1, 1}, ScalingFamily::gamma(1.0)), std::invalid_argument);

  CHECK_THROWS_AS(approximate_density([](double) { return 1.0; }, 0.0, 1.0, 5, 1,
                                      Intensity::constant(), ScalingFamily::gamma(1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(approximate_density([](double) { return 1.0; }, 2.0, 1.0, 20, 1,
                                      Intensity::constant(), ScalingFamily::gamma(1.0)),
                  std::invalid_argument);
}
