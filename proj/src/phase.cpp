#include "siph/phase.hpp"

#include <cmath>
#include <stdexcept>

#include "siph/matfun.hpp"

namespace siph {

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Intensity::Intensity(Family f, double eta, double gamma)
    : family_(f), eta_(eta), gamma_(gamma) {}

Intensity Intensity::constant() { return Intensity(Family::constant, 0, 0); }

Intensity Intensity::pareto(double eta) {
  require(eta > 0.0, "pareto intensity: eta must be positive");
  return Intensity(Family::pareto, eta, 0);
}

Intensity Intensity::weibull(double eta) {
  require(eta > 0.0, "weibull intensity: eta must be positive");
  return Intensity(Family::weibull, eta, 0);
}

Intensity Intensity::lognormal(double gamma) {
  require(gamma > 1.0, "lognormal intensity: gamma must exceed 1");
  return Intensity(Family::lognormal, 0, gamma);
}

Intensity Intensity::loglogistic(double eta, double gamma) {
  require(eta > 0.0, "loglogistic intensity: eta must be positive");
  require(gamma > 0.0, "loglogistic intensity: gamma must be positive");
  return Intensity(Family::loglogistic, eta, gamma);
}

Intensity Intensity::gompertz(double eta) {
  require(eta > 0.0, "gompertz intensity: eta must be positive");
  return Intensity(Family::gompertz, eta, 0);
}

std::string Intensity::family_name() const {
  switch (family_) {
    case Family::constant: return "constant";
    case Family::pareto: return "pareto";
    case Family::weibull: return "weibull";
    case Family::lognormal: return "lognormal";
    case Family::loglogistic: return "loglogistic";
    case Family::gompertz: return "gompertz";
  }
  return "?";
}

double Intensity::lambda(double t) const {
  switch (family_) {
    case Family::constant:
      return 1.0;
    case Family::pareto:
      return 1.0 / (t + eta_);
    case Family::weibull:
      return eta_ * std::pow(t, eta_ - 1.0);
    case Family::lognormal: {
      const double l = std::log(t + 1.0);
      return gamma_ * std::pow(l, gamma_ - 1.0) / (t + 1.0);
    }
    case Family::loglogistic:
      return eta_ * std::pow(t, eta_ - 1.0) /
             (std::pow(t, eta_) + std::pow(gamma_, eta_));
    case Family::gompertz:
      return std::exp(eta_ * t);
  }
  return 0.0;
}

double Intensity::hinv(double y) const {
  switch (family_) {
    case Family::constant:
      return y;
    case Family::pareto:
      return std::log1p(y / eta_);
    case Family::weibull:
      return std::pow(y, eta_);
    case Family::lognormal:
      return std::pow(std::log1p(y), gamma_);
    case Family::loglogistic:
      return std::log1p(std::pow(y / gamma_, eta_));
    case Family::gompertz:
      return std::expm1(eta_ * y) / eta_;
  }
  return 0.0;
}

double Intensity::h(double z) const {
  switch (family_) {
    case Family::constant:
      return z;
    case Family::pareto:
      return eta_ * std::expm1(z);
    case Family::weibull:
      return std::pow(z, 1.0 / eta_);
    case Family::lognormal:
      return std::expm1(std::pow(z, 1.0 / gamma_));
    case Family::loglogistic:
      return gamma_ * std::pow(std::expm1(z), 1.0 / eta_);
    case Family::gompertz:
      return std::log1p(eta_ * z) / eta_;
  }
  return 0.0;
}

std::vector<double> Intensity::params() const {
  switch (family_) {
    case Family::constant: return {};
    case Family::pareto: return {eta_};
    case Family::weibull: return {eta_};
    case Family::lognormal: return {gamma_};
    case Family::loglogistic: return {eta_, gamma_};
    case Family::gompertz: return {eta_};
  }
  return {};
}

std::vector<std::string> Intensity::param_names() const {
  switch (family_) {
    case Family::constant: return {};
    case Family::pareto: return {"eta"};
    case Family::weibull: return {"eta"};
    case Family::lognormal: return {"gamma"};
    case Family::loglogistic: return {"eta", "gamma"};
    case Family::gompertz: return {"eta"};
  }
  return {};
}

Intensity Intensity::with_params(const std::vector<double>& p) const {
  const auto expect = params().size();
  require(p.size() == expect, "intensity: wrong parameter count");
  switch (family_) {
    case Family::constant: return constant();
    case Family::pareto: return pareto(p[0]);
    case Family::weibull: return weibull(p[0]);
    case Family::lognormal: return lognormal(p[0]);
    case Family::loglogistic: return loglogistic(p[0], p[1]);
    case Family::gompertz: return gompertz(p[0]);
  }
  return *this;
}

std::vector<double> PhaseParams::exit() const {
  const int p = dim();
  std::vector<double> e(p, 0.0);
  for (int i = 0; i < p; ++i) {
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += t(i, j);
    e[i] = -s;
    if (e[i] < 0.0 && e[i] > -1e-12) e[i] = 0.0;
  }
  return e;
}

void PhaseParams::validate() const {
  require(t.square(), "phase params: T must be square");
  const int p = t.rows();
  require(p >= 1, "phase params: empty dimension");
  require(static_cast<int>(pi.size()) == p, "phase params: pi and T dimensions differ");
  double s = 0.0;
  for (double v : pi) {
    require(v >= 0.0, "phase params: pi has a negative entry");
    s += v;
  }
  require(std::abs(s - 1.0) <= 1e-12, "phase params: pi must sum to 1 within 1e-12");
  for (int i = 0; i < p; ++i) {
    require(t(i, i) < 0.0, "phase params: T diagonal must be strictly negative");
    double row = 0.0;
    for (int j = 0; j < p; ++j) {
      if (i != j) require(t(i, j) >= -1e-12, "phase params: T off-diagonal must be nonnegative");
      row += t(i, j);
    }
    require(row <= 1e-12, "phase params: T row sums must be nonpositive");
  }
  require(!lu_factor(t).singular, "phase params: T must be nonsingular");
}

double ph_survival(const PhaseParams& p, double y) {
  if (y < 0.0) throw std::invalid_argument("ph_survival: negative argument");
  const Matrix e = ScaledExpm(p.t).eval(y);
  const std::vector<double> row = vecmat(p.pi, e);
  double s = 0.0;
  for (double v : row) s += v;
  return s;
}

double ph_density(const PhaseParams& p, double y) {
  if (y < 0.0) throw std::invalid_argument("ph_density: negative argument");
  const Matrix e = ScaledExpm(p.t).eval(y);
  return dot(vecmat(p.pi, e), p.exit());
}

double ph_mean(const PhaseParams& p) {
  // E = pi (-T)^{-1} e
  Matrix neg = p.t;
  neg *= -1.0;
  Matrix ones(p.dim(), 1);
  for (int i = 0; i < p.dim(); ++i) ones(i, 0) = 1.0;
  const Matrix sol = solve(neg, std::move(ones));
  double m = 0.0;
  for (int i = 0; i < p.dim(); ++i) m += p.pi[i] * sol(i, 0);
  return m;
}

double iph_survival(const PhaseParams& p, const Intensity& f, double y) {
  return ph_survival(p, f.hinv(y));
}

double iph_density(const PhaseParams& p, const Intensity& f, double y) {
  return f.lambda(y) * ph_density(p, f.hinv(y));
}

double ph_sample(const PhaseParams& p, Rng& rng) {
  const int n = p.dim();
  const std::vector<double> exit = p.exit();
  // initial state
  int k = n - 1;
  {
    double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += p.pi[i];
      if (u < acc) { k = i; break; }
    }
  }
  double time = 0.0;
  while (true) {
    const double rate = -p.t(k, k);
    time += rng.exponential() / rate;
    // one uniform decides exit vs. each destination state
    double u = rng.uniform() * rate;
    double acc = exit[k];
    if (u < acc) return time;
    int next = -1;
    for (int l = 0; l < n; ++l) {
      if (l == k) continue;
      acc += p.t(k, l);
      if (u < acc) { next = l; break; }
    }
    if (next < 0) return time;  // numerical edge: treat as absorption
    k = next;
  }
}

double iph_sample(const PhaseParams& p, const Intensity& f, Rng& rng) {
  return f.h(ph_sample(p, rng));
}

}  // namespace siph
