#include "siph/siph.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "siph/matfun.hpp"
#include "siph/quadrature.hpp"

namespace siph {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double covariate_factor(const std::vector<double>& beta, const std::vector<double>& x) {
  if (beta.size() != x.size())
    throw std::invalid_argument("covariate vector length does not match beta");
  double s = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) s += beta[i] * x[i];
  return std::exp(s);
}

// Mixture grid shared by the power-scaled evaluators.  Node positions cover
// theta on a doubly exponential log scale; the range is wide enough that the
// truncated mass near zero stays below 1e-8 even when the mixing density does
// not vanish at the origin.
const QuadRule& mml_rule() {
  static const QuadRule rule = exp_sinh_log(200, 18.0);
  return rule;
}

}  // namespace

void SiphModel::validate() const {
  phase.validate();
  for (double b : beta)
    if (!std::isfinite(b)) throw std::invalid_argument("beta coefficients must be finite");
}

double siph_survival(const SiphModel& m, double y, const std::vector<double>& x) {
  if (y <= 0.0) return 1.0;
  if (std::isinf(y)) return m.scaling.mass_at_zero();
  const double z = m.intensity.hinv(y) * covariate_factor(m.beta, x);
  Matrix neg_t = m.phase.t * (-z);
  Matrix l = m.scaling.laplace_matrix(neg_t);
  const int p = m.phase.dim();
  std::vector<double> ones(p, 1.0);
  std::vector<double> le = matvec(l, ones);
  double s = dot(m.phase.pi.data(), le.data(), p);
  if (s < 0.0) s = 0.0;
  if (s > 1.0) s = 1.0;
  return s;
}

double siph_density(const SiphModel& m, double y, const std::vector<double>& x) {
  if (y <= 0.0 || std::isinf(y)) return 0.0;
  const double cf = covariate_factor(m.beta, x);
  const double z = m.intensity.hinv(y) * cf;
  Matrix neg_t = m.phase.t * (-z);
  Matrix ld = m.scaling.laplace_matrix_deriv(neg_t);
  std::vector<double> exit = m.phase.exit();
  std::vector<double> v = matvec(ld, exit);
  double f = -m.intensity.lambda(y) * cf * dot(m.phase.pi.data(), v.data(), m.phase.dim());
  return f > 0.0 ? f : 0.0;
}

double siph_sample(const SiphModel& m, Rng& rng, const std::vector<double>& x) {
  const double cf = covariate_factor(m.beta, x);
  const double theta = m.scaling.sample(rng);
  if (theta == 0.0) return kInf;  // atom of the unshifted compound Poisson mix
  const double z = ph_sample(m.phase, rng);
  return m.intensity.h(z / (theta * cf));
}

double siph_quantile(const SiphModel& m, double q, const std::vector<double>& x) {
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
  const double target = 1.0 - q;
  double lo = 0.0, hi = 1.0;
  int grow = 0;
  while (siph_survival(m, hi, x) > target) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 1020)
      throw std::domain_error("quantile level lies beyond the survival plateau");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (siph_survival(m, mid, x) > target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-10 * (1.0 + std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

double siph_loglik(const SiphModel& m, const std::vector<Observation>& data, LoglikDiag* diag) {
  double ll = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Observation& o = data[n];
    const double v = o.censored ? siph_survival(m, o.y, o.x) : siph_density(m, o.y, o.x);
    if (!(v > 0.0) || !std::isfinite(v)) {
      if (diag != nullptr) {
        diag->bad_index = static_cast<long>(n);
        diag->message = o.censored ? "zero survival at censored observation"
                                   : "zero density at observation";
      }
      return -kInf;
    }
    ll += std::log(v);
  }
  return ll;
}

double mml_theta_log_density(double theta, double alpha) {
  if (!(theta > 0.0)) return -kInf;
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::domain_error("power-scaled mixing density requires alpha in (0,1)");
  const double s = std::pow(theta, -1.0 / alpha);
  return stable_log_density(s, alpha) - std::log(alpha) - (1.0 / alpha + 1.0) * std::log(theta);
}

double mml_survival(const PhaseParams& p, double alpha, double y) {
  if (y <= 0.0) return 1.0;
  if (alpha == 1.0) return ph_survival(p, y);
  const QuadRule& rule = mml_rule();
  const double z = std::pow(y, alpha);
  ScaledExpm propagator(p.t);
  Matrix d(p.dim(), p.dim());
  std::vector<double> ones(p.dim(), 1.0);
  double s = 0.0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double theta = rule.nodes[j];
    const double lw = mml_theta_log_density(theta, alpha);
    if (lw < -745.0) continue;
    propagator.eval(theta * z, d);
    std::vector<double> de = matvec(d, ones);
    s += rule.weights[j] * std::exp(lw) * dot(p.pi.data(), de.data(), p.dim());
  }
  if (s < 0.0) s = 0.0;
  if (s > 1.0) s = 1.0;
  return s;
}

double mml_density(const PhaseParams& p, double alpha, double y) {
  if (y <= 0.0) return 0.0;
  if (alpha == 1.0) return ph_density(p, y);
  const QuadRule& rule = mml_rule();
  const double z = std::pow(y, alpha);
  const double jac = alpha * std::pow(y, alpha - 1.0);
  ScaledExpm propagator(p.t);
  Matrix d(p.dim(), p.dim());
  std::vector<double> exit = p.exit();
  double f = 0.0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double theta = rule.nodes[j];
    const double lw = mml_theta_log_density(theta, alpha);
    if (lw < -745.0) continue;
    propagator.eval(theta * z, d);
    std::vector<double> dt = matvec(d, exit);
    f += rule.weights[j] * std::exp(lw) * theta * dot(p.pi.data(), dt.data(), p.dim());
  }
  f *= jac;
  return f > 0.0 ? f : 0.0;
}

double mml_sample(const PhaseParams& p, double alpha, Rng& rng) {
  const double z = ph_sample(p, rng);
  if (alpha == 1.0) return z;
  const double s = rng.positive_stable(alpha);
  return s * std::pow(z, 1.0 / alpha);
}

double mml_loglik(const MmlModel& m, const std::vector<Observation>& data, LoglikDiag* diag) {
  double ll = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Observation& o = data[n];
    const double v = o.censored ? mml_survival(m.phase, m.alpha, o.y)
                                : mml_density(m.phase, m.alpha, o.y);
    if (!(v > 0.0) || !std::isfinite(v)) {
      if (diag != nullptr) {
        diag->bad_index = static_cast<long>(n);
        diag->message = "zero likelihood at observation";
      }
      return -kInf;
    }
    ll += std::log(v);
  }
  return ll;
}

namespace {

// The tail class depends only on how fast the scaling family's transform
// decays (power, root-exponential or full exponential in its argument) and on
// the growth of hinv; phase parameters only move constants.
TailClass classify(double decay_power, bool power_decay, const Intensity& f) {
  using K = TailClass::Kind;
  const double e = decay_power;
  switch (f.family()) {
    case Intensity::Family::constant:
      // hinv(y) = y, a unit-shape Weibull transform.
      if (power_decay) return {K::regularly_varying, e};
      return {K::weibull_type, e};
    case Intensity::Family::pareto:
    case Intensity::Family::loglogistic:
      // hinv grows like log y, so any transform decay stays subpolynomial.
      return {K::slowly_varying, std::nullopt};
    case Intensity::Family::weibull: {
      const double shape = f.params()[0] * e;
      if (power_decay) return {K::regularly_varying, shape};
      return {K::weibull_type, shape};
    }
    case Intensity::Family::lognormal: {
      const double g = f.params()[0];
      if (power_decay) return {K::slowly_varying, std::nullopt};
      const double shape = g * e;
      if (shape < 1.0 - 1e-12) return {K::slowly_varying, std::nullopt};
      if (shape <= 1.0 + 1e-12) return {K::regularly_varying, std::nullopt};
      return {K::lognormal_type, shape};
    }
    case Intensity::Family::gompertz: {
      const double rate = f.params()[0] * e;
      if (power_decay) return {K::exponential_type, rate};
      return {K::gumbel_type, std::nullopt};
    }
  }
  throw std::logic_error("unreachable intensity family");
}

}  // namespace

TailClass tail_class(const SiphModel& m) {
  switch (m.scaling.kind()) {
    case ScalingFamily::Kind::gamma:
      return classify(m.scaling.alpha(), true, m.intensity);
    case ScalingFamily::Kind::positive_stable:
      if (m.scaling.alpha() >= 1.0)
        throw std::invalid_argument("tail classification needs stable index below one");
      return classify(m.scaling.alpha(), false, m.intensity);
    case ScalingFamily::Kind::inverse_gaussian:
      return classify(0.5, false, m.intensity);
    case ScalingFamily::Kind::pvf:
      if (m.scaling.gamma_param() >= 1.0)
        throw std::invalid_argument("tail classification needs tempering exponent below one");
      return classify(m.scaling.gamma_param(), false, m.intensity);
    default:
      throw std::invalid_argument("tail classification unsupported for this scaling family");
  }
}

std::string to_string(const TailClass& t) {
  using K = TailClass::Kind;
  char buf[64];
  auto with = [&](const char* name, const char* tag) -> std::string {
    if (!t.index) return name;
    std::snprintf(buf, sizeof(buf), "%s(%s=%.7g)", name, tag, *t.index);
    return buf;
  };
  switch (t.kind) {
    case K::slowly_varying: return "slowly-varying";
    case K::regularly_varying: return with("regularly-varying", "index");
    case K::weibull_type: return with("weibull-type", "shape");
    case K::lognormal_type: return with("lognormal-type", "shape");
    case K::exponential_type: return with("exponential-type", "rate");
    case K::gumbel_type: return "gumbel-type";
  }
  return "";
}

}  // namespace siph
