#include "siph/scaling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "siph/matfun.hpp"
#include "siph/quadrature.hpp"

namespace siph {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

const QuadRule& zolotarev_rule() {
  // 300 points drive the density error below 1e-11 over alpha in (0,1);
  // the rule is built once, so per-call cost stays linear in the node count.
  static const QuadRule rule = tanh_sinh(300, 0.0, M_PI);
  return rule;
}

// log A(u) of the integral representation,
// A(u) = [sin(alpha u)^alpha sin((1-alpha)u)^(1-alpha) / sin u]^{1/(1-alpha)}.
inline double log_a(double u, double alpha) {
  return (alpha * std::log(std::sin(alpha * u)) +
          (1.0 - alpha) * std::log(std::sin((1.0 - alpha) * u)) -
          std::log(std::sin(u))) /
         (1.0 - alpha);
}

Matrix add_scaled_identity(Matrix m, double c) {
  for (int i = 0; i < m.rows(); ++i) m(i, i) += c;
  return m;
}

Matrix identity_minus(const Matrix& m) {
  Matrix r = m;
  r *= -1.0;
  for (int i = 0; i < r.rows(); ++i) r(i, i) += 1.0;
  return r;
}

double log_gamma_pdf(double x, double shape) {
  return (shape - 1.0) * std::log(x) - x - std::lgamma(shape);
}

}  // namespace

double stable_log_density(double x, double alpha) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    throw std::domain_error("stable_log_density: alpha must lie in (0,1)");
  if (!(x > 0.0)) return kNegInf;
  const double rho = alpha / (1.0 - alpha);
  const double log_xr = -rho * std::log(x);
  const QuadRule& q = zolotarev_rule();
  // logsumexp of log(A w) - A x^{-rho} over the nodes
  double best = kNegInf;
  std::vector<double> ex(q.nodes.size(), kNegInf);
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double la = log_a(q.nodes[i], alpha);
    const double lt = la + log_xr;  // log(A xr)
    if (lt > 700.0) continue;       // exp(-A xr) underflows to zero
    ex[i] = la + std::log(q.weights[i]) - std::exp(lt);
    if (ex[i] > best) best = ex[i];
  }
  if (best == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double e : ex)
    if (e != kNegInf) acc += std::exp(e - best);
  return std::log(rho) - std::log(M_PI) + (-rho - 1.0) * std::log(x) + best +
         std::log(acc);
}

double stable_density(double x, double alpha) {
  const double l = stable_log_density(x, alpha);
  return l == kNegInf ? 0.0 : std::exp(l);
}

double stable_cdf(double x, double alpha) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    throw std::domain_error("stable_cdf: alpha must lie in (0,1)");
  if (!(x > 0.0)) return 0.0;
  const double rho = alpha / (1.0 - alpha);
  const double log_xr = -rho * std::log(x);
  const QuadRule& q = zolotarev_rule();
  double acc = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double lt = log_a(q.nodes[i], alpha) + log_xr;
    if (lt > 700.0) continue;
    acc += q.weights[i] * std::exp(-std::exp(lt));
  }
  return acc / M_PI;
}

ScalingFamily ScalingFamily::gamma(double alpha) {
  require(alpha > 0.0, "gamma scaling: alpha must be positive");
  ScalingFamily f;
  f.kind_ = Kind::gamma;
  f.alpha_ = alpha;
  return f;
}

ScalingFamily ScalingFamily::positive_stable(double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "stable scaling: alpha must lie in (0,1]");
  ScalingFamily f;
  f.kind_ = Kind::positive_stable;
  f.alpha_ = alpha;
  return f;
}

ScalingFamily ScalingFamily::inverse_gaussian(double sigma2) {
  require(sigma2 > 0.0, "inverse gaussian scaling: sigma2 must be positive");
  ScalingFamily f;
  f.kind_ = Kind::inverse_gaussian;
  f.sigma2_ = sigma2;
  return f;
}

ScalingFamily ScalingFamily::pvf(double eta, double gamma) {
  require(eta > 0.0, "pvf scaling: eta must be positive");
  require(gamma > 0.0 && gamma <= 1.0, "pvf scaling: gamma must lie in (0,1]");
  ScalingFamily f;
  f.kind_ = Kind::pvf;
  f.eta_ = eta;
  f.gamma_ = gamma;
  return f;
}

ScalingFamily ScalingFamily::compound_poisson_gamma(double rho, double alpha,
                                                    bool shifted) {
  require(rho > 0.0, "compound poisson scaling: rho must be positive");
  require(alpha > 0.0, "compound poisson scaling: alpha must be positive");
  ScalingFamily f;
  f.kind_ = Kind::compound_poisson_gamma;
  f.rho_ = rho;
  f.alpha_ = alpha;
  f.shifted_ = shifted;
  return f;
}

ScalingFamily ScalingFamily::discrete(std::vector<double> atoms,
                                      std::vector<double> weights) {
  require(!atoms.empty(), "discrete scaling: no atoms");
  require(atoms.size() == weights.size(), "discrete scaling: atom/weight count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    require(atoms[i] > 0.0, "discrete scaling: atoms must be positive");
    require(weights[i] >= 0.0, "discrete scaling: weights must be nonnegative");
    s += weights[i];
  }
  require(std::abs(s - 1.0) <= 1e-9, "discrete scaling: weights must sum to 1");
  for (double& w : weights) w /= s;
  ScalingFamily f;
  f.kind_ = Kind::discrete;
  f.atoms_ = std::move(atoms);
  f.weights_ = std::move(weights);
  return f;
}

ScalingFamily ScalingFamily::degenerate(double point) {
  require(point > 0.0, "degenerate scaling: point must be positive");
  ScalingFamily f;
  f.kind_ = Kind::degenerate;
  f.point_ = point;
  return f;
}

std::string ScalingFamily::name() const {
  switch (kind_) {
    case Kind::gamma: return "gamma";
    case Kind::positive_stable: return "positive_stable";
    case Kind::inverse_gaussian: return "inverse_gaussian";
    case Kind::pvf: return "pvf";
    case Kind::compound_poisson_gamma: return "compound_poisson_gamma";
    case Kind::discrete: return "discrete";
    case Kind::degenerate: return "degenerate";
  }
  return "?";
}

double ScalingFamily::laplace(double u) const {
  switch (kind_) {
    case Kind::gamma:
      return std::pow(1.0 + u, -alpha_);
    case Kind::positive_stable:
      return std::exp(-std::pow(u, alpha_));
    case Kind::inverse_gaussian:
      return std::exp((1.0 - std::sqrt(1.0 + 2.0 * sigma2_ * u)) / sigma2_);
    case Kind::pvf: {
      if (gamma_ == 1.0) return std::exp(-u);
      const double m = eta_ * (1.0 - gamma_);
      const double c = m / gamma_;
      return std::exp(c * (1.0 - std::pow(1.0 + u / m, gamma_)));
    }
    case Kind::compound_poisson_gamma: {
      const double base = std::exp(-rho_ * (1.0 - std::pow(1.0 + u, -alpha_)));
      return shifted_ ? std::pow(1.0 + u, -alpha_) * base : base;
    }
    case Kind::discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        s += weights_[i] * std::exp(-atoms_[i] * u);
      return s;
    }
    case Kind::degenerate:
      return std::exp(-point_ * u);
  }
  return 0.0;
}

double ScalingFamily::laplace_deriv(double u) const {
  switch (kind_) {
    case Kind::gamma:
      return -alpha_ * std::pow(1.0 + u, -alpha_ - 1.0);
    case Kind::positive_stable:
      return -alpha_ * std::pow(u, alpha_ - 1.0) * std::exp(-std::pow(u, alpha_));
    case Kind::inverse_gaussian:
      return -laplace(u) / std::sqrt(1.0 + 2.0 * sigma2_ * u);
    case Kind::pvf: {
      if (gamma_ == 1.0) return -std::exp(-u);
      const double m = eta_ * (1.0 - gamma_);
      return -std::pow(1.0 + u / m, gamma_ - 1.0) * laplace(u);
    }
    case Kind::compound_poisson_gamma: {
      const double p = std::pow(1.0 + u, -alpha_ - 1.0);
      const double base = std::exp(-rho_ * (1.0 - std::pow(1.0 + u, -alpha_)));
      if (!shifted_) return -rho_ * alpha_ * p * base;
      return -alpha_ * p * (1.0 + rho_ * std::pow(1.0 + u, -alpha_)) * base;
    }
    case Kind::discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        s += weights_[i] * atoms_[i] * std::exp(-atoms_[i] * u);
      return -s;
    }
    case Kind::degenerate:
      return -point_ * std::exp(-point_ * u);
  }
  return 0.0;
}

Matrix ScalingFamily::laplace_matrix(const Matrix& m) const {
  if (!m.square()) throw std::invalid_argument("laplace_matrix: matrix not square");
  const int n = m.rows();
  switch (kind_) {
    case Kind::gamma:
      return frac_power(add_scaled_identity(m, 1.0), -alpha_);
    case Kind::positive_stable: {
      if (m.max_abs() == 0.0) return Matrix::identity(n);
      Matrix p = frac_power(m, alpha_);
      p *= -1.0;
      return expm(p);
    }
    case Kind::inverse_gaussian: {
      Matrix root = frac_power(add_scaled_identity(m * (2.0 * sigma2_), 1.0), 0.5);
      Matrix arg = identity_minus(root);
      arg *= 1.0 / sigma2_;
      return expm(arg);
    }
    case Kind::pvf: {
      if (gamma_ == 1.0) {
        Matrix neg = m;
        neg *= -1.0;
        return expm(neg);
      }
      const double mm = eta_ * (1.0 - gamma_);
      const double c = mm / gamma_;
      Matrix arg = identity_minus(frac_power(add_scaled_identity(m * (1.0 / mm), 1.0), gamma_));
      arg *= c;
      return expm(arg);
    }
    case Kind::compound_poisson_gamma: {
      Matrix inner = frac_power(add_scaled_identity(m, 1.0), -alpha_);
      Matrix arg = identity_minus(inner);
      arg *= -rho_;
      Matrix base = expm(arg);
      if (!shifted_) return base;
      return inner * base;
    }
    case Kind::discrete: {
      Matrix s(n, n);
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        Matrix e = expm(m * (-atoms_[i]));
        e *= weights_[i];
        s += e;
      }
      return s;
    }
    case Kind::degenerate:
      return expm(m * (-point_));
  }
  throw std::logic_error("laplace_matrix: unhandled kind");
}

Matrix ScalingFamily::laplace_matrix_deriv(const Matrix& m) const {
  if (!m.square()) throw std::invalid_argument("laplace_matrix_deriv: matrix not square");
  const int n = m.rows();
  switch (kind_) {
    case Kind::gamma: {
      Matrix r = frac_power(add_scaled_identity(m, 1.0), -alpha_ - 1.0);
      r *= -alpha_;
      return r;
    }
    case Kind::positive_stable: {
      // -alpha M^{alpha-1} exp(-M^alpha)
      Matrix pa = frac_power(m, alpha_);
      Matrix r = frac_power(m, alpha_ - 1.0);
      pa *= -1.0;
      r = r * expm(pa);
      r *= -alpha_;
      return r;
    }
    case Kind::inverse_gaussian: {
      Matrix half = frac_power(add_scaled_identity(m * (2.0 * sigma2_), 1.0), -0.5);
      Matrix r = half * laplace_matrix(m);
      r *= -1.0;
      return r;
    }
    case Kind::pvf: {
      if (gamma_ == 1.0) {
        Matrix neg = m;
        neg *= -1.0;
        Matrix r = expm(neg);
        r *= -1.0;
        return r;
      }
      const double mm = eta_ * (1.0 - gamma_);
      Matrix fac = frac_power(add_scaled_identity(m * (1.0 / mm), 1.0), gamma_ - 1.0);
      Matrix r = fac * laplace_matrix(m);
      r *= -1.0;
      return r;
    }
    case Kind::compound_poisson_gamma: {
      Matrix p1 = frac_power(add_scaled_identity(m, 1.0), -alpha_ - 1.0);
      Matrix inner = frac_power(add_scaled_identity(m, 1.0), -alpha_);
      Matrix arg = identity_minus(inner);
      arg *= -rho_;
      Matrix base = expm(arg);
      if (!shifted_) {
        Matrix r = p1 * base;
        r *= -rho_ * alpha_;
        return r;
      }
      Matrix mix = add_scaled_identity(inner * rho_, 1.0);
      Matrix r = p1 * mix;
      r = r * base;
      r *= -alpha_;
      return r;
    }
    case Kind::discrete: {
      Matrix s(n, n);
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        Matrix e = expm(m * (-atoms_[i]));
        e *= -weights_[i] * atoms_[i];
        s += e;
      }
      return s;
    }
    case Kind::degenerate: {
      Matrix r = expm(m * (-point_));
      r *= -point_;
      return r;
    }
  }
  throw std::logic_error("laplace_matrix_deriv: unhandled kind");
}

Matrix ScalingFamily::laplace_matrix_deriv_n(const Matrix& m, int d) const {
  if (d < 1) throw std::invalid_argument("laplace_matrix_deriv_n: d must be >= 1");
  const int n = m.rows();
  switch (kind_) {
    case Kind::gamma: {
      double coef = 1.0;
      for (int i = 0; i < d; ++i) coef *= alpha_ + i;
      if (d % 2) coef = -coef;
      Matrix r = frac_power(add_scaled_identity(m, 1.0), -alpha_ - d);
      r *= coef;
      return r;
    }
    case Kind::discrete: {
      Matrix s(n, n);
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        double coef = weights_[i] * std::pow(atoms_[i], d);
        if (d % 2) coef = -coef;
        Matrix e = expm(m * (-atoms_[i]));
        e *= coef;
        s += e;
      }
      return s;
    }
    case Kind::degenerate: {
      double coef = std::pow(point_, d);
      if (d % 2) coef = -coef;
      Matrix r = expm(m * (-point_));
      r *= coef;
      return r;
    }
    default:
      throw std::invalid_argument(
          "laplace_matrix_deriv_n: no closed form for family " + name());
  }
}

bool ScalingFamily::has_density() const {
  switch (kind_) {
    case Kind::gamma:
    case Kind::inverse_gaussian:
    case Kind::pvf:
    case Kind::compound_poisson_gamma:
      return kind_ != Kind::pvf || gamma_ < 1.0;
    case Kind::positive_stable:
      return alpha_ < 1.0;
    case Kind::discrete:
    case Kind::degenerate:
      return false;
  }
  return false;
}

double ScalingFamily::log_density(double theta) const {
  switch (kind_) {
    case Kind::gamma:
      if (!(theta > 0.0)) return kNegInf;
      return log_gamma_pdf(theta, alpha_);
    case Kind::positive_stable:
      if (alpha_ >= 1.0)
        throw std::domain_error("scaling density unsupported: stable with alpha = 1 is a point mass");
      return stable_log_density(theta, alpha_);
    case Kind::inverse_gaussian: {
      if (!(theta > 0.0)) return kNegInf;
      const double d = theta - 1.0;
      return -0.5 * std::log(2.0 * M_PI * sigma2_ * theta * theta * theta) -
             d * d / (2.0 * sigma2_ * theta);
    }
    case Kind::pvf: {
      if (gamma_ >= 1.0)
        throw std::domain_error("scaling density unsupported: pvf with gamma = 1 is a point mass");
      if (!(theta > 0.0)) return kNegInf;
      // exponential tilt of a scaled stable law (reduced accuracy)
      const double m = eta_ * (1.0 - gamma_);
      const double c = m / gamma_;
      const double scale = std::pow(c / std::pow(m, gamma_), 1.0 / gamma_);
      return c - m * theta - std::log(scale) +
             stable_log_density(theta / scale, gamma_);
    }
    case Kind::compound_poisson_gamma: {
      if (!(theta > 0.0)) return kNegInf;
      // continuous part: sum over the Poisson count (truncated series)
      double best = kNegInf;
      std::vector<double> terms;
      const long nmax =
          static_cast<long>(rho_ + 12.0 * std::sqrt(rho_ + 1.0) + 40.0);
      for (long n = shifted_ ? 0 : 1; n <= nmax; ++n) {
        const double shape = (shifted_ ? n + 1 : n) * alpha_;
        const double lp = n * std::log(rho_) - rho_ - std::lgamma(n + 1.0) +
                          log_gamma_pdf(theta, shape);
        terms.push_back(lp);
        if (lp > best) best = lp;
      }
      if (best == kNegInf) return kNegInf;
      double acc = 0.0;
      for (double t : terms) acc += std::exp(t - best);
      return best + std::log(acc);
    }
    case Kind::discrete:
    case Kind::degenerate:
      throw std::domain_error("scaling density unsupported for family " + name());
  }
  return kNegInf;
}

double ScalingFamily::density(double theta) const {
  const double l = log_density(theta);
  return l == kNegInf ? 0.0 : std::exp(l);
}

double ScalingFamily::mass_at_zero() const {
  if (kind_ == Kind::compound_poisson_gamma && !shifted_) return std::exp(-rho_);
  return 0.0;
}

double ScalingFamily::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::gamma:
      return rng.gamma(alpha_);
    case Kind::positive_stable:
      return rng.positive_stable(alpha_);
    case Kind::inverse_gaussian:
      return rng.inverse_gaussian(sigma2_);
    case Kind::pvf: {
      if (gamma_ == 1.0) return 1.0;
      const double m = eta_ * (1.0 - gamma_);
      const double c = m / gamma_;
      if (c > 15.0)
        throw std::runtime_error(
            "pvf sample: rejection acceptance rate exp(-eta(1-gamma)/gamma) too small");
      const double scale = std::pow(c / std::pow(m, gamma_), 1.0 / gamma_);
      for (long attempt = 0; attempt < 100000000L; ++attempt) {
        const double x = scale * rng.positive_stable(gamma_);
        if (rng.uniform() < std::exp(-m * x)) return x;
      }
      throw std::runtime_error("pvf sample: rejection loop did not accept");
    }
    case Kind::compound_poisson_gamma: {
      long n = rng.poisson(rho_);
      if (shifted_) n += 1;
      if (n == 0) return 0.0;  // atom; downstream maps to an infinite outcome
      return rng.gamma(n * alpha_);
    }
    case Kind::discrete: {
      const double u = rng.uniform();
      double acc = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        acc += weights_[i];
        if (u < acc) return atoms_[i];
      }
      return atoms_.back();
    }
    case Kind::degenerate:
      return point_;
  }
  return 1.0;
}

}  // namespace siph
