#include "siph/multivar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "siph/matfun.hpp"
#include "siph/quadrature.hpp"

namespace siph {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> kron_vec(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() * b.size());
  std::size_t idx = 0;
  for (double av : a)
    for (double bv : b) out[idx++] = av * bv;
  return out;
}

void check_capacity(const std::vector<PhaseParams>& margins) {
  if (margins.empty()) throw std::invalid_argument("model needs at least one margin");
  if (margins.size() > static_cast<std::size_t>(kMaxComponents))
    throw std::invalid_argument("at most 3 components are supported");
  long prod = 1;
  for (const PhaseParams& p : margins) {
    prod *= p.dim();
    if (prod > kMaxJointDim)
      throw std::invalid_argument("joint dimension exceeds the 512 state cap");
  }
}

// Kronecker sum of the z_i-scaled generators and the matching initial and
// exit vectors of the product chain.
struct JointOperator {
  Matrix gen;
  std::vector<double> pi;
  std::vector<double> exit;
};

JointOperator joint_operator(const SharedModel& m, const std::vector<double>& z) {
  JointOperator j;
  j.gen = m.margins[0].t * z[0];
  j.pi = m.margins[0].pi;
  j.exit = m.margins[0].exit();
  for (std::size_t i = 1; i < m.margins.size(); ++i) {
    j.gen = kron_sum(j.gen, m.margins[i].t * z[i]);
    j.pi = kron_vec(j.pi, m.margins[i].pi);
    j.exit = kron_vec(j.exit, m.margins[i].exit());
  }
  return j;
}

bool deriv_closed_form(const ScalingFamily& f) {
  switch (f.kind()) {
    case ScalingFamily::Kind::gamma:
    case ScalingFamily::Kind::discrete:
    case ScalingFamily::Kind::degenerate:
      return true;
    default:
      return false;
  }
}

// Stable with unit index and fully tempered PVF degenerate to a point mass.
bool degenerates_to_point(const ScalingFamily& f) {
  return (f.kind() == ScalingFamily::Kind::positive_stable && f.alpha() == 1.0) ||
         (f.kind() == ScalingFamily::Kind::pvf && f.gamma_param() == 1.0);
}

const QuadRule& mixture_rule() {
  static const QuadRule rule = exp_sinh_log(200, 18.0);
  return rule;
}

}  // namespace

void SharedModel::validate() const {
  check_capacity(margins);
  if (intensities.size() != margins.size())
    throw std::invalid_argument("one intensity per margin is required");
  for (const PhaseParams& p : margins) p.validate();
}

double shared_survival(const SharedModel& m, const std::vector<double>& y) {
  if (y.size() != m.margins.size())
    throw std::invalid_argument("observation dimension does not match the model");
  std::vector<double> z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= 0.0) return 1.0;
    z[i] = m.intensities[i].hinv(y[i]);
  }
  JointOperator j = joint_operator(m, z);
  Matrix neg = j.gen * (-1.0);
  Matrix l = m.scaling.laplace_matrix(neg);
  std::vector<double> ones(j.pi.size(), 1.0);
  std::vector<double> le = matvec(l, ones);
  double s = dot(j.pi.data(), le.data(), static_cast<int>(j.pi.size()));
  if (s < 0.0) s = 0.0;
  if (s > 1.0) s = 1.0;
  return s;
}

double shared_density(const SharedModel& m, const std::vector<double>& y) {
  if (y.size() != m.margins.size())
    throw std::invalid_argument("observation dimension does not match the model");
  const int d = m.dim();
  std::vector<double> z(y.size());
  double jac = 1.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= 0.0) return 0.0;
    z[i] = m.intensities[i].hinv(y[i]);
    jac *= m.intensities[i].lambda(y[i]);
  }

  static const ScalingFamily unit_point = ScalingFamily::degenerate(1.0);
  const ScalingFamily& sc = degenerates_to_point(m.scaling) ? unit_point : m.scaling;

  if (deriv_closed_form(sc)) {
    JointOperator j = joint_operator(m, z);
    Matrix neg = j.gen * (-1.0);
    Matrix ld = sc.laplace_matrix_deriv_n(neg, d);
    std::vector<double> v = matvec(ld, j.exit);
    double f = dot(j.pi.data(), v.data(), static_cast<int>(j.pi.size()));
    if (d % 2 != 0) f = -f;
    f *= jac;
    return f > 0.0 ? f : 0.0;
  }

  // Mixture over the scaling variable: conditionally on theta the components
  // are independent, so the integrand factorises over margins and never
  // touches the product space.
  const QuadRule& rule = mixture_rule();
  std::vector<ScaledExpm> props;
  props.reserve(m.margins.size());
  for (const PhaseParams& p : m.margins) props.emplace_back(p.t);
  double f = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double theta = rule.nodes[q];
    const double lw = sc.log_density(theta);
    if (lw < -745.0) continue;
    double term = rule.weights[q] * std::exp(lw);
    for (int i = 0; i < d && term != 0.0; ++i) {
      const PhaseParams& p = m.margins[i];
      Matrix dmat(p.dim(), p.dim());
      props[i].eval(theta * z[i], dmat);
      std::vector<double> dt = matvec(dmat, p.exit());
      term *= theta * dot(p.pi.data(), dt.data(), p.dim());
    }
    f += term;
  }
  f *= jac;
  return f > 0.0 ? f : 0.0;
}

std::vector<double> shared_sample(const SharedModel& m, Rng& rng) {
  const double theta = m.scaling.sample(rng);
  std::vector<double> y(m.margins.size());
  for (std::size_t i = 0; i < m.margins.size(); ++i) {
    if (theta == 0.0) {
      y[i] = kInf;
      continue;
    }
    y[i] = m.intensities[i].h(ph_sample(m.margins[i], rng) / theta);
  }
  return y;
}

double upper_tail_dependence(const SharedModel& m) {
  if (m.dim() != 2)
    throw std::invalid_argument("tail dependence is defined for bivariate models");
  if (m.scaling.kind() != ScalingFamily::Kind::gamma)
    throw std::invalid_argument("tail dependence requires gamma scaling");
  const double alpha = m.scaling.alpha();
  const double gfac = std::tgamma(alpha + 1.0);

  // Rescale each generator so the alpha-th moments of the marginal absorption
  // times match, then take the fractional inverse power of the Kronecker sum.
  std::vector<Matrix> scaled;
  for (const PhaseParams& p : m.margins) {
    Matrix neg = p.t * (-1.0);
    Matrix pw = frac_power(neg, -alpha);
    std::vector<double> ones(p.dim(), 1.0);
    std::vector<double> v = matvec(pw, ones);
    const double moment = gfac * dot(p.pi.data(), v.data(), p.dim());
    scaled.push_back(p.t * std::pow(moment, 1.0 / alpha));
  }
  Matrix joint = kron_sum(scaled[0], scaled[1]);
  Matrix neg = joint * (-1.0);
  Matrix pw = frac_power(neg, -alpha);
  std::vector<double> pi = kron_vec(m.margins[0].pi, m.margins[1].pi);
  std::vector<double> ones(pi.size(), 1.0);
  std::vector<double> v = matvec(pw, ones);
  return gfac * dot(pi.data(), v.data(), static_cast<int>(pi.size()));
}

double empirical_upper_tail_dependence(const std::vector<std::array<double, 2>>& data,
                                       double q, bool* low_count) {
  if (data.empty()) throw std::invalid_argument("empty sample");
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  const std::size_t n = data.size();
  std::vector<double> m1(n), m2(n);
  for (std::size_t i = 0; i < n; ++i) {
    m1[i] = data[i][0];
    m2[i] = data[i][1];
  }
  std::sort(m1.begin(), m1.end());
  std::sort(m2.begin(), m2.end());
  const std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  const double t1 = m1[std::min(k, n) - 1];
  const double t2 = m2[std::min(k, n) - 1];
  std::size_t joint = 0, cond = 0;
  for (const auto& row : data) {
    if (row[1] > t2) {
      ++cond;
      if (row[0] > t1) ++joint;
    }
  }
  if (low_count != nullptr) *low_count = cond < 20;
  if (cond == 0) return 0.0;
  return static_cast<double>(joint) / static_cast<double>(cond);
}

void CorrelatedGammaModel::validate() const {
  std::vector<PhaseParams> ms(margins.begin(), margins.end());
  check_capacity(ms);
  for (const PhaseParams& p : margins) p.validate();
  if (!(kappa0 > 0.0) || !(kappa1 > 0.0) || !(kappa2 > 0.0))
    throw std::invalid_argument("shape parameters must be positive");
  if (!(eta1 > 0.0) || !(eta2 > 0.0))
    throw std::invalid_argument("rate normalisers must be positive");
}

double CorrelatedGammaModel::scaling_correlation() const {
  return kappa0 / std::sqrt((kappa0 + kappa1) * (kappa0 + kappa2));
}

namespace {

// Commuting building blocks for the shared-shock gamma pair.  All powers are
// taken through one matrix logarithm per base.
struct CorrOperator {
  Matrix a1, a2;    // per-margin generator directions, rate-normalised
  Matrix l0, l1, l2;  // logarithms of I - u1 A1 - u2 A2, I - u1 A1, I - u2 A2
  std::vector<double> pi, ones;
};

CorrOperator corr_operator(const CorrelatedGammaModel& m, double z1, double z2) {
  const int p1 = m.margins[0].dim();
  const int p2 = m.margins[1].dim();
  CorrOperator op;
  op.a1 = kron_prod(m.margins[0].t, Matrix::identity(p2)) * (1.0 / m.eta1);
  op.a2 = kron_prod(Matrix::identity(p1), m.margins[1].t) * (1.0 / m.eta2);
  Matrix m1 = Matrix::identity(p1 * p2);
  m1 -= op.a1 * z1;
  Matrix m2 = Matrix::identity(p1 * p2);
  m2 -= op.a2 * z2;
  Matrix m0 = m1;
  m0 -= op.a2 * z2;
  op.l0 = logm(m0);
  op.l1 = logm(m1);
  op.l2 = logm(m2);
  op.pi = kron_vec(m.margins[0].pi, m.margins[1].pi);
  op.ones.assign(op.pi.size(), 1.0);
  return op;
}

}  // namespace

double correlated_survival(const CorrelatedGammaModel& m, double y1, double y2) {
  if (y1 <= 0.0 || y2 <= 0.0) return 1.0;
  const double z1 = m.intensities[0].hinv(y1);
  const double z2 = m.intensities[1].hinv(y2);
  CorrOperator op = corr_operator(m, z1, z2);
  std::vector<double> v = matvec(expm(op.l2 * (-m.kappa2)), op.ones);
  v = matvec(expm(op.l1 * (-m.kappa1)), v);
  v = matvec(expm(op.l0 * (-m.kappa0)), v);
  double s = dot(op.pi.data(), v.data(), static_cast<int>(op.pi.size()));
  if (s < 0.0) s = 0.0;
  if (s > 1.0) s = 1.0;
  return s;
}

double correlated_density(const CorrelatedGammaModel& m, double y1, double y2) {
  if (y1 <= 0.0 || y2 <= 0.0) return 0.0;
  const double z1 = m.intensities[0].hinv(y1);
  const double z2 = m.intensities[1].hinv(y2);
  CorrOperator op = corr_operator(m, z1, z2);
  const double k0 = m.kappa0, k1 = m.kappa1, k2 = m.kappa2;

  Matrix p0a = expm(op.l0 * (-k0));
  Matrix p0b = expm(op.l0 * (-k0 - 1.0));
  Matrix p0c = expm(op.l0 * (-k0 - 2.0));
  Matrix p1a = expm(op.l1 * (-k1));
  Matrix p1b = expm(op.l1 * (-k1 - 1.0));
  Matrix p2a = expm(op.l2 * (-k2));
  Matrix p2b = expm(op.l2 * (-k2 - 1.0));

  auto chain = [&](std::initializer_list<const Matrix*> ms) {
    std::vector<double> v = op.ones;
    for (const Matrix* mm : ms) v = matvec(*mm, v);
    return dot(op.pi.data(), v.data(), static_cast<int>(op.pi.size()));
  };

  double f = k0 * (k0 + 1.0) * chain({&p2a, &p1a, &op.a2, &op.a1, &p0c});
  f += k0 * k2 * chain({&op.a2, &p2b, &p1a, &op.a1, &p0b});
  f += k0 * k1 * chain({&p2a, &op.a1, &p1b, &op.a2, &p0b});
  f += k1 * k2 * chain({&op.a2, &p2b, &op.a1, &p1b, &p0a});
  f *= m.intensities[0].lambda(y1) * m.intensities[1].lambda(y2);
  return f > 0.0 ? f : 0.0;
}

std::array<double, 2> correlated_sample(const CorrelatedGammaModel& m, Rng& rng) {
  const double w0 = rng.gamma(m.kappa0);
  const double th1 = (w0 + rng.gamma(m.kappa1)) / m.eta1;
  const double th2 = (w0 + rng.gamma(m.kappa2)) / m.eta2;
  return {m.intensities[0].h(ph_sample(m.margins[0], rng) / th1),
          m.intensities[1].h(ph_sample(m.margins[1], rng) / th2)};
}

}  // namespace siph
