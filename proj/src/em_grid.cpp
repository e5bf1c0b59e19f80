#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "em_internal.hpp"
#include "siph/quadrature.hpp"
#include "siph/siph.hpp"

namespace siph {
namespace detail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void fill_logs(ThetaGrid& g) {
  g.log_theta.resize(g.theta.size());
  for (std::size_t j = 0; j < g.theta.size(); ++j) g.log_theta[j] = std::log(g.theta[j]);
}

MixWeights normalize_log(std::vector<double> lw) {
  MixWeights out;
  double mx = kNegInf;
  for (double v : lw) mx = std::max(mx, v);
  if (!(mx > kNegInf)) throw std::runtime_error("scaling grid carries no weight");
  double sum = 0.0;
  for (double v : lw) sum += std::exp(v - mx);
  out.raw_mass = std::exp(mx) * sum;
  out.w.resize(lw.size());
  for (std::size_t j = 0; j < lw.size(); ++j) out.w[j] = std::exp(lw[j] - mx) / sum;
  return out;
}

}  // namespace

ThetaGrid ThetaGrid::build(const ScalingFamily& f, const QuadratureConfig& cfg) {
  if (cfg.n_nodes < 10) throw std::invalid_argument("at least 10 scaling nodes are required");
  ThetaGrid g;
  switch (f.kind()) {
    case ScalingFamily::Kind::gamma: {
      // A log-space double-exponential grid handles every gamma shape the
      // search can visit; a Gauss rule keyed to one shape cannot, because
      // reweighting to another shape introduces a fractional power of theta
      // with a branch point at zero.  The truncated left-tail mass decays
      // like exp(-range * shape), so widen the range enough to cover shapes
      // one search window below the starting one, but never so far that the
      // node spacing in log theta degrades mid-range resolution.
      g.scheme = Scheme::de_log;
      const double reach = 50.8 / f.alpha();  // 24 e^{0.75} / alpha0
      const double cap = std::min(40.0, 0.75 * cfg.n_nodes);
      const double range = std::max(cfg.log_range, std::min(reach, cap));
      QuadRule r = exp_sinh_log(cfg.n_nodes, range);
      g.theta = std::move(r.nodes);
      g.base_w = std::move(r.weights);
      break;
    }
    case ScalingFamily::Kind::positive_stable:
      if (f.alpha() >= 1.0)
        throw std::invalid_argument("initial stable index must lie in (0,1) for fitting");
      [[fallthrough]];
    case ScalingFamily::Kind::inverse_gaussian: {
      g.scheme = Scheme::de_log;
      QuadRule r = exp_sinh_log(cfg.n_nodes, cfg.log_range);
      g.theta = std::move(r.nodes);
      g.base_w = std::move(r.weights);
      break;
    }
    case ScalingFamily::Kind::discrete: {
      g.scheme = Scheme::atoms;
      g.theta = f.atoms();
      g.base_w.assign(g.theta.size(), 1.0);
      break;
    }
    case ScalingFamily::Kind::degenerate: {
      g.scheme = Scheme::point;
      g.theta = {f.point()};
      g.base_w = {1.0};
      break;
    }
    default:
      throw std::invalid_argument("scaling family not supported for fitting");
  }
  fill_logs(g);
  return g;
}

ThetaGrid ThetaGrid::build_mml(double alpha0, const QuadratureConfig& cfg) {
  if (cfg.n_nodes < 10) throw std::invalid_argument("at least 10 scaling nodes are required");
  if (!(alpha0 > 0.0) || !(alpha0 < 1.0))
    throw std::invalid_argument("initial index must lie in (0,1)");
  ThetaGrid g;
  g.scheme = Scheme::de_log;
  g.alpha0 = alpha0;
  QuadRule r = exp_sinh_log(cfg.n_nodes, cfg.log_range);
  g.theta = std::move(r.nodes);
  g.base_w = std::move(r.weights);
  fill_logs(g);
  return g;
}

MixWeights mixing_weights(const ThetaGrid& g, const ScalingFamily& f) {
  const std::size_t n = g.theta.size();
  std::vector<double> lw(n);
  switch (g.scheme) {
    case ThetaGrid::Scheme::de_log: {
      for (std::size_t j = 0; j < n; ++j)
        lw[j] = std::log(g.base_w[j]) + f.log_density(g.theta[j]);
      return normalize_log(std::move(lw));
    }
    case ThetaGrid::Scheme::atoms: {
      MixWeights out;
      out.w = f.weights();
      if (out.w.size() != n) throw std::invalid_argument("atom count changed during fit");
      out.raw_mass = 1.0;
      return out;
    }
    case ThetaGrid::Scheme::point: {
      MixWeights out;
      out.w = {1.0};
      out.raw_mass = 1.0;
      return out;
    }
  }
  throw std::logic_error("unreachable grid scheme");
}

MixWeights mixing_weights_mml(const ThetaGrid& g, double alpha) {
  const std::size_t n = g.theta.size();
  std::vector<double> lw(n);
  for (std::size_t j = 0; j < n; ++j)
    lw[j] = std::log(g.base_w[j]) + mml_theta_log_density(g.theta[j], alpha);
  return normalize_log(std::move(lw));
}

double weight_objective(const ThetaGrid& g, const ScalingFamily& f,
                        const std::vector<double>& post) {
  const MixWeights mw = mixing_weights(g, f);
  double q = 0.0;
  for (std::size_t j = 0; j < post.size(); ++j) {
    if (post[j] <= 0.0) continue;
    if (mw.w[j] <= 0.0) return kNegInf;
    q += post[j] * std::log(mw.w[j]);
  }
  return q;
}

double weight_objective_mml(const ThetaGrid& g, double alpha, const std::vector<double>& post) {
  const MixWeights mw = mixing_weights_mml(g, alpha);
  double q = 0.0;
  for (std::size_t j = 0; j < post.size(); ++j) {
    if (post[j] <= 0.0) continue;
    if (mw.w[j] <= 0.0) return kNegInf;
    q += post[j] * std::log(mw.w[j]);
  }
  return q;
}

}  // namespace detail
}  // namespace siph
