#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "em_internal.hpp"
#include "siph/matfun.hpp"
#include "siph/optim.hpp"
#include "siph/quadrature.hpp"

namespace siph {

using detail::MixWeights;
using detail::MvData;
using detail::ThetaGrid;
using detail::UniData;
using detail::UniStats;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_options(const EmOptions& opt) {
  if (opt.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (opt.inner_evals < 4) throw std::invalid_argument("inner_evals must be at least 4");
  if (!(opt.quad.log_range > 0.0)) throw std::invalid_argument("log_range must be positive");
}

std::size_t check_observations(const std::vector<Observation>& data) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  const std::size_t q = data.front().x.size();
  for (const Observation& o : data) {
    if (!(o.y > 0.0) || !std::isfinite(o.y))
      throw std::invalid_argument("observations must be positive and finite");
    if (o.x.size() != q) throw std::invalid_argument("covariate rows differ in length");
  }
  return q;
}

UniData make_unidata(const std::vector<Observation>& data, const std::vector<double>& w,
                     const Intensity& f, const std::vector<double>& beta) {
  UniData ud;
  ud.z.resize(data.size());
  ud.censored.resize(data.size());
  ud.w = w;
  for (std::size_t n = 0; n < data.size(); ++n) {
    double lin = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) lin += beta[i] * data[n].x[i];
    ud.z[n] = f.hinv(data[n].y) * std::exp(lin);
    ud.censored[n] = data[n].censored ? 1 : 0;
    ud.any_censored |= data[n].censored;
  }
  return ud;
}

// Log jacobian of the time transform plus the covariate tilt, exact rows
// only; censored rows enter through the survival function directly.
double jacobian_sum(const std::vector<Observation>& data, const std::vector<double>& w,
                    const Intensity& f, const std::vector<double>& beta) {
  double s = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (data[n].censored || w[n] <= 0.0) continue;
    const double lam = f.lambda(data[n].y);
    if (!(lam > 0.0) || !std::isfinite(lam)) return kNegInf;
    double lin = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) lin += beta[i] * data[n].x[i];
    s += w[n] * (std::log(lam) + lin);
  }
  return s;
}

int intensity_nparams(const Intensity& f) {
  return static_cast<int>(f.params().size());
}

std::vector<double> encode_intensity(const Intensity& f) {
  const std::vector<double> p = f.params();
  std::vector<double> enc;
  switch (f.family()) {
    case Intensity::Family::constant:
      break;
    case Intensity::Family::lognormal:
      enc.push_back(std::log(p[0] - 1.0));
      break;
    default:
      for (double v : p) enc.push_back(std::log(v));
  }
  return enc;
}

Intensity decode_intensity(const Intensity& proto, const double* enc) {
  switch (proto.family()) {
    case Intensity::Family::constant:
      return proto;
    case Intensity::Family::lognormal:
      return proto.with_params({1.0 + std::exp(enc[0])});
    case Intensity::Family::loglogistic:
      return proto.with_params({std::exp(enc[0]), std::exp(enc[1])});
    default:
      return proto.with_params({std::exp(enc[0])});
  }
}

// Reweight-only parameter update on the fixed grid; accepts a candidate only
// when it improves the node-weight objective, so the sweep stays monotone.
void update_scaling(ScalingFamily& sc, const ThetaGrid& grid, const std::vector<double>& post,
                    int budget) {
  const int evals = std::max(6, budget);
  switch (sc.kind()) {
    case ScalingFamily::Kind::gamma: {
      const double cur = detail::weight_objective(grid, sc, post);
      const double la = std::log(sc.alpha());
      auto f = [&](double x) {
        try {
          return detail::weight_objective(grid, ScalingFamily::gamma(std::exp(x)), post);
        } catch (const std::exception&) {
          return kNegInf;
        }
      };
      const LineResult r = golden_max(f, la - 0.7, la + 0.7, evals);
      if (r.value > cur) sc = ScalingFamily::gamma(std::exp(r.x));
      return;
    }
    case ScalingFamily::Kind::inverse_gaussian: {
      const double cur = detail::weight_objective(grid, sc, post);
      const double ls = std::log(sc.sigma2());
      auto f = [&](double x) {
        try {
          return detail::weight_objective(grid, ScalingFamily::inverse_gaussian(std::exp(x)),
                                          post);
        } catch (const std::exception&) {
          return kNegInf;
        }
      };
      const LineResult r = golden_max(f, ls - 0.7, ls + 0.7, evals);
      if (r.value > cur) sc = ScalingFamily::inverse_gaussian(std::exp(r.x));
      return;
    }
    case ScalingFamily::Kind::positive_stable: {
      const double cur = detail::weight_objective(grid, sc, post);
      const double a = sc.alpha();
      auto f = [&](double x) {
        try {
          return detail::weight_objective(grid, ScalingFamily::positive_stable(x), post);
        } catch (const std::exception&) {
          return kNegInf;
        }
      };
      const LineResult r =
          golden_max(f, std::max(0.01, a - 0.1), std::min(0.995, a + 0.1), evals);
      if (r.value > cur) sc = ScalingFamily::positive_stable(r.x);
      return;
    }
    case ScalingFamily::Kind::discrete: {
      double total = std::accumulate(post.begin(), post.end(), 0.0);
      if (!(total > 0.0)) return;
      std::vector<double> w(post.size());
      for (std::size_t j = 0; j < post.size(); ++j) w[j] = post[j] / total;
      sc = ScalingFamily::discrete(sc.atoms(), w);
      return;
    }
    default:
      return;  // degenerate scaling has nothing to update
  }
}

struct Tracker {
  std::vector<double> trace;
  double prev = 0.0;
  bool has_prev = false;
  bool converged = false;

  bool push_and_check(double ll, double tol) {
    trace.push_back(ll);
    if (has_prev && std::abs(ll - prev) <= tol * (1.0 + std::abs(ll))) {
      converged = true;
      return true;
    }
    prev = ll;
    has_prev = true;
    return false;
  }
};

std::string row_note(long idx) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "likelihood vanished at row %ld", idx);
  return buf;
}

FitReport fit_uni(const std::vector<Observation>& data, std::vector<double> w, int p,
                  Intensity intensity, ScalingFamily scaling, const EmOptions& opt) {
  check_options(opt);
  const std::size_t q = check_observations(data);
  if (p < 1) throw std::invalid_argument("at least one phase is required");
  if (w.empty()) w.assign(data.size(), 1.0);

  FitReport rep;
  rep.seed = opt.seed;

  ThetaGrid grid = ThetaGrid::build(scaling, opt.quad);
  MixWeights mw = detail::mixing_weights(grid, scaling);
  if (grid.scheme == ThetaGrid::Scheme::de_log && std::abs(mw.raw_mass - 1.0) > 1e-3) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "scaling grid captures mass %.6g; ", mw.raw_mass);
    rep.note += buf;
  }

  std::vector<double> beta(q, 0.0);
  UniData ud = make_unidata(data, w, intensity, beta);
  double zsum = 0.0, wsum = 0.0;
  for (std::size_t n = 0; n < ud.size(); ++n) {
    zsum += w[n] * ud.z[n];
    wsum += w[n];
  }
  if (!(wsum > 0.0)) throw std::invalid_argument("no rows carry positive weight");

  Rng rng(opt.seed);
  PhaseParams phase = detail::init_phase(p, opt.structure, rng, zsum / wsum);
  const int nint = intensity_nparams(intensity);
  const bool step2 = nint + static_cast<int>(q) > 0;

  Tracker tr;
  bool aborted = false;
  for (int it = 1; it <= opt.max_iter && !aborted; ++it) {
    UniStats st = detail::estep_uni(phase, grid, mw.w, ud);
    if (st.bad_index >= 0) {
      rep.note += row_note(st.bad_index);
      aborted = true;
      break;
    }
    const double ll = st.loglik + jacobian_sum(data, w, intensity, beta);
    if (!std::isfinite(ll)) {
      rep.note += "objective not finite";
      aborted = true;
      break;
    }
    if (tr.push_and_check(ll, opt.tol)) break;

    detail::mstep_phase(phase, st);
    update_scaling(scaling, grid, st.node_post, opt.inner_evals);
    mw = detail::mixing_weights(grid, scaling);

    if (step2) {
      std::vector<double> x0 = encode_intensity(intensity);
      x0.insert(x0.end(), beta.begin(), beta.end());
      auto obj = [&](const std::vector<double>& par) {
        try {
          Intensity cand = decode_intensity(intensity, par.data());
          std::vector<double> bc(par.begin() + nint, par.end());
          UniData cud = make_unidata(data, w, cand, bc);
          const double v = detail::mixture_loglik_uni(phase, grid, mw.w, cud);
          if (!std::isfinite(v)) return kNegInf;
          const double jac = jacobian_sum(data, w, cand, bc);
          return std::isfinite(jac) ? v + jac : kNegInf;
        } catch (const std::exception&) {
          return kNegInf;
        }
      };
      if (x0.size() == 1) {
        const double base = obj(x0);
        const LineResult r = golden_max([&](double v) { return obj({v}); }, x0[0] - 0.5,
                                        x0[0] + 0.5, opt.inner_evals - 1);
        if (r.value > base) x0[0] = r.x;
      } else {
        const SimplexResult r = simplex_max(obj, x0, 0.15, opt.inner_evals);
        if (std::isfinite(r.value)) x0 = r.x;
      }
      intensity = decode_intensity(intensity, x0.data());
      beta.assign(x0.begin() + nint, x0.end());
      ud = make_unidata(data, w, intensity, beta);
    }
  }

  if (!tr.converged && !aborted) {
    const double ll = detail::mixture_loglik_uni(phase, grid, mw.w, ud) +
                      jacobian_sum(data, w, intensity, beta);
    tr.trace.push_back(ll);
  }
  rep.loglik_trace = std::move(tr.trace);
  rep.converged = tr.converged;
  rep.iterations = std::max<int>(0, static_cast<int>(rep.loglik_trace.size()) - (aborted ? 0 : 1));
  rep.model = SiphModel{phase, intensity, scaling, beta};
  return rep;
}

double mixture_loglik_mv(const std::vector<PhaseParams>& phases, const ThetaGrid& grid,
                         const std::vector<double>& mixw, const MvData& md) {
  const int d = static_cast<int>(phases.size());
  const int nn = static_cast<int>(grid.theta.size());
  std::vector<ScaledExpm> props;
  std::vector<std::vector<double>> exits;
  std::vector<double> skips;
  for (const PhaseParams& ph : phases) {
    props.emplace_back(ph.t);
    exits.push_back(ph.exit());
    const double mu = detail::spectral_abscissa(ph.t);
    skips.push_back(mu < 0.0 ? 800.0 / (-mu) : std::numeric_limits<double>::infinity());
  }
  std::vector<Matrix> dm;
  for (const PhaseParams& ph : phases) dm.emplace_back(ph.dim(), ph.dim());

  double ll = 0.0;
  for (std::size_t n = 0; n < md.size(); ++n) {
    double fn = 0.0;
    for (int j = 0; j < nn; ++j) {
      const double wj = mixw[j];
      if (wj <= 0.0) continue;
      const double theta = grid.theta[j];
      double prod = wj;
      bool alive = true;
      for (int i = 0; i < d && alive; ++i) {
        const double s = theta * md.z[i][n];
        if (s > skips[i]) {
          alive = false;
          break;
        }
        const int pp = phases[i].dim();
        props[i].eval(s, dm[i]);
        double pidt = 0.0;
        for (int k = 0; k < pp; ++k) {
          double dk = 0.0;
          for (int l = 0; l < pp; ++l) dk += dm[i](k, l) * exits[i][l];
          pidt += phases[i].pi[k] * dk;
        }
        const double g = theta * pidt;
        if (!(g > 0.0)) {
          alive = false;
          break;
        }
        prod *= g;
      }
      if (alive) fn += prod;
    }
    if (!(fn > 0.0) || !std::isfinite(fn)) return kNegInf;
    ll += md.w[n] * std::log(fn);
  }
  return ll;
}

FitReport fit_mv(const std::vector<MvObservation>& data, const std::vector<int>& dims,
                 std::vector<Intensity> intensities, ScalingFamily scaling,
                 const EmOptions& opt) {
  check_options(opt);
  const int d = static_cast<int>(dims.size());
  if (d < 1 || d > kMaxComponents)
    throw std::invalid_argument("between 1 and 3 components are supported");
  if (static_cast<int>(intensities.size()) != d)
    throw std::invalid_argument("one intensity per component is required");
  long prod = 1;
  for (int p : dims) {
    if (p < 1) throw std::invalid_argument("at least one phase per component is required");
    prod *= p;
    if (prod > kMaxJointDim)
      throw std::invalid_argument("joint dimension exceeds the 512 state cap");
  }
  if (data.empty()) throw std::invalid_argument("empty dataset");
  for (const MvObservation& o : data) {
    if (static_cast<int>(o.y.size()) != d)
      throw std::invalid_argument("observation dimension does not match dims");
    for (double v : o.y)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("observations must be positive and finite");
  }

  FitReport rep;
  rep.seed = opt.seed;

  ThetaGrid grid = ThetaGrid::build(scaling, opt.quad);
  MixWeights mw = detail::mixing_weights(grid, scaling);
  if (grid.scheme == ThetaGrid::Scheme::de_log && std::abs(mw.raw_mass - 1.0) > 1e-3) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "scaling grid captures mass %.6g; ", mw.raw_mass);
    rep.note += buf;
  }

  MvData md;
  md.w.assign(data.size(), 1.0);
  md.z.assign(d, std::vector<double>(data.size()));
  for (int i = 0; i < d; ++i)
    for (std::size_t n = 0; n < data.size(); ++n)
      md.z[i][n] = intensities[i].hinv(data[n].y[i]);

  Rng rng(opt.seed);
  std::vector<PhaseParams> phases;
  for (int i = 0; i < d; ++i) {
    double zm = 0.0;
    for (double v : md.z[i]) zm += v;
    zm /= static_cast<double>(data.size());
    phases.push_back(detail::init_phase(dims[i], opt.structure, rng, zm));
  }

  auto jac_all = [&]() {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      for (const MvObservation& o : data) {
        const double lam = intensities[i].lambda(o.y[i]);
        if (!(lam > 0.0) || !std::isfinite(lam)) return kNegInf;
        s += std::log(lam);
      }
    }
    return s;
  };

  int n_updatable = 0;
  for (const Intensity& f : intensities)
    if (intensity_nparams(f) > 0) ++n_updatable;

  Tracker tr;
  bool aborted = false;
  for (int it = 1; it <= opt.max_iter && !aborted; ++it) {
    detail::MvStats st = detail::estep_shared(phases, grid, mw.w, md);
    if (st.bad_index >= 0) {
      rep.note += row_note(st.bad_index);
      aborted = true;
      break;
    }
    const double ll = st.loglik + jac_all();
    if (!std::isfinite(ll)) {
      rep.note += "objective not finite";
      aborted = true;
      break;
    }
    if (tr.push_and_check(ll, opt.tol)) break;

    for (int i = 0; i < d; ++i) detail::mstep_phase(phases[i], st.margin[i]);
    update_scaling(scaling, grid, st.node_post, opt.inner_evals);
    mw = detail::mixing_weights(grid, scaling);

    if (n_updatable > 0) {
      const int budget = std::max(5, opt.inner_evals / n_updatable);
      for (int i = 0; i < d; ++i) {
        const int ni = intensity_nparams(intensities[i]);
        if (ni == 0) continue;
        std::vector<double> x0 = encode_intensity(intensities[i]);
        auto obj = [&](const std::vector<double>& par) {
          try {
            Intensity cand = decode_intensity(intensities[i], par.data());
            MvData cand_md = md;
            for (std::size_t n = 0; n < data.size(); ++n)
              cand_md.z[i][n] = cand.hinv(data[n].y[i]);
            double jac = 0.0;
            for (const MvObservation& o : data) {
              const double lam = cand.lambda(o.y[i]);
              if (!(lam > 0.0) || !std::isfinite(lam)) return kNegInf;
              jac += std::log(lam);
            }
            const double v = mixture_loglik_mv(phases, grid, mw.w, cand_md);
            return std::isfinite(v) ? v + jac : kNegInf;
          } catch (const std::exception&) {
            return kNegInf;
          }
        };
        if (ni == 1) {
          const double base = obj(x0);
          const LineResult r = golden_max([&](double v) { return obj({v}); }, x0[0] - 0.5,
                                          x0[0] + 0.5, budget);
          if (r.value > base) x0[0] = r.x;
        } else {
          const SimplexResult r = simplex_max(obj, x0, 0.15, budget);
          if (std::isfinite(r.value)) x0 = r.x;
        }
        intensities[i] = decode_intensity(intensities[i], x0.data());
        for (std::size_t n = 0; n < data.size(); ++n)
          md.z[i][n] = intensities[i].hinv(data[n].y[i]);
      }
    }
  }

  if (!tr.converged && !aborted) {
    const double ll = mixture_loglik_mv(phases, grid, mw.w, md) + jac_all();
    tr.trace.push_back(ll);
  }
  rep.loglik_trace = std::move(tr.trace);
  rep.converged = tr.converged;
  rep.iterations = std::max<int>(0, static_cast<int>(rep.loglik_trace.size()) - (aborted ? 0 : 1));
  rep.model = SharedModel{std::move(phases), std::move(intensities), scaling};
  return rep;
}

}  // namespace

FitReport em_cph(const std::vector<Observation>& data, int p, const ScalingFamily& scaling0,
                 const EmOptions& opt) {
  return fit_uni(data, {}, p, Intensity::constant(), scaling0, opt);
}

FitReport em_siph(const std::vector<Observation>& data, int p, const Intensity& intensity0,
                  const ScalingFamily& scaling0, const EmOptions& opt) {
  return fit_uni(data, {}, p, intensity0, scaling0, opt);
}

FitReport em_mml(const std::vector<Observation>& data, int p, double alpha0,
                 const EmOptions& opt) {
  check_options(opt);
  check_observations(data);
  if (p < 1) throw std::invalid_argument("at least one phase is required");
  for (const Observation& o : data)
    if (!o.x.empty()) throw std::invalid_argument("covariates are not supported by this fit");
  if (!(alpha0 > 0.0) || !(alpha0 >= 0.02) || !(alpha0 <= 0.99))
    throw std::invalid_argument("initial index must lie in [0.02, 0.99]");

  FitReport rep;
  rep.seed = opt.seed;

  ThetaGrid grid = ThetaGrid::build_mml(alpha0, opt.quad);
  double alpha = alpha0;
  MixWeights mw = detail::mixing_weights_mml(grid, alpha);
  if (std::abs(mw.raw_mass - 1.0) > 1e-3) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "scaling grid captures mass %.6g; ", mw.raw_mass);
    rep.note += buf;
  }

  const std::vector<double> w(data.size(), 1.0);
  double sum_log_y = 0.0;
  double n_exact = 0.0;
  for (const Observation& o : data) {
    if (o.censored) continue;
    sum_log_y += std::log(o.y);
    n_exact += 1.0;
  }
  auto jac = [&](double a) { return n_exact * std::log(a) + (a - 1.0) * sum_log_y; };
  auto transform = [&](double a) {
    UniData ud;
    ud.z.resize(data.size());
    ud.censored.resize(data.size());
    ud.w = w;
    for (std::size_t n = 0; n < data.size(); ++n) {
      ud.z[n] = std::pow(data[n].y, a);
      ud.censored[n] = data[n].censored ? 1 : 0;
      ud.any_censored |= data[n].censored;
    }
    return ud;
  };

  UniData ud = transform(alpha);
  double zm = 0.0;
  for (double v : ud.z) zm += v;
  zm /= static_cast<double>(data.size());
  Rng rng(opt.seed);
  PhaseParams phase = detail::init_phase(p, opt.structure, rng, zm);

  Tracker tr;
  bool aborted = false;
  for (int it = 1; it <= opt.max_iter && !aborted; ++it) {
    UniStats st = detail::estep_uni(phase, grid, mw.w, ud);
    if (st.bad_index >= 0) {
      rep.note += row_note(st.bad_index);
      aborted = true;
      break;
    }
    const double ll = st.loglik + jac(alpha);
    if (tr.push_and_check(ll, opt.tol)) break;

    detail::mstep_phase(phase, st);

    auto obj = [&](double a) {
      if (!(a >= 0.02) || !(a <= 0.99)) return kNegInf;
      try {
        const MixWeights cand = detail::mixing_weights_mml(grid, a);
        const UniData cud = transform(a);
        const double v = detail::mixture_loglik_uni(phase, grid, cand.w, cud);
        return std::isfinite(v) ? v + jac(a) : kNegInf;
      } catch (const std::exception&) {
        return kNegInf;
      }
    };
    const double base = obj(alpha);
    const LineResult r = golden_max(obj, std::max(0.02, alpha - 0.08),
                                    std::min(0.99, alpha + 0.08), opt.inner_evals - 1);
    if (r.value > base) {
      alpha = r.x;
      mw = detail::mixing_weights_mml(grid, alpha);
      ud = transform(alpha);
    }
  }

  if (!tr.converged && !aborted) {
    const double ll = detail::mixture_loglik_uni(phase, grid, mw.w, ud) + jac(alpha);
    tr.trace.push_back(ll);
  }
  rep.loglik_trace = std::move(tr.trace);
  rep.converged = tr.converged;
  rep.iterations = std::max<int>(0, static_cast<int>(rep.loglik_trace.size()) - (aborted ? 0 : 1));
  rep.model = MmlModel{phase, alpha};
  return rep;
}

FitReport em_mv_cph(const std::vector<MvObservation>& data, const std::vector<int>& dims,
                    const ScalingFamily& scaling0, const EmOptions& opt) {
  std::vector<Intensity> intensities(dims.size(), Intensity::constant());
  return fit_mv(data, dims, std::move(intensities), scaling0, opt);
}

FitReport em_mv_siph(const std::vector<MvObservation>& data, const std::vector<int>& dims,
                     const std::vector<Intensity>& intensities0, const ScalingFamily& scaling0,
                     const EmOptions& opt) {
  return fit_mv(data, dims, intensities0, scaling0, opt);
}

FitReport em_corr_cph(const std::vector<MvObservation>& data, const std::array<int, 2>& dims,
                      double kappa00, double kappa10, double kappa20, const EmOptions& opt) {
  check_options(opt);
  if (!(kappa00 > 0.0) || !(kappa10 > 0.0) || !(kappa20 > 0.0))
    throw std::invalid_argument("shape parameters must be positive");
  if (dims[0] < 1 || dims[1] < 1)
    throw std::invalid_argument("at least one phase per component is required");
  if (static_cast<long>(dims[0]) * dims[1] > kMaxJointDim)
    throw std::invalid_argument("joint dimension exceeds the 512 state cap");
  if (data.empty()) throw std::invalid_argument("empty dataset");
  for (const MvObservation& o : data) {
    if (o.y.size() != 2) throw std::invalid_argument("bivariate rows are required");
    for (double v : o.y)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("observations must be positive and finite");
  }

  FitReport rep;
  rep.seed = opt.seed;

  // One gamma grid per latent shock; the rate normalisers stay frozen so the
  // node positions remain valid for the whole run.
  QuadratureConfig cfg3 = opt.quad;
  cfg3.n_nodes = std::max(10, opt.quad.n_nodes / 4);
  std::array<ThetaGrid, 3> grids = {
      ThetaGrid::build(ScalingFamily::gamma(kappa00), cfg3),
      ThetaGrid::build(ScalingFamily::gamma(kappa10), cfg3),
      ThetaGrid::build(ScalingFamily::gamma(kappa20), cfg3)};
  std::array<double, 3> kappa = {kappa00, kappa10, kappa20};
  const double eta1 = kappa00 + kappa10;
  const double eta2 = kappa00 + kappa20;
  std::array<MixWeights, 3> mw;
  for (int i = 0; i < 3; ++i)
    mw[i] = detail::mixing_weights(grids[i], ScalingFamily::gamma(kappa[i]));

  MvData md;
  md.w.assign(data.size(), 1.0);
  md.z.assign(2, std::vector<double>(data.size()));
  for (int i = 0; i < 2; ++i)
    for (std::size_t n = 0; n < data.size(); ++n) md.z[i][n] = data[n].y[i];

  Rng rng(opt.seed);
  std::array<PhaseParams, 2> phases = {PhaseParams{}, PhaseParams{}};
  for (int i = 0; i < 2; ++i) {
    double zm = 0.0;
    for (double v : md.z[i]) zm += v;
    zm /= static_cast<double>(data.size());
    phases[i] = detail::init_phase(dims[i], opt.structure, rng, zm);
  }

  Tracker tr;
  bool aborted = false;
  for (int it = 1; it <= opt.max_iter && !aborted; ++it) {
    detail::CorrStats st = detail::estep_corr(
        phases, {&grids[0], &grids[1], &grids[2]}, {&mw[0].w, &mw[1].w, &mw[2].w}, eta1, eta2,
        md);
    if (st.bad_index >= 0) {
      rep.note += row_note(st.bad_index);
      aborted = true;
      break;
    }
    if (tr.push_and_check(st.loglik, opt.tol)) break;

    detail::mstep_phase(phases[0], st.margin[0]);
    detail::mstep_phase(phases[1], st.margin[1]);

    const std::array<const std::vector<double>*, 3> posts = {&st.post_w0, &st.post_w1,
                                                             &st.post_w2};
    const int budget = std::max(6, opt.inner_evals / 3);
    for (int i = 0; i < 3; ++i) {
      const double cur = detail::weight_objective(grids[i], ScalingFamily::gamma(kappa[i]),
                                                  *posts[i]);
      auto f = [&](double x) {
        try {
          return detail::weight_objective(grids[i], ScalingFamily::gamma(std::exp(x)),
                                          *posts[i]);
        } catch (const std::exception&) {
          return kNegInf;
        }
      };
      const double lk = std::log(kappa[i]);
      const LineResult r = golden_max(f, lk - 0.7, lk + 0.7, budget);
      if (r.value > cur) kappa[i] = std::exp(r.x);
      mw[i] = detail::mixing_weights(grids[i], ScalingFamily::gamma(kappa[i]));
    }
  }

  if (!tr.converged && !aborted) {
    detail::CorrStats st = detail::estep_corr(
        phases, {&grids[0], &grids[1], &grids[2]}, {&mw[0].w, &mw[1].w, &mw[2].w}, eta1, eta2,
        md);
    if (st.bad_index < 0) tr.trace.push_back(st.loglik);
  }
  rep.loglik_trace = std::move(tr.trace);
  rep.converged = tr.converged;
  rep.iterations = std::max<int>(0, static_cast<int>(rep.loglik_trace.size()) - (aborted ? 0 : 1));
  CorrelatedGammaModel model;
  model.margins = phases;
  model.kappa0 = kappa[0];
  model.kappa1 = kappa[1];
  model.kappa2 = kappa[2];
  model.eta1 = eta1;
  model.eta2 = eta2;
  rep.model = model;
  return rep;
}

FitReport approximate_density(const std::function<double(double)>& target, double lo, double hi,
                              int n_grid, int p, const Intensity& intensity0,
                              const ScalingFamily& scaling0, const EmOptions& opt) {
  if (!(lo >= 0.0) || !(hi > lo)) throw std::invalid_argument("grid interval must be ordered");
  if (n_grid < 10) throw std::invalid_argument("at least 10 grid points are required");

  const QuadRule rule = gauss_legendre(n_grid, lo, hi);
  std::vector<Observation> data;
  std::vector<double> w;
  double mass = 0.0;
  for (int j = 0; j < n_grid; ++j) {
    const double y = rule.nodes[j];
    if (!(y > 0.0)) continue;
    const double g = target(y);
    if (!std::isfinite(g) || g <= 0.0) continue;
    data.push_back(Observation{y, false, {}});
    w.push_back(g * rule.weights[j]);
    mass += w.back();
  }
  if (data.empty()) throw std::invalid_argument("target carries no mass on the grid");

  // Mass the density carries beyond the window would otherwise tilt the
  // weighted likelihood toward lighter tails; one right-censored row holding
  // the leftover mass keeps an in-family target exactly recoverable.
  const double tail = 1.0 - mass;
  if (tail > 1e-10) {
    data.push_back(Observation{hi, true, {}});
    w.push_back(tail);
  }

  FitReport rep = fit_uni(data, std::move(w), p, intensity0, scaling0, opt);
  if (mass < 0.999) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "target mass on the grid is %.6g; ", mass);
    rep.note = buf + rep.note;
  }
  return rep;
}

}  // namespace siph
