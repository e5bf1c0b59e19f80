#include <cmath>
#include <limits>
#include <optional>

#include "em_internal.hpp"
#include "siph/decomp.hpp"
#include "siph/matfun.hpp"

namespace siph {
namespace detail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// exp(mu * s) with mu the spectral abscissa bounds every propagator entry up
// to a polynomial factor; beyond this product the node cannot move a double.
constexpr double kLogSkip = 800.0;

struct ObsAcc {
  std::vector<double> b;
  Matrix g;               // g(l,k) accumulates the (l,k) convolution entries
  std::vector<double> pid;
  std::vector<double> q;

  explicit ObsAcc(int p) : b(p, 0.0), g(p, p), pid(p, 0.0), q(p, 0.0) {}

  void reset() {
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(pid.begin(), pid.end(), 0.0);
    std::fill(q.begin(), q.end(), 0.0);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) g(i, j) = 0.0;
  }
};

void flush_obs(UniStats& out, const PhaseParams& phase, const ObsAcc& acc, double scale) {
  const int p = phase.dim();
  const std::vector<double> exit = phase.exit();
  for (int k = 0; k < p; ++k) {
    out.b[k] += scale * acc.b[k];
    out.ztheta[k] += scale * (acc.g(k, k) + acc.q[k]);
    out.nexit[k] += scale * exit[k] * (acc.pid[k] + acc.q[k]);
    for (int l = 0; l < p; ++l) {
      if (l == k) continue;
      const double tkl = phase.t(k, l);
      if (tkl != 0.0) out.njump(k, l) += scale * tkl * (acc.g(l, k) + acc.q[k]);
    }
  }
}

}  // namespace

double spectral_abscissa(const Matrix& t) {
  Schur s = schur_decompose(t);
  double mx = kNegInf;
  for (int i = 0; i < t.rows(); ++i) mx = std::max(mx, s.t(i, i).real());
  return mx;
}

UniStats estep_uni(const PhaseParams& phase, const ThetaGrid& grid,
                   const std::vector<double>& mixw, const UniData& data) {
  const int p = phase.dim();
  const int nn = static_cast<int>(grid.theta.size());
  UniStats out(p, nn);
  const std::vector<double> exit = phase.exit();

  ScaledExpm prop_exact(van_loan_block(phase.t, exit, phase.pi));
  std::optional<ScaledExpm> prop_cens;
  Matrix inv_negt;
  if (data.any_censored) {
    prop_cens.emplace(van_loan_block(phase.t, std::vector<double>(p, 1.0), phase.pi));
    inv_negt = inverse(phase.t * (-1.0));
  }
  const double mu = spectral_abscissa(phase.t);
  const double s_skip = mu < 0.0 ? kLogSkip / (-mu) : std::numeric_limits<double>::infinity();

  Matrix e2(2 * p, 2 * p);
  ObsAcc acc(p);
  std::vector<double> fj(nn), dv(p), pid(p);

  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t n = 0; n < data.size(); ++n) {
      const bool cens = data.censored[n] != 0;
      if (cens != (pass == 1)) continue;
      const double z = data.z[n];
      const double w = data.w[n];
      if (w <= 0.0) continue;
      acc.reset();
      double fn = 0.0;

      for (int j = 0; j < nn; ++j) {
        fj[j] = 0.0;
        const double wj = mixw[j];
        if (wj <= 0.0) continue;
        const double theta = grid.theta[j];
        const double s = theta * z;
        if (s > s_skip) continue;

        if (!cens) {
          prop_exact.eval(s, e2);
          double pidt = 0.0;
          for (int k = 0; k < p; ++k) {
            double dk = 0.0;
            for (int l = 0; l < p; ++l) dk += e2(k, l) * exit[l];
            dv[k] = dk;
            pidt += phase.pi[k] * dk;
          }
          const double wt = wj * theta;
          fj[j] = wt * pidt;
          fn += fj[j];
          for (int k = 0; k < p; ++k) {
            acc.b[k] += wt * phase.pi[k] * dv[k];
            double pk = 0.0;
            for (int l = 0; l < p; ++l) pk += phase.pi[l] * e2(l, k);
            acc.pid[k] += wt * pk;
            for (int l = 0; l < p; ++l) acc.g(l, k) += wt * e2(l, p + k);
          }
        } else {
          prop_cens->eval(s, e2);
          double pide = 0.0;
          for (int k = 0; k < p; ++k) {
            double dk = 0.0;
            for (int l = 0; l < p; ++l) dk += e2(k, l);
            dv[k] = dk;
            pide += phase.pi[k] * dk;
          }
          fj[j] = wj * pide;
          fn += fj[j];
          for (int l = 0; l < p; ++l) {
            double pl = 0.0;
            for (int k = 0; k < p; ++k) pl += phase.pi[k] * e2(k, l);
            pid[l] = pl;
          }
          for (int k = 0; k < p; ++k) {
            acc.b[k] += wj * phase.pi[k] * dv[k];
            double qk = 0.0;
            for (int l = 0; l < p; ++l) qk += pid[l] * inv_negt(l, k);
            acc.q[k] += wj * qk;
            for (int l = 0; l < p; ++l) acc.g(l, k) += wj * e2(l, p + k);
          }
        }
      }

      if (!(fn > 0.0) || !std::isfinite(fn)) {
        out.loglik = kNegInf;
        out.bad_index = static_cast<long>(n);
        return out;
      }
      const double scale = w / fn;
      out.loglik += w * std::log(fn);
      out.wsum += w;
      flush_obs(out, phase, acc, scale);
      for (int j = 0; j < nn; ++j) out.node_post[j] += scale * fj[j];
    }
  }
  return out;
}

double mixture_loglik_uni(const PhaseParams& phase, const ThetaGrid& grid,
                          const std::vector<double>& mixw, const UniData& data) {
  const int p = phase.dim();
  const int nn = static_cast<int>(grid.theta.size());
  const std::vector<double> exit = phase.exit();
  ScaledExpm prop(phase.t);
  const double mu = spectral_abscissa(phase.t);
  const double s_skip = mu < 0.0 ? kLogSkip / (-mu) : std::numeric_limits<double>::infinity();

  Matrix d(p, p);
  double ll = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (data.w[n] <= 0.0) continue;
    const bool cens = data.censored[n] != 0;
    const double z = data.z[n];
    double fn = 0.0;
    for (int j = 0; j < nn; ++j) {
      const double wj = mixw[j];
      if (wj <= 0.0) continue;
      const double theta = grid.theta[j];
      const double s = theta * z;
      if (s > s_skip) continue;
      prop.eval(s, d);
      double acc = 0.0;
      if (!cens) {
        for (int k = 0; k < p; ++k) {
          double dk = 0.0;
          for (int l = 0; l < p; ++l) dk += d(k, l) * exit[l];
          acc += phase.pi[k] * dk;
        }
        fn += wj * theta * acc;
      } else {
        for (int k = 0; k < p; ++k) {
          double dk = 0.0;
          for (int l = 0; l < p; ++l) dk += d(k, l);
          acc += phase.pi[k] * dk;
        }
        fn += wj * acc;
      }
    }
    if (!(fn > 0.0) || !std::isfinite(fn)) return kNegInf;
    ll += data.w[n] * std::log(fn);
  }
  return ll;
}

MvStats estep_shared(const std::vector<PhaseParams>& phases, const ThetaGrid& grid,
                     const std::vector<double>& mixw, const MvData& data) {
  const int d = static_cast<int>(phases.size());
  const int nn = static_cast<int>(grid.theta.size());
  MvStats out;
  out.node_post.assign(nn, 0.0);
  for (const PhaseParams& ph : phases) out.margin.emplace_back(ph.dim(), nn);

  std::vector<ScaledExpm> props;
  std::vector<std::vector<double>> exits;
  std::vector<double> skips;
  for (const PhaseParams& ph : phases) {
    exits.push_back(ph.exit());
    props.emplace_back(van_loan_block(ph.t, exits.back(), ph.pi));
    const double mu = spectral_abscissa(ph.t);
    skips.push_back(mu < 0.0 ? kLogSkip / (-mu) : std::numeric_limits<double>::infinity());
  }

  std::vector<Matrix> e2;
  std::vector<ObsAcc> acc;
  for (const PhaseParams& ph : phases) {
    e2.emplace_back(2 * ph.dim(), 2 * ph.dim());
    acc.emplace_back(ph.dim());
  }
  std::vector<double> fj(nn), g(d), pidt(d);

  for (std::size_t n = 0; n < data.size(); ++n) {
    const double w = data.w[n];
    for (int i = 0; i < d; ++i) acc[i].reset();
    double fn = 0.0;

    for (int j = 0; j < nn; ++j) {
      fj[j] = 0.0;
      const double wj = mixw[j];
      if (wj <= 0.0) continue;
      const double theta = grid.theta[j];
      bool alive = true;
      for (int i = 0; i < d && alive; ++i) {
        const double s = theta * data.z[i][n];
        if (s > skips[i]) {
          alive = false;
          break;
        }
        const int p = phases[i].dim();
        props[i].eval(s, e2[i]);
        double acc_pidt = 0.0;
        for (int k = 0; k < p; ++k) {
          double dk = 0.0;
          for (int l = 0; l < p; ++l) dk += e2[i](k, l) * exits[i][l];
          acc_pidt += phases[i].pi[k] * dk;
        }
        pidt[i] = acc_pidt;
        g[i] = theta * acc_pidt;
        if (!(g[i] > 0.0)) alive = false;
      }
      if (!alive) continue;
      double prod = wj;
      for (int i = 0; i < d; ++i) prod *= g[i];
      fj[j] = prod;
      fn += prod;

      // Conditional on the node each margin contributes independently; the
      // companions' densities fold into the node weight.
      for (int i = 0; i < d; ++i) {
        const int p = phases[i].dim();
        const double u = prod / g[i];  // w_j * prod of the other margins
        const double ut = u * theta;
        for (int k = 0; k < p; ++k) {
          double dk = 0.0;
          for (int l = 0; l < p; ++l) dk += e2[i](k, l) * exits[i][l];
          acc[i].b[k] += ut * phases[i].pi[k] * dk;
          double pk = 0.0;
          for (int l = 0; l < p; ++l) pk += phases[i].pi[l] * e2[i](l, k);
          acc[i].pid[k] += ut * pk;
          for (int l = 0; l < p; ++l) acc[i].g(l, k) += ut * e2[i](l, p + k);
        }
      }
    }

    if (!(fn > 0.0) || !std::isfinite(fn)) {
      out.loglik = kNegInf;
      out.bad_index = static_cast<long>(n);
      return out;
    }
    const double scale = w / fn;
    out.loglik += w * std::log(fn);
    out.wsum += w;
    for (int i = 0; i < d; ++i) flush_obs(out.margin[i], phases[i], acc[i], scale);
    for (int j = 0; j < nn; ++j) out.node_post[j] += scale * fj[j];
  }
  for (int i = 0; i < d; ++i) out.margin[i].wsum = out.wsum;
  return out;
}

namespace {

// Margin pass of the shared-shock sweep: accumulates the weight-mixed
// density and statistics over one shock grid at fixed common shock w0.
struct MarginPass {
  const PhaseParams* phase;
  ScaledExpm prop;
  std::vector<double> exit;
  double s_skip;
  double eta;
  Matrix e2;

  MarginPass(const PhaseParams& ph, double eta_in)
      : phase(&ph),
        prop(van_loan_block(ph.t, ph.exit(), ph.pi)),
        exit(ph.exit()),
        eta(eta_in),
        e2(2 * ph.dim(), 2 * ph.dim()) {
    const double mu = spectral_abscissa(ph.t);
    s_skip = mu < 0.0 ? kLogSkip / (-mu) : std::numeric_limits<double>::infinity();
  }

  // Returns the mixed density sum_b w_b g(theta_b) and fills gvals; bundle
  // accumulates the node-weighted statistic integrands.
  double run(double w0, const ThetaGrid& grid, const std::vector<double>& mixw, double z,
             std::vector<double>& gvals, ObsAcc& bundle) {
    const int p = phase->dim();
    double total = 0.0;
    for (std::size_t b = 0; b < grid.theta.size(); ++b) {
      gvals[b] = 0.0;
      const double wb = mixw[b];
      if (wb <= 0.0) continue;
      const double theta = (w0 + grid.theta[b]) / eta;
      const double s = theta * z;
      if (s > s_skip) continue;
      prop.eval(s, e2);
      double pidt = 0.0;
      for (int k = 0; k < p; ++k) {
        double dk = 0.0;
        for (int l = 0; l < p; ++l) dk += e2(k, l) * exit[l];
        pidt += phase->pi[k] * dk;
      }
      const double gval = theta * pidt;
      if (!(gval > 0.0)) continue;
      gvals[b] = gval;
      total += wb * gval;
      const double wt = wb * theta;
      for (int k = 0; k < p; ++k) {
        double dk = 0.0;
        for (int l = 0; l < p; ++l) dk += e2(k, l) * exit[l];
        bundle.b[k] += wt * phase->pi[k] * dk;
        double pk = 0.0;
        for (int l = 0; l < p; ++l) pk += phase->pi[l] * e2(l, k);
        bundle.pid[k] += wt * pk;
        for (int l = 0; l < p; ++l) bundle.g(l, k) += wt * e2(l, p + k);
      }
    }
    return total;
  }
};

void axpy_acc(ObsAcc& dst, const ObsAcc& src, double c) {
  const int p = static_cast<int>(dst.b.size());
  for (int k = 0; k < p; ++k) {
    dst.b[k] += c * src.b[k];
    dst.pid[k] += c * src.pid[k];
    for (int l = 0; l < p; ++l) dst.g(k, l) += c * src.g(k, l);
  }
}

}  // namespace

CorrStats estep_corr(const std::array<PhaseParams, 2>& phases,
                     const std::array<const ThetaGrid*, 3>& grids,
                     const std::array<const std::vector<double>*, 3>& mixw,
                     double eta1, double eta2, const MvData& data) {
  const int n0 = static_cast<int>(grids[0]->theta.size());
  const int n1 = static_cast<int>(grids[1]->theta.size());
  const int n2 = static_cast<int>(grids[2]->theta.size());
  CorrStats out{{UniStats(phases[0].dim(), 1), UniStats(phases[1].dim(), 1)},
                std::vector<double>(n0, 0.0),
                std::vector<double>(n1, 0.0),
                std::vector<double>(n2, 0.0)};

  MarginPass m1(phases[0], eta1);
  MarginPass m2(phases[1], eta2);

  ObsAcc bun1(phases[0].dim()), bun2(phases[1].dim());
  ObsAcc obs1(phases[0].dim()), obs2(phases[1].dim());
  std::vector<double> g1(n1), g2(n2);
  std::vector<double> pa(n0), pb(n1), pc(n2);

  for (std::size_t n = 0; n < data.size(); ++n) {
    const double w = data.w[n];
    const double z1 = data.z[0][n];
    const double z2 = data.z[1][n];
    obs1.reset();
    obs2.reset();
    std::fill(pa.begin(), pa.end(), 0.0);
    std::fill(pb.begin(), pb.end(), 0.0);
    std::fill(pc.begin(), pc.end(), 0.0);
    double fn = 0.0;

    for (int a = 0; a < n0; ++a) {
      const double wa = (*mixw[0])[a];
      if (wa <= 0.0) continue;
      const double w0 = grids[0]->theta[a];

      bun2.reset();
      const double big2 = m2.run(w0, *grids[2], *mixw[2], z2, g2, bun2);
      if (!(big2 > 0.0)) continue;
      bun1.reset();
      const double big1 = m1.run(w0, *grids[1], *mixw[1], z1, g1, bun1);
      if (!(big1 > 0.0)) continue;

      fn += wa * big1 * big2;
      axpy_acc(obs1, bun1, wa * big2);
      axpy_acc(obs2, bun2, wa * big1);
      pa[a] += wa * big1 * big2;
      for (int b = 0; b < n1; ++b) pb[b] += wa * big2 * (*mixw[1])[b] * g1[b];
      for (int c = 0; c < n2; ++c) pc[c] += wa * big1 * (*mixw[2])[c] * g2[c];
    }

    if (!(fn > 0.0) || !std::isfinite(fn)) {
      out.loglik = kNegInf;
      out.bad_index = static_cast<long>(n);
      return out;
    }
    const double scale = w / fn;
    out.loglik += w * std::log(fn);
    out.wsum += w;
    flush_obs(out.margin[0], phases[0], obs1, scale);
    flush_obs(out.margin[1], phases[1], obs2, scale);
    for (int a = 0; a < n0; ++a) out.post_w0[a] += scale * pa[a];
    for (int b = 0; b < n1; ++b) out.post_w1[b] += scale * pb[b];
    for (int c = 0; c < n2; ++c) out.post_w2[c] += scale * pc[c];
  }
  out.margin[0].wsum = out.wsum;
  out.margin[1].wsum = out.wsum;
  return out;
}

void mstep_phase(PhaseParams& phase, const UniStats& s) {
  const int p = phase.dim();
  if (!(s.wsum > 0.0)) return;

  double bsum = 0.0;
  for (int k = 0; k < p; ++k) bsum += s.b[k];
  if (bsum > 0.0)
    for (int k = 0; k < p; ++k) phase.pi[k] = s.b[k] / bsum;

  const std::vector<double> exit = phase.exit();
  for (int k = 0; k < p; ++k) {
    // A state the posterior never visits keeps its current row.
    if (!(s.ztheta[k] > 1e-300)) continue;
    double diag = 0.0;
    const double ek = s.nexit[k] / s.ztheta[k];
    for (int l = 0; l < p; ++l) {
      if (l == k) continue;
      const double tkl = s.njump(k, l) / s.ztheta[k];
      phase.t(k, l) = tkl;
      diag += tkl;
    }
    phase.t(k, k) = -(diag + ek);
  }
}

PhaseParams init_phase(int p, EmOptions::Structure structure, Rng& rng, double target_mean) {
  PhaseParams ph;
  ph.pi.resize(p);
  ph.t = Matrix(p, p);

  double psum = 0.0;
  for (int k = 0; k < p; ++k) {
    ph.pi[k] = rng.exponential();
    psum += ph.pi[k];
  }
  for (int k = 0; k < p; ++k) ph.pi[k] /= psum;

  if (structure == EmOptions::Structure::coxian) {
    for (int k = 0; k < p; ++k) {
      const double rate = 0.5 + rng.uniform();
      const double go_on = (k + 1 < p) ? 0.2 + 0.6 * rng.uniform() : 0.0;
      if (k + 1 < p) ph.t(k, k + 1) = rate * go_on;
      ph.t(k, k) = -rate;
    }
  } else {
    for (int k = 0; k < p; ++k) {
      double row = rng.uniform();  // exit mass
      for (int l = 0; l < p; ++l) {
        if (l == k) continue;
        ph.t(k, l) = rng.uniform();
        row += ph.t(k, l);
      }
      ph.t(k, k) = -row;
    }
  }

  if (target_mean > 0.0 && std::isfinite(target_mean)) {
    const double c = ph_mean(ph) / target_mean;
    if (c > 0.0 && std::isfinite(c)) ph.t *= c;
  }
  return ph;
}

}  // namespace detail
}  // namespace siph
