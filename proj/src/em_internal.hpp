#pragma once

#include <vector>

#include "siph/em.hpp"
#include "siph/matrix.hpp"
#include "siph/scaling.hpp"

namespace siph {
namespace detail {

// Fixed scaling-variable grid.  Laguerre grids carry the construction shape
// so weights for other gamma shapes come from an exact density ratio; log
// grids carry plain quadrature weights and take the density at evaluation
// time.
struct ThetaGrid {
  enum class Scheme { de_log, atoms, point };
  Scheme scheme = Scheme::point;
  std::vector<double> theta;
  std::vector<double> base_w;
  std::vector<double> log_theta;
  double alpha0 = 1.0;

  static ThetaGrid build(const ScalingFamily& f, const QuadratureConfig& cfg);
  static ThetaGrid build_mml(double alpha0, const QuadratureConfig& cfg);
};

struct MixWeights {
  std::vector<double> w;  // normalised to sum 1
  double raw_mass = 0.0;  // mass captured by the grid before normalisation
};

MixWeights mixing_weights(const ThetaGrid& g, const ScalingFamily& f);
MixWeights mixing_weights_mml(const ThetaGrid& g, double alpha);

// Node-weight part of the EM objective for scaling-parameter updates:
// sum_j post_j log w_j(params) over the fixed nodes.
double weight_objective(const ThetaGrid& g, const ScalingFamily& f,
                        const std::vector<double>& post);
double weight_objective_mml(const ThetaGrid& g, double alpha, const std::vector<double>& post);

struct UniData {
  std::vector<double> z;
  std::vector<unsigned char> censored;
  std::vector<double> w;
  bool any_censored = false;

  std::size_t size() const { return z.size(); }
};

struct UniStats {
  std::vector<double> b;        // expected starts per state
  std::vector<double> ztheta;   // expected scaled sojourn per state
  Matrix njump;                 // expected jump counts
  std::vector<double> nexit;    // expected absorption counts per state
  std::vector<double> node_post;
  double wsum = 0.0;
  double loglik = 0.0;
  long bad_index = -1;          // first row with vanishing likelihood

  UniStats(int p, int n_nodes)
      : b(p, 0.0), ztheta(p, 0.0), njump(p, p), nexit(p, 0.0), node_post(n_nodes, 0.0) {}
};

// One conditional-expectation sweep over the discretised mixture.  Exact
// rows are processed before censored rows.
UniStats estep_uni(const PhaseParams& phase, const ThetaGrid& grid,
                   const std::vector<double>& mixw, const UniData& data);

// Observed loglik of the z-scale data under the discretised mixture with the
// given node weights (no time-transform jacobian).
double mixture_loglik_uni(const PhaseParams& phase, const ThetaGrid& grid,
                          const std::vector<double>& mixw, const UniData& data);

struct MvData {
  std::vector<std::vector<double>> z;  // z[margin][row]
  std::vector<double> w;

  std::size_t size() const { return w.size(); }
};

struct MvStats {
  std::vector<UniStats> margin;
  std::vector<double> node_post;
  double wsum = 0.0;
  double loglik = 0.0;
  long bad_index = -1;
};

MvStats estep_shared(const std::vector<PhaseParams>& phases, const ThetaGrid& grid,
                     const std::vector<double>& mixw, const MvData& data);

struct CorrStats {
  std::array<UniStats, 2> margin;
  std::vector<double> post_w0, post_w1, post_w2;  // masses on the three shock grids
  double wsum = 0.0;
  double loglik = 0.0;
  long bad_index = -1;
};

// Shared-shock bivariate sweep: the latent triple (W0, W1, W2) lives on the
// product of three fixed gamma grids and the margins decouple given W0.
CorrStats estep_corr(const std::array<PhaseParams, 2>& phases,
                     const std::array<const ThetaGrid*, 3>& grids,
                     const std::array<const std::vector<double>*, 3>& mixw,
                     double eta1, double eta2, const MvData& data);

// Replaces pi and t by the maximisers of the completed loglik; rows without
// accumulated sojourn mass are left unchanged.
void mstep_phase(PhaseParams& phase, const UniStats& s);

PhaseParams init_phase(int p, EmOptions::Structure structure, Rng& rng, double target_mean);

// Largest real part over the spectrum, used to skip propagator evaluations
// that cannot contribute at double precision.
double spectral_abscissa(const Matrix& t);

}  // namespace detail
}  // namespace siph
