#pragma once

#include <array>
#include <vector>

#include "siph/phase.hpp"
#include "siph/scaling.hpp"

namespace siph {

// Componentwise transformed absorption times driven by independent phase
// processes that share one scaling variable: Y_i = h_i(Z_i / Theta).
// The joint survival function closes over the Kronecker sum of the marginal
// generators, so the product of the marginal dimensions is capped.
struct SharedModel {
  std::vector<PhaseParams> margins;
  std::vector<Intensity> intensities;
  ScalingFamily scaling = ScalingFamily::degenerate(1.0);

  int dim() const { return static_cast<int>(margins.size()); }
  void validate() const;
};

inline constexpr int kMaxJointDim = 512;
inline constexpr int kMaxComponents = 3;

double shared_survival(const SharedModel& m, const std::vector<double>& y);
double shared_density(const SharedModel& m, const std::vector<double>& y);
std::vector<double> shared_sample(const SharedModel& m, Rng& rng);

// Coefficient of upper tail dependence for a bivariate model with gamma
// scaling; throws for other configurations.
double upper_tail_dependence(const SharedModel& m);

// Ratio estimate of P(Y1 > q1 | Y2 > q2) at empirical level q.  Sets
// *low_count when fewer than 20 conditioning exceedances support the ratio.
double empirical_upper_tail_dependence(const std::vector<std::array<double, 2>>& data,
                                       double q, bool* low_count = nullptr);

// Bivariate model whose scaling variables share a common gamma shock:
// Theta_i = (W0 + W_i) / eta_i with independent W0 ~ Gamma(kappa0) and
// W_i ~ Gamma(kappa_i), all unit rate.  Joint survival and density close
// over commuting matrix powers.
struct CorrelatedGammaModel {
  std::array<PhaseParams, 2> margins;
  std::array<Intensity, 2> intensities = {Intensity::constant(), Intensity::constant()};
  double kappa0 = 1.0, kappa1 = 1.0, kappa2 = 1.0;
  double eta1 = 2.0, eta2 = 2.0;  // rate normalisers, default kappa0 + kappa_i

  void validate() const;
  // Correlation of the scaling pair, free of the rate normalisers.
  double scaling_correlation() const;
};

double correlated_survival(const CorrelatedGammaModel& m, double y1, double y2);
double correlated_density(const CorrelatedGammaModel& m, double y1, double y2);
std::array<double, 2> correlated_sample(const CorrelatedGammaModel& m, Rng& rng);

}  // namespace siph
