#pragma once

#include <string>
#include <vector>

#include "siph/matrix.hpp"
#include "siph/rng.hpp"

namespace siph {

// Inhomogeneity family: intensity lambda(t) with cumulative transform
// h(z) = hinv^{-1}(z).  Throughout, lambda(y) = d/dy hinv(y) and
// h(hinv(y)) = y on y >= 0.
class Intensity {
 public:
  enum class Family { constant, pareto, weibull, lognormal, loglogistic, gompertz };

  static Intensity constant();
  static Intensity pareto(double eta);
  static Intensity weibull(double eta);
  static Intensity lognormal(double gamma);  // gamma > 1
  static Intensity loglogistic(double eta, double gamma);
  static Intensity gompertz(double eta);

  Family family() const { return family_; }
  std::string family_name() const;

  double lambda(double t) const;
  double hinv(double y) const;
  double h(double z) const;

  // Free parameters in a fixed order (used by the fitters and the io layer).
  std::vector<double> params() const;
  std::vector<std::string> param_names() const;
  Intensity with_params(const std::vector<double>& p) const;

 private:
  Intensity(Family f, double eta, double gamma);
  Family family_;
  double eta_ = 0.0;
  double gamma_ = 0.0;
};

// Initial distribution and sub-intensity matrix of a terminating Markov jump
// process.
struct PhaseParams {
  std::vector<double> pi;
  Matrix t;

  int dim() const { return t.rows(); }
  std::vector<double> exit() const;  // -T e
  // Throws std::invalid_argument with a description of the violated
  // condition.
  void validate() const;
};

// Plain phase-type evaluation.
double ph_survival(const PhaseParams& p, double y);
double ph_density(const PhaseParams& p, double y);
double ph_mean(const PhaseParams& p);

// Time-inhomogeneous variants through an intensity family.
double iph_survival(const PhaseParams& p, const Intensity& f, double y);
double iph_density(const PhaseParams& p, const Intensity& f, double y);

// Absorption time by jump-chain simulation; one uniform per jump plus one
// exponential per sojourn, all from rng.
double ph_sample(const PhaseParams& p, Rng& rng);
double iph_sample(const PhaseParams& p, const Intensity& f, Rng& rng);

}  // namespace siph
