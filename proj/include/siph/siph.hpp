#pragma once

#include <optional>
#include <string>
#include <vector>

#include "siph/phase.hpp"
#include "siph/scaling.hpp"

namespace siph {

// Scaled (frailty-type) inhomogeneous phase-type law: the absorption time of
// the phase process is divided by the mixing variable Theta before the time
// transform h is applied, i.e. Y = h(Z / Theta), optionally with a
// proportional covariate effect exp(beta.x) on the intensity.
struct SiphModel {
  PhaseParams phase;
  Intensity intensity = Intensity::constant();
  ScalingFamily scaling = ScalingFamily::degenerate(1.0);
  std::vector<double> beta;  // empty when the model has no covariates

  void validate() const;
};

struct Observation {
  double y = 0.0;
  bool censored = false;
  std::vector<double> x;
};

double siph_survival(const SiphModel& m, double y, const std::vector<double>& x = {});
double siph_density(const SiphModel& m, double y, const std::vector<double>& x = {});
double siph_sample(const SiphModel& m, Rng& rng, const std::vector<double>& x = {});

// Quantile by bisection on the survival function (absolute/relative width
// 1e-10).  Throws std::domain_error when the requested level lies beyond an
// atom at infinity (unshifted compound Poisson scaling).
double siph_quantile(const SiphModel& m, double q, const std::vector<double>& x = {});

struct LoglikDiag {
  long bad_index = -1;  // observation with vanishing density/survival
  std::string message;
};

// Sum of log density over exact and log survival over censored rows;
// -inf with diagnostics when some row has zero likelihood.
double siph_loglik(const SiphModel& m, const std::vector<Observation>& data,
                   LoglikDiag* diag = nullptr);

// Power-scaled family with stable scaling: Y = (Z S^alpha)^{1/alpha} where
// S is positive alpha-stable, so hinv(y) = y^alpha and Theta = S^{-alpha}.
// Survival and density are evaluated by mixing the phase law over Theta on a
// double-exponential grid.
struct MmlModel {
  PhaseParams phase;
  double alpha = 0.5;
};

double mml_theta_log_density(double theta, double alpha);
double mml_survival(const PhaseParams& p, double alpha, double y);
double mml_density(const PhaseParams& p, double alpha, double y);
double mml_sample(const PhaseParams& p, double alpha, Rng& rng);
double mml_loglik(const MmlModel& m, const std::vector<Observation>& data,
                  LoglikDiag* diag = nullptr);

// Asymptotic tail behaviour of the model's survival function.
struct TailClass {
  enum class Kind {
    slowly_varying,
    regularly_varying,
    weibull_type,
    lognormal_type,
    exponential_type,
    gumbel_type,
  };
  Kind kind;
  // Regular-variation index or Weibull/lognormal shape, absent on boundary
  // cases where only the constants decide.
  std::optional<double> index;
};

TailClass tail_class(const SiphModel& m);
std::string to_string(const TailClass& t);

}  // namespace siph
