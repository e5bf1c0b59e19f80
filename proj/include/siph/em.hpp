#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "siph/multivar.hpp"
#include "siph/siph.hpp"

namespace siph {

// Size of the fixed node grid the scaling variable is discretised on during
// fitting.  Node positions are chosen once per fit from the initial scaling
// parameters; later sweeps only reweight them, which keeps every sweep an
// exact EM step for the discretised mixture and the reported loglik trace
// monotone.
struct QuadratureConfig {
  int n_nodes = 100;   // at least 10
  double log_range = 14.0;
};

struct EmOptions {
  int max_iter = 2000;
  double tol = 1e-7;       // relative change of the objective between sweeps
  int inner_evals = 20;    // objective-call budget of each within-sweep search
  QuadratureConfig quad;
  std::uint64_t seed = 1;  // drives the random initialisation only
  enum class Structure { general, coxian };
  Structure structure = Structure::general;
};

struct MvObservation {
  std::vector<double> y;
};

struct FitReport {
  std::variant<SiphModel, MmlModel, SharedModel, CorrelatedGammaModel> model;
  // Objective after each completed sweep; the first entry is the value at the
  // initial parameters and the values never decrease.
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::string note;

  double loglik() const {
    return loglik_trace.empty() ? -std::numeric_limits<double>::infinity()
                                : loglik_trace.back();
  }
};

// Scaled phase-type fit with constant intensity.  Gamma, inverse Gaussian,
// positive stable, discrete and degenerate scaling families are supported;
// the family of scaling0 also fixes the node layout.
FitReport em_cph(const std::vector<Observation>& data, int p, const ScalingFamily& scaling0,
                 const EmOptions& opt = {});

// Full fit: phase parameters, scaling parameters, intensity parameters and
// covariate coefficients.
FitReport em_siph(const std::vector<Observation>& data, int p, const Intensity& intensity0,
                  const ScalingFamily& scaling0, const EmOptions& opt = {});

// Power-scaled family with stable scaling; alpha ties the time transform to
// the scaling law and is updated by a bounded line search each sweep.
FitReport em_mml(const std::vector<Observation>& data, int p, double alpha0,
                 const EmOptions& opt = {});

// Multivariate fits under one shared scaling variable.
FitReport em_mv_cph(const std::vector<MvObservation>& data, const std::vector<int>& dims,
                    const ScalingFamily& scaling0, const EmOptions& opt = {});
FitReport em_mv_siph(const std::vector<MvObservation>& data, const std::vector<int>& dims,
                     const std::vector<Intensity>& intensities0, const ScalingFamily& scaling0,
                     const EmOptions& opt = {});

// Bivariate fit whose scaling pair shares a common gamma shock.  The rate
// normalisers are frozen at kappa00 + kappa10 and kappa00 + kappa20; the
// generator scales absorb any drift of the scaling means.
FitReport em_corr_cph(const std::vector<MvObservation>& data, const std::array<int, 2>& dims,
                      double kappa00, double kappa10, double kappa20,
                      const EmOptions& opt = {});

// Weighted fit of a scaled phase-type model to a deterministic density.  The
// target is sampled on a Gauss-Legendre grid over [lo, hi] and the samples
// enter the sweeps as weighted observations; density mass beyond hi is folded
// in as one right-censored row so the window does not bias the tail.
FitReport approximate_density(const std::function<double(double)>& target, double lo, double hi,
                              int n_grid, int p, const Intensity& intensity0,
                              const ScalingFamily& scaling0, const EmOptions& opt = {});

}  // namespace siph
