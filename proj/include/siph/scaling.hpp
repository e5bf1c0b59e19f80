#pragma once

#include <string>
#include <vector>

#include "siph/matrix.hpp"
#include "siph/rng.hpp"

namespace siph {

// One-sided stable law normalized so the Laplace transform is exp(-u^alpha),
// alpha in (0, 1).  Integral representation evaluated with tanh-sinh nodes;
// accuracy degrades as alpha approaches 1 (the law concentrates at 1).
double stable_log_density(double x, double alpha);
double stable_density(double x, double alpha);
double stable_cdf(double x, double alpha);

// Positive mixing distribution for the scaled models.  Every family is
// normalized so that the Laplace transform at 0 is 1; except where noted the
// mean is 1 or alpha-dependent as constructed.
class ScalingFamily {
 public:
  enum class Kind {
    gamma,
    positive_stable,
    inverse_gaussian,
    pvf,
    compound_poisson_gamma,
    discrete,
    degenerate,
  };

  static ScalingFamily gamma(double alpha);
  static ScalingFamily positive_stable(double alpha);       // alpha in (0,1]
  static ScalingFamily inverse_gaussian(double sigma2);
  static ScalingFamily pvf(double eta, double gamma);       // gamma in (0,1]
  static ScalingFamily compound_poisson_gamma(double rho, double alpha, bool shifted);
  static ScalingFamily discrete(std::vector<double> atoms, std::vector<double> weights);
  static ScalingFamily degenerate(double point);

  Kind kind() const { return kind_; }
  std::string name() const;

  // Scalar Laplace transform E[exp(-u Theta)] and its first derivative.
  double laplace(double u) const;
  double laplace_deriv(double u) const;

  // Matrix functional calculus versions; m must have spectrum compatible
  // with the scalar domain (for the models here m = hinv(y) * (-T)).
  Matrix laplace_matrix(const Matrix& m) const;
  Matrix laplace_matrix_deriv(const Matrix& m) const;
  // d-th derivative (sign included: the result is L^{(d)}(m)).  Closed form
  // exists for gamma, discrete and degenerate; throws std::invalid_argument
  // for the other families.
  Matrix laplace_matrix_deriv_n(const Matrix& m, int d) const;

  // Continuous density of Theta.  Unsupported for discrete and degenerate
  // (std::domain_error).  The compound Poisson case returns the continuous
  // part only; without the shift the law also has the atom P(Theta=0) =
  // exp(-rho).  The pvf and compound Poisson densities come from a tilted
  // stable representation / truncated series and carry reduced accuracy.
  bool has_density() const;
  double density(double theta) const;
  double log_density(double theta) const;

  // Atom at zero, nonzero only for the unshifted compound Poisson family.
  double mass_at_zero() const;

  double sample(Rng& rng) const;

  // Parameter access for io and reporting.
  double alpha() const { return alpha_; }
  double sigma2() const { return sigma2_; }
  double eta() const { return eta_; }
  double gamma_param() const { return gamma_; }
  double rho() const { return rho_; }
  bool shifted() const { return shifted_; }
  double point() const { return point_; }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  ScalingFamily() = default;
  Kind kind_ = Kind::degenerate;
  double alpha_ = 0, sigma2_ = 0, eta_ = 0, gamma_ = 0, rho_ = 0, point_ = 1;
  bool shifted_ = false;
  std::vector<double> atoms_, weights_;
};

}  // namespace siph
