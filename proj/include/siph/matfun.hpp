#pragma once

#include <vector>

#include "siph/matrix.hpp"

namespace siph {

// Matrix exponential via Pade approximation with scaling and squaring,
// degrees {3,5,7,9,13}.
Matrix expm(const Matrix& a);

// Exponentials expm(s*M) for many scalars s against a fixed M.  The even
// powers M^2, M^4, M^6 are computed once; each eval then needs only a few
// multiplications regardless of s.  Not safe for concurrent eval calls on
// one object (it carries workspace buffers).
class ScaledExpm {
 public:
  explicit ScaledExpm(Matrix m);

  int dim() const { return n_; }
  double norm1() const { return norm1_; }

  void eval(double s, Matrix& out) const;
  Matrix eval(double s) const;

 private:
  int n_ = 0;
  double norm1_ = 0.0;
  Matrix m_, m2_, m4_, m6_;
  mutable Matrix w1_, w2_, u_, v_;  // workspaces
};

// Principal matrix logarithm (complex Schur form, repeated triangular square
// roots, Pade of log(I+X)).  Requires every eigenvalue off the closed
// negative real axis; throws std::domain_error otherwise.
Matrix logm(const Matrix& a);

// a^x.  Integer x (|x| <= 64) is evaluated by repeated squaring, x == 1 is
// an exact copy, everything else goes through expm(x*logm(a)).
Matrix frac_power(const Matrix& a, double x);

Matrix kron_prod(const Matrix& a, const Matrix& b);
// a ⊗ I + I ⊗ b
Matrix kron_sum(const Matrix& a, const Matrix& b);

// Block-exponential evaluation of the coupled pair
//   exp  = expm(t x)
//   conv = ∫_0^x expm(t (x-u)) (v w) expm(t u) du
// where v is a column and w a row vector, via one exponential of the
// 2n x 2n block matrix [[t, v w], [0, t]].
struct ConvResult {
  Matrix exp;
  Matrix conv;
};

ConvResult conv_integral(const Matrix& t, const std::vector<double>& v,
                         const std::vector<double>& w, double x);

// The Van Loan block [[t, v w], [0, t]] itself, for use with ScaledExpm when
// the same (t, v, w) is evaluated at many x.
Matrix van_loan_block(const Matrix& t, const std::vector<double>& v,
                      const std::vector<double>& w);

}  // namespace siph
