#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace siph {

// Dense row-major matrix of doubles.  Multiplication routes through the
// runtime-selected SIMD kernels (siph/simd/kernels.hpp).
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);  // zero-filled

  static Matrix identity(int n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(int i, int j) { return d_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * cols_ + j]; }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  Matrix transpose() const;

  double one_norm() const;  // max column abs-sum
  double max_abs() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> d_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

// c = a*b, or c += a*b when accumulate.  c must be preallocated and must not
// alias a or b.
void matmul_into(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);
std::vector<double> vecmat(const std::vector<double>& x, const Matrix& a);
double dot(const std::vector<double>& x, const std::vector<double>& y);
double dot(const double* x, const double* y, int n);

// LU factorization with partial pivoting.
struct Lu {
  Matrix f;               // packed L\U
  std::vector<int> piv;
  bool singular = false;
};

Lu lu_factor(Matrix a);
// b := a^{-1} b given the factorization (throws std::runtime_error if singular).
void lu_solve(const Lu& lu, Matrix& b);
Matrix solve(const Matrix& a, Matrix b);
Matrix inverse(const Matrix& a);

// Complex dense matrix, used by the Schur-based matrix functions.  Scalar
// arithmetic only; this sits off the hot path.
class CMatrix {
 public:
  using value_type = std::complex<double>;

  CMatrix() = default;
  CMatrix(int rows, int cols);

  static CMatrix identity(int n);
  static CMatrix from_real(const Matrix& a);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  value_type& operator()(int i, int j) { return d_[static_cast<std::size_t>(i) * cols_ + j]; }
  const value_type& operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * cols_ + j]; }

  CMatrix adjoint() const;
  double max_abs() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<value_type> d_;
};

CMatrix operator*(const CMatrix& a, const CMatrix& b);

}  // namespace siph
