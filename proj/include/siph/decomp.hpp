#pragma once

#include <vector>

#include "siph/matrix.hpp"

namespace siph {

// Complex Schur decomposition a = q t q^*, with t upper triangular and q
// unitary.  Throws std::runtime_error if the QR iteration fails to converge.
struct Schur {
  CMatrix t;
  CMatrix q;
};

Schur schur_decompose(const Matrix& a);

// Eigen-decomposition of a symmetric tridiagonal matrix (diagonal d,
// off-diagonal e with e[0] unused).  On return d holds the eigenvalues in
// ascending order and z0[j] the first component of the j-th orthonormal
// eigenvector.  z0 must come in as the first row of the identity seed,
// i.e. (1, 0, ..., 0).  This is the piece of EISPACK imtql2 that
// Golub-Welsch quadrature needs.
void tridiag_eigen_first_component(std::vector<double>& d,
                                   std::vector<double>& e,
                                   std::vector<double>& z0);

}  // namespace siph
