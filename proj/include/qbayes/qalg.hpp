#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qbayes {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Validity report for a candidate density matrix. `ok` is evaluated against
// the tolerance handed to validate_density: Hermiticity and trace defects
// must stay below tol, the minimum eigenvalue above -tol.
struct DensityValidity {
  double hermiticity_defect = 0.0;  // max_ij |m - m^dag|
  double trace_defect = 0.0;        // |tr m - 1|
  double min_eigenvalue = 0.0;
  double tol = 0.0;
  bool ok = false;
};

DensityValidity validate_density(const Matrix& m, double tol = 1e-10);

// Density operator on a finite-dimensional Hilbert space, tagged with its
// tensor factorization. The first factor is the most significant index:
// a basis state |i_1 i_2 ... i_f> sits at index
// i_1 * (d_2 * ... * d_f) + ... + i_f.
//
// Construction validates Hermiticity, unit trace and positivity (tolerance
// 1e-10, eigenvalues allowed down to -1e-10). Instances are immutable.
class DensityOperator {
 public:
  DensityOperator(Matrix m, std::vector<Eigen::Index> factor_dims);
  explicit DensityOperator(Matrix m);

  // |ket><ket|, normalizing the vector. Throws on a zero vector.
  static DensityOperator pure(const Vector& ket);

  Eigen::Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  const std::vector<Eigen::Index>& factor_dims() const { return factor_dims_; }
  std::size_t num_factors() const { return factor_dims_.size(); }

 private:
  Matrix matrix_;
  std::vector<Eigen::Index> factor_dims_;
};

// Kronecker product of raw matrices, `a` indices most significant.
Matrix kron(const Matrix& a, const Matrix& b);

// Kronecker product with `a` as the first-system factor; factor_dims are
// concatenated.
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

// Reduced state with factor `site` (0-based) traced out.
DensityOperator partial_trace(const DensityOperator& state, std::size_t site);

// (1/2) sum_i |lambda_i| over the eigenvalues of a - b. In [0, 1].
double trace_distance(const DensityOperator& a, const DensityOperator& b);

// Common kets and states.
Vector ket0();
Vector ket1();
Vector ket_plus();
DensityOperator maximally_mixed(Eigen::Index dim = 2);  // rho_M for dim 2
DensityOperator bell_phi_plus();                        // rho_ME on two qubits

}  // namespace qbayes
