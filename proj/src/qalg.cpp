#include "qbayes/qalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qbayes {

namespace {

Eigen::Index checked_product(const std::vector<Eigen::Index>& dims) {
  Eigen::Index p = 1;
  for (Eigen::Index d : dims) {
    if (d <= 0) throw std::invalid_argument("factor dimensions must be positive");
    p *= d;
  }
  return p;
}

}  // namespace

DensityValidity validate_density(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("validate_density: matrix not square");
  DensityValidity v;
  v.tol = tol;
  v.hermiticity_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  v.trace_defect = std::abs(m.trace() - Complex(1.0, 0.0));
  Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  v.min_eigenvalue = es.eigenvalues().minCoeff();
  v.ok = v.hermiticity_defect <= tol && v.trace_defect <= tol && v.min_eigenvalue >= -tol;
  return v;
}

DensityOperator::DensityOperator(Matrix m, std::vector<Eigen::Index> factor_dims)
    : matrix_(std::move(m)), factor_dims_(std::move(factor_dims)) {
  if (matrix_.rows() != matrix_.cols())
    throw std::invalid_argument("DensityOperator: matrix not square");
  if (factor_dims_.empty()) factor_dims_ = {matrix_.rows()};
  if (checked_product(factor_dims_) != matrix_.rows())
    throw std::invalid_argument("DensityOperator: factor_dims do not multiply to dim");
  DensityValidity v = validate_density(matrix_, 1e-10);
  if (!v.ok) {
    std::ostringstream os;
    os << "DensityOperator: invalid matrix (hermiticity defect " << v.hermiticity_defect
       << ", trace defect " << v.trace_defect << ", min eigenvalue " << v.min_eigenvalue
       << ")";
    throw std::invalid_argument(os.str());
  }
}

DensityOperator::DensityOperator(Matrix m) : DensityOperator(std::move(m), {}) {}

DensityOperator DensityOperator::pure(const Vector& ket) {
  double n = ket.norm();
  if (n <= 0.0) throw std::invalid_argument("DensityOperator::pure: zero vector");
  Vector psi = ket / n;
  return DensityOperator(psi * psi.adjoint(), {ket.size()});
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  std::vector<Eigen::Index> dims = a.factor_dims();
  dims.insert(dims.end(), b.factor_dims().begin(), b.factor_dims().end());
  return DensityOperator(kron(a.matrix(), b.matrix()), std::move(dims));
}

DensityOperator partial_trace(const DensityOperator& state, std::size_t site) {
  const auto& dims = state.factor_dims();
  if (site >= dims.size())
    throw std::out_of_range("partial_trace: site out of range");
  if (dims.size() == 1)
    throw std::invalid_argument("partial_trace: cannot trace out the only factor");

  Eigen::Index left = 1, right = 1;
  for (std::size_t f = 0; f < site; ++f) left *= dims[f];
  for (std::size_t f = site + 1; f < dims.size(); ++f) right *= dims[f];
  const Eigen::Index mid = dims[site];

  const Matrix& m = state.matrix();
  Matrix out = Matrix::Zero(left * right, left * right);
  for (Eigen::Index l = 0; l < left; ++l)
    for (Eigen::Index lp = 0; lp < left; ++lp)
      for (Eigen::Index r = 0; r < right; ++r)
        for (Eigen::Index rp = 0; rp < right; ++rp) {
          Complex acc(0.0, 0.0);
          for (Eigen::Index k = 0; k < mid; ++k)
            acc += m((l * mid + k) * right + r, (lp * mid + k) * right + rp);
          out(l * right + r, lp * right + rp) = acc;
        }

  std::vector<Eigen::Index> rest;
  rest.reserve(dims.size() - 1);
  for (std::size_t f = 0; f < dims.size(); ++f)
    if (f != site) rest.push_back(dims[f]);
  return DensityOperator(std::move(out), std::move(rest));
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  Matrix diff = a.matrix() - b.matrix();
  diff = 0.5 * (diff + diff.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  double d = 0.5 * es.eigenvalues().cwiseAbs().sum();
  return std::clamp(d, 0.0, 1.0);
}

Vector ket0() {
  Vector v(2);
  v << Complex(1, 0), Complex(0, 0);
  return v;
}

Vector ket1() {
  Vector v(2);
  v << Complex(0, 0), Complex(1, 0);
  return v;
}

Vector ket_plus() {
  Vector v(2);
  v << Complex(1, 0), Complex(1, 0);
  return v / std::sqrt(2.0);
}

DensityOperator maximally_mixed(Eigen::Index dim) {
  if (dim <= 0) throw std::invalid_argument("maximally_mixed: dim must be positive");
  return DensityOperator(Matrix::Identity(dim, dim) / static_cast<double>(dim), {dim});
}

DensityOperator bell_phi_plus() {
  Vector v = Vector::Zero(4);
  v(0) = Complex(1, 0);
  v(3) = Complex(1, 0);
  v /= std::sqrt(2.0);
  return DensityOperator(v * v.adjoint(), {2, 2});
}

}  // namespace qbayes
