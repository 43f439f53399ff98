#include "qbayes/measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qbayes {

namespace {

constexpr double kCompletenessTol = 1e-10;
constexpr double kOutcomeFloor = 1e-12;

void check_effects(Eigen::Index dim, const std::vector<Matrix>& effects,
                   const std::vector<std::string>& labels, const char* what) {
  if (effects.empty()) throw std::invalid_argument(std::string(what) + ": no effects");
  if (labels.size() != effects.size())
    throw std::invalid_argument(std::string(what) + ": label count mismatch");
  Matrix sum = Matrix::Zero(dim, dim);
  for (const Matrix& e : effects) {
    if (e.rows() != dim || e.cols() != dim)
      throw std::invalid_argument(std::string(what) + ": effect dimension mismatch");
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > kCompletenessTol)
      throw std::invalid_argument(std::string(what) + ": effect not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(e, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument(std::string(what) + ": effect not positive semidefinite");
    sum += e;
  }
  if ((sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > kCompletenessTol)
    throw std::invalid_argument(std::string(what) + ": effects do not sum to the identity");
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  return m;
}

Matrix bloch_effect(double x, double y, double z, double scale) {
  return scale * (Matrix::Identity(2, 2) + x * pauli_x() + y * pauli_y() + z * pauli_z());
}

// Hermitian PSD square root; eigenvalues clamped at zero before the sqrt.
Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Povm::Povm(std::vector<Matrix> effects, std::vector<std::string> labels)
    : dim_(effects.empty() ? 0 : effects.front().rows()),
      effects_(std::move(effects)),
      labels_(std::move(labels)) {
  check_effects(dim_, effects_, labels_, "Povm");
}

std::size_t Povm::outcome_index(const std::string& label) const {
  for (std::size_t k = 0; k < labels_.size(); ++k)
    if (labels_[k] == label) return k;
  throw std::invalid_argument("Povm: unknown outcome label '" + label + "'");
}

KrausChannel::KrausChannel(std::vector<std::vector<Matrix>> kraus_ops,
                           std::vector<std::string> labels)
    : dim_(0), kraus_(std::move(kraus_ops)), labels_(std::move(labels)) {
  if (kraus_.empty() || kraus_.front().empty())
    throw std::invalid_argument("KrausChannel: no Kraus operators");
  dim_ = kraus_.front().front().rows();
  if (labels_.size() != kraus_.size())
    throw std::invalid_argument("KrausChannel: label count mismatch");
  Matrix sum = Matrix::Zero(dim_, dim_);
  for (const auto& outcome_ops : kraus_) {
    if (outcome_ops.empty())
      throw std::invalid_argument("KrausChannel: outcome with no Kraus operators");
    for (const Matrix& a : outcome_ops) {
      if (a.rows() != dim_ || a.cols() != dim_)
        throw std::invalid_argument("KrausChannel: Kraus operator dimension mismatch");
      sum += a.adjoint() * a;
    }
  }
  if ((sum - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > kCompletenessTol)
    throw std::invalid_argument("KrausChannel: sum_kj A^dag A differs from the identity");
}

std::vector<Matrix> KrausChannel::effects() const {
  std::vector<Matrix> out;
  out.reserve(kraus_.size());
  for (const auto& outcome_ops : kraus_) {
    Matrix e = Matrix::Zero(dim_, dim_);
    for (const Matrix& a : outcome_ops) e += a.adjoint() * a;
    out.push_back(std::move(e));
  }
  return out;
}

Povm KrausChannel::induced_povm() const { return Povm(effects(), labels_); }

Eigen::VectorXd born_probabilities(const DensityOperator& state, const Povm& povm) {
  if (state.dim() != povm.dim())
    throw std::invalid_argument("born_probabilities: dimension mismatch");
  Eigen::VectorXd p(static_cast<Eigen::Index>(povm.num_outcomes()));
  for (std::size_t k = 0; k < povm.num_outcomes(); ++k) {
    double pk = (state.matrix() * povm.effects()[k]).trace().real();
    if (pk < -kOutcomeFloor)
      throw std::domain_error("born_probabilities: negative outcome probability");
    p(static_cast<Eigen::Index>(k)) = std::max(pk, 0.0);
  }
  return p;
}

DensityOperator kraus_update(const DensityOperator& state, const KrausChannel& channel,
                             std::size_t outcome, std::size_t acting_site) {
  const auto& dims = state.factor_dims();
  if (acting_site >= dims.size())
    throw std::out_of_range("kraus_update: acting_site out of range");
  if (dims[acting_site] != channel.dim())
    throw std::invalid_argument("kraus_update: channel dimension does not match site");
  if (outcome >= channel.num_outcomes())
    throw std::out_of_range("kraus_update: outcome out of range");

  Eigen::Index left = 1, right = 1;
  for (std::size_t f = 0; f < acting_site; ++f) left *= dims[f];
  for (std::size_t f = acting_site + 1; f < dims.size(); ++f) right *= dims[f];

  const Matrix& rho = state.matrix();
  Matrix numerator = Matrix::Zero(rho.rows(), rho.cols());
  for (const Matrix& a : channel.kraus_operators()[outcome]) {
    Matrix embedded = kron(kron(Matrix::Identity(left, left), a),
                           Matrix::Identity(right, right));
    numerator += embedded * rho * embedded.adjoint();
  }
  double p = numerator.trace().real();
  if (p <= kOutcomeFloor)
    throw ZeroProbabilityError("kraus_update: outcome '" +
                               channel.labels()[outcome] +
                               "' has zero probability under the state");
  Matrix out = numerator / p;
  out = 0.5 * (out + out.adjoint().eval());
  return DensityOperator(std::move(out), dims);
}

KrausChannel lueders_channel(const Povm& povm) {
  std::vector<std::vector<Matrix>> ops;
  ops.reserve(povm.num_outcomes());
  for (const Matrix& e : povm.effects()) ops.push_back({psd_sqrt(e)});
  return KrausChannel(std::move(ops), povm.labels());
}

Povm product_povm(const Povm& p, const Povm& q) {
  std::vector<Matrix> effects;
  std::vector<std::string> labels;
  effects.reserve(p.num_outcomes() * q.num_outcomes());
  for (std::size_t i = 0; i < p.num_outcomes(); ++i)
    for (std::size_t j = 0; j < q.num_outcomes(); ++j) {
      effects.push_back(kron(p.effects()[i], q.effects()[j]));
      labels.push_back(p.labels()[i] + ":" + q.labels()[j]);
    }
  return Povm(std::move(effects), std::move(labels));
}

Povm standard_povm(const std::string& kind) {
  if (kind == "z_basis") {
    Vector k0 = ket0(), k1 = ket1();
    return Povm({k0 * k0.adjoint(), k1 * k1.adjoint()}, {"0", "1"});
  }
  if (kind == "sic_qubit") {
    // Tetrahedral Bloch vectors; first axis (0,0,1).
    const double s = std::sqrt(2.0);
    const std::array<std::array<double, 3>, 4> a = {{
        {0.0, 0.0, 1.0},
        {2.0 * s / 3.0, 0.0, -1.0 / 3.0},
        {-s / 3.0, std::sqrt(2.0 / 3.0), -1.0 / 3.0},
        {-s / 3.0, -std::sqrt(2.0 / 3.0), -1.0 / 3.0},
    }};
    std::vector<Matrix> effects;
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < 4; ++k) {
      effects.push_back(bloch_effect(a[k][0], a[k][1], a[k][2], 0.25));
      labels.push_back(std::to_string(k));
    }
    return Povm(std::move(effects), std::move(labels));
  }
  if (kind == "pauli6") {
    // One third of each +/- eigenprojector of X, Y, Z.
    std::vector<Matrix> effects = {
        bloch_effect(1, 0, 0, 1.0 / 6.0),  bloch_effect(-1, 0, 0, 1.0 / 6.0),
        bloch_effect(0, 1, 0, 1.0 / 6.0),  bloch_effect(0, -1, 0, 1.0 / 6.0),
        bloch_effect(0, 0, 1, 1.0 / 6.0),  bloch_effect(0, 0, -1, 1.0 / 6.0)};
    return Povm(std::move(effects), {"x+", "x-", "y+", "y-", "z+", "z-"});
  }
  if (kind == "bell_basis") {
    const double r = 1.0 / std::sqrt(2.0);
    auto bell = [&](int i0, int i1, double sign) {
      Vector v = Vector::Zero(4);
      v(i0) = Complex(r, 0);
      v(i1) = Complex(sign * r, 0);
      return v;
    };
    std::vector<Vector> kets = {bell(0, 3, 1.0), bell(0, 3, -1.0),
                                bell(1, 2, 1.0), bell(1, 2, -1.0)};
    std::vector<Matrix> effects;
    for (const Vector& v : kets) effects.push_back(v * v.adjoint());
    return Povm(std::move(effects), {"phi+", "phi-", "psi+", "psi-"});
  }
  if (kind.rfind("product(", 0) == 0 && kind.back() == ')') {
    // Split the argument list at the top-level comma.
    std::string inner = kind.substr(8, kind.size() - 9);
    int depth = 0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == '(') ++depth;
      else if (inner[i] == ')') --depth;
      else if (inner[i] == ',' && depth == 0)
        return product_povm(standard_povm(inner.substr(0, i)),
                            standard_povm(inner.substr(i + 1)));
    }
    throw std::invalid_argument("standard_povm: malformed product kind '" + kind + "'");
  }
  throw std::invalid_argument("standard_povm: unknown kind '" + kind + "'");
}

bool is_informationally_complete(const Povm& povm) {
  const Eigen::Index d = povm.dim();
  Matrix stacked(static_cast<Eigen::Index>(povm.num_outcomes()), d * d);
  for (std::size_t k = 0; k < povm.num_outcomes(); ++k) {
    const Matrix& e = povm.effects()[k];
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        stacked(static_cast<Eigen::Index>(k), i * d + j) = e(i, j);
  }
  Eigen::JacobiSVD<Matrix> svd(stacked);
  const auto& sv = svd.singularValues();
  double cutoff = 1e-8 * sv.maxCoeff();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank == d * d;
}

}  // namespace qbayes
