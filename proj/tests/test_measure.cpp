#include "doctest.h"

#include <array>
#include <cmath>
#include <random>

#include "qbayes/measure.hpp"

using namespace qbayes;

namespace {

DensityOperator random_density(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      double re = normal(rng);
      double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityOperator(std::move(rho));
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// The tetrahedral Bloch vectors the qubit SIC is built from.
const std::array<std::array<double, 3>, 4> kTetrahedron = {{
    {0.0, 0.0, 1.0},
    {2.0 * std::sqrt(2.0) / 3.0, 0.0, -1.0 / 3.0},
    {-std::sqrt(2.0) / 3.0, std::sqrt(2.0 / 3.0), -1.0 / 3.0},
    {-std::sqrt(2.0) / 3.0, -std::sqrt(2.0 / 3.0), -1.0 / 3.0},
}};

// sum_{k0 <= k < k0+40} 2^{-k(2m+k)}; exact to machine precision.
double power_sum(int m, int k0) {
  double acc = 0.0;
  for (int k = k0; k < k0 + 40; ++k)
    acc += std::exp2(-static_cast<double>(k) * (2.0 * m + k));
  return acc;
}

}  // namespace

TEST_CASE("born_probabilities: trivial and SIC values") {
  Povm z = standard_povm("z_basis");
  Eigen::VectorXd p = born_probabilities(maximally_mixed(2), z);
  CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-12));

  p = born_probabilities(DensityOperator::pure(ket_plus()), z);
  CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-12));

  // |0><0| against the SIC: p_k = (1 + n.a_k)/4 with n = (0,0,1).
  Povm sic = standard_povm("sic_qubit");
  Eigen::VectorXd q = born_probabilities(DensityOperator::pure(ket0()), sic);
  for (int k = 0; k < 4; ++k)
    CHECK(q(k) == doctest::Approx((1.0 + kTetrahedron[k][2]) / 4.0).epsilon(1e-12));
  CHECK(q(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  CHECK_THROWS_AS(born_probabilities(bell_phi_plus(), z), std::invalid_argument);
}

TEST_CASE("sic_qubit: symmetric pairwise overlaps") {
  Povm sic = standard_povm("sic_qubit");
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double overlap = (sic.effects()[i] * sic.effects()[j]).trace().real();
      CHECK(overlap == doctest::Approx(i == j ? 0.25 : 1.0 / 12.0).epsilon(1e-12));
    }
}

TEST_CASE("kraus_update: projective updates") {
  KrausChannel z = lueders_channel(standard_povm("z_basis"));
  DensityOperator plus = DensityOperator::pure(ket_plus());

  DensityOperator updated = kraus_update(plus, z, 0);
  CHECK(max_abs(updated.matrix() - DensityOperator::pure(ket0()).matrix()) <= 1e-12);

  // Product states factorize: measuring the first qubit leaves the second.
  DensityOperator two = tensor(plus, plus);
  DensityOperator after = kraus_update(two, z, 0, 0);
  DensityOperator expected = tensor(DensityOperator::pure(ket0()), plus);
  CHECK(max_abs(after.matrix() - expected.matrix()) <= 1e-12);

  // Acting on the second site instead.
  DensityOperator after2 = kraus_update(two, z, 1, 1);
  DensityOperator expected2 = tensor(plus, DensityOperator::pure(ket1()));
  CHECK(max_abs(after2.matrix() - expected2.matrix()) <= 1e-12);
}

TEST_CASE("kraus_update: zero-probability outcome throws") {
  KrausChannel z = lueders_channel(standard_povm("z_basis"));
  DensityOperator zero = DensityOperator::pure(ket0());
  CHECK_THROWS_AS(kraus_update(zero, z, 1), ZeroProbabilityError);
}

TEST_CASE("kraus_update: change-point state matches the conditioned closed form") {
  // rho_c^(3) assembled from its definition: change-point terms plus tails.
  const double norm = 1.0 / (2.0 * power_sum(0, 1));
  Eigen::VectorXd diag3 = Eigen::VectorXd::Zero(8);
  diag3(3) += norm * std::exp2(-1.0);  // |011>
  diag3(4) += norm * std::exp2(-1.0);  // |100>
  diag3(1) += norm * std::exp2(-4.0);  // |001>
  diag3(6) += norm * std::exp2(-4.0);  // |110>
  diag3(0) += norm * power_sum(0, 3);  // |000>
  diag3(7) += norm * power_sum(0, 3);  // |111>
  DensityOperator rho3(Matrix(diag3.cast<Complex>().asDiagonal()), {2, 2, 2});

  KrausChannel z = lueders_channel(standard_povm("z_basis"));
  DensityOperator posterior = partial_trace(kraus_update(rho3, z, 0, 0), 0);

  // rho_{c,1}^(2) = N_1 (|11><11| + 2^{-3} |01><01| + sum_{k>=2} 2^{-k(2+k)} |00><00|).
  const double n1 = 1.0 / power_sum(1, 0);
  Eigen::VectorXd diag2 = Eigen::VectorXd::Zero(4);
  diag2(3) = n1;
  diag2(1) = n1 * std::exp2(-3.0);
  diag2(0) = n1 * power_sum(1, 2);
  CHECK(max_abs(posterior.matrix() - Matrix(diag2.cast<Complex>().asDiagonal())) <= 1e-12);
}

TEST_CASE("lueders_channel: square roots") {
  Povm z = standard_povm("z_basis");
  KrausChannel lz = lueders_channel(z);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(max_abs(lz.kraus_operators()[k][0] - z.effects()[k]) <= 1e-12);  // projectors

  // SIC effect: sqrt has eigenvalues sqrt(1/2) and 0 on the Bloch axis, so the
  // spectral-root oracle is sqrt(1/2) (I + a.sigma)/2. Tolerance 1e-8 absorbs
  // the sqrt-amplified rounding of the zero eigenvalue.
  Povm sic = standard_povm("sic_qubit");
  KrausChannel lsic = lueders_channel(sic);
  for (std::size_t k = 0; k < 4; ++k) {
    const Matrix& a = lsic.kraus_operators()[k][0];
    CHECK(max_abs(a * a - sic.effects()[k]) <= 1e-12);
    CHECK(max_abs(a - a.adjoint()) <= 1e-12);
    Matrix oracle = std::sqrt(2.0) * sic.effects()[k];  // sqrt(1/2) (I + a.sigma)/2
    CHECK(max_abs(a - oracle) <= 1e-8);
    CHECK(a.trace().real() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
    CHECK(std::abs((a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)).real()) <= 1e-8);
  }

  // Identity POVM maps to the identity channel.
  Povm id({Matrix::Identity(2, 2)}, {"i"});
  CHECK(max_abs(lueders_channel(id).kraus_operators()[0][0] - Matrix::Identity(2, 2)) <=
        1e-12);

  // Induced effects reproduce the input.
  std::vector<Matrix> effects = lsic.effects();
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(max_abs(effects[k] - sic.effects()[k]) <= 1e-10);
}

TEST_CASE("standard_povm: named kinds") {
  Povm z = standard_povm("z_basis");
  CHECK(z.labels() == std::vector<std::string>{"0", "1"});
  CHECK(z.outcome_index("1") == 1);
  CHECK_THROWS_AS(z.outcome_index("2"), std::invalid_argument);

  Povm pauli = standard_povm("pauli6");
  CHECK(pauli.num_outcomes() == 6);

  Povm bell = standard_povm("bell_basis");
  CHECK(bell.dim() == 4);
  Eigen::VectorXd p = born_probabilities(bell_phi_plus(), bell);
  CHECK(p(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.0).epsilon(1e-12));

  Povm prod = standard_povm("product(sic_qubit,sic_qubit)");
  CHECK(prod.dim() == 4);
  CHECK(prod.num_outcomes() == 16);
  CHECK(prod.labels()[1] == "0:1");

  CHECK_THROWS_AS(standard_povm("foo"), std::invalid_argument);
  CHECK_THROWS_AS(standard_povm("product(z_basis)"), std::invalid_argument);
}

TEST_CASE("is_informationally_complete vs Gram-matrix rank oracle") {
  auto gram_rank = [](const Povm& povm) {
    const Eigen::Index r = static_cast<Eigen::Index>(povm.num_outcomes());
    Matrix gram(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        gram(i, j) = (povm.effects()[static_cast<std::size_t>(i)].adjoint() *
                      povm.effects()[static_cast<std::size_t>(j)])
                         .trace();
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) > 1e-8 * es.eigenvalues().maxCoeff()) ++rank;
    return rank;
  };

  Povm z = standard_povm("z_basis");
  CHECK_FALSE(is_informationally_complete(z));
  CHECK(gram_rank(z) == 2);

  Povm sic = standard_povm("sic_qubit");
  CHECK(is_informationally_complete(sic));
  CHECK(gram_rank(sic) == 4);

  Povm prod = standard_povm("product(sic_qubit,sic_qubit)");
  CHECK(is_informationally_complete(prod));
  CHECK(gram_rank(prod) == 16);

  CHECK(is_informationally_complete(standard_povm("pauli6")));
  CHECK_FALSE(is_informationally_complete(standard_povm("bell_basis")));
}

TEST_CASE("channel invariants on random states") {
  std::mt19937_64 rng(23);
  for (const char* kind : {"z_basis", "sic_qubit", "pauli6"}) {
    Povm povm = standard_povm(kind);
    KrausChannel channel = lueders_channel(povm);

    // Completeness of the Kraus set.
    Matrix sum = Matrix::Zero(2, 2);
    for (const auto& ops : channel.kraus_operators())
      for (const Matrix& a : ops) sum += a.adjoint() * a;
    CHECK(max_abs(sum - Matrix::Identity(2, 2)) <= 1e-10);

    for (int trial = 0; trial < 5; ++trial) {
      DensityOperator rho = random_density(rng, 2);
      Eigen::VectorXd p = born_probabilities(rho, povm);
      CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-10));

      Matrix unconditional = Matrix::Zero(2, 2);
      for (std::size_t k = 0; k < povm.num_outcomes(); ++k) {
        // The normalization inside kraus_update must match the Born rule.
        Matrix numerator = Matrix::Zero(2, 2);
        for (const Matrix& a : channel.kraus_operators()[k])
          numerator += a * rho.matrix() * a.adjoint();
        CHECK(numerator.trace().real() == doctest::Approx(p(k)).epsilon(1e-12));

        if (p(k) > 1e-9) {
          DensityOperator updated = kraus_update(rho, channel, k);
          CHECK(validate_density(updated.matrix(), 1e-10).ok);
          unconditional += p(k) * updated.matrix();
        } else {
          unconditional += numerator;
        }
      }
      CHECK(std::abs(unconditional.trace().real() - 1.0) <= 1e-10);
    }
  }
}
