#include "doctest.h"

#include <cmath>

#include "qbayes/infer.hpp"
#include "qbayes/priors.hpp"

using namespace qbayes;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Permutation of the n tensor factors: output site s carries input site perm[s].
Matrix factor_permutation(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  const Eigen::Index dim = Eigen::Index(1) << n;
  Matrix p = Matrix::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    Eigen::Index y = 0;
    for (int s = 0; s < n; ++s) {
      const Eigen::Index bit = (x >> (n - 1 - perm[s])) & 1;
      y |= bit << (n - 1 - s);
    }
    p(y, x) = 1.0;
  }
  return p;
}

// Partial transpose on the second qubit of a two-qubit state.
Matrix partial_transpose_second(const Matrix& m) {
  Matrix out(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 2; ++a)
      for (int j = 0; j < 2; ++j)
        for (int b = 0; b < 2; ++b)
          out(i * 2 + b, j * 2 + a) = m(i * 2 + a, j * 2 + b);
  return out;
}

double series_2_pow_minus_k_squared(int k0) {
  double acc = 0.0;
  for (int k = k0; k < k0 + 40; ++k) acc += std::exp2(-static_cast<double>(k) * k);
  return acc;
}

}  // namespace

TEST_CASE("haar_pure_ensemble: basics and Haar statistics") {
  ParticleEnsemble single = haar_pure_ensemble(1, 9);
  CHECK(single.size() == 1);
  CHECK(single.particles()[0].weight == doctest::Approx(1.0));
  // Pure: rho^2 = rho.
  const Matrix& m = single.particles()[0].state.matrix();
  CHECK(max_abs(m * m - m) <= 1e-12);

  ParticleEnsemble big = haar_pure_ensemble(100000, 42);
  CHECK(trace_distance(big.mean_block_state(), maximally_mixed(2)) <= 0.01);

  // |<0|psi>|^2 is uniform on [0,1] under the Haar measure; its mean is 1/2.
  double acc = 0.0;
  for (const Particle& p : big.particles()) acc += p.state.matrix()(0, 0).real();
  CHECK(acc / static_cast<double>(big.size()) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("plus_product_prior: the quantum coin") {
  ParticleEnsemble plus = plus_product_prior();
  DensityOperator expected = DensityOperator::pure(ket_plus());
  CHECK(max_abs(plus.state_at(1).matrix() - expected.matrix()) <= 1e-15);
  CHECK(max_abs(plus.state_at(2).matrix() - tensor(expected, expected).matrix()) <= 1e-15);

  Eigen::VectorXd p = born_probabilities(plus.state_at(1), standard_povm("z_basis"));
  CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("hs_mixed_ensemble: Hilbert-Schmidt statistics") {
  ParticleEnsemble e = hs_mixed_ensemble(100000, 42);
  for (std::size_t i = 0; i < e.size(); i += 9973)
    CHECK(validate_density(e.particles()[i].state.matrix(), 1e-10).ok);
  CHECK(trace_distance(e.mean_block_state(), maximally_mixed(2)) <= 0.01);

  // Mean purity of the HS measure on qubits is 4/5 (value frozen from an
  // independent pre-run of the Ginibre construction).
  double purity = 0.0;
  for (const Particle& p : e.particles())
    purity += (p.state.matrix() * p.state.matrix()).trace().real();
  CHECK(purity / static_cast<double>(e.size()) == doctest::Approx(0.8).epsilon(0.0125));
}

TEST_CASE("two_qubit_pair_ensemble: pair statistics") {
  ParticleEnsemble e = two_qubit_pair_ensemble(100000, 42);
  CHECK(e.block_size() == 2);
  CHECK(e.block_hilbert_dim() == 4);
  for (std::size_t i = 0; i < e.size(); i += 9973) {
    CHECK(e.particles()[i].state.dim() == 4);
    CHECK(validate_density(e.particles()[i].state.matrix(), 1e-10).ok);
  }
  CHECK(trace_distance(e.mean_block_state(), maximally_mixed(4)) <= 0.02);
}

TEST_CASE("two_qubit_pair_ensemble: entangled fraction via the PPT oracle") {
  // About 75.7% of Hilbert-Schmidt two-qubit states have a negative partial
  // transpose (frozen from an independent pre-run at large N).
  ParticleEnsemble e = two_qubit_pair_ensemble(10000, 7);
  std::size_t npt = 0;
  for (const Particle& p : e.particles()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(partial_transpose_second(p.state.matrix()),
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) ++npt;
  }
  const double fraction = static_cast<double>(npt) / static_cast<double>(e.size());
  CHECK(fraction > 0.0);
  CHECK(fraction == doctest::Approx(0.757).epsilon(0.03));
}

TEST_CASE("ensemble_state: product, pair marginal and exchange symmetry") {
  ParticleEnsemble plus = plus_product_prior();
  Matrix single = DensityOperator::pure(ket_plus()).matrix();
  CHECK(max_abs(ensemble_state(plus, 3).matrix() - kron(kron(single, single), single)) <=
        1e-14);

  // Pair blocks at n = 1: sum_i w_i tr_2(sigma_i).
  ParticleEnsemble pairs = two_qubit_pair_ensemble(50, 3);
  Matrix direct = Matrix::Zero(2, 2);
  for (const Particle& p : pairs.particles())
    direct += p.weight * partial_trace(p.state, 1).matrix();
  CHECK(max_abs(ensemble_state(pairs, 1).matrix() - direct) <= 1e-12);

  // Single-system mixtures are exchangeable.
  ParticleEnsemble haar = haar_pure_ensemble(10000, 5);
  Matrix rho2 = ensemble_state(haar, 2).matrix();
  Matrix swap = factor_permutation({1, 0});
  CHECK(max_abs(swap * rho2 * swap.adjoint() - rho2) <= 1e-10);

  ParticleEnsemble small = hs_mixed_ensemble(64, 11);
  Matrix rho3 = ensemble_state(small, 3).matrix();
  for (const std::vector<int>& perm :
       {std::vector<int>{1, 0, 2}, {2, 1, 0}, {1, 2, 0}}) {
    Matrix p = factor_permutation(perm);
    CHECK(max_abs(p * rho3 * p.adjoint() - rho3) <= 1e-10);
  }
}

TEST_CASE("ensemble_state: dense cap") {
  ParticleEnsemble plus = plus_product_prior();
  CHECK_THROWS_AS(ensemble_state(plus, 11), std::domain_error);
  ParticleEnsemble pairs = two_qubit_pair_ensemble(4, 1);
  CHECK_THROWS_AS(ensemble_state(pairs, 11), std::domain_error);
}

TEST_CASE("samplers are deterministic per seed") {
  ParticleEnsemble a = haar_pure_ensemble(50, 77);
  ParticleEnsemble b = haar_pure_ensemble(50, 77);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a.particles()[i].state.matrix() == b.particles()[i].state.matrix());

  ParticleEnsemble c = two_qubit_pair_ensemble(20, 123);
  ParticleEnsemble d = two_qubit_pair_ensemble(20, 123);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(c.particles()[i].state.matrix() == d.particles()[i].state.matrix());

  CHECK(haar_pure_ensemble(10, 1).particles()[0].state.matrix() !=
        haar_pure_ensemble(10, 2).particles()[0].state.matrix());
}

TEST_CASE("counter_inductive_prior: normalization and fresh weights") {
  ChangePointPrior cip = counter_inductive_prior();
  CHECK(cip.mode() == ChangePointPrior::Mode::Fresh);

  // Independent series route: N = 1 / (2 sum_{k>=1} 2^{-k^2}).
  const double norm_oracle = 1.0 / (2.0 * series_2_pow_minus_k_squared(1));
  CHECK(cip.normalization() == doctest::Approx(norm_oracle).epsilon(1e-14));
  CHECK(cip.normalization() == doctest::Approx(0.8857891565728164).epsilon(1e-12));

  CHECK(cip.sequence_weight(0, 1) == doctest::Approx(cip.normalization() / 2.0));
  CHECK(cip.sequence_weight(1, 1) == doctest::Approx(cip.normalization() / 2.0));
  CHECK(cip.sequence_weight(0, 0) == 0.0);  // k >= 1 in fresh mode

  CHECK(cip.prob_next(0) == doctest::Approx(0.5));
  CHECK(cip.prob_next(1) == doctest::Approx(0.5));
}

TEST_CASE("cip_state: dense forms") {
  ChangePointPrior cip = counter_inductive_prior();

  DensityOperator one = cip_state(cip, 1);
  CHECK(max_abs(one.matrix() - Matrix::Identity(2, 2) / 2.0) <= 1e-14);

  // n = 2: diag(N t2, N/2, N/2, N t2) with t2 = sum_{k>=2} 2^{-k^2}.
  const double norm = cip.normalization();
  const double t2 = series_2_pow_minus_k_squared(2);
  DensityOperator two = cip_state(cip, 2);
  CHECK(two.matrix()(0, 0).real() == doctest::Approx(norm * t2).epsilon(1e-13));
  CHECK(two.matrix()(1, 1).real() == doctest::Approx(norm / 2.0).epsilon(1e-13));
  CHECK(two.matrix()(2, 2).real() == doctest::Approx(norm / 2.0).epsilon(1e-13));
  CHECK(two.matrix()(3, 3).real() == doctest::Approx(norm * t2).epsilon(1e-13));

  // Diagonal in the computational basis.
  for (int n = 1; n <= 5; ++n) {
    Matrix m = cip_state(cip, n).matrix();
    Matrix off = m - Matrix(m.diagonal().asDiagonal());
    CHECK(max_abs(off) <= 1e-15);
  }

  // Consistency: tr_3 of the 3-system state is the 2-system state.
  CHECK(max_abs(partial_trace(cip_state(cip, 3), 2).matrix() - two.matrix()) <= 1e-12);

  CHECK_THROWS_AS(cip_state(cip, 11), std::domain_error);
}

TEST_CASE("change-point conditioning: mode transitions") {
  ChangePointPrior cip = counter_inductive_prior();

  ChangePointPrior run = cip.conditioned(0);
  CHECK(run.mode() == ChangePointPrior::Mode::Run);
  CHECK(run.run_symbol() == 0);
  CHECK(run.run_length() == 1);

  ChangePointPrior run2 = run.conditioned(0);
  CHECK(run2.run_length() == 2);

  ChangePointPrior resolved = run2.conditioned(1);
  CHECK(resolved.mode() == ChangePointPrior::Mode::Resolved);
  CHECK(resolved.prob_next(1) == 1.0);
  CHECK(resolved.prob_next(0) == 0.0);
  CHECK(max_abs(resolved.state_at(2).matrix() -
                tensor(DensityOperator::pure(ket1()), DensityOperator::pure(ket1()))
                    .matrix()) <= 1e-15);

  // A third run is impossible.
  CHECK_THROWS_AS(resolved.conditioned(0), ZeroEvidenceError);
}

TEST_CASE("prior-sequence consistency for all five shipped priors") {
  auto check_consistency = [](const PriorSequence& prior, int n_max, double tol) {
    for (int n = 1; n < n_max; ++n) {
      DensityOperator larger = prior.state_at(n + 1);
      DensityOperator reduced = partial_trace(larger, static_cast<std::size_t>(n));
      CHECK(max_abs(reduced.matrix() - prior.state_at(n).matrix()) <= tol);
    }
  };

  check_consistency(haar_pure_ensemble(200, 21), 4, 1e-10);
  check_consistency(plus_product_prior(), 4, 1e-10);
  check_consistency(hs_mixed_ensemble(200, 22), 4, 1e-10);
  check_consistency(two_qubit_pair_ensemble(100, 23), 3, 1e-10);
  check_consistency(counter_inductive_prior(), 4, 1e-10);

  // Conditioned change-point priors still form prior sequences.
  check_consistency(counter_inductive_prior().conditioned(0).conditioned(0), 4, 1e-10);
  check_consistency(counter_inductive_prior().conditioned(1).conditioned(0), 4, 1e-10);
}
