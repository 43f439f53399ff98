#include "qbayes/priors.hpp"

#include <cmath>
#include <random>

#include "qbayes/infer.hpp"

namespace qbayes {

namespace {

constexpr Eigen::Index kDenseDimCap = 1024;

Matrix kron_power(const Matrix& m, int n) {
  Matrix out = m;
  for (int i = 1; i < n; ++i) out = kron(out, m);
  return out;
}

Matrix ginibre(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}

std::vector<Eigen::Index> qubit_factors(int n) {
  return std::vector<Eigen::Index>(static_cast<std::size_t>(n), 2);
}

void check_dense_cap(int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (n > 10 || (Eigen::Index(1) << n) > kDenseDimCap)
    throw std::domain_error("dense cap exceeded (2^n <= 1024)");
}

// sum_{k >= k0} 2^{-scale * k (2m + k)}. Super-exponentially convergent;
// scale 2 gives the sum of squared weights.
double power_tail(std::int64_t m, std::int64_t k0, double rel_tol, double scale = 1.0) {
  double acc = 0.0;
  for (std::int64_t k = k0;; ++k) {
    const double term = std::exp2(-scale * static_cast<double>(k) *
                                  (2.0 * static_cast<double>(m) + static_cast<double>(k)));
    acc += term;
    if (term == 0.0 || term <= rel_tol * acc) break;
  }
  return acc;
}

}  // namespace

ParticleEnsemble::ParticleEnsemble(int block_size, std::vector<Particle> particles,
                                   std::uint64_t seed)
    : block_size_(block_size), particles_(std::move(particles)), seed_(seed) {
  if (block_size_ != 1 && block_size_ != 2)
    throw std::invalid_argument("ParticleEnsemble: block_size must be 1 or 2");
  if (particles_.empty())
    throw std::invalid_argument("ParticleEnsemble: no particles");
  const Eigen::Index want_dim = Eigen::Index(1) << block_size_;
  double total = 0.0;
  for (const Particle& p : particles_) {
    if (p.state.dim() != want_dim)
      throw std::invalid_argument("ParticleEnsemble: block state dimension mismatch");
    if (p.state.factor_dims() != qubit_factors(block_size_))
      throw std::invalid_argument("ParticleEnsemble: block states must carry qubit factors");
    if (p.weight < 0.0)
      throw std::invalid_argument("ParticleEnsemble: negative weight");
    total += p.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("ParticleEnsemble: weights must sum to 1");
}

DensityOperator ParticleEnsemble::mean_block_state() const {
  const Eigen::Index d = particles_.front().state.dim();
  Matrix acc = Matrix::Zero(d, d);
  for (const Particle& p : particles_) acc += p.weight * p.state.matrix();
  return DensityOperator(std::move(acc), qubit_factors(block_size_));
}

ParticleEnsemble ParticleEnsemble::with_weights(std::vector<double> weights) const {
  if (weights.size() != particles_.size())
    throw std::invalid_argument("with_weights: weight count mismatch");
  std::vector<Particle> out = particles_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].weight = weights[i];
  return ParticleEnsemble(block_size_, std::move(out), seed_);
}

Eigen::Index ParticleEnsemble::block_hilbert_dim() const {
  return Eigen::Index(1) << block_size_;
}

DensityOperator ParticleEnsemble::state_at(int n) const {
  return ensemble_state(*this, n);
}

ParticleEnsemble haar_pure_ensemble(std::size_t num_particles, std::uint64_t seed) {
  if (num_particles == 0)
    throw std::invalid_argument("haar_pure_ensemble: need at least one particle");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Particle> particles;
  particles.reserve(num_particles);
  const double w = 1.0 / static_cast<double>(num_particles);
  for (std::size_t i = 0; i < num_particles; ++i) {
    Vector psi(2);
    for (Eigen::Index c = 0; c < 2; ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      psi(c) = Complex(re, im);
    }
    particles.push_back({w, DensityOperator::pure(psi)});
  }
  return ParticleEnsemble(1, std::move(particles), seed);
}

ParticleEnsemble plus_product_prior() {
  return ParticleEnsemble(1, {{1.0, DensityOperator::pure(ket_plus())}}, 0);
}

ParticleEnsemble hs_mixed_ensemble(std::size_t num_particles, std::uint64_t seed) {
  if (num_particles == 0)
    throw std::invalid_argument("hs_mixed_ensemble: need at least one particle");
  std::mt19937_64 rng(seed);
  std::vector<Particle> particles;
  particles.reserve(num_particles);
  const double w = 1.0 / static_cast<double>(num_particles);
  for (std::size_t i = 0; i < num_particles; ++i) {
    Matrix g = ginibre(rng, 2);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    particles.push_back({w, DensityOperator(std::move(rho), {2})});
  }
  return ParticleEnsemble(1, std::move(particles), seed);
}

ParticleEnsemble two_qubit_pair_ensemble(std::size_t num_particles, std::uint64_t seed) {
  if (num_particles == 0)
    throw std::invalid_argument("two_qubit_pair_ensemble: need at least one particle");
  std::mt19937_64 rng(seed);
  std::vector<Particle> particles;
  particles.reserve(num_particles);
  const double w = 1.0 / static_cast<double>(num_particles);
  for (std::size_t i = 0; i < num_particles; ++i) {
    Matrix g = ginibre(rng, 4);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    particles.push_back({w, DensityOperator(std::move(rho), {2, 2})});
  }
  return ParticleEnsemble(2, std::move(particles), seed);
}

DensityOperator ensemble_state(const ParticleEnsemble& e, int n) {
  check_dense_cap(e.block_size() == 2 && n % 2 == 1 ? n + 1 : n);
  if (e.block_size() == 2 && n % 2 == 1) {
    // Odd n for pair blocks: trace the last system off the (n+1)-system state.
    DensityOperator even = ensemble_state(e, n + 1);
    return partial_trace(even, static_cast<std::size_t>(n));
  }
  const int blocks = e.block_size() == 1 ? n : n / 2;
  const Eigen::Index d = Eigen::Index(1) << n;
  Matrix acc = Matrix::Zero(d, d);
  for (const Particle& p : e.particles()) {
    if (blocks == 1)
      acc += p.weight * p.state.matrix();
    else
      acc += p.weight * kron_power(p.state.matrix(), blocks);
  }
  return DensityOperator(std::move(acc), qubit_factors(n));
}

ChangePointPrior::ChangePointPrior(Mode mode, int run_symbol, std::int64_t run_length,
                                   double truncation_tol)
    : mode_(mode), run_symbol_(run_symbol), run_length_(run_length),
      truncation_tol_(truncation_tol) {}

ChangePointPrior ChangePointPrior::fresh(double truncation_tol) {
  if (truncation_tol <= 0.0 || truncation_tol >= 1.0)
    throw std::invalid_argument("ChangePointPrior: truncation tolerance out of range");
  return ChangePointPrior(Mode::Fresh, -1, 0, truncation_tol);
}

double ChangePointPrior::normalization() const {
  switch (mode_) {
    case Mode::Fresh:
      return 1.0 / (2.0 * power_tail(0, 1, truncation_tol_));
    case Mode::Run:
      return 1.0 / power_tail(run_length_, 0, truncation_tol_);
    case Mode::Resolved:
      return 1.0;
  }
  throw std::logic_error("unreachable");
}

double ChangePointPrior::sequence_weight(int symbol, std::int64_t k) const {
  if (symbol != 0 && symbol != 1) return 0.0;
  switch (mode_) {
    case Mode::Fresh:
      if (k < 1) return 0.0;
      return normalization() * std::exp2(-static_cast<double>(k) * static_cast<double>(k));
    case Mode::Run:
      if (symbol != run_symbol_ || k < 0) return 0.0;
      return normalization() *
             std::exp2(-static_cast<double>(k) *
                       (2.0 * static_cast<double>(run_length_) + static_cast<double>(k)));
    case Mode::Resolved:
      return 0.0;
  }
  throw std::logic_error("unreachable");
}

double ChangePointPrior::prob_next(int symbol) const {
  if (symbol != 0 && symbol != 1)
    throw std::invalid_argument("ChangePointPrior: symbol must be 0 or 1");
  switch (mode_) {
    case Mode::Fresh:
      return 0.5;
    case Mode::Run: {
      const double stay = power_tail(run_length_, 1, truncation_tol_) /
                          power_tail(run_length_, 0, truncation_tol_);
      return symbol == run_symbol_ ? stay : 1.0 - stay;
    }
    case Mode::Resolved:
      return symbol == run_symbol_ ? 1.0 : 0.0;
  }
  throw std::logic_error("unreachable");
}

ChangePointPrior ChangePointPrior::conditioned(int symbol) const {
  if (symbol != 0 && symbol != 1)
    throw std::invalid_argument("ChangePointPrior: symbol must be 0 or 1");
  switch (mode_) {
    case Mode::Fresh:
      return ChangePointPrior(Mode::Run, symbol, 1, truncation_tol_);
    case Mode::Run:
      if (symbol == run_symbol_) {
        if (prob_next(symbol) <= 0.0)
          throw ZeroEvidenceError(
              "change-point prior: continuing the run has zero remaining measure");
        return ChangePointPrior(Mode::Run, run_symbol_, run_length_ + 1, truncation_tol_);
      }
      // The change point is now pinned at run_length_; all later outcomes
      // equal `symbol`.
      return ChangePointPrior(Mode::Resolved, symbol, run_length_, truncation_tol_);
    case Mode::Resolved:
      if (symbol == run_symbol_) return *this;
      throw ZeroEvidenceError(
          "change-point prior: observed symbol contradicts the resolved sequence");
  }
  throw std::logic_error("unreachable");
}

double ChangePointPrior::effective_support_size() const {
  switch (mode_) {
    case Mode::Fresh: {
      const double n = normalization();
      return 1.0 / (2.0 * n * n * power_tail(0, 1, truncation_tol_, 2.0));
    }
    case Mode::Run: {
      const double n = normalization();
      return 1.0 / (n * n * power_tail(run_length_, 0, truncation_tol_, 2.0));
    }
    case Mode::Resolved:
      return 1.0;
  }
  throw std::logic_error("unreachable");
}

DensityOperator ChangePointPrior::state_at(int n) const {
  check_dense_cap(n);
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);

  // Basis index of the prefix s^k (1-s)^(n-k), first symbol most significant.
  auto prefix_index = [&](int s, int k) -> Eigen::Index {
    const Eigen::Index block = Eigen::Index(1) << (n - k);
    return s == 0 ? block - 1 : dim - block;
  };

  switch (mode_) {
    case Mode::Fresh: {
      const double norm = normalization();
      for (int k = 1; k < n; ++k) {
        const double w = norm * std::exp2(-static_cast<double>(k) * k);
        diag(prefix_index(0, k)) += w;
        diag(prefix_index(1, k)) += w;
      }
      const double tail = norm * power_tail(0, n, truncation_tol_);
      diag(0) += tail;        // 0^n
      diag(dim - 1) += tail;  // 1^n
      break;
    }
    case Mode::Run: {
      const double norm = normalization();
      const std::int64_t m = run_length_;
      for (int k = 1; k < n; ++k) {
        const double w =
            norm * std::exp2(-static_cast<double>(k) * (2.0 * static_cast<double>(m) + k));
        diag(prefix_index(run_symbol_, k)) += w;
      }
      // k = 0: the run ends immediately.
      diag(run_symbol_ == 0 ? dim - 1 : 0) += norm;
      const double tail = norm * power_tail(m, n, truncation_tol_);
      diag(run_symbol_ == 0 ? 0 : dim - 1) += tail;
      break;
    }
    case Mode::Resolved:
      diag(run_symbol_ == 0 ? 0 : dim - 1) = 1.0;
      break;
  }

  Matrix out = diag.cast<Complex>().asDiagonal();
  return DensityOperator(std::move(out), qubit_factors(n));
}

ChangePointPrior counter_inductive_prior() { return ChangePointPrior::fresh(); }

DensityOperator cip_state(const ChangePointPrior& p, int n) { return p.state_at(n); }

}  // namespace qbayes
