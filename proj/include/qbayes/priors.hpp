#pragma once

#include <cstdint>
#include <vector>

#include "qbayes/qalg.hpp"

namespace qbayes {

// A prior over a sequence of systems: a consistent family of n-system states,
// tr_{n+1} state_at(n+1) = state_at(n) for all n >= 1.
class PriorSequence {
 public:
  virtual ~PriorSequence() = default;

  // Hilbert dimension of one block (2 for single-qubit blocks, 4 for pairs).
  virtual Eigen::Index block_hilbert_dim() const = 0;

  // State of the first n systems. Dense representation, so 2^n <= 1024.
  virtual DensityOperator state_at(int n) const = 0;
};

struct Particle {
  double weight;
  DensityOperator state;
};

// Discretized de Finetti mixture: weighted block states with block_size
// systems per block (1 or 2). Weights sum to 1; states are immutable between
// resampling steps.
class ParticleEnsemble final : public PriorSequence {
 public:
  ParticleEnsemble(int block_size, std::vector<Particle> particles,
                   std::uint64_t seed);

  int block_size() const { return block_size_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return particles_.size(); }
  const std::vector<Particle>& particles() const { return particles_; }

  // sum_i w_i rho_i over block states.
  DensityOperator mean_block_state() const;

  // Same particle states with replaced (normalized) weights.
  ParticleEnsemble with_weights(std::vector<double> weights) const;

  Eigen::Index block_hilbert_dim() const override;
  DensityOperator state_at(int n) const override;

 private:
  int block_size_;
  std::vector<Particle> particles_;
  std::uint64_t seed_;
};

// Equal-weight pure states |psi_i><psi_i| drawn from the Haar measure
// (normalized complex Gaussian vectors). Deterministic per seed.
ParticleEnsemble haar_pure_ensemble(std::size_t num_particles, std::uint64_t seed);

// The single-particle prior |+><+|.
ParticleEnsemble plus_product_prior();

// Equal-weight qubit states from the Hilbert-Schmidt measure
// (rho = G G^dag / tr, G a 2x2 complex Ginibre matrix).
ParticleEnsemble hs_mixed_ensemble(std::size_t num_particles, std::uint64_t seed);

// Equal-weight two-qubit block states from the Hilbert-Schmidt measure on
// 4x4 density operators. Block states may be entangled.
ParticleEnsemble two_qubit_pair_ensemble(std::size_t num_particles, std::uint64_t seed);

// n-system state of the mixture: sum_i w_i rho_i^(x)n for single blocks.
// For pair blocks, even n uses sigma^(x)(n/2); odd n traces the last system
// off the (n+1)-system state.
DensityOperator ensemble_state(const ParticleEnsemble& e, int n);

// Classical change-point measure over the outcome sequences 0^k 1^oo and
// 1^k 0^oo. Held analytically; dense matrices are produced on demand.
//
// Fresh mode is the symmetric prior with weight N 2^{-k^2} on each sequence,
// k >= 1. Conditioning on an observed symbol moves through Run mode (a run
// of m identical symbols seen, change point still open) and, once both
// symbols have appeared, Resolved mode (a single surviving sequence).
class ChangePointPrior final : public PriorSequence {
 public:
  enum class Mode { Fresh, Run, Resolved };

  static ChangePointPrior fresh(double truncation_tol = 1e-16);

  Mode mode() const { return mode_; }
  int run_symbol() const { return run_symbol_; }
  std::int64_t run_length() const { return run_length_; }
  double truncation_tolerance() const { return truncation_tol_; }

  // Normalization of the surviving measure: N fresh, N_m in a run, 1 resolved.
  double normalization() const;

  // Weight of the remaining sequence symbol^k (1-symbol)^oo. Fresh mode
  // requires k >= 1; Run mode requires symbol == run_symbol() and k >= 0
  // (k counts the identical symbols still to come). Zero for sequences
  // outside the surviving support.
  double sequence_weight(int symbol, std::int64_t k) const;

  // Predictive probability that the next outcome equals `symbol`.
  double prob_next(int symbol) const;

  // Exact conditioning on the next observed symbol. Throws ZeroEvidenceError
  // (see infer.hpp) when the symbol has zero measure under this prior.
  ChangePointPrior conditioned(int symbol) const;

  // 1 / sum_k w_k^2 over surviving sequence weights; degeneracy diagnostic.
  double effective_support_size() const;

  Eigen::Index block_hilbert_dim() const override { return 2; }
  DensityOperator state_at(int n) const override;

 private:
  ChangePointPrior(Mode mode, int run_symbol, std::int64_t run_length,
                   double truncation_tol);

  Mode mode_;
  int run_symbol_;          // Run: repeated symbol; Resolved: the fixed symbol
  std::int64_t run_length_; // Run: m; Resolved: change point of the survivor
  double truncation_tol_;
};

// The fresh symmetric change-point prior (weights N 2^{-k^2}).
ChangePointPrior counter_inductive_prior();

// Dense n-system state of a change-point prior; diagonal in the
// computational product basis.
DensityOperator cip_state(const ChangePointPrior& p, int n);

}  // namespace qbayes
