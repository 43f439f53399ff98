#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qbayes/measure.hpp"
#include "qbayes/priors.hpp"

namespace qbayes {

// Raised when the prior assigns zero total likelihood to the observed data.
// `iteration` is the 1-based step at which the data were excluded (0 outside
// an inference loop).
class ZeroEvidenceError : public std::runtime_error {
 public:
  explicit ZeroEvidenceError(const std::string& what, std::size_t iteration = 0)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Quantum Bayes rule on the mixing weights: w_i' ~ w_i tr(rho_i E_k).
// Particle states are untouched. Throws ZeroEvidenceError when the total
// likelihood underflows (< 1e-300).
ParticleEnsemble bayes_update_ensemble(const ParticleEnsemble& e, const Povm& povm,
                                       std::size_t outcome);

// Exact conditioning of the change-point measure on an observed symbol.
ChangePointPrior cip_condition(const ChangePointPrior& p, int symbol);

// Model-free oracle: Kraus update on the first system of an n-system state,
// then trace it out. Requires n >= 2.
DensityOperator dense_sequence_update(const DensityOperator& state,
                                      const KrausChannel& channel,
                                      std::size_t outcome);

// state_at(n) of the prior: the marginal for the next n unmeasured systems.
// n = 1 is the Bayesian mean estimator.
DensityOperator predictive_marginal(const PriorSequence& prior, int n);

// Born probabilities of the 1-system predictive marginal.
Eigen::VectorXd predictive_probabilities(const PriorSequence& prior, const Povm& povm);

// 1 / sum_i w_i^2, in [1, N].
double effective_sample_size(const ParticleEnsemble& e);

// Systematic resampling to equal weights, then contraction of every particle
// toward the ensemble mean: rho <- a rho + (1-a) mean. Deterministic per seed.
ParticleEnsemble resample_move(const ParticleEnsemble& e, std::uint64_t seed,
                               double shrink);

// One POVM per measurement step. Constant schedules repeat a single POVM;
// explicit schedules list one per step.
class PovmSchedule {
 public:
  static PovmSchedule constant(Povm povm);
  static PovmSchedule explicit_list(std::vector<Povm> povms);
  const Povm& at(std::size_t step) const;

 private:
  PovmSchedule() = default;
  std::vector<Povm> povms_;
  bool constant_ = true;
};

struct TrajectoryPoint {
  std::size_t iteration = 0;  // 1-based
  std::string outcome;
  double predictive_prob = 0.0;
  DensityOperator marginal1;
  std::optional<DensityOperator> marginal2;  // recorded at checkpoints
  double td_target = 0.0;                    // NaN when no target configured
  double ess = 0.0;
};

struct InferenceTrajectory {
  std::vector<TrajectoryPoint> steps;
};

struct RunOptions {
  std::optional<DensityOperator> target;  // distance tracked against state_at(1) or (2) by dim
  bool resample_enabled = false;
  double ess_threshold = 0.5;  // resample when ESS < threshold * N
  double shrink = 0.98;
  std::uint64_t resample_seed = 42;
  std::size_t checkpoint_every = 100;
};

using AnyPrior = std::variant<ParticleEnsemble, ChangePointPrior>;

struct InferenceResult {
  InferenceTrajectory trajectory;
  AnyPrior final_prior;
};

// Sequential update loop: per step, record the predictive probability of the
// observed outcome, apply the matching update rule, record marginals and
// diagnostics, and optionally resample-move. Each step consumes one outcome
// of the scheduled POVM (one pair outcome for pair-block ensembles).
// Change-point priors require a z_basis schedule.
InferenceResult run_inference(AnyPrior prior, const std::vector<std::string>& outcomes,
                              const PovmSchedule& schedule, const RunOptions& options = {});

}  // namespace qbayes
