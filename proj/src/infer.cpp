#include "qbayes/infer.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace qbayes {

namespace {

constexpr double kEvidenceFloor = 1e-300;

// splitmix64 step; decorrelates per-iteration resampling seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool is_z_basis(const Povm& povm) {
  if (povm.dim() != 2 || povm.num_outcomes() != 2) return false;
  if (povm.labels() != std::vector<std::string>{"0", "1"}) return false;
  Vector k0 = ket0(), k1 = ket1();
  return (povm.effects()[0] - k0 * k0.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 &&
         (povm.effects()[1] - k1 * k1.adjoint()).cwiseAbs().maxCoeff() <= 1e-10;
}

}  // namespace

ParticleEnsemble bayes_update_ensemble(const ParticleEnsemble& e, const Povm& povm,
                                       std::size_t outcome) {
  if (povm.dim() != e.block_hilbert_dim())
    throw std::invalid_argument("bayes_update_ensemble: POVM does not act on one block");
  if (outcome >= povm.num_outcomes())
    throw std::out_of_range("bayes_update_ensemble: outcome out of range");

  const Matrix& effect = povm.effects()[outcome];
  std::vector<double> weights(e.size());
  double total = 0.0;  // accumulated in particle-index order, kept reproducible
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Particle& p = e.particles()[i];
    double lik = (p.state.matrix() * effect).trace().real();
    if (lik < 0.0) lik = 0.0;
    weights[i] = p.weight * lik;
    total += weights[i];
  }
  if (!(total > kEvidenceFloor))
    throw ZeroEvidenceError(
        "bayes_update_ensemble: the prior assigns zero likelihood to outcome '" +
        povm.labels()[outcome] + "'");
  for (double& w : weights) {
    w /= total;
    if (w < kEvidenceFloor) w = 0.0;  // flush denormal stragglers
  }
  // Flushing can leave the sum a hair under 1; renormalize once more.
  double s = 0.0;
  for (double w : weights) s += w;
  for (double& w : weights) w /= s;
  return e.with_weights(std::move(weights));
}

ChangePointPrior cip_condition(const ChangePointPrior& p, int symbol) {
  return p.conditioned(symbol);
}

DensityOperator dense_sequence_update(const DensityOperator& state,
                                      const KrausChannel& channel,
                                      std::size_t outcome) {
  if (state.num_factors() < 2)
    throw std::invalid_argument("dense_sequence_update: need at least two systems");
  DensityOperator updated = kraus_update(state, channel, outcome, 0);
  return partial_trace(updated, 0);
}

DensityOperator predictive_marginal(const PriorSequence& prior, int n) {
  return prior.state_at(n);
}

Eigen::VectorXd predictive_probabilities(const PriorSequence& prior, const Povm& povm) {
  return born_probabilities(prior.state_at(1), povm);
}

double effective_sample_size(const ParticleEnsemble& e) {
  double s = 0.0;
  for (const Particle& p : e.particles()) s += p.weight * p.weight;
  return 1.0 / s;
}

ParticleEnsemble resample_move(const ParticleEnsemble& e, std::uint64_t seed,
                               double shrink) {
  if (!(shrink > 0.0 && shrink < 1.0))
    throw std::invalid_argument("resample_move: shrink must lie in (0,1)");
  const std::size_t n = e.size();
  std::mt19937_64 rng(seed);
  const double u0 = (rng() >> 11) * 0x1.0p-53 / static_cast<double>(n);

  // Systematic resampling: one uniform offset, evenly spaced positions.
  std::vector<std::size_t> picks(n);
  double cumulative = e.particles()[0].weight;
  std::size_t src = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double pos = u0 + static_cast<double>(j) / static_cast<double>(n);
    while (cumulative < pos && src + 1 < n) {
      ++src;
      cumulative += e.particles()[src].weight;
    }
    picks[j] = src;
  }

  const Eigen::Index d = e.block_hilbert_dim();
  Matrix mean = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < n; ++j) mean += e.particles()[picks[j]].state.matrix();
  mean /= static_cast<double>(n);

  std::vector<Particle> out;
  out.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  const auto& dims = e.particles().front().state.factor_dims();
  for (std::size_t j = 0; j < n; ++j) {
    Matrix moved = shrink * e.particles()[picks[j]].state.matrix() + (1.0 - shrink) * mean;
    out.push_back({w, DensityOperator(std::move(moved), dims)});
  }
  return ParticleEnsemble(e.block_size(), std::move(out), e.seed());
}

PovmSchedule PovmSchedule::constant(Povm povm) {
  PovmSchedule s;
  s.constant_ = true;
  s.povms_.push_back(std::move(povm));
  return s;
}

PovmSchedule PovmSchedule::explicit_list(std::vector<Povm> povms) {
  if (povms.empty()) throw std::invalid_argument("PovmSchedule: empty list");
  PovmSchedule s;
  s.constant_ = false;
  s.povms_ = std::move(povms);
  return s;
}

const Povm& PovmSchedule::at(std::size_t step) const {
  if (constant_) return povms_.front();
  if (step >= povms_.size())
    throw std::out_of_range("PovmSchedule: step beyond the scheduled POVMs");
  return povms_[step];
}

InferenceResult run_inference(AnyPrior prior, const std::vector<std::string>& outcomes,
                              const PovmSchedule& schedule, const RunOptions& options) {
  InferenceTrajectory trajectory;
  trajectory.steps.reserve(outcomes.size());

  if (std::holds_alternative<ChangePointPrior>(prior)) {
    for (std::size_t step = 0; step < outcomes.size(); ++step)
      if (!is_z_basis(schedule.at(step)))
        throw std::invalid_argument(
            "run_inference: change-point priors require a z_basis schedule");
  }

  for (std::size_t step = 0; step < outcomes.size(); ++step) {
    const std::size_t iter = step + 1;
    const Povm& povm = schedule.at(step);
    const std::size_t k = povm.outcome_index(outcomes[step]);
    const bool checkpoint =
        options.checkpoint_every > 0 && iter % options.checkpoint_every == 0;

    double predictive = 0.0;
    double ess = 0.0;
    try {
      if (auto* ensemble = std::get_if<ParticleEnsemble>(&prior)) {
        DensityOperator block_state = ensemble->mean_block_state();
        predictive = born_probabilities(block_state, povm)(static_cast<Eigen::Index>(k));
        *ensemble = bayes_update_ensemble(*ensemble, povm, k);
        if (options.resample_enabled &&
            effective_sample_size(*ensemble) <
                options.ess_threshold * static_cast<double>(ensemble->size()))
          *ensemble = resample_move(*ensemble, mix_seed(options.resample_seed, iter),
                                    options.shrink);
        ess = effective_sample_size(*ensemble);
      } else {
        auto& cip = std::get<ChangePointPrior>(prior);
        const int symbol = k == 0 ? 0 : 1;
        predictive = cip.prob_next(symbol);
        cip = cip.conditioned(symbol);
        ess = cip.effective_support_size();
      }
    } catch (const ZeroEvidenceError& ex) {
      throw ZeroEvidenceError(std::string(ex.what()) + " (iteration " +
                                  std::to_string(iter) + ")",
                              iter);
    }

    const PriorSequence& posterior =
        std::visit([](const auto& p) -> const PriorSequence& { return p; }, prior);
    DensityOperator marginal1 = posterior.state_at(1);
    std::optional<DensityOperator> marginal2;
    if (checkpoint || iter == outcomes.size() ||
        (options.target && options.target->dim() == 4))
      marginal2 = posterior.state_at(2);

    double td = std::numeric_limits<double>::quiet_NaN();
    if (options.target) {
      if (options.target->dim() == 2)
        td = trace_distance(marginal1, *options.target);
      else if (options.target->dim() == 4)
        td = trace_distance(*marginal2, *options.target);
      else
        throw std::invalid_argument("run_inference: target must live on 1 or 2 qubits");
    }

    trajectory.steps.push_back(TrajectoryPoint{iter, outcomes[step], predictive,
                                               std::move(marginal1), std::move(marginal2),
                                               td, ess});
  }

  return InferenceResult{std::move(trajectory), std::move(prior)};
}

}  // namespace qbayes
