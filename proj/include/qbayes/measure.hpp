#pragma once

#include <string>
#include <vector>

#include "qbayes/qalg.hpp"

namespace qbayes {

// Raised when a requested outcome has (numerically) zero Born probability,
// i.e. the state dogmatically excludes the data.
class ZeroProbabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// POVM: Hermitian PSD effects summing to the identity, one per outcome.
class Povm {
 public:
  Povm(std::vector<Matrix> effects, std::vector<std::string> labels);

  Eigen::Index dim() const { return dim_; }
  std::size_t num_outcomes() const { return effects_.size(); }
  const std::vector<Matrix>& effects() const { return effects_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t outcome_index(const std::string& label) const;

 private:
  Eigen::Index dim_;
  std::vector<Matrix> effects_;
  std::vector<std::string> labels_;
};

// Measurement channel: per-outcome Kraus operator lists {A_kj} with
// sum_kj A_kj^dag A_kj = I. The induced effects are E_k = sum_j A_kj^dag A_kj,
// so that tr(rho E_k) = tr(sum_j A_kj rho A_kj^dag).
class KrausChannel {
 public:
  KrausChannel(std::vector<std::vector<Matrix>> kraus_ops,
               std::vector<std::string> labels);

  Eigen::Index dim() const { return dim_; }
  std::size_t num_outcomes() const { return kraus_.size(); }
  const std::vector<std::vector<Matrix>>& kraus_operators() const { return kraus_; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::vector<Matrix> effects() const;
  Povm induced_povm() const;

 private:
  Eigen::Index dim_;
  std::vector<std::vector<Matrix>> kraus_;
  std::vector<std::string> labels_;
};

// Born rule p_k = tr(rho E_k). Entries clamped at -1e-12 to 0.
Eigen::VectorXd born_probabilities(const DensityOperator& state, const Povm& povm);

// Post-measurement state for outcome k, the channel acting on factor
// `acting_site` (identity elsewhere):
//   rho_k = tr(rho E~_k)^{-1} sum_j A~_kj rho A~_kj^dag.
// Throws ZeroProbabilityError when tr(rho E~_k) <= 1e-12.
DensityOperator kraus_update(const DensityOperator& state, const KrausChannel& channel,
                             std::size_t outcome, std::size_t acting_site = 0);

// Canonical single-Kraus channel A_k = sqrt(E_k) for a given POVM.
KrausChannel lueders_channel(const Povm& povm);

// Effects {E_i (x) F_j}, labels "<p_label>:<q_label>", i-major ordering.
Povm product_povm(const Povm& p, const Povm& q);

// Named POVMs: "z_basis", "sic_qubit", "pauli6", "bell_basis", and
// "product(<kind>,<kind>)" recursively. Throws on unknown kinds.
Povm standard_povm(const std::string& kind);

// True iff the effects span the full d^2-dimensional operator space
// (numerical rank at relative tolerance 1e-8).
bool is_informationally_complete(const Povm& povm);

}  // namespace qbayes
