#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbayes/infer.hpp"

namespace qbayes {

// Fixed cadence at which 2-system marginals are recorded and written to the
// JSON summary.
inline constexpr std::size_t kCheckpointEvery = 100;

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::filesystem::path path)
      : std::runtime_error(what + ": " + path.string()), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct PriorSpec {
  std::string name;  // haar_pure | plus_product | counter_inductive | hs_mixed | hs_pairwise
  std::size_t particles = 0;
  std::uint64_t seed = 42;
};

struct PovmSpec {
  std::string name;  // any standard_povm kind, including product(...)
};

struct OutcomeSpec {
  enum class Mode { Constant, Sampled, Explicit };
  Mode mode = Mode::Constant;
  std::string symbol;                // constant: repeated label
  std::string true_state;            // sampled: named state
  std::uint64_t seed = 42;           // sampled
  std::vector<std::string> labels;   // explicit
};

struct ResampleSpec {
  bool enabled = false;
  double threshold = 0.5;
  double shrink = 0.98;
  std::uint64_t seed = 42;
};

struct OutputSpec {
  std::string csv;
  std::string json;
};

struct ExperimentConfig {
  PriorSpec prior;
  PovmSpec povm;
  OutcomeSpec outcomes;
  std::size_t iterations = 0;
  std::string target;  // named state for distance tracking
  ResampleSpec resample;
  OutputSpec output;
};

struct ConfigError {
  std::string field;
  std::string message;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigError> errors;  // all problems found, not only the first
};

// Parses and validates a JSON config. All fields mandatory except "resample".
ParseResult parse_config(const std::string& text);

struct OutcomeStream {
  std::vector<std::string> labels;
  std::string provenance;  // "constant(<label>)", "sampled(<state>,seed=..)", "explicit"
};

// i.i.d. Born sampling of `count` outcomes from a designated true state.
// Deterministic per seed.
OutcomeStream sample_outcomes(const DensityOperator& true_state, const Povm& povm,
                              std::size_t count, std::uint64_t seed);

// Named states usable as targets and outcome sources:
// ket0, ket1, ket_plus, rho_m, rho_me, rho_mm (= rho_M (x) rho_M).
DensityOperator named_state(const std::string& name);

// Instantiates the named prior (with particles/seed where applicable).
AnyPrior build_prior(const PriorSpec& spec);

// CSV trajectory + JSON summary. Byte-stable for identical inputs.
void emit_results(const ExperimentConfig& cfg, const InferenceResult& result,
                  const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path);

struct RunArtifacts {
  ExperimentConfig config;
  InferenceResult result;
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
};

// Builds everything from the config, runs the inference loop, writes outputs
// under out_dir. ZeroEvidenceError and IoError propagate to the caller.
RunArtifacts run_experiment(const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir);

// All-zeros z-basis data of length m against the haar_pure, plus_product and
// counter_inductive priors; one run per prior.
std::vector<RunArtifacts> preset_three_priors(std::size_t m, std::size_t particles,
                                              std::uint64_t seed,
                                              const std::filesystem::path& out_dir);

// Pair outcomes sampled from rho_ME under product(sic_qubit,sic_qubit);
// the hs_pairwise prior updates per pair, the hs_mixed prior updates on the
// same data split into single outcomes.
std::vector<RunArtifacts> preset_entanglement(std::size_t pairs, std::size_t particles,
                                              std::uint64_t seed, bool resample,
                                              const std::filesystem::path& out_dir);

}  // namespace qbayes
