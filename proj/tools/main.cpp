// qbayes: experiment runner for sequential quantum Bayesian inference.
//
// Exit codes: 0 success, 1 config error, 2 zero-evidence abort, 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "qbayes/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitZeroEvidence = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qbayes::IoError("cannot read config file", path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int report_errors(const std::vector<qbayes::ConfigError>& errors) {
  for (const auto& e : errors)
    std::cerr << "config error [" << e.field << "]: " << e.message << "\n";
  return kExitConfig;
}

void print_summary(const std::vector<qbayes::RunArtifacts>& artifacts) {
  for (const auto& a : artifacts) {
    const auto& steps = a.result.trajectory.steps;
    std::cout << a.config.prior.name << ": " << steps.size() << " iterations";
    if (!steps.empty())
      std::cout << ", final td_target = " << steps.back().td_target;
    std::cout << "\n  " << a.csv_path.string() << "\n  " << a.json_path.string() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qbayes - sequential quantum Bayesian inference experiments.\n"
      "Fixed constants: checkpoint cadence 100 iterations, default seed 42."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";

  auto* validate = app.add_subcommand("validate", "Check a config file and report all problems");
  validate->add_option("--config", config_path, "JSON experiment config")->required();

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--out-dir", out_dir, "Directory for CSV/JSON outputs (default .)");

  auto* preset = app.add_subcommand("preset", "Run a canned experiment");
  preset->require_subcommand(1);

  std::uint64_t m = 20;
  std::size_t particles = 100000;
  std::uint64_t seed = 42;
  auto* three = preset->add_subcommand(
      "three-priors", "All-zeros z-basis data against the haar_pure, plus_product and "
                      "counter_inductive priors");
  three->add_option("--m", m, "Number of zero outcomes")->required();
  three->add_option("--particles", particles, "Particles for haar_pure (default 100000)");
  three->add_option("--seed", seed, "Sampler seed (default 42)");
  three->add_option("--out-dir", out_dir, "Directory for CSV/JSON outputs (default .)");

  std::uint64_t pairs = 0;
  std::size_t ent_particles = 0;
  std::uint64_t ent_seed = 42;
  auto* ent = preset->add_subcommand(
      "entanglement", "Pair outcomes sampled from rho_ME under product(sic_qubit,sic_qubit), "
                      "updating the hs_pairwise and hs_mixed priors on the same data "
                      "(resample-move enabled)");
  ent->add_option("--pairs", pairs, "Number of measured pairs")->required();
  ent->add_option("--particles", ent_particles, "Particles per ensemble")->required();
  ent->add_option("--seed", ent_seed, "Sampler seed (default 42)");
  ent->add_option("--out-dir", out_dir, "Directory for CSV/JSON outputs (default .)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      qbayes::ParseResult parsed = qbayes::parse_config(read_file(config_path));
      if (!parsed.errors.empty()) return report_errors(parsed.errors);
      std::cout << "config ok\n";
      return kExitOk;
    }

    if (run->parsed()) {
      qbayes::ParseResult parsed = qbayes::parse_config(read_file(config_path));
      if (!parsed.errors.empty()) return report_errors(parsed.errors);
      qbayes::RunArtifacts artifacts = qbayes::run_experiment(*parsed.config, out_dir);
      print_summary({artifacts});
      return kExitOk;
    }

    if (three->parsed()) {
      print_summary(qbayes::preset_three_priors(m, particles, seed, out_dir));
      return kExitOk;
    }

    if (ent->parsed()) {
      print_summary(
          qbayes::preset_entanglement(pairs, ent_particles, ent_seed, true, out_dir));
      return kExitOk;
    }
  } catch (const qbayes::ZeroEvidenceError& ex) {
    std::cerr << "zero evidence: " << ex.what() << "\n";
    return kExitZeroEvidence;
  } catch (const qbayes::IoError& ex) {
    std::cerr << "i/o error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
