#include "qbayes/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "json.hpp"

namespace qbayes {

namespace {

using nlohmann::json;

const std::vector<std::string> kPriorNames = {
    "haar_pure", "plus_product", "counter_inductive", "hs_mixed", "hs_pairwise"};

bool is_particle_prior(const std::string& name) {
  return name == "haar_pure" || name == "hs_mixed" || name == "hs_pairwise";
}

// Shortest round-trip decimal form; keeps emitted files byte-stable.
std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

json matrix_to_json(const Matrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json re_row = json::array(), im_row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re_row.push_back(m(i, j).real());
      im_row.push_back(m(i, j).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

json config_to_json(const ExperimentConfig& cfg) {
  json prior{{"name", cfg.prior.name}};
  if (is_particle_prior(cfg.prior.name)) {
    prior["particles"] = cfg.prior.particles;
    prior["seed"] = cfg.prior.seed;
  }
  json outcomes;
  switch (cfg.outcomes.mode) {
    case OutcomeSpec::Mode::Constant:
      outcomes = {{"mode", "constant"}, {"symbol", cfg.outcomes.symbol}};
      break;
    case OutcomeSpec::Mode::Sampled:
      outcomes = {{"mode", "sampled"},
                  {"true_state", cfg.outcomes.true_state},
                  {"seed", cfg.outcomes.seed}};
      break;
    case OutcomeSpec::Mode::Explicit:
      outcomes = {{"mode", "explicit"}, {"labels", cfg.outcomes.labels}};
      break;
  }
  json resample{{"enabled", cfg.resample.enabled}};
  if (cfg.resample.enabled) {
    resample["threshold"] = cfg.resample.threshold;
    resample["shrink"] = cfg.resample.shrink;
    resample["seed"] = cfg.resample.seed;
  }
  return json{{"prior", std::move(prior)},
              {"povm", {{"name", cfg.povm.name}}},
              {"outcomes", std::move(outcomes)},
              {"iterations", cfg.iterations},
              {"target", cfg.target},
              {"resample", std::move(resample)},
              {"output", {{"csv", cfg.output.csv}, {"json", cfg.output.json}}}};
}

// Pulls a u64 out of a json field, rejecting negatives and fractions.
bool read_u64(const json& j, std::uint64_t& out) {
  if (j.is_number_unsigned()) {
    out = j.get<std::uint64_t>();
    return true;
  }
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    out = static_cast<std::uint64_t>(j.get<std::int64_t>());
    return true;
  }
  return false;
}

}  // namespace

OutcomeStream sample_outcomes(const DensityOperator& true_state, const Povm& povm,
                              std::size_t count, std::uint64_t seed) {
  Eigen::VectorXd p = born_probabilities(true_state, povm);
  std::vector<double> cumulative(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    cumulative[static_cast<std::size_t>(i)] = acc;
  }

  std::mt19937_64 rng(seed);
  OutcomeStream stream;
  stream.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = (rng() >> 11) * 0x1.0p-53 * acc;
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
    stream.labels.push_back(povm.labels()[k]);
  }
  stream.provenance = "sampled(seed=" + std::to_string(seed) + ")";
  return stream;
}

DensityOperator named_state(const std::string& name) {
  if (name == "ket0") return DensityOperator::pure(ket0());
  if (name == "ket1") return DensityOperator::pure(ket1());
  if (name == "ket_plus") return DensityOperator::pure(ket_plus());
  if (name == "rho_m") return maximally_mixed(2);
  if (name == "rho_me") return bell_phi_plus();
  if (name == "rho_mm") return tensor(maximally_mixed(2), maximally_mixed(2));
  throw std::invalid_argument(
      "named_state: unknown name '" + name +
      "' (expected ket0, ket1, ket_plus, rho_m, rho_me, rho_mm)");
}

AnyPrior build_prior(const PriorSpec& spec) {
  if (spec.name == "haar_pure") return haar_pure_ensemble(spec.particles, spec.seed);
  if (spec.name == "plus_product") return plus_product_prior();
  if (spec.name == "counter_inductive") return counter_inductive_prior();
  if (spec.name == "hs_mixed") return hs_mixed_ensemble(spec.particles, spec.seed);
  if (spec.name == "hs_pairwise") return two_qubit_pair_ensemble(spec.particles, spec.seed);
  throw std::invalid_argument("build_prior: unknown prior '" + spec.name + "'");
}

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  auto fail = [&](const std::string& field, const std::string& message) {
    result.errors.push_back({field, message});
  };

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& ex) {
    fail("(root)", std::string("malformed JSON: ") + ex.what());
    return result;
  }
  if (!root.is_object()) {
    fail("(root)", "config must be a JSON object");
    return result;
  }

  ExperimentConfig cfg;

  // prior
  if (!root.contains("prior") || !root["prior"].is_object()) {
    fail("prior", "missing object");
  } else {
    const json& p = root["prior"];
    if (!p.contains("name") || !p["name"].is_string())
      fail("prior.name", "missing string");
    else {
      cfg.prior.name = p["name"].get<std::string>();
      if (std::find(kPriorNames.begin(), kPriorNames.end(), cfg.prior.name) ==
          kPriorNames.end())
        fail("prior.name", "unknown prior '" + cfg.prior.name + "'");
      else if (is_particle_prior(cfg.prior.name)) {
        if (!p.contains("particles") || !p["particles"].is_number_unsigned() ||
            p["particles"].get<std::uint64_t>() == 0)
          fail("prior.particles", "particle priors need particles >= 1");
        else
          cfg.prior.particles = p["particles"].get<std::size_t>();
        if (!p.contains("seed") || !read_u64(p["seed"], cfg.prior.seed))
          fail("prior.seed", "particle priors need an unsigned 64-bit seed");
      }
    }
  }

  // povm
  std::optional<Povm> povm;
  if (!root.contains("povm") || !root["povm"].is_object() ||
      !root["povm"].contains("name") || !root["povm"]["name"].is_string()) {
    fail("povm.name", "missing string");
  } else {
    cfg.povm.name = root["povm"]["name"].get<std::string>();
    try {
      povm = standard_povm(cfg.povm.name);
    } catch (const std::exception& ex) {
      fail("povm.name", ex.what());
    }
  }

  // iterations
  if (!root.contains("iterations") || !root["iterations"].is_number_integer()) {
    fail("iterations", "missing integer");
  } else if (!root["iterations"].is_number_unsigned() ||
             root["iterations"].get<std::uint64_t>() == 0) {
    fail("iterations", "must be >= 1");
  } else {
    cfg.iterations = root["iterations"].get<std::size_t>();
  }

  // outcomes
  if (!root.contains("outcomes") || !root["outcomes"].is_object()) {
    fail("outcomes", "missing object");
  } else {
    const json& o = root["outcomes"];
    const std::string mode = o.value("mode", "");
    if (mode == "constant") {
      cfg.outcomes.mode = OutcomeSpec::Mode::Constant;
      if (!o.contains("symbol") || !o["symbol"].is_string())
        fail("outcomes.symbol", "constant mode needs a symbol string");
      else {
        cfg.outcomes.symbol = o["symbol"].get<std::string>();
        if (povm) {
          try {
            povm->outcome_index(cfg.outcomes.symbol);
          } catch (const std::exception&) {
            fail("outcomes.symbol",
                 "'" + cfg.outcomes.symbol + "' is not an outcome of " + cfg.povm.name);
          }
        }
      }
    } else if (mode == "sampled") {
      cfg.outcomes.mode = OutcomeSpec::Mode::Sampled;
      if (!o.contains("true_state") || !o["true_state"].is_string())
        fail("outcomes.true_state", "sampled mode needs a named state");
      else {
        cfg.outcomes.true_state = o["true_state"].get<std::string>();
        try {
          DensityOperator s = named_state(cfg.outcomes.true_state);
          if (povm && s.dim() != povm->dim())
            fail("outcomes.true_state", "state dimension does not match the POVM");
        } catch (const std::exception& ex) {
          fail("outcomes.true_state", ex.what());
        }
      }
      if (!o.contains("seed") || !read_u64(o["seed"], cfg.outcomes.seed))
        fail("outcomes.seed", "sampled mode needs an unsigned 64-bit seed");
    } else if (mode == "explicit") {
      cfg.outcomes.mode = OutcomeSpec::Mode::Explicit;
      if (!o.contains("labels") || !o["labels"].is_array())
        fail("outcomes.labels", "explicit mode needs a label array");
      else {
        for (const auto& l : o["labels"]) {
          if (!l.is_string()) {
            fail("outcomes.labels", "labels must be strings");
            break;
          }
          cfg.outcomes.labels.push_back(l.get<std::string>());
        }
        if (povm) {
          for (const std::string& l : cfg.outcomes.labels) {
            try {
              povm->outcome_index(l);
            } catch (const std::exception&) {
              fail("outcomes.labels", "'" + l + "' is not an outcome of " + cfg.povm.name);
              break;
            }
          }
        }
        if (cfg.iterations > 0 && cfg.outcomes.labels.size() != cfg.iterations)
          fail("outcomes.labels", "label count must equal iterations");
      }
    } else {
      fail("outcomes.mode", "expected constant, sampled or explicit");
    }
  }

  // target
  if (!root.contains("target") || !root["target"].is_string()) {
    fail("target", "missing named state");
  } else {
    cfg.target = root["target"].get<std::string>();
    try {
      named_state(cfg.target);
    } catch (const std::exception& ex) {
      fail("target", ex.what());
    }
  }

  // resample (optional)
  if (root.contains("resample")) {
    const json& r = root["resample"];
    if (!r.is_object()) {
      fail("resample", "must be an object");
    } else {
      if (r.contains("enabled")) {
        if (r["enabled"].is_boolean())
          cfg.resample.enabled = r["enabled"].get<bool>();
        else
          fail("resample.enabled", "must be a boolean");
      }
      if (r.contains("threshold")) {
        if (!r["threshold"].is_number())
          fail("resample.threshold", "must be a number");
        else {
          cfg.resample.threshold = r["threshold"].get<double>();
          if (!(cfg.resample.threshold > 0.0 && cfg.resample.threshold <= 1.0))
            fail("resample.threshold", "must lie in (0,1]");
        }
      }
      if (r.contains("shrink")) {
        if (!r["shrink"].is_number())
          fail("resample.shrink", "must be a number");
        else {
          cfg.resample.shrink = r["shrink"].get<double>();
          if (!(cfg.resample.shrink > 0.0 && cfg.resample.shrink < 1.0))
            fail("resample.shrink", "must lie in (0,1)");
        }
      }
      if (r.contains("seed") && !read_u64(r["seed"], cfg.resample.seed))
        fail("resample.seed", "must be an unsigned 64-bit integer");
    }
  }

  // output
  if (!root.contains("output") || !root["output"].is_object() ||
      !root["output"].contains("csv") || !root["output"]["csv"].is_string() ||
      !root["output"].contains("json") || !root["output"]["json"].is_string()) {
    fail("output", "needs csv and json path strings");
  } else {
    cfg.output.csv = root["output"]["csv"].get<std::string>();
    cfg.output.json = root["output"]["json"].get<std::string>();
    if (cfg.output.csv.empty()) fail("output.csv", "must not be empty");
    if (cfg.output.json.empty()) fail("output.json", "must not be empty");
  }

  // cross-field compatibility
  if (povm) {
    if (cfg.prior.name == "counter_inductive" && cfg.povm.name != "z_basis")
      fail("povm.name", "counter_inductive requires the z_basis POVM");
    if ((cfg.prior.name == "haar_pure" || cfg.prior.name == "plus_product" ||
         cfg.prior.name == "hs_mixed") &&
        povm->dim() != 2)
      fail("povm.name", "single-qubit priors need a dimension-2 POVM");
    if (cfg.prior.name == "hs_pairwise" && povm->dim() != 4)
      fail("povm.name", "hs_pairwise needs a dimension-4 (pair) POVM");
  }

  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

void emit_results(const ExperimentConfig& cfg, const InferenceResult& result,
                  const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path) {
  {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw IoError("emit_results: cannot open CSV output", csv_path);
    csv << "iter,outcome,pred_prob,td_target,ess,"
           "marg_00_re,marg_01_re,marg_01_im,marg_11_re\n";
    for (const TrajectoryPoint& pt : result.trajectory.steps) {
      const Matrix& m = pt.marginal1.matrix();
      csv << pt.iteration << ',' << pt.outcome << ',' << format_double(pt.predictive_prob)
          << ',' << format_double(pt.td_target) << ',' << format_double(pt.ess) << ','
          << format_double(m(0, 0).real()) << ',' << format_double(m(0, 1).real()) << ','
          << format_double(m(0, 1).imag()) << ',' << format_double(m(1, 1).real()) << '\n';
    }
    if (!csv.good()) throw IoError("emit_results: CSV write failed", csv_path);
  }

  const PriorSequence& final_prior = std::visit(
      [](const auto& p) -> const PriorSequence& { return p; }, result.final_prior);
  DensityOperator marginal1 = final_prior.state_at(1);
  DensityOperator marginal2 = final_prior.state_at(2);

  double td = std::numeric_limits<double>::quiet_NaN();
  if (!cfg.target.empty()) {
    DensityOperator target = named_state(cfg.target);
    td = target.dim() == 2 ? trace_distance(marginal1, target)
                           : trace_distance(marginal2, target);
  }

  json checkpoints = json::array();
  for (const TrajectoryPoint& pt : result.trajectory.steps) {
    if (pt.iteration % kCheckpointEvery != 0 || !pt.marginal2) continue;
    checkpoints.push_back(json{{"iter", pt.iteration},
                               {"td_target", pt.td_target},
                               {"marginal_2", matrix_to_json(pt.marginal2->matrix())}});
  }

  json summary{{"config_echo", config_to_json(cfg)},
               {"checkpoints", std::move(checkpoints)},
               {"final",
                {{"marginal_1", matrix_to_json(marginal1.matrix())},
                 {"marginal_2", matrix_to_json(marginal2.matrix())},
                 {"td_target", td},
                 {"iterations", result.trajectory.steps.size()}}}};

  std::ofstream out(json_path, std::ios::binary);
  if (!out) throw IoError("emit_results: cannot open JSON output", json_path);
  out << summary.dump(2) << '\n';
  if (!out.good()) throw IoError("emit_results: JSON write failed", json_path);
}

RunArtifacts run_experiment(const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir) {
  Povm povm = standard_povm(cfg.povm.name);
  AnyPrior prior = build_prior(cfg.prior);

  std::vector<std::string> labels;
  switch (cfg.outcomes.mode) {
    case OutcomeSpec::Mode::Constant:
      labels.assign(cfg.iterations, cfg.outcomes.symbol);
      break;
    case OutcomeSpec::Mode::Sampled:
      labels = sample_outcomes(named_state(cfg.outcomes.true_state), povm,
                               cfg.iterations, cfg.outcomes.seed)
                   .labels;
      break;
    case OutcomeSpec::Mode::Explicit:
      labels = cfg.outcomes.labels;
      break;
  }

  RunOptions options;
  options.target = named_state(cfg.target);
  options.resample_enabled = cfg.resample.enabled;
  options.ess_threshold = cfg.resample.threshold;
  options.shrink = cfg.resample.shrink;
  options.resample_seed = cfg.resample.seed;
  options.checkpoint_every = kCheckpointEvery;

  InferenceResult result =
      run_inference(std::move(prior), labels, PovmSchedule::constant(povm), options);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("run_experiment: cannot create output directory", out_dir);
  RunArtifacts artifacts{cfg, std::move(result), out_dir / cfg.output.csv,
                         out_dir / cfg.output.json};
  emit_results(cfg, artifacts.result, artifacts.csv_path, artifacts.json_path);
  return artifacts;
}

std::vector<RunArtifacts> preset_three_priors(std::size_t m, std::size_t particles,
                                              std::uint64_t seed,
                                              const std::filesystem::path& out_dir) {
  if (m == 0) throw std::invalid_argument("preset_three_priors: m must be >= 1");

  auto make = [&](const std::string& prior, const std::string& target,
                  const std::string& stem) {
    ExperimentConfig cfg;
    cfg.prior = {prior, particles, seed};
    cfg.povm = {"z_basis"};
    cfg.outcomes.mode = OutcomeSpec::Mode::Constant;
    cfg.outcomes.symbol = "0";
    cfg.iterations = m;
    cfg.target = target;
    cfg.output = {stem + ".csv", stem + ".json"};
    return cfg;
  };

  std::vector<RunArtifacts> artifacts;
  artifacts.push_back(run_experiment(make("haar_pure", "ket0", "three_priors_haar"), out_dir));
  artifacts.push_back(
      run_experiment(make("plus_product", "ket_plus", "three_priors_plus"), out_dir));
  artifacts.push_back(
      run_experiment(make("counter_inductive", "ket1", "three_priors_cip"), out_dir));
  return artifacts;
}

std::vector<RunArtifacts> preset_entanglement(std::size_t pairs, std::size_t particles,
                                              std::uint64_t seed, bool resample,
                                              const std::filesystem::path& out_dir) {
  if (pairs == 0) throw std::invalid_argument("preset_entanglement: pairs must be >= 1");
  if (particles == 0)
    throw std::invalid_argument("preset_entanglement: particles must be >= 1");

  ExperimentConfig cfg_pair;
  cfg_pair.prior = {"hs_pairwise", particles, seed};
  cfg_pair.povm = {"product(sic_qubit,sic_qubit)"};
  cfg_pair.outcomes.mode = OutcomeSpec::Mode::Sampled;
  cfg_pair.outcomes.true_state = "rho_me";
  cfg_pair.outcomes.seed = seed;
  cfg_pair.iterations = pairs;
  cfg_pair.target = "rho_me";
  cfg_pair.resample = {resample, 0.5, 0.98, seed};
  cfg_pair.output = {"entanglement_pairwise.csv", "entanglement_pairwise.json"};

  // The single-system run consumes the identical data, one half-pair at a time.
  Povm pair_povm = standard_povm(cfg_pair.povm.name);
  OutcomeStream pair_stream =
      sample_outcomes(named_state("rho_me"), pair_povm, pairs, seed);
  std::vector<std::string> singles;
  singles.reserve(2 * pairs);
  for (const std::string& label : pair_stream.labels) {
    const auto split = label.find(':');
    singles.push_back(label.substr(0, split));
    singles.push_back(label.substr(split + 1));
  }

  ExperimentConfig cfg_single;
  cfg_single.prior = {"hs_mixed", particles, seed};
  cfg_single.povm = {"sic_qubit"};
  cfg_single.outcomes.mode = OutcomeSpec::Mode::Explicit;
  cfg_single.outcomes.labels = std::move(singles);
  cfg_single.iterations = 2 * pairs;
  cfg_single.target = "rho_m";
  cfg_single.resample = {resample, 0.5, 0.98, seed};
  cfg_single.output = {"entanglement_single.csv", "entanglement_single.json"};

  std::vector<RunArtifacts> artifacts;
  artifacts.push_back(run_experiment(cfg_pair, out_dir));
  artifacts.push_back(run_experiment(cfg_single, out_dir));
  return artifacts;
}

}  // namespace qbayes
