#pragma once

// Experiment harness: JSON-configured scenario x learner batteries with
// seeded, replayable trials, a frozen CSV trial log, a JSON summary,
// constants calibration, and CSV aggregation. Learners receive only the
// labeled training sample and the unlabeled test sample; labeled test data
// exists solely for post-hoc error measurement.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tds/core.hpp"
#include "tds/halfspaces.hpp"
#include "tds/learners.hpp"
#include "tds/moments.hpp"
#include "tds/oracle.hpp"
#include "tds/regression.hpp"
#include "tds/scenarios.hpp"
#include "tds/serialize.hpp"

namespace tds::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration

struct ScenarioConfig {
  scenarios::MarginalSpec train_marginal;
  scenarios::MarginalSpec test_marginal;
  scenarios::ConceptSpec target;
  scenarios::LabelModel train_labels;
  scenarios::LabelModel test_labels;
};

struct LambdaGridConfig {
  enum class Kind { kNone, kHalfspace2d, kTrees, kConceptPair };
  Kind kind = Kind::kNone;
  int directions = 720;
  int offsets = 100;
  double offset_range = 3.0;
  int vars = 4;
};

struct LearnerConfig {
  std::string id;
  double eps = 0.1;
  double delta = 0.1;
  int k = 2;
  double coef_bound = 2.0;
  double eps_prime = -1.0;  // disagreement learner; negative = derive from eps
  learners::StrictnessMode mode = learners::PaperStrictness{};
  Constants constants;
  int amplify_t = 0;  // 0 disables amplification
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  LearnerConfig learner;
  int trials = 1;
  std::uint64_t seed = 0;
  int n_train = 0;
  int n_test = 0;
  int n_eval_oracle = 0;
  LambdaGridConfig lambda_grid;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& context) {
  if (!j.is_object()) throw ConfigError("config: expected an object for " + context);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("config: unknown key '" + key + "' in " + context);
  }
}

template <typename T>
T require(const nlohmann::json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) {
    throw ConfigError("config: missing key '" + std::string(key) + "' in " + context);
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: bad value for '" + std::string(key) + "' in " + context);
  }
}

template <typename T>
T optional_or(const nlohmann::json& j, const char* key, T fallback, const std::string& context) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: bad value for '" + std::string(key) + "' in " + context);
  }
}

}  // namespace detail

inline scenarios::MarginalSpec parse_marginal(const nlohmann::json& j) {
  using namespace scenarios;
  std::string type = detail::require<std::string>(j, "type", "marginal");
  try {
    if (type == "gaussian") {
      detail::check_keys(j, {"type", "dim"}, "gaussian marginal");
      return gaussian(detail::require<int>(j, "dim", "gaussian marginal"));
    }
    if (type == "cube") {
      detail::check_keys(j, {"type", "dim"}, "cube marginal");
      return cube(detail::require<int>(j, "dim", "cube marginal"));
    }
    if (type == "laplace") {
      detail::check_keys(j, {"type", "dim"}, "laplace marginal");
      return laplace_product(detail::require<int>(j, "dim", "laplace marginal"));
    }
    if (type == "student_t") {
      detail::check_keys(j, {"type", "dim", "nu"}, "student_t marginal");
      return student_t_product(detail::require<int>(j, "dim", "student_t marginal"),
                               detail::require<int>(j, "nu", "student_t marginal"));
    }
    if (type == "point_mass") {
      detail::check_keys(j, {"type", "x"}, "point_mass marginal");
      return point_mass(detail::require<Point>(j, "x", "point_mass marginal"));
    }
    if (type == "mean_shift") {
      detail::check_keys(j, {"type", "base", "mu"}, "mean_shift marginal");
      return mean_shift(parse_marginal(j.at("base")),
                        detail::require<std::vector<double>>(j, "mu", "mean_shift marginal"));
    }
    if (type == "cov_scale") {
      detail::check_keys(j, {"type", "base", "scale"}, "cov_scale marginal");
      return cov_scale(parse_marginal(j.at("base")),
                       detail::require<std::vector<double>>(j, "scale", "cov_scale marginal"));
    }
    if (type == "band") {
      detail::check_keys(j, {"type", "base", "v", "width"}, "band marginal");
      return band_conditioned(parse_marginal(j.at("base")),
                              detail::require<std::vector<double>>(j, "v", "band marginal"),
                              detail::require<double>(j, "width", "band marginal"));
    }
    if (type == "mixture") {
      detail::check_keys(j, {"type", "components"}, "mixture marginal");
      std::vector<std::pair<double, MarginalSpec>> comps;
      if (!j.contains("components") || !j.at("components").is_array()) {
        throw ConfigError("config: mixture needs a components array");
      }
      for (const auto& cj : j.at("components")) {
        detail::check_keys(cj, {"weight", "base"}, "mixture component");
        comps.emplace_back(detail::require<double>(cj, "weight", "mixture component"),
                           parse_marginal(cj.at("base")));
      }
      return mixture(std::move(comps));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  throw ConfigError("config: unknown marginal type '" + type + "'");
}

inline scenarios::TreePtr parse_tree(const nlohmann::json& j) {
  if (j.contains("leaf")) {
    detail::check_keys(j, {"leaf"}, "tree leaf");
    int label = detail::require<int>(j, "leaf", "tree leaf");
    if (label != 1 && label != -1) throw ConfigError("config: tree leaf label must be +-1");
    return scenarios::tree_leaf(label);
  }
  detail::check_keys(j, {"var", "neg", "pos"}, "tree node");
  int var = detail::require<int>(j, "var", "tree node");
  if (var < 0) throw ConfigError("config: tree variable index must be >= 0");
  if (!j.contains("neg") || !j.contains("pos")) {
    throw ConfigError("config: tree node needs neg and pos children");
  }
  return scenarios::tree_split(var, parse_tree(j.at("neg")), parse_tree(j.at("pos")));
}

inline scenarios::ConceptSpec parse_concept(const nlohmann::json& j) {
  using namespace scenarios;
  std::string type = detail::require<std::string>(j, "type", "concept");
  try {
    if (type == "homogeneous_halfspace") {
      detail::check_keys(j, {"type", "v"}, "homogeneous_halfspace concept");
      return homogeneous_halfspace_concept(
          detail::require<std::vector<double>>(j, "v", "homogeneous_halfspace concept"));
    }
    if (type == "general_halfspace") {
      detail::check_keys(j, {"type", "v", "tau"}, "general_halfspace concept");
      return general_halfspace_concept(
          detail::require<std::vector<double>>(j, "v", "general_halfspace concept"),
          detail::require<double>(j, "tau", "general_halfspace concept"));
    }
    if (type == "intersection") {
      detail::check_keys(j, {"type", "halfspaces"}, "intersection concept");
      std::vector<GeneralHalfspaceConcept> members;
      if (!j.contains("halfspaces") || !j.at("halfspaces").is_array()) {
        throw ConfigError("config: intersection needs a halfspaces array");
      }
      for (const auto& hj : j.at("halfspaces")) {
        detail::check_keys(hj, {"v", "tau"}, "intersection member");
        members.push_back(GeneralHalfspaceConcept{
            detail::require<std::vector<double>>(hj, "v", "intersection member"),
            detail::require<double>(hj, "tau", "intersection member")});
      }
      return intersection_concept(std::move(members));
    }
    if (type == "decision_tree") {
      detail::check_keys(j, {"type", "tree"}, "decision_tree concept");
      if (!j.contains("tree")) throw ConfigError("config: decision_tree needs a tree");
      return decision_tree_concept(parse_tree(j.at("tree")));
    }
    if (type == "constant") {
      detail::check_keys(j, {"type", "label"}, "constant concept");
      int label = detail::require<int>(j, "label", "constant concept");
      if (label != 1 && label != -1) throw ConfigError("config: constant label must be +-1");
      return constant_concept(label);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  throw ConfigError("config: unknown concept type '" + type + "'");
}

inline scenarios::LabelModel parse_label_model(const nlohmann::json& j) {
  std::string type = detail::require<std::string>(j, "type", "label model");
  try {
    if (type == "realizable") {
      detail::check_keys(j, {"type"}, "realizable labels");
      return scenarios::realizable();
    }
    if (type == "rcn") {
      detail::check_keys(j, {"type", "eta"}, "rcn labels");
      return scenarios::rcn(detail::require<double>(j, "eta", "rcn labels"));
    }
    if (type == "flip_all") {
      detail::check_keys(j, {"type"}, "flip_all labels");
      return scenarios::flip_all();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  throw ConfigError("config: unknown label model '" + type + "'");
}

inline Constants parse_constants(const nlohmann::json& j, Constants base) {
  detail::check_keys(j, {"c1", "c2", "c3", "cap_tester_c", "angle_per_error", "amplification_t"},
                     "constants");
  base.c1 = detail::optional_or<double>(j, "c1", base.c1, "constants");
  base.c2 = detail::optional_or<double>(j, "c2", base.c2, "constants");
  base.c3 = detail::optional_or<double>(j, "c3", base.c3, "constants");
  base.cap_tester_c = detail::optional_or<double>(j, "cap_tester_c", base.cap_tester_c, "constants");
  base.angle_per_error =
      detail::optional_or<double>(j, "angle_per_error", base.angle_per_error, "constants");
  base.amplification_t =
      detail::optional_or<int>(j, "amplification_t", base.amplification_t, "constants");
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return base;
}

inline learners::StrictnessMode parse_mode(const nlohmann::json& j) {
  std::string type = detail::require<std::string>(j, "type", "mode");
  if (type == "paper") {
    detail::check_keys(j, {"type"}, "paper mode");
    return learners::PaperStrictness{};
  }
  if (type == "practical") {
    detail::check_keys(j, {"type", "delta"}, "practical mode");
    double delta = detail::require<double>(j, "delta", "practical mode");
    if (!(delta > 0.0)) throw ConfigError("config: practical delta must be > 0");
    return learners::PracticalStrictness{delta};
  }
  throw ConfigError("config: unknown mode '" + type + "'");
}

inline LambdaGridConfig parse_lambda_grid(const nlohmann::json& j) {
  LambdaGridConfig out;
  std::string type = detail::require<std::string>(j, "type", "lambda_grid");
  if (type == "none") {
    detail::check_keys(j, {"type"}, "lambda_grid");
    out.kind = LambdaGridConfig::Kind::kNone;
    return out;
  }
  if (type == "halfspace_2d") {
    detail::check_keys(j, {"type", "directions", "offsets", "offset_range"}, "lambda_grid");
    out.kind = LambdaGridConfig::Kind::kHalfspace2d;
    out.directions = detail::optional_or<int>(j, "directions", 720, "lambda_grid");
    out.offsets = detail::optional_or<int>(j, "offsets", 100, "lambda_grid");
    out.offset_range = detail::optional_or<double>(j, "offset_range", 3.0, "lambda_grid");
    if (out.directions < 1 || out.offsets < 1) {
      throw ConfigError("config: lambda grid must be nonempty");
    }
    return out;
  }
  if (type == "trees") {
    detail::check_keys(j, {"type", "vars"}, "lambda_grid");
    out.kind = LambdaGridConfig::Kind::kTrees;
    out.vars = detail::optional_or<int>(j, "vars", 4, "lambda_grid");
    if (out.vars < 1 || out.vars > 5) {
      throw ConfigError("config: tree lambda grid supports 1..5 variables");
    }
    return out;
  }
  if (type == "concept_pair") {
    detail::check_keys(j, {"type"}, "lambda_grid");
    out.kind = LambdaGridConfig::Kind::kConceptPair;
    return out;
  }
  throw ConfigError("config: unknown lambda_grid type '" + type + "'");
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"scenario", "learner", "trials", "seed", "n_train", "n_test",
                      "n_eval_oracle", "lambda_grid"},
                     "experiment");
  if (!j.contains("scenario") || !j.contains("learner")) {
    throw ConfigError("config: scenario and learner are required");
  }
  ExperimentConfig cfg;

  const auto& sj = j.at("scenario");
  detail::check_keys(
      sj, {"train_marginal", "test_marginal", "concept", "train_labels", "test_labels"},
      "scenario");
  for (const char* key : {"train_marginal", "test_marginal", "concept"}) {
    if (!sj.contains(key)) {
      throw ConfigError("config: scenario missing '" + std::string(key) + "'");
    }
  }
  cfg.scenario.train_marginal = parse_marginal(sj.at("train_marginal"));
  cfg.scenario.test_marginal = parse_marginal(sj.at("test_marginal"));
  cfg.scenario.target = parse_concept(sj.at("concept"));
  cfg.scenario.train_labels = sj.contains("train_labels")
                                  ? parse_label_model(sj.at("train_labels"))
                                  : scenarios::realizable();
  cfg.scenario.test_labels = sj.contains("test_labels") ? parse_label_model(sj.at("test_labels"))
                                                        : scenarios::realizable();

  const auto& lj = j.at("learner");
  detail::check_keys(lj,
                     {"id", "eps", "delta", "k", "coef_bound", "eps_prime", "mode", "constants",
                      "amplify_t"},
                     "learner");
  cfg.learner.id = detail::require<std::string>(lj, "id", "learner");
  cfg.learner.eps = detail::optional_or<double>(lj, "eps", 0.1, "learner");
  cfg.learner.delta = detail::optional_or<double>(lj, "delta", 0.1, "learner");
  cfg.learner.k = detail::optional_or<int>(lj, "k", 2, "learner");
  cfg.learner.coef_bound = detail::optional_or<double>(lj, "coef_bound", 2.0, "learner");
  cfg.learner.eps_prime = detail::optional_or<double>(lj, "eps_prime", -1.0, "learner");
  if (lj.contains("mode")) cfg.learner.mode = parse_mode(lj.at("mode"));
  if (lj.contains("constants")) {
    cfg.learner.constants = parse_constants(lj.at("constants"), Constants{});
  }
  cfg.learner.amplify_t = detail::optional_or<int>(lj, "amplify_t", 0, "learner");
  if (cfg.learner.amplify_t != 0 &&
      (cfg.learner.amplify_t < 2 || cfg.learner.amplify_t % 2 != 0)) {
    throw ConfigError("config: amplify_t must be 0 or a positive even integer");
  }

  cfg.trials = detail::require<int>(j, "trials", "experiment");
  if (cfg.trials < 1) throw ConfigError("config: trials must be >= 1");
  cfg.seed = detail::require<std::uint64_t>(j, "seed", "experiment");
  cfg.n_train = detail::require<int>(j, "n_train", "experiment");
  cfg.n_test = detail::require<int>(j, "n_test", "experiment");
  cfg.n_eval_oracle = detail::require<int>(j, "n_eval_oracle", "experiment");
  if (cfg.n_train < 1 || cfg.n_test < 1 || cfg.n_eval_oracle < 1) {
    throw ConfigError("config: sample sizes must be >= 1");
  }
  if (j.contains("lambda_grid")) cfg.lambda_grid = parse_lambda_grid(j.at("lambda_grid"));

  int train_dim = scenarios::marginal_dim(cfg.scenario.train_marginal);
  int test_dim = scenarios::marginal_dim(cfg.scenario.test_marginal);
  if (train_dim != test_dim) {
    throw ConfigError("config: train and test marginals have different dimensions");
  }
  if (cfg.lambda_grid.kind == LambdaGridConfig::Kind::kHalfspace2d && train_dim != 2) {
    throw ConfigError("config: halfspace_2d lambda grid needs dimension 2");
  }
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json lj{{"id", cfg.learner.id},
                    {"eps", cfg.learner.eps},
                    {"delta", cfg.learner.delta},
                    {"k", cfg.learner.k},
                    {"coef_bound", cfg.learner.coef_bound},
                    {"amplify_t", cfg.learner.amplify_t}};
  if (cfg.learner.eps_prime >= 0.0) lj["eps_prime"] = cfg.learner.eps_prime;
  if (std::holds_alternative<learners::PaperStrictness>(cfg.learner.mode)) {
    lj["mode"] = {{"type", "paper"}};
  } else {
    lj["mode"] = {{"type", "practical"},
                  {"delta", std::get<learners::PracticalStrictness>(cfg.learner.mode).delta}};
  }
  lj["constants"] = {{"c1", cfg.learner.constants.c1},
                     {"c2", cfg.learner.constants.c2},
                     {"c3", cfg.learner.constants.c3},
                     {"cap_tester_c", cfg.learner.constants.cap_tester_c},
                     {"angle_per_error", cfg.learner.constants.angle_per_error},
                     {"amplification_t", cfg.learner.constants.amplification_t}};
  nlohmann::json grid;
  switch (cfg.lambda_grid.kind) {
    case LambdaGridConfig::Kind::kNone:
      grid = {{"type", "none"}};
      break;
    case LambdaGridConfig::Kind::kHalfspace2d:
      grid = {{"type", "halfspace_2d"},
              {"directions", cfg.lambda_grid.directions},
              {"offsets", cfg.lambda_grid.offsets},
              {"offset_range", cfg.lambda_grid.offset_range}};
      break;
    case LambdaGridConfig::Kind::kTrees:
      grid = {{"type", "trees"}, {"vars", cfg.lambda_grid.vars}};
      break;
    case LambdaGridConfig::Kind::kConceptPair:
      grid = {{"type", "concept_pair"}};
      break;
  }
  return nlohmann::json{{"scenario",
                         {{"train_marginal", cfg.scenario.train_marginal},
                          {"test_marginal", cfg.scenario.test_marginal},
                          {"concept", cfg.scenario.target},
                          {"train_labels", cfg.scenario.train_labels},
                          {"test_labels", cfg.scenario.test_labels}}},
                        {"learner", lj},
                        {"trials", cfg.trials},
                        {"seed", cfg.seed},
                        {"n_train", cfg.n_train},
                        {"n_test", cfg.n_test},
                        {"n_eval_oracle", cfg.n_eval_oracle},
                        {"lambda_grid", grid}};
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  std::string dump = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Learner dispatch

inline moments::ReferenceMarginal reference_for(const scenarios::MarginalSpec& spec) {
  if (const auto* g = std::get_if<scenarios::GaussianMarginal>(&spec.node)) {
    return moments::StandardGaussian{g->dim};
  }
  if (const auto* c = std::get_if<scenarios::CubeMarginal>(&spec.node)) {
    return moments::UniformHypercube{c->dim};
  }
  throw ConfigError("config: moment-based learners need a gaussian or cube training marginal");
}

inline learners::TdsLearner make_learner(const ExperimentConfig& cfg) {
  const LearnerConfig& lc = cfg.learner;
  learners::TdsLearner base;
  if (lc.id == "moment_matching") {
    auto reference = reference_for(cfg.scenario.train_marginal);
    base = [reference, lc](const LabeledDataset& s, const Dataset& x, Rng rng) {
      return learners::tds_moment_matching(s, x, reference, lc.k, lc.coef_bound, lc.eps, lc.delta,
                                           lc.mode, rng);
    };
  } else if (lc.id == "homogeneous_realizable") {
    base = [lc](const LabeledDataset& s, const Dataset& x, Rng rng) {
      return halfspaces::tds_homogeneous_realizable(s, x, lc.eps, rng);
    };
  } else if (lc.id == "homogeneous_agnostic") {
    base = [lc](const LabeledDataset& s, const Dataset& x, Rng rng) {
      return halfspaces::tds_homogeneous_agnostic(s, x, lc.eps, lc.delta, lc.constants, rng);
    };
  } else if (lc.id == "general_halfspace") {
    base = [lc](const LabeledDataset& s, const Dataset& x, Rng rng) {
      return halfspaces::tds_general_halfspace(s, x, lc.eps, lc.constants, rng);
    };
  } else if (lc.id == "disagreement_homogeneous") {
    double eps_prime = lc.eps_prime >= 0.0
                           ? lc.eps_prime
                           : learners::homogeneous_disagreement_eps_prime(lc.eps);
    base = [lc, eps_prime](const LabeledDataset& s, const Dataset& x, Rng rng) {
      auto erm = learners::homogeneous_erm_oracle(rng.substream(1));
      auto member = learners::gaussian_homogeneous_membership();
      return learners::tds_disagreement(s, x, lc.eps, eps_prime, erm, member, rng.substream(2));
    };
  } else {
    throw ConfigError("config: unknown learner id '" + lc.id + "'");
  }
  if (lc.amplify_t >= 2) return learners::amplify(std::move(base), lc.amplify_t);
  return base;
}

// ---------------------------------------------------------------------------
// Trials

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  bool accepted = false;
  std::string branch;
  std::optional<double> test_error;  // present iff accepted
  std::optional<double> grid_lambda;
  std::optional<double> train_error;
  std::optional<double> worst_moment_gap;
  std::optional<double> band_fraction;
  std::optional<double> moment_delta;
  std::optional<double> theta;
  std::optional<double> eps_hat;
  double wall_ms = 0.0;  // not part of the frozen CSV
};

inline constexpr const char* kCsvVersion = "tds-csv-v1";
inline constexpr const char* kCsvColumns =
    "trial,seed,verdict,branch,test_error,grid_lambda,train_error,worst_moment_gap,"
    "band_fraction,moment_delta,theta,eps_hat";

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v.has_value() ? format_number(*v) : std::string();
}

inline std::optional<double> diag_value(const Diagnostics& d, const char* key) {
  if (!d.has(key)) return std::nullopt;
  return d.at(key);
}

}  // namespace detail

struct RunResult {
  std::vector<TrialRecord> records;
  std::string csv;
  nlohmann::json summary;
};

namespace detail {

inline std::vector<scenarios::Classifier> build_lambda_grid(const ExperimentConfig& cfg) {
  switch (cfg.lambda_grid.kind) {
    case LambdaGridConfig::Kind::kNone:
      return {};
    case LambdaGridConfig::Kind::kHalfspace2d:
      return scenarios::halfspace_grid_2d(cfg.lambda_grid.directions, cfg.lambda_grid.offsets,
                                          cfg.lambda_grid.offset_range);
    case LambdaGridConfig::Kind::kTrees:
      return scenarios::tree_grid_depth2(cfg.lambda_grid.vars);
    case LambdaGridConfig::Kind::kConceptPair:
      return scenarios::concept_pair_grid(cfg.scenario.target);
  }
  return {};
}

inline TrialRecord run_trial(const ExperimentConfig& cfg, const learners::TdsLearner& learner,
                             const std::vector<scenarios::Classifier>& lambda_grid, int trial) {
  auto start = std::chrono::steady_clock::now();
  Rng root(cfg.seed);
  Rng t = root.substream(static_cast<std::uint64_t>(trial));

  Dataset train_pts =
      scenarios::sample_marginal(cfg.scenario.train_marginal, cfg.n_train, t.substream(0));
  LabeledDataset s_train =
      scenarios::label(cfg.scenario.target, cfg.scenario.train_labels, train_pts, t.substream(1));
  Dataset x_test = scenarios::sample_marginal(cfg.scenario.test_marginal, cfg.n_test, t.substream(2));
  Dataset eval_pts =
      scenarios::sample_marginal(cfg.scenario.test_marginal, cfg.n_eval_oracle, t.substream(3));
  LabeledDataset s_eval =
      scenarios::label(cfg.scenario.target, cfg.scenario.test_labels, eval_pts, t.substream(4));

  TdsOutcome outcome = learner(s_train, x_test, t.substream(5));

  TrialRecord rec;
  rec.trial = trial;
  rec.seed = cfg.seed;
  rec.accepted = outcome.accepted();
  rec.branch = outcome.diagnostics.branch;
  if (outcome.accepted()) {
    rec.test_error = empirical_error(*outcome.hypothesis, s_eval);
  }
  if (!lambda_grid.empty()) {
    rec.grid_lambda = scenarios::lambda_oracle(lambda_grid, s_train, s_eval);
  }
  rec.train_error = diag_value(outcome.diagnostics, "train_error");
  rec.worst_moment_gap = diag_value(outcome.diagnostics, "worst_moment_gap");
  rec.band_fraction = diag_value(outcome.diagnostics, "band_fraction");
  rec.moment_delta = diag_value(outcome.diagnostics, "moment_delta");
  if (!rec.moment_delta) rec.moment_delta = diag_value(outcome.diagnostics, "delta");
  rec.theta = diag_value(outcome.diagnostics, "theta");
  rec.eps_hat = diag_value(outcome.diagnostics, "eps_hat");
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
  return rec;
}

inline int worker_count(int trials) {
  unsigned hw = std::thread::hardware_concurrency();
  int workers = hw == 0 ? 1 : static_cast<int>(hw);
  if (const char* env = std::getenv("TDS_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) workers = std::min(workers, cap);
  }
  return std::min(workers, trials);
}

}  // namespace detail

// Executes the battery. Trials run in a worker pool but are logged in trial
// order; identical configs and seeds produce byte-identical CSV text.
inline RunResult run(const ExperimentConfig& cfg) {
  learners::TdsLearner learner = make_learner(cfg);
  auto lambda_grid = detail::build_lambda_grid(cfg);

  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  int workers = detail::worker_count(cfg.trials);
  auto work = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= cfg.trials) break;
      try {
        records[static_cast<std::size_t>(i)] = detail::run_trial(cfg, learner, lambda_grid, i);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  RunResult result;
  result.records = std::move(records);

  std::ostringstream csv;
  csv << kCsvVersion << ",config=" << config_hash(cfg) << "\n" << kCsvColumns << "\n";
  for (const auto& r : result.records) {
    csv << r.trial << ',' << r.seed << ',' << (r.accepted ? "accept" : "reject") << ','
        << r.branch << ',' << detail::format_optional(r.test_error) << ','
        << detail::format_optional(r.grid_lambda) << ','
        << detail::format_optional(r.train_error) << ','
        << detail::format_optional(r.worst_moment_gap) << ','
        << detail::format_optional(r.band_fraction) << ','
        << detail::format_optional(r.moment_delta) << ',' << detail::format_optional(r.theta)
        << ',' << detail::format_optional(r.eps_hat) << "\n";
  }
  result.csv = csv.str();

  long accepts = 0;
  double err_sum = 0.0;
  std::vector<double> errs;
  double lambda_sum = 0.0;
  long lambda_count = 0;
  double wall_total = 0.0;
  for (const auto& r : result.records) {
    if (r.accepted) {
      ++accepts;
      if (r.test_error) {
        err_sum += *r.test_error;
        errs.push_back(*r.test_error);
      }
    }
    if (r.grid_lambda) {
      lambda_sum += *r.grid_lambda;
      ++lambda_count;
    }
    wall_total += r.wall_ms;
  }
  std::sort(errs.begin(), errs.end());
  nlohmann::json summary{
      {"config_hash", config_hash(cfg)},
      {"learner", cfg.learner.id},
      {"mode", std::holds_alternative<learners::PaperStrictness>(cfg.learner.mode) ? "paper"
                                                                                   : "practical"},
      {"trials", cfg.trials},
      {"accept_count", accepts},
      {"accept_rate", static_cast<double>(accepts) / static_cast<double>(cfg.trials)},
      {"total_wall_ms", wall_total}};
  if (!errs.empty()) {
    summary["mean_test_error_on_accept"] = err_sum / static_cast<double>(errs.size());
    std::size_t q95 = static_cast<std::size_t>(0.95 * static_cast<double>(errs.size() - 1));
    summary["q95_test_error_on_accept"] = errs[q95];
  }
  if (lambda_count > 0) {
    summary["grid_lambda_mean"] = lambda_sum / static_cast<double>(lambda_count);
  }
  result.summary = std::move(summary);
  return result;
}

// ---------------------------------------------------------------------------
// Calibration
//
// Finds the smallest grid value of one named constant achieving the target
// accept rate on a completeness scenario (test marginal equal to the train
// marginal), over at least 200 trials per grid point.

struct CalibrationResult {
  bool achieved = false;
  double chosen = 0.0;
  Constants constants;
  nlohmann::json report;
};

inline CalibrationResult calibrate(ExperimentConfig cfg, const std::string& constant_name,
                                   std::vector<double> grid, double target_accept_rate) {
  if (grid.empty()) throw ConfigError("calibrate: empty grid");
  nlohmann::json train_j = cfg.scenario.train_marginal;
  nlohmann::json test_j = cfg.scenario.test_marginal;
  if (train_j.dump() != test_j.dump()) {
    throw ConfigError("calibrate: completeness scenarios need test marginal == train marginal");
  }
  cfg.trials = std::max(cfg.trials, 200);
  std::sort(grid.begin(), grid.end());

  auto apply = [&](Constants base, double value) {
    if (constant_name == "c1") {
      base.c1 = value;
    } else if (constant_name == "c2") {
      base.c2 = value;
    } else if (constant_name == "c3") {
      base.c3 = value;
    } else if (constant_name == "cap_tester_c") {
      base.cap_tester_c = value;
    } else if (constant_name == "angle_per_error") {
      base.angle_per_error = value;
    } else if (constant_name == "amplification_t") {
      base.amplification_t = static_cast<int>(value);
    } else {
      throw ConfigError("calibrate: unknown constant '" + constant_name + "'");
    }
    return base;
  };

  CalibrationResult out;
  out.report = nlohmann::json{{"constant", constant_name},
                              {"target_accept_rate", target_accept_rate},
                              {"trials_per_point", cfg.trials},
                              {"points", nlohmann::json::array()}};
  double best_rate = -1.0;
  double best_value = grid.front();
  for (double value : grid) {
    ExperimentConfig candidate = cfg;
    candidate.learner.constants = apply(cfg.learner.constants, value);
    RunResult r = run(candidate);
    double rate = r.summary.at("accept_rate").get<double>();
    out.report["points"].push_back(nlohmann::json{{"value", value}, {"accept_rate", rate}});
    if (rate > best_rate) {
      best_rate = rate;
      best_value = value;
    }
    if (!out.achieved && rate >= target_accept_rate) {
      out.achieved = true;
      out.chosen = value;
      out.constants = candidate.learner.constants;
    }
  }
  if (!out.achieved) {
    out.chosen = best_value;
    out.constants = apply(cfg.learner.constants, best_value);
    out.report["failure"] = "no grid point achieved the target accept rate";
  }
  out.report["chosen"] = out.chosen;
  out.report["achieved"] = out.achieved;
  out.report["constants"] = {{"c1", out.constants.c1},
                             {"c2", out.constants.c2},
                             {"c3", out.constants.c3},
                             {"cap_tester_c", out.constants.cap_tester_c},
                             {"angle_per_error", out.constants.angle_per_error},
                             {"amplification_t", out.constants.amplification_t}};
  return out;
}

// ---------------------------------------------------------------------------
// Report aggregation

struct ReportGroup {
  std::string config_hash;
  long rows = 0;
  long accepts = 0;
  double err_sum = 0.0;
  std::vector<double> errs;
  double lambda_sum = 0.0;
  long lambda_count = 0;
};

struct Report {
  std::vector<ReportGroup> groups;  // keyed and ordered by config hash

  std::string table() const {
    std::ostringstream out;
    out << "config_hash       trials accept_rate mean_err_on_accept q95_err_on_accept "
           "grid_lambda_mean\n";
    for (const auto& g : groups) {
      double rate = g.rows == 0 ? 0.0 : static_cast<double>(g.accepts) / g.rows;
      out << g.config_hash << ' ' << g.rows << ' ' << detail::format_number(rate) << ' ';
      if (!g.errs.empty()) {
        std::vector<double> sorted = g.errs;
        std::sort(sorted.begin(), sorted.end());
        std::size_t q95 = static_cast<std::size_t>(0.95 * static_cast<double>(sorted.size() - 1));
        out << detail::format_number(g.err_sum / static_cast<double>(sorted.size())) << ' '
            << detail::format_number(sorted[q95]) << ' ';
      } else {
        out << "- - ";
      }
      if (g.lambda_count > 0) {
        out << detail::format_number(g.lambda_sum / static_cast<double>(g.lambda_count));
      } else {
        out << '-';
      }
      out << '\n';
    }
    return out.str();
  }

  // Whitespace-separated columns for plotting tools.
  std::string gnuplot_columns() const {
    std::ostringstream out;
    out << "# config_hash trials accept_rate mean_err q95_err lambda_mean\n";
    for (const auto& g : groups) {
      double rate = g.rows == 0 ? 0.0 : static_cast<double>(g.accepts) / g.rows;
      std::vector<double> sorted = g.errs;
      std::sort(sorted.begin(), sorted.end());
      double mean_err =
          sorted.empty() ? std::nan("") : g.err_sum / static_cast<double>(sorted.size());
      double q95 =
          sorted.empty()
              ? std::nan("")
              : sorted[static_cast<std::size_t>(0.95 * static_cast<double>(sorted.size() - 1))];
      double lmean = g.lambda_count == 0 ? std::nan("")
                                         : g.lambda_sum / static_cast<double>(g.lambda_count);
      out << g.config_hash << ' ' << g.rows << ' ' << detail::format_number(rate) << ' '
          << detail::format_number(mean_err) << ' ' << detail::format_number(q95) << ' '
          << detail::format_number(lmean) << '\n';
    }
    return out.str();
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace detail

// Merges trial CSVs, grouping rows by the config hash embedded in the
// version line. Schema mismatches are hard errors.
inline Report aggregate_csv(const std::vector<std::string>& csv_texts) {
  std::map<std::string, ReportGroup> groups;
  for (const auto& text : csv_texts) {
    std::istringstream in(text);
    std::string version_line;
    std::string header_line;
    if (!std::getline(in, version_line) || !std::getline(in, header_line)) {
      throw std::runtime_error("report: malformed CSV (missing header lines)");
    }
    if (!version_line.empty() && version_line.back() == '\r') version_line.pop_back();
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    const std::string prefix = std::string(kCsvVersion) + ",config=";
    if (version_line.rfind(prefix, 0) != 0 || version_line.size() != prefix.size() + 16) {
      throw std::runtime_error("report: unsupported CSV version line");
    }
    if (header_line != kCsvColumns) {
      throw std::runtime_error("report: CSV column schema mismatch");
    }
    std::string hash = version_line.substr(prefix.size());
    ReportGroup& g = groups[hash];
    g.config_hash = hash;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
      auto fields = detail::split_csv_line(line);
      if (fields.size() != 12) throw std::runtime_error("report: malformed CSV row");
      ++g.rows;
      if (fields[2] == "accept") {
        ++g.accepts;
        if (!fields[4].empty()) {
          double err = std::stod(fields[4]);
          g.err_sum += err;
          g.errs.push_back(err);
        }
      } else if (fields[2] != "reject") {
        throw std::runtime_error("report: malformed verdict field");
      }
      if (!fields[5].empty()) {
        g.lambda_sum += std::stod(fields[5]);
        ++g.lambda_count;
      }
    }
  }
  Report out;
  for (auto& [hash, group] : groups) out.groups.push_back(std::move(group));
  return out;
}

}  // namespace tds::harness
