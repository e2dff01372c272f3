#include <gtest/gtest.h>

#include "tds/harness.hpp"

using namespace tds;
using namespace tds::harness;

namespace {

nlohmann::json smoke_config() {
  return nlohmann::json{
      {"scenario",
       {{"train_marginal", {{"type", "cube"}, {"dim", 4}}},
        {"test_marginal", {{"type", "cube"}, {"dim", 4}}},
        {"concept", {{"type", "homogeneous_halfspace"}, {"v", {1.0, 0.0, 0.0, 0.0}}}},
        {"train_labels", {{"type", "realizable"}}},
        {"test_labels", {{"type", "realizable"}}}}},
      {"learner",
       {{"id", "moment_matching"},
        {"eps", 0.3},
        {"delta", 0.1},
        {"k", 1},
        {"coef_bound", 2.0},
        {"mode", {{"type", "practical"}, {"delta", 0.08}}}}},
      {"trials", 1},
      {"seed", 7},
      {"n_train", 1500},
      {"n_test", 1500},
      {"n_eval_oracle", 500}};
}

}  // namespace

// Type-level isolation audit: learners can only be handed the labeled
// training set and an unlabeled test set; Dataset carries no label fields.
template <typename T>
concept HasExamples = requires(T t) { t.examples; };
static_assert(!HasExamples<Dataset>);
static_assert(HasExamples<LabeledDataset>);
static_assert(std::is_invocable_r_v<TdsOutcome, learners::TdsLearner, const LabeledDataset&,
                                    const Dataset&, Rng>);
static_assert(!std::is_invocable_v<learners::TdsLearner, const LabeledDataset&,
                                   const LabeledDataset&, Rng>);

TEST(ParseConfig, ValidConfigParses) {
  auto cfg = parse_config(smoke_config());
  EXPECT_EQ(cfg.learner.id, "moment_matching");
  EXPECT_EQ(cfg.trials, 1);
  EXPECT_EQ(cfg.n_train, 1500);
  EXPECT_EQ(cfg.lambda_grid.kind, LambdaGridConfig::Kind::kNone);
}

TEST(ParseConfig, UnknownKeysAreHardErrors) {
  auto j = smoke_config();
  j["typo_key"] = 1;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = smoke_config();
  j["scenario"]["oops"] = 1;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = smoke_config();
  j["learner"]["unknown_param"] = 2;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = smoke_config();
  j["scenario"]["train_marginal"]["width"] = 2;
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(ParseConfig, InvariantViolationsAreConfigErrors) {
  auto j = smoke_config();
  j["scenario"]["train_labels"] = {{"type", "rcn"}, {"eta", 0.5}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = smoke_config();
  j["trials"] = 0;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = smoke_config();
  j["scenario"]["test_marginal"] = {{"type", "gaussian"}, {"dim", 3}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = smoke_config();
  j["learner"]["id"] = "no_such_learner";
  EXPECT_THROW(make_learner(parse_config(j)), ConfigError);
}

TEST(Run, SingleTrialSmokeAcceptsRealizableCube) {
  auto cfg = parse_config(smoke_config());
  auto result = run(cfg);
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_TRUE(result.records[0].accepted);
  ASSERT_TRUE(result.records[0].test_error.has_value());
  EXPECT_LE(*result.records[0].test_error, 0.3);
  EXPECT_EQ(result.summary.at("accept_count").get<long>(), 1);

  // CSV shape: version line with config hash, column header, one row.
  std::istringstream in(result.csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("tds-csv-v1,config=", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, std::string(kCsvColumns));
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  EXPECT_EQ(rows, 1);
}

TEST(Run, ReplayIsByteIdentical) {
  auto j = smoke_config();
  j["trials"] = 4;
  auto cfg = parse_config(j);
  auto a = run(cfg);
  auto b = run(cfg);
  EXPECT_EQ(a.csv, b.csv);
}

TEST(Run, AcceptRateEqualsRowRatioExactly) {
  auto j = smoke_config();
  j["trials"] = 6;
  // Test marginal that sometimes trips the moment gate: mixture of the cube
  // and a vertex point mass.
  j["scenario"]["test_marginal"] = {
      {"type", "mixture"},
      {"components",
       {{{"weight", 0.5}, {"base", {{"type", "cube"}, {"dim", 4}}}},
        {{"weight", 0.5}, {"base", {{"type", "point_mass"}, {"x", {1.0, 1.0, 1.0, 1.0}}}}}}}};
  auto cfg = parse_config(j);
  auto result = run(cfg);
  long accepts = 0;
  for (const auto& r : result.records) {
    if (r.accepted) ++accepts;
  }
  EXPECT_DOUBLE_EQ(result.summary.at("accept_rate").get<double>(),
                   static_cast<double>(accepts) / 6.0);
}

TEST(Run, LambdaGridRecorded) {
  auto j = smoke_config();
  j["lambda_grid"] = {{"type", "concept_pair"}};
  auto cfg = parse_config(j);
  auto result = run(cfg);
  ASSERT_TRUE(result.records[0].grid_lambda.has_value());
  EXPECT_DOUBLE_EQ(*result.records[0].grid_lambda, 0.0);  // realizable, concept in grid
}

TEST(Run, PaperModeUnderflowPropagatesStrictnessError) {
  auto j = smoke_config();
  j["scenario"]["train_marginal"] = {{"type", "gaussian"}, {"dim", 10}};
  j["scenario"]["test_marginal"] = {{"type", "gaussian"}, {"dim", 10}};
  j["scenario"]["concept"] = {
      {"type", "homogeneous_halfspace"},
      {"v", {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}}};
  j["learner"]["k"] = 6;
  j["learner"]["mode"] = {{"type", "paper"}};
  j["n_train"] = 50;
  j["n_test"] = 50;
  j["n_eval_oracle"] = 50;
  auto cfg = parse_config(j);
  EXPECT_THROW(run(cfg), StrictnessInfeasibleError);
}

TEST(Run, AmplifiedLearnerThroughConfig) {
  auto j = smoke_config();
  j["learner"]["amplify_t"] = 4;
  j["n_train"] = 2000;
  j["n_test"] = 2000;
  auto cfg = parse_config(j);
  auto result = run(cfg);
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].branch, "amplified");
}

TEST(Calibrate, TriviallyAcceptingLearnerPicksSmallestGridValue) {
  auto j = smoke_config();
  j["learner"]["mode"] = {{"type", "practical"}, {"delta", 100.0}};  // accepts always
  j["trials"] = 1;  // calibrate raises this to 200
  j["n_train"] = 200;
  j["n_test"] = 100;
  j["n_eval_oracle"] = 50;
  auto cfg = parse_config(j);
  auto cal = calibrate(cfg, "cap_tester_c", {2.0, 4.0, 8.0}, 0.95);
  EXPECT_TRUE(cal.achieved);
  EXPECT_DOUBLE_EQ(cal.chosen, 2.0);
  EXPECT_EQ(cal.report.at("trials_per_point").get<int>(), 200);
}

TEST(Calibrate, ImpossibleTargetReportsBestAndFails) {
  auto j = smoke_config();
  // Point-mass test marginal: the moment gate rejects every trial.
  j["scenario"]["test_marginal"] = {{"type", "point_mass"}, {"x", {1.0, 1.0, 1.0, 1.0}}};
  j["n_train"] = 200;
  j["n_test"] = 100;
  j["n_eval_oracle"] = 50;
  auto cfg = parse_config(j);
  EXPECT_THROW(calibrate(cfg, "cap_tester_c", {2.0, 4.0}, 1.0), ConfigError);
}

TEST(Calibrate, RequiresCompletenessScenario) {
  auto j = smoke_config();
  j["n_train"] = 100;
  j["n_test"] = 100;
  j["n_eval_oracle"] = 50;
  auto cfg = parse_config(j);
  nlohmann::json probe = cfg.scenario.test_marginal;
  auto cal = calibrate(cfg, "c1", {2.0}, 0.0);  // same marginals: fine
  EXPECT_TRUE(cal.achieved);
}

TEST(AggregateCsv, HeaderOnlyGivesEmptyGroup) {
  std::string text = std::string(kCsvVersion) + ",config=0123456789abcdef\n" + kCsvColumns + "\n";
  auto report = aggregate_csv({text});
  ASSERT_EQ(report.groups.size(), 1u);
  EXPECT_EQ(report.groups[0].rows, 0);
  EXPECT_NE(report.table().find("0123456789abcdef"), std::string::npos);
}

TEST(AggregateCsv, MergesByConfigHash) {
  auto j = smoke_config();
  j["trials"] = 2;
  auto cfg = parse_config(j);
  auto a = run(cfg);
  auto b = run(cfg);
  auto report = aggregate_csv({a.csv, b.csv});
  ASSERT_EQ(report.groups.size(), 1u);
  EXPECT_EQ(report.groups[0].rows, 4);

  j["seed"] = 8;  // different config hash
  auto c = run(parse_config(j));
  auto merged = aggregate_csv({a.csv, c.csv});
  EXPECT_EQ(merged.groups.size(), 2u);
  EXPECT_FALSE(merged.gnuplot_columns().empty());
}

TEST(AggregateCsv, MalformedInputsAreErrors) {
  EXPECT_THROW(aggregate_csv({"not a csv\n"}), std::runtime_error);
  std::string bad_header =
      std::string(kCsvVersion) + ",config=0123456789abcdef\ntrial,seed\n";
  EXPECT_THROW(aggregate_csv({bad_header}), std::runtime_error);
  std::string bad_row = std::string(kCsvVersion) + ",config=0123456789abcdef\n" + kCsvColumns +
                        "\n1,2,accept\n";
  EXPECT_THROW(aggregate_csv({bad_row}), std::runtime_error);
}

TEST(ConfigHash, StableAcrossEquivalentConfigsAndSensitiveToChanges) {
  auto cfg_a = parse_config(smoke_config());
  auto cfg_b = parse_config(smoke_config());
  EXPECT_EQ(config_hash(cfg_a), config_hash(cfg_b));
  auto j = smoke_config();
  j["seed"] = 1234;
  EXPECT_NE(config_hash(parse_config(j)), config_hash(cfg_a));
}
