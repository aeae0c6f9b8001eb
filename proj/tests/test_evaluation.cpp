#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntl/evaluation.hpp"
#include "ntl/features.hpp"
#include "ntl/rng.hpp"
#include "ntl/synthgen.hpp"

namespace {

// Pairwise definition: (concordant + 0.5 * tied) / (P * N). Quadratic, used
// only as an oracle.
double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        num += 1.0;
      } else if (scores[i] == scores[j]) {
        num += 0.5;
      }
    }
  }
  return num / static_cast<double>(pairs);
}

ntl::LabeledDataset prepared_training(const ntl::SynthConfig& cfg, ntl::SynthTruth& truth_out) {
  ntl::SynthPopulation pop = ntl::generate_population(cfg);
  ntl::SynthTrainingSet train = ntl::sample_biased_training(pop, pop.truth, cfg);
  ntl::attach_features(train.dataset, train.series, ntl::default_feature_config(), 0);
  truth_out = pop.truth;
  return train.dataset;
}

}  // namespace

TEST_CASE("roc_auc worked examples") {
  CHECK(ntl::roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
  CHECK(ntl::roc_auc({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}) == 0.0);
  // Pairs: (2>1), (2=2 tie), (3>1), (3>2) -> 3.5 / 4.
  CHECK(ntl::roc_auc({1.0, 2.0, 2.0, 3.0}, {0, 0, 1, 1}) == 0.875);
  CHECK(ntl::roc_auc({1.0, 1.0}, {0, 1}) == 0.5);
  CHECK(ntl::roc_auc({5.0, 5.0, 5.0, 5.0}, {0, 1, 0, 1}) == 0.5);
}

TEST_CASE("roc_auc validates input") {
  CHECK_THROWS_AS(ntl::roc_auc({0.5, 0.6}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ntl::roc_auc({0.5, 0.6}, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(ntl::roc_auc({0.5, 0.6}, {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(ntl::roc_auc({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(ntl::roc_auc({0.5}, {0, 1}), std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ntl::roc_auc({nan, 0.6}, {0, 1}), std::invalid_argument);
}

TEST_CASE("roc_auc matches the pairwise oracle on random tied data") {
  ntl::RngStream rng(61);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 200));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    // Coarse integer grid forces plenty of exact ties.
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.uniform_int(0, 20)) / 4.0;
      labels[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    labels[0] = 0;
    labels[n - 1] = 1;
    const double fast = ntl::roc_auc(scores, labels);
    const double slow = pairwise_auc(scores, labels);
    REQUIRE(std::fabs(fast - slow) <= 1e-12);
    REQUIRE(fast >= 0.0);
    REQUIRE(fast <= 1.0);
  }
}

TEST_CASE("roc_auc is invariant under strictly increasing transforms") {
  ntl::RngStream rng(67);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(5, 80));
    std::vector<double> scores(n), warped(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.uniform_int(-10, 10)) / 2.0;
      warped[i] = std::exp(scores[i] / 3.0) + 5.0;
      labels[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    labels[0] = 0;
    labels[n - 1] = 1;
    CHECK(ntl::roc_auc(scores, labels) == ntl::roc_auc(warped, labels));
  }
}

TEST_CASE("a clean scenario reaches high AUC with no correction") {
  ntl::SynthTruth truth;
  const ntl::LabeledDataset train = prepared_training(ntl::separable_default(), truth);
  REQUIRE(train.has_labels());
  REQUIRE(train.n_features() > 0);

  ntl::LadderConfig ladder;
  ladder.steps = {{"none", {}}};
  ladder.n_models = 12;
  ladder.folds = 5;
  const ntl::EvaluationReport report =
      ntl::run_bias_ladder(train, ntl::LabeledDataset{}, ladder, 2024, 0);
  REQUIRE(report.configurations.size() == 1);
  CHECK(report.configurations[0].label == "none");
  CHECK(report.configurations[0].fold_aucs.size() == 5);
  CHECK(report.configurations[0].mean_auc >= 0.95);
  CHECK(report.seed == 2024);
  CHECK(report.dataset_digest.size() == 16);
}

TEST_CASE("ladder reports are deterministic and shaped as documented") {
  ntl::SynthConfig cfg = ntl::separable_default();
  cfg.population = 1500;
  cfg.target_train = 500;
  ntl::SynthTruth truth;
  const ntl::LabeledDataset train = prepared_training(cfg, truth);

  ntl::LadderConfig ladder;
  ladder.steps = {{"none", {}}, {"+ci", {"class_imbalance"}}};
  ladder.n_models = 4;
  ladder.folds = 4;
  ladder.weight_options.target_priors = std::map<int, double>{
      {0, truth.population_label_prior[0]}, {1, truth.population_label_prior[1]}};

  const ntl::EvaluationReport a =
      ntl::run_bias_ladder(train, ntl::LabeledDataset{}, ladder, 7, 0);
  const ntl::EvaluationReport b =
      ntl::run_bias_ladder(train, ntl::LabeledDataset{}, ladder, 7, 0);
  CHECK(ntl::report_json(a) == ntl::report_json(b));

  REQUIRE(a.configurations.size() == 2);
  for (const ntl::LadderStepResult& step : a.configurations) {
    CHECK(step.fold_aucs.size() == 4);
    double mean = 0.0;
    for (const double v : step.fold_aucs) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      mean += v;
    }
    CHECK(step.mean_auc == doctest::Approx(mean / 4.0).epsilon(1e-12));
  }
  CHECK(a.configurations[1].biases == std::vector<std::string>{"class_imbalance"});

  const nlohmann::json j = nlohmann::json::parse(ntl::report_json(a));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  for (const auto& step : j) {
    CHECK(step.contains("biases"));
    CHECK(step.contains("fold_aucs"));
    CHECK(step.contains("mean_auc"));
  }
  CHECK(j[0]["biases"].size() == 0);
  CHECK(j[1]["biases"][0] == "class_imbalance");

  const std::string table = ntl::report_table(a);
  CHECK(table.find("bias set") != std::string::npos);
  CHECK(table.find("none") != std::string::npos);
  CHECK(table.find("+ci") != std::string::npos);
}

TEST_CASE("ladder validation errors") {
  ntl::SynthConfig cfg = ntl::separable_default();
  cfg.population = 400;
  cfg.target_train = 150;
  ntl::SynthTruth truth;
  ntl::LabeledDataset train = prepared_training(cfg, truth);

  ntl::LadderConfig empty_ladder;
  CHECK_THROWS_AS(ntl::run_bias_ladder(train, ntl::LabeledDataset{}, empty_ladder, 1, 0),
                  ntl::config_error);

  ntl::LadderConfig bad_bias;
  bad_bias.steps = {{"x", {"gravity"}}};
  bad_bias.n_models = 1;
  bad_bias.folds = 2;
  CHECK_THROWS_AS(ntl::run_bias_ladder(train, ntl::LabeledDataset{}, bad_bias, 1, 0),
                  ntl::config_error);

  ntl::LadderConfig ok;
  ok.steps = {{"none", {}}};
  ok.n_models = 1;
  ok.folds = 2;
  ntl::LabeledDataset unlabeled = train;
  unlabeled.labels.clear();
  CHECK_THROWS_AS(ntl::run_bias_ladder(unlabeled, ntl::LabeledDataset{}, ok, 1, 0),
                  ntl::data_error);

  ntl::LabeledDataset featureless = train;
  featureless.x.clear();
  featureless.feature_names.clear();
  CHECK_THROWS_AS(ntl::run_bias_ladder(featureless, ntl::LabeledDataset{}, ok, 1, 0),
                  ntl::data_error);
}
