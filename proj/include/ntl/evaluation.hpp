#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/weights.hpp"

namespace ntl {

// Rank-statistic AUC: (concordant pairs + 0.5 * tied pairs) / (P * N).
// Errors when only one class is present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct LadderStep {
  std::string label;                 // display name, e.g. "none" or "+spatial"
  std::vector<std::string> biases;   // accumulated bias names at this step
};

struct LadderConfig {
  std::vector<LadderStep> steps;
  int n_models = 100;
  int folds = 10;
  WeightOptions weight_options;
};

struct LadderStepResult {
  std::string label;
  std::vector<std::string> biases;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
};

struct EvaluationReport {
  std::vector<LadderStepResult> configurations;
  std::uint64_t seed = 0;
  std::string dataset_digest;
};

// For each ladder step: builds the step's WeightSet, runs the randomized
// forest search with stratified CV, and records per-fold and mean validation
// AUC of the best model. Fold assignments depend only on (seed, labels), so
// comparisons across steps are paired. Per-bias weight columns are computed
// once for the union of all steps and recombined per step.
EvaluationReport run_bias_ladder(const LabeledDataset& dataset, const LabeledDataset& reference,
                                 const LadderConfig& ladder, std::uint64_t seed, int threads = 0);

// JSON array [{biases: [...], fold_aucs: [...], mean_auc: ...}].
std::string report_json(const EvaluationReport& report);

// Human-readable fixed-width table.
std::string report_table(const EvaluationReport& report);

}  // namespace ntl
