#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/rng.hpp"

namespace ntl {

enum class Criterion { gini, entropy };

const char* criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& name);

struct ForestParams {
  int max_leaves = 32;         // [2, 1000)
  int max_depth = 10;          // [1, 50)
  Criterion criterion = Criterion::gini;
  int min_samples_leaf = 1;    // [1, 1000), unweighted example counts
  int min_samples_split = 2;   // [2, 50), unweighted example counts
  int n_estimators = 20;
  // Default: bootstrap resamples indices proportionally to weights and the
  // drawn copies carry unit weight (pure resampling; avoids double counting).
  // When disabled, a uniform bootstrap keeps sample weights in the split
  // criterion instead.
  bool weighted_bootstrap = true;
};

void validate_forest_params(const ForestParams& params);

struct TreeNode {
  int feature = -1;            // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double p0 = 0.0;             // leaf class probabilities, sum to 1
  double p1 = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at index 0
  int leaf_count = 0;
  int depth = 0;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestParams params;
  std::size_t feature_count = 0;
};

// Column-major view used by the induction code; built once per dataset.
struct ColMatrix {
  std::vector<double> data;    // n_cols blocks of n_rows values
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  double at(std::size_t row, std::size_t col) const { return data[col * n_rows + row]; }
};

ColMatrix to_col_major(const std::vector<double>& row_major, std::size_t n, std::size_t d);

double weighted_impurity(double w0, double w1, Criterion criterion);

// Greedy best-first induction: the frontier leaf with the largest weighted
// impurity decrease splits first; per-node candidate features are a random
// sqrt-d subset; thresholds are midpoints between consecutive distinct sorted
// values; ties break toward the lowest feature index, then lowest threshold.
Tree fit_tree(const ColMatrix& X, const std::vector<int>& rows, const std::vector<int>& y,
              const std::vector<double>& w, const ForestParams& params, RngStream& rng);

ForestModel fit_forest(const std::vector<double>& x_row_major, std::size_t n, std::size_t d,
                       const std::vector<int>& y, const std::vector<double>& w,
                       const ForestParams& params, std::uint64_t seed, int threads);

// Internal entry point shared with random_search: fits on a row subset of a
// prebuilt column-major matrix. w has one entry per rows entry.
ForestModel fit_forest_rows(const ColMatrix& X, const std::vector<int>& rows,
                            const std::vector<int>& y, const std::vector<double>& w,
                            const ForestParams& params, std::uint64_t seed, int threads);

double predict_tree(const Tree& tree, const double* x);
double predict_forest(const ForestModel& model, const double* x);
double predict_forest_col(const ForestModel& model, const ColMatrix& X, std::size_t row);

struct SearchModelResult {
  ForestParams params;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
};

struct SearchResult {
  int best_index = -1;
  ForestParams best_params;
  std::vector<double> best_fold_aucs;
  double best_mean_auc = 0.0;
  std::vector<SearchModelResult> models;
};

// Stratified fold ids depend only on (seed, labels): per class, indices are
// shuffled and dealt round-robin. Errors when a class has fewer examples
// than folds (some fold would lack that class).
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

// Samples n_models parameter sets uniformly from the documented ranges, scores
// each by stratified k-fold CV AUC of a 20-tree weighted forest, and returns
// the best by mean AUC (ties keep the lowest model index). fold_ids may be
// empty (derived from (seed, labels)) or supplied for paired comparisons.
SearchResult random_search(const std::vector<double>& x_row_major, std::size_t n, std::size_t d,
                           const std::vector<int>& y, const std::vector<double>& w, int n_models,
                           int folds, std::uint64_t seed, int threads,
                           const std::vector<int>& fold_ids = {});

ForestParams sample_forest_params(RngStream& rng);

std::string model_json(const ForestModel& model);
void write_search_csv(const std::string& path, const SearchResult& result);

}  // namespace ntl
