#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/density.hpp"

namespace ntl {

struct ClassPriorSpec {
  std::map<int, double> train_priors;   // each sums to 1 +- 1e-9, entries > 0
  std::map<int, double> target_priors;
};

struct CategoricalTable {
  std::map<std::string, double> freq;   // category -> relative frequency
};

CategoricalTable categorical_table(const std::vector<std::string>& values);

struct CovariateShiftSpec {
  std::string attribute;
  DensityModel train_model;
  DensityModel reference_model;
  double clip_lo = 0.05;
  double clip_hi = 20.0;
};

// w_i = target_priors[y_i] / train_priors[y_i].
std::vector<double> class_imbalance_weights(const std::vector<int>& labels,
                                            const ClassPriorSpec& spec);

// w_i = clip(reference_density(x_i) / max(train_density(x_i), 1e-300)).
std::vector<double> covariate_shift_weights(const std::vector<double>& values,
                                            const CovariateShiftSpec& spec);

// Categorical variant: density ratio of empirical frequency tables.
std::vector<double> categorical_shift_weights(const std::vector<std::string>& values,
                                              const CategoricalTable& train,
                                              const CategoricalTable& reference,
                                              double clip_lo, double clip_hi);

// Harmonic rule: w_i = k / sum_j (1 / w_{i,j}) over the k bias columns. Row-major matrix.
std::vector<double> combine_weights_harmonic(const std::vector<double>& per_bias,
                                             std::size_t n_biases);

struct WeightOptions {
  double clip_lo = 0.05;
  double clip_hi = 20.0;
  // Overrides the reference-derived class target (reference priors when the
  // reference has labels, else 50/50).
  std::optional<std::map<int, double>> target_priors;
  KdeSearchSpec kde_spec;
  std::uint64_t seed = 0;
  int threads = 0;
};

// Bias names: "class_imbalance", "spatial" (region), "customer_class", or
// "feature:<name>" for per-feature continuous shifts. Every per-bias column
// is clipped, combined by the harmonic rule, and the combined column is normalized to
// mean 1 (the scale is recorded so the harmonic identity stays checkable).
WeightSet build_weight_set(const LabeledDataset& dataset, const LabeledDataset& reference,
                           const std::vector<std::string>& biases, const WeightOptions& options);

// Recomputes the harmonic rule on per_bias and checks combined == harmonic * norm_scale
// bit for bit.
bool weight_set_consistent(const WeightSet& ws);

void write_weights_csv(const std::string& path, const std::vector<std::string>& ids,
                       const WeightSet& ws);

}  // namespace ntl
