#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntl/core.hpp"

namespace ntl {

// Generative model: consumption = seasonal baseline x class scale x lognormal
// noise; NTL customers multiply months >= onset by (1 - depth) unless they
// fall in the undetectable share; inspection probability is log-linear in
// region, customer class, log mean consumption, and the true label.
struct SynthConfig {
  std::size_t population = 20000;
  std::vector<double> region_mix;          // sums to 1, entries > 0
  std::vector<double> class_mix;
  std::vector<std::vector<double>> base_rate;  // NTL rate per (region, class), in (0,1)
  double base_level = 100.0;
  std::vector<double> class_scale;         // per class, > 0
  std::vector<double> amp;                 // per region, in [0, 1)
  std::vector<double> phase;               // per region, months
  std::vector<double> sigma_region;        // lognormal noise scale, >= 0
  std::vector<double> sigma_class;
  std::vector<double> depth_region;        // consumption-drop depth in [0, 1)
  std::vector<double> depth_class;
  std::vector<double> undetect_region;     // share of positives with no drop, [0, 1]
  int onset = 12;                          // first affected month, [0, 24)
  std::vector<double> sel_region;          // log-linear selection coefficients
  std::vector<double> sel_class;
  double gamma = 0.0;                      // coefficient on log mean consumption
  double delta = 0.0;                      // coefficient on the true label
  double target_train = 2400.0;            // expected selected-set size
  std::uint64_t seed = 0;

  std::size_t n_regions() const { return region_mix.size(); }
  std::size_t n_classes() const { return class_mix.size(); }
};

// Reference scenario: strong class imbalance (8% base rate selected up to
// ~35% positives), 4:1 region skew, 3:1 customer-class skew.
SynthConfig ntl_default();

// Clean sanity scenario: unbiased selection, low noise, strong drop signal;
// a forest search should reach AUC >= 0.95 on it.
SynthConfig separable_default();

void validate_synth_config(const SynthConfig& cfg);

struct SynthTruth {
  std::vector<double> selection_prob;      // per customer, in (0, 1]
  std::vector<int> label;                  // true label for every customer
  std::vector<int> region_idx;
  std::vector<int> class_idx;
  std::vector<double> population_region_prior;
  std::vector<double> population_class_prior;
  std::vector<double> population_label_prior;   // index = label
  std::vector<double> training_region_prior;    // filled by sample_biased_training
  std::vector<double> training_class_prior;
  std::vector<double> training_label_prior;
};

struct SynthPopulation {
  LabeledDataset dataset;                  // unlabeled (labels live in truth)
  std::vector<MonthlyTimeSeries> series;
  SynthTruth truth;
};

// Deterministic given (config, seed): per-customer RNG substreams with a
// fixed draw order (region, class, label, undetectable flag, 24 noise
// variates), so generation parallelizes without affecting output.
SynthPopulation generate_population(const SynthConfig& cfg, int threads = 0);

struct SynthTrainingSet {
  LabeledDataset dataset;                  // labeled
  std::vector<MonthlyTimeSeries> series;
  std::vector<std::size_t> selected_ids;   // indices into the population
};

// Includes customer i with probability truth.selection_prob[i]; reveals
// labels only for selected customers; fills truth's training priors.
SynthTrainingSet sample_biased_training(const SynthPopulation& population, SynthTruth& truth,
                                        const SynthConfig& cfg);

// w_i proportional to 1 / selection_prob(i), normalized to mean 1 over the
// selected set.
std::vector<double> oracle_weights(const SynthTruth& truth,
                                   const std::vector<std::size_t>& selected_ids);

void write_truth_csv(const std::string& path, const SynthPopulation& population);

}  // namespace ntl
