#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntl/core.hpp"

namespace ntl {

struct ContingencyTable2x2 {
  // Counts for (feature value x label): a = (1,1), b = (1,0), c = (0,1), d = (0,0).
  std::int64_t a = 0, b = 0, c = 0, d = 0;
};

enum class FeatureTest { fisher, ks };

struct SelectionResult {
  std::vector<bool> retained_mask;
  std::vector<double> p_values;
  std::vector<FeatureTest> test_used;

  std::size_t retained_count() const {
    std::size_t c = 0;
    for (const bool b : retained_mask) c += b;
    return c;
  }
};

// Two-sided Fisher exact p-value by point-probability summation: sum the
// hypergeometric probabilities of all tables sharing the observed margins
// whose point probability is <= the observed one (relative tie tolerance
// 1e-7). Exact 128-bit integer arithmetic for n <= 100, log-gamma otherwise.
// Degenerate margins (any row/column sum zero) -> 1.0.
double fisher_exact_two_sided(const ContingencyTable2x2& t);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

// Two-sample Kolmogorov-Smirnov. D is computed with integer cross
// multiplication and a single final division, so it matches a brute-force
// ECDF recount bit for bit. p uses the asymptotic Kolmogorov distribution at
// effective size ne = |x||y| / (|x| + |y|), series truncated below 1e-10.
KsResult ks_two_sample(const std::vector<double>& x, const std::vector<double>& y);

// Per-feature hypothesis tests: a feature with <= 2 distinct values is binary
// (Fisher on feature x label counts); otherwise continuous (KS between class
// conditional samples). Retained iff p < alpha. Parallel across features.
SelectionResult select_features(const std::vector<double>& matrix, std::size_t n_features,
                                const std::vector<int>& labels, double alpha, int threads);

void write_selection_csv(const std::string& path, const std::vector<std::string>& feature_names,
                         const SelectionResult& result);

// Drops non-retained columns; returns the filtered matrix and names.
void apply_selection(LabeledDataset& ds, const SelectionResult& result);

}  // namespace ntl
