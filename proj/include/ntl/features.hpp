#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ntl/core.hpp"

namespace ntl {

// Five feature families; extraction order is fixed: daily_average,
// fixed_interval, generic, intra_year_diff, intra_year_seasonal_diff.
struct FeatureConfig {
  bool daily_average = true;
  bool fixed_interval = true;
  bool generic = true;
  bool intra_year_diff = true;
  bool intra_year_seasonal_diff = true;
  // (start month, length) windows over [0, 24).
  std::vector<std::pair<int, int>> fixed_interval_windows;
  std::vector<std::string> generic_bank;
};

// Defaults: 12 two-month windows (36 fixed-interval features) and a 25-entry
// generic bank, for 23 + 36 + 25 + 12 + 11 = 107 features.
FeatureConfig default_feature_config();

std::vector<std::string> generic_bank_default();

void validate_feature_config(const FeatureConfig& config);

// Family operations. Lengths: 23, 3 * windows, |bank|, 12, 11.
std::vector<double> daily_average_features(const MonthlyTimeSeries& series);
std::vector<double> fixed_interval_features(const MonthlyTimeSeries& series,
                                            const FeatureConfig& config);
std::vector<double> generic_features(const MonthlyTimeSeries& series,
                                     const FeatureConfig& config);
std::vector<double> intra_year_difference(const MonthlyTimeSeries& series);
std::vector<double> intra_year_seasonal_difference(const MonthlyTimeSeries& series);

std::vector<double> extract_features(const MonthlyTimeSeries& series,
                                     const FeatureConfig& config);
std::vector<std::string> feature_names(const FeatureConfig& config);

// Row-major matrix over all customers; parallel across customers with
// per-row slot writes, so results are identical for any thread count.
std::vector<double> extract_matrix(const std::vector<MonthlyTimeSeries>& series,
                                   const FeatureConfig& config, int threads);

// Fills ds.x and ds.feature_names from the series.
void attach_features(LabeledDataset& ds, const std::vector<MonthlyTimeSeries>& series,
                     const FeatureConfig& config, int threads);

void write_feature_matrix_csv(const std::string& path, const LabeledDataset& ds);

}  // namespace ntl
