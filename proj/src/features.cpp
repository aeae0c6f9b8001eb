#include "ntl/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ntl/csv.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ntl {

namespace {

std::string two_digit(const std::string& prefix, int k) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", k);
  return prefix + buf;
}

double series_mean(const double* x, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i];
  return s / n;
}

// Population central moment of given order.
double central_moment(const double* x, int n, double mu, int order) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::pow(x[i] - mu, order);
  return s / n;
}

double autocorrelation(const double* x, int n, double mu, int lag) {
  double denom = 0.0;
  for (int i = 0; i < n; ++i) denom += (x[i] - mu) * (x[i] - mu);
  if (denom <= 0.0) return 0.0;  // constant series -> 0 by the degenerate rule
  double num = 0.0;
  for (int i = 0; i + lag < n; ++i) num += (x[i] - mu) * (x[i + lag] - mu);
  return num / denom;
}

double trend_slope(const double* x, int n) {
  const double tbar = (n - 1) / 2.0;
  const double mu = series_mean(x, n);
  double num = 0.0, denom = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (i - tbar) * (x[i] - mu);
    denom += (i - tbar) * (i - tbar);
  }
  return num / denom;
}

double generic_statistic(const std::string& id, const double* x, int n) {
  const double mu = series_mean(x, n);
  if (id == "mean") return mu;
  if (id == "variance") return central_moment(x, n, mu, 2);
  if (id == "min") return *std::min_element(x, x + n);
  if (id == "max") return *std::max_element(x, x + n);
  if (id == "median") {
    std::vector<double> s(x, x + n);
    std::sort(s.begin(), s.end());
    return n % 2 == 1 ? s[n / 2] : (s[n / 2 - 1] + s[n / 2]) / 2.0;
  }
  if (id == "skewness") {
    const double m2 = central_moment(x, n, mu, 2);
    if (m2 <= 0.0) return 0.0;
    return central_moment(x, n, mu, 3) / std::pow(m2, 1.5);
  }
  if (id == "kurtosis") {
    const double m2 = central_moment(x, n, mu, 2);
    if (m2 <= 0.0) return 0.0;
    return central_moment(x, n, mu, 4) / (m2 * m2) - 3.0;
  }
  if (id.rfind("acf_", 0) == 0) {
    const int lag = std::atoi(id.c_str() + 4);
    if (lag < 1 || lag >= n) throw config_error("generic_features: bad lag in " + id);
    return autocorrelation(x, n, mu, lag);
  }
  if (id == "trend_slope") return trend_slope(x, n);
  if (id == "count_above_mean") {
    int c = 0;
    for (int i = 0; i < n; ++i) c += x[i] > mu;
    return c;
  }
  if (id == "count_below_mean") {
    int c = 0;
    for (int i = 0; i < n; ++i) c += x[i] < mu;
    return c;
  }
  if (id == "longest_run_above_mean") {
    int best = 0, run = 0;
    for (int i = 0; i < n; ++i) {
      run = x[i] > mu ? run + 1 : 0;
      best = std::max(best, run);
    }
    return best;
  }
  if (id == "energy") {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
  }
  if (id == "abs_change_mean") {
    double s = 0.0;
    for (int i = 0; i + 1 < n; ++i) s += std::abs(x[i + 1] - x[i]);
    return s / (n - 1);
  }
  throw config_error("generic_features: unknown statistic " + id);
}

}  // namespace

std::vector<std::string> generic_bank_default() {
  std::vector<std::string> bank = {"mean", "variance", "min", "max", "median",
                                   "skewness", "kurtosis"};
  for (int lag = 1; lag <= 12; ++lag) bank.push_back(two_digit("acf_", lag));
  bank.insert(bank.end(), {"trend_slope", "count_above_mean", "count_below_mean",
                           "longest_run_above_mean", "energy", "abs_change_mean"});
  return bank;
}

FeatureConfig default_feature_config() {
  FeatureConfig config;
  for (int k = 0; k < 12; ++k) config.fixed_interval_windows.emplace_back(2 * k, 2);
  config.generic_bank = generic_bank_default();
  return config;
}

void validate_feature_config(const FeatureConfig& config) {
  if (!config.daily_average && !config.fixed_interval && !config.generic &&
      !config.intra_year_diff && !config.intra_year_seasonal_diff) {
    throw config_error("feature config: at least one family must be enabled");
  }
  for (const auto& [start, len] : config.fixed_interval_windows) {
    if (start < 0 || len < 1 || start + len > kMonths) {
      throw config_error("feature config: window outside [0, 24)");
    }
  }
  if (config.generic && config.generic_bank.empty()) {
    throw config_error("feature config: generic bank is empty");
  }
  MonthlyTimeSeries probe;
  probe.readings.fill(1.0);
  probe.period_days.fill(30);
  if (config.generic) generic_features(probe, config);  // rejects unknown ids
}

std::vector<double> daily_average_features(const MonthlyTimeSeries& series) {
  // 23 most recent months: the oldest reading is dropped.
  std::vector<double> out(kMonths - 1);
  for (int t = 1; t < kMonths; ++t) {
    out[t - 1] = series.readings[t] / series.period_days[t];
  }
  return out;
}

std::vector<double> fixed_interval_features(const MonthlyTimeSeries& series,
                                            const FeatureConfig& config) {
  std::vector<double> out;
  out.reserve(config.fixed_interval_windows.size() * 3);
  for (const auto& [start, len] : config.fixed_interval_windows) {
    double mean = 0.0, maxv = -1.0;
    for (int t = start; t < start + len; ++t) {
      const double v = series.readings[t] / series.period_days[t];
      mean += v;
      maxv = std::max(maxv, v);
    }
    mean /= len;
    double var = 0.0;
    for (int t = start; t < start + len; ++t) {
      const double v = series.readings[t] / series.period_days[t];
      var += (v - mean) * (v - mean);
    }
    out.push_back(mean);
    out.push_back(std::sqrt(var / len));
    out.push_back(maxv);
  }
  return out;
}

std::vector<double> generic_features(const MonthlyTimeSeries& series,
                                     const FeatureConfig& config) {
  std::vector<double> out;
  out.reserve(config.generic_bank.size());
  for (const auto& id : config.generic_bank) {
    out.push_back(generic_statistic(id, series.readings.data(), kMonths));
  }
  return out;
}

std::vector<double> intra_year_difference(const MonthlyTimeSeries& series) {
  std::vector<double> out(12);
  for (int t = 0; t < 12; ++t) out[t] = series.readings[t + 12] - series.readings[t];
  return out;
}

std::vector<double> intra_year_seasonal_difference(const MonthlyTimeSeries& series) {
  const std::vector<double> iyd = intra_year_difference(series);
  std::vector<double> out(11);
  for (int t = 0; t < 11; ++t) out[t] = iyd[t + 1] - iyd[t];
  return out;
}

std::vector<double> extract_features(const MonthlyTimeSeries& series,
                                     const FeatureConfig& config) {
  std::vector<double> out;
  auto append = [&out](const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
  };
  if (config.daily_average) append(daily_average_features(series));
  if (config.fixed_interval) append(fixed_interval_features(series, config));
  if (config.generic) append(generic_features(series, config));
  if (config.intra_year_diff) append(intra_year_difference(series));
  if (config.intra_year_seasonal_diff) append(intra_year_seasonal_difference(series));
  return out;
}

std::vector<std::string> feature_names(const FeatureConfig& config) {
  std::vector<std::string> names;
  if (config.daily_average) {
    for (int t = 1; t < kMonths; ++t) names.push_back(two_digit("davg_m", t + 1));
  }
  if (config.fixed_interval) {
    for (std::size_t w = 0; w < config.fixed_interval_windows.size(); ++w) {
      const std::string base = two_digit("fi_w", static_cast<int>(w) + 1);
      names.push_back(base + "_mean");
      names.push_back(base + "_std");
      names.push_back(base + "_max");
    }
  }
  if (config.generic) {
    for (const auto& id : config.generic_bank) names.push_back("g_" + id);
  }
  if (config.intra_year_diff) {
    for (int t = 1; t <= 12; ++t) names.push_back(two_digit("iyd_", t));
  }
  if (config.intra_year_seasonal_diff) {
    for (int t = 1; t <= 11; ++t) names.push_back(two_digit("iysd_", t));
  }
  return names;
}

std::vector<double> extract_matrix(const std::vector<MonthlyTimeSeries>& series,
                                   const FeatureConfig& config, int threads) {
  validate_feature_config(config);
  const std::size_t d = feature_names(config).size();
  std::vector<double> matrix(series.size() * d);
  const auto n = static_cast<std::int64_t>(series.size());
#ifdef _OPENMP
  const int want = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(want)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    const std::vector<double> row = extract_features(series[static_cast<std::size_t>(i)], config);
    std::copy(row.begin(), row.end(), matrix.begin() + static_cast<std::size_t>(i) * d);
  }
#ifndef _OPENMP
  (void)threads;
#endif
  return matrix;
}

void attach_features(LabeledDataset& ds, const std::vector<MonthlyTimeSeries>& series,
                     const FeatureConfig& config, int threads) {
  if (ds.n() != series.size()) {
    throw data_error("attach_features: dataset and series sizes differ");
  }
  ds.feature_names = feature_names(config);
  ds.x = extract_matrix(series, config, threads);
}

void write_feature_matrix_csv(const std::string& path, const LabeledDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("write_feature_matrix_csv: cannot open " + path);
  out << "customer_id";
  for (const auto& name : ds.feature_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    out << ds.ids[i];
    const double* row = ds.row(i);
    for (std::size_t k = 0; k < ds.n_features(); ++k) out << ',' << csv::format_double(row[k]);
    out << '\n';
  }
}

namespace serial {

std::vector<double> extract_matrix(const std::vector<MonthlyTimeSeries>& series,
                                   const FeatureConfig& config) {
  validate_feature_config(config);
  const std::size_t d = feature_names(config).size();
  std::vector<double> matrix(series.size() * d);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::vector<double> row = extract_features(series[i], config);
    std::copy(row.begin(), row.end(), matrix.begin() + i * d);
  }
  return matrix;
}

}  // namespace serial

}  // namespace ntl
