#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "ntl/features.hpp"
#include "ntl/rng.hpp"

namespace {

ntl::MonthlyTimeSeries make_series(const std::vector<double>& readings, int days = 30) {
  REQUIRE(readings.size() == 24);
  ntl::MonthlyTimeSeries ts;
  ts.customer_id = "T";
  for (int m = 0; m < 24; ++m) {
    ts.readings[static_cast<std::size_t>(m)] = readings[static_cast<std::size_t>(m)];
    ts.period_days[static_cast<std::size_t>(m)] = days;
  }
  return ts;
}

ntl::MonthlyTimeSeries ramp_series() {
  std::vector<double> r(24);
  for (int m = 0; m < 24; ++m) r[static_cast<std::size_t>(m)] = m;
  return make_series(r);
}

// Independent direct-from-definition statistics used as oracles.
double o_mean(const std::vector<double>& x) {
  double s = 0.0;
  for (const double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double o_moment(const std::vector<double>& x, int order) {
  const double mu = o_mean(x);
  double s = 0.0;
  for (const double v : x) {
    double t = 1.0;
    for (int k = 0; k < order; ++k) t *= v - mu;
    s += t;
  }
  return s / static_cast<double>(x.size());
}

double o_acf(const std::vector<double>& x, int lag) {
  const double mu = o_mean(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) den += (x[i] - mu) * (x[i] - mu);
  if (den <= 0.0) return 0.0;
  for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < x.size(); ++i) {
    num += (x[i] - mu) * (x[i + static_cast<std::size_t>(lag)] - mu);
  }
  return num / den;
}

}  // namespace

TEST_CASE("default config yields 107 uniquely named features") {
  const ntl::FeatureConfig fc = ntl::default_feature_config();
  const std::vector<std::string> names = ntl::feature_names(fc);
  CHECK(names.size() == 107);
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
  CHECK(names.front() == "davg_m02");
  CHECK(names[22] == "davg_m24");
  CHECK(names[23] == "fi_w01_mean");
  CHECK(names[25] == "fi_w01_max");
  CHECK(names[59] == "g_mean");
  CHECK(names.back() == "iysd_11");

  const ntl::MonthlyTimeSeries ts = ramp_series();
  CHECK(ntl::extract_features(ts, fc).size() == names.size());
}

TEST_CASE("daily averages cover the 23 most recent months") {
  std::vector<double> r(24);
  for (int m = 0; m < 24; ++m) r[static_cast<std::size_t>(m)] = 30.0 * (m + 1);
  const ntl::MonthlyTimeSeries ts = make_series(r);
  const std::vector<double> da = ntl::daily_average_features(ts);
  REQUIRE(da.size() == 23);
  for (int t = 1; t < 24; ++t) {
    CHECK(da[static_cast<std::size_t>(t - 1)] == doctest::Approx(t + 1).epsilon(1e-12));
  }
}

TEST_CASE("fixed interval windows report mean, std, max of daily values") {
  std::vector<double> r(24, 30.0);
  r[0] = 30.0;
  r[1] = 60.0;
  const ntl::MonthlyTimeSeries ts = make_series(r);
  ntl::FeatureConfig fc;
  fc.daily_average = false;
  fc.generic = false;
  fc.intra_year_diff = false;
  fc.intra_year_seasonal_diff = false;
  fc.fixed_interval_windows = {{0, 2}, {2, 3}};
  const std::vector<double> fi = ntl::fixed_interval_features(ts, fc);
  REQUIRE(fi.size() == 6);
  // Window 1: daily values 1 and 2.
  CHECK(fi[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fi[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fi[2] == doctest::Approx(2.0).epsilon(1e-12));
  // Window 2: constant daily value 1.
  CHECK(fi[3] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fi[4] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fi[5] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generic statistics match hand values on a ramp") {
  const ntl::MonthlyTimeSeries ts = ramp_series();
  ntl::FeatureConfig fc;
  fc.daily_average = false;
  fc.fixed_interval = false;
  fc.intra_year_diff = false;
  fc.intra_year_seasonal_diff = false;
  fc.generic_bank = {"mean", "variance", "median", "min", "max", "skewness", "acf_01",
                     "trend_slope", "count_above_mean", "count_below_mean",
                     "longest_run_above_mean", "energy", "abs_change_mean"};
  const std::vector<double> g = ntl::generic_features(ts, fc);
  REQUIRE(g.size() == 13);
  CHECK(g[0] == doctest::Approx(11.5).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(1150.0 / 24.0).epsilon(1e-12));     // (n^2 - 1) / 12
  CHECK(g[2] == doctest::Approx(11.5).epsilon(1e-12));
  CHECK(g[3] == 0.0);
  CHECK(g[4] == 23.0);
  CHECK(g[5] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g[6] == doctest::Approx(1006.25 / 1150.0).epsilon(1e-12));  // lag-1 on a ramp
  CHECK(g[7] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[8] == 12.0);
  CHECK(g[9] == 12.0);
  CHECK(g[10] == 12.0);
  CHECK(g[11] == doctest::Approx(4324.0).epsilon(1e-12));           // sum t^2, t < 24
  CHECK(g[12] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate constant series produce zeros, not NaN") {
  const ntl::MonthlyTimeSeries ts = make_series(std::vector<double>(24, 7.0));
  ntl::FeatureConfig fc;
  fc.daily_average = false;
  fc.fixed_interval = false;
  fc.intra_year_diff = false;
  fc.intra_year_seasonal_diff = false;
  fc.generic_bank = {"variance", "skewness", "kurtosis", "acf_03", "trend_slope",
                     "count_above_mean", "longest_run_above_mean", "abs_change_mean"};
  const std::vector<double> g = ntl::generic_features(ts, fc);
  for (const double v : g) {
    CHECK(std::isfinite(v));
    CHECK(v == 0.0);
  }
}

TEST_CASE("generic statistics agree with direct recomputation on random series") {
  ntl::RngStream rng(99);
  ntl::FeatureConfig fc;
  fc.daily_average = false;
  fc.fixed_interval = false;
  fc.intra_year_diff = false;
  fc.intra_year_seasonal_diff = false;
  fc.generic_bank = {"mean", "variance", "skewness", "kurtosis", "acf_01", "acf_05", "energy"};
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> r(24);
    for (double& v : r) v = rng.uniform(0.0, 50.0);
    const std::vector<double> g = ntl::generic_features(make_series(r), fc);
    const double m2 = o_moment(r, 2);
    CHECK(g[0] == doctest::Approx(o_mean(r)).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(m2).epsilon(1e-12));
    CHECK(g[2] == doctest::Approx(o_moment(r, 3) / std::pow(m2, 1.5)).epsilon(1e-9));
    CHECK(g[3] == doctest::Approx(o_moment(r, 4) / (m2 * m2) - 3.0).epsilon(1e-9));
    CHECK(g[4] == doctest::Approx(o_acf(r, 1)).epsilon(1e-9));
    CHECK(g[5] == doctest::Approx(o_acf(r, 5)).epsilon(1e-9));
    double energy = 0.0;
    for (const double v : r) energy += v * v;
    CHECK(g[6] == doctest::Approx(energy).epsilon(1e-12));
  }
}

TEST_CASE("intra-year differences and their seasonal differences") {
  std::vector<double> r(24);
  for (int m = 0; m < 12; ++m) r[static_cast<std::size_t>(m)] = m;
  for (int m = 12; m < 24; ++m) r[static_cast<std::size_t>(m)] = 3.0 * (m - 12);
  const ntl::MonthlyTimeSeries ts = make_series(r);
  const std::vector<double> iyd = ntl::intra_year_difference(ts);
  REQUIRE(iyd.size() == 12);
  for (int t = 0; t < 12; ++t) {
    CHECK(iyd[static_cast<std::size_t>(t)] == doctest::Approx(2.0 * t).epsilon(1e-12));
  }
  const std::vector<double> iysd = ntl::intra_year_seasonal_difference(ts);
  REQUIRE(iysd.size() == 11);
  for (const double v : iysd) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("feature config validation rejects bad setups") {
  ntl::FeatureConfig fc;
  fc.daily_average = false;
  fc.fixed_interval = false;
  fc.generic = false;
  fc.intra_year_diff = false;
  fc.intra_year_seasonal_diff = false;
  CHECK_THROWS_AS(ntl::validate_feature_config(fc), ntl::config_error);

  ntl::FeatureConfig bad_window = ntl::default_feature_config();
  bad_window.fixed_interval_windows.push_back({23, 2});
  CHECK_THROWS_AS(ntl::validate_feature_config(bad_window), ntl::config_error);

  ntl::FeatureConfig empty_bank = ntl::default_feature_config();
  empty_bank.generic_bank.clear();
  CHECK_THROWS_AS(ntl::validate_feature_config(empty_bank), ntl::config_error);

  ntl::FeatureConfig unknown = ntl::default_feature_config();
  unknown.generic_bank.push_back("entropy_of_vibes");
  CHECK_THROWS_AS(ntl::validate_feature_config(unknown), ntl::config_error);

  ntl::FeatureConfig bad_lag = ntl::default_feature_config();
  bad_lag.generic_bank.push_back("acf_24");
  CHECK_THROWS_AS(ntl::validate_feature_config(bad_lag), ntl::config_error);
}

TEST_CASE("matrix extraction matches row-by-row extraction and attaches cleanly") {
  ntl::RngStream rng(4242);
  std::vector<ntl::MonthlyTimeSeries> series;
  ntl::LabeledDataset ds;
  for (int i = 0; i < 9; ++i) {
    std::vector<double> r(24);
    for (double& v : r) v = rng.uniform(1.0, 100.0);
    series.push_back(make_series(r));
    series.back().customer_id = "M" + std::to_string(i);
    ds.ids.push_back(series.back().customer_id);
    ds.labels.push_back(i % 2);
    ds.region.push_back("R0");
    ds.customer_class.push_back("C0");
  }
  const ntl::FeatureConfig fc = ntl::default_feature_config();
  const std::size_t d = ntl::feature_names(fc).size();
  const std::vector<double> matrix = ntl::extract_matrix(series, fc, 0);
  REQUIRE(matrix.size() == series.size() * d);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::vector<double> row = ntl::extract_features(series[i], fc);
    for (std::size_t k = 0; k < d; ++k) CHECK(matrix[i * d + k] == row[k]);
  }

  ntl::attach_features(ds, series, fc, 0);
  CHECK(ds.n_features() == d);
  CHECK(ds.x == matrix);

  ntl::LabeledDataset short_ds = ds;
  short_ds.ids.pop_back();
  CHECK_THROWS_AS(ntl::attach_features(short_ds, series, fc, 0), ntl::data_error);
}
