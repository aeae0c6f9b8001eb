#include "ntl/stats_tests.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "ntl/csv.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ntl {

namespace {

using u128 = unsigned __int128;

double u128_to_double(u128 v) {
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  const auto lo = static_cast<std::uint64_t>(v);
  return static_cast<double>(hi) * 0x1.0p64 + static_cast<double>(lo);
}

// C(n, k) exactly; safe in u128 for n <= 100 (C(100,50) ~ 1.01e29 < 2^127).
u128 binomial_u128(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  u128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<u128>(n - k + i) / static_cast<u128>(i);
  }
  return r;
}

double log_binomial(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Exact path: point probabilities share the denominator C(n, c1), so the tie
// predicate "P(t) <= P(obs) * (1 + 1e-7)" becomes the integer comparison
// 1e7 * N(t) <= (1e7 + 1) * N(obs) on the numerators.
double fisher_exact_small(std::int64_t r1, std::int64_t r2, std::int64_t c1, std::int64_t a) {
  const std::int64_t lo = std::max<std::int64_t>(0, c1 - r2);
  const std::int64_t hi = std::min(r1, c1);
  const u128 num_obs = binomial_u128(r1, a) * binomial_u128(r2, c1 - a);
  const u128 tie_scale = 10000000;  // 1e7
  const u128 bound = (tie_scale + 1) * num_obs;
  const double denom = u128_to_double(binomial_u128(r1 + r2, c1));
  double p = 0.0;
  for (std::int64_t t = lo; t <= hi; ++t) {
    const u128 num_t = binomial_u128(r1, t) * binomial_u128(r2, c1 - t);
    if (tie_scale * num_t <= bound) p += u128_to_double(num_t) / denom;
  }
  return std::min(p, 1.0);
}

double fisher_exact_large(std::int64_t r1, std::int64_t r2, std::int64_t c1, std::int64_t a) {
  const std::int64_t lo = std::max<std::int64_t>(0, c1 - r2);
  const std::int64_t hi = std::min(r1, c1);
  const double log_denom = log_binomial(r1 + r2, c1);
  const double log_obs = log_binomial(r1, a) + log_binomial(r2, c1 - a);
  const double log_bound = log_obs + std::log1p(1e-7);
  double p = 0.0;
  for (std::int64_t t = lo; t <= hi; ++t) {
    const double log_t = log_binomial(r1, t) + log_binomial(r2, c1 - t);
    if (log_t <= log_bound) p += std::exp(log_t - log_denom);
  }
  return std::min(p, 1.0);
}

// Survival function of the Kolmogorov distribution,
// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double e = -2.0 * lambda * lambda;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100000; ++k) {
    const double term = std::exp(e * k * k);
    sum += sign * term;
    if (term < 1e-10) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

double fisher_exact_two_sided(const ContingencyTable2x2& t) {
  if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) {
    throw data_error("fisher_exact_two_sided: negative count");
  }
  const std::int64_t r1 = t.a + t.b, r2 = t.c + t.d;
  const std::int64_t c1 = t.a + t.c, c2 = t.b + t.d;
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) return 1.0;  // degenerate margins
  const std::int64_t n = r1 + r2;
  return n <= 100 ? fisher_exact_small(r1, r2, c1, t.a)
                  : fisher_exact_large(r1, r2, c1, t.a);
}

KsResult ks_two_sample(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) {
    throw data_error("ks_two_sample: empty sample");
  }
  std::vector<double> xs(x), ys(y);
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const std::int64_t n = static_cast<std::int64_t>(xs.size());
  const std::int64_t m = static_cast<std::int64_t>(ys.size());

  // Merge scan over distinct values; ECDF difference held as the integer
  // |i*m - j*n| until one final division.
  std::int64_t i = 0, j = 0, max_diff = 0;
  while (i < n || j < m) {
    const double v = (j >= m || (i < n && xs[i] <= ys[j])) ? xs[i] : ys[j];
    while (i < n && xs[i] == v) ++i;
    while (j < m && ys[j] == v) ++j;
    max_diff = std::max(max_diff, std::abs(i * m - j * n));
  }

  KsResult r;
  r.d = static_cast<double>(max_diff) / (static_cast<double>(n) * static_cast<double>(m));
  const double ne = static_cast<double>(n) * static_cast<double>(m) /
                    (static_cast<double>(n) + static_cast<double>(m));
  r.p = kolmogorov_q(std::sqrt(ne) * r.d);
  return r;
}

namespace {

void check_selection_inputs(const std::vector<double>& matrix, std::size_t n_features,
                            const std::vector<int>& labels, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw config_error("select_features: alpha must lie in (0, 1)");
  }
  const std::size_t n = labels.size();
  if (n_features == 0 || n == 0 || matrix.size() != n * n_features) {
    throw data_error("select_features: matrix/label shape mismatch");
  }
  bool has0 = false, has1 = false;
  for (const int y : labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) {
    throw data_error("select_features: both classes required");
  }
}

double feature_p_value(const std::vector<double>& matrix, std::size_t n_features,
                       const std::vector<int>& labels, std::size_t k, FeatureTest* test_used) {
  const std::size_t n = labels.size();
  std::set<double> distinct;
  for (std::size_t i = 0; i < n && distinct.size() <= 2; ++i) {
    distinct.insert(matrix[i * n_features + k]);
  }
  if (distinct.size() <= 2) {
    // Binary: the larger value maps to feature=1; a constant feature has a
    // degenerate margin and p = 1.
    const double hi = *distinct.rbegin();
    ContingencyTable2x2 t;
    for (std::size_t i = 0; i < n; ++i) {
      const bool f = distinct.size() == 2 && matrix[i * n_features + k] == hi;
      const bool y = labels[i] == 1;
      if (f && y) ++t.a;
      else if (f) ++t.b;
      else if (y) ++t.c;
      else ++t.d;
    }
    *test_used = FeatureTest::fisher;
    return fisher_exact_two_sided(t);
  }
  std::vector<double> x0, x1;
  for (std::size_t i = 0; i < n; ++i) {
    (labels[i] == 1 ? x1 : x0).push_back(matrix[i * n_features + k]);
  }
  *test_used = FeatureTest::ks;
  return ks_two_sample(x0, x1).p;
}

}  // namespace

SelectionResult select_features(const std::vector<double>& matrix, std::size_t n_features,
                                const std::vector<int>& labels, double alpha, int threads) {
  check_selection_inputs(matrix, n_features, labels, alpha);

  SelectionResult result;
  result.p_values.assign(n_features, 1.0);
  result.test_used.assign(n_features, FeatureTest::fisher);
  // Byte-sized slots: vector<bool> packs bits and is not safe to write from
  // concurrent loop iterations.
  std::vector<char> retained(n_features, 0);

  const auto nf = static_cast<std::int64_t>(n_features);
#ifdef _OPENMP
  const int want = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(want)
#endif
  for (std::int64_t k = 0; k < nf; ++k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    FeatureTest used = FeatureTest::fisher;
    const double p = feature_p_value(matrix, n_features, labels, kk, &used);
    result.test_used[kk] = used;
    result.p_values[kk] = p;
    retained[kk] = p < alpha ? 1 : 0;
  }
#ifndef _OPENMP
  (void)threads;
#endif
  result.retained_mask.assign(n_features, false);
  for (std::size_t k = 0; k < n_features; ++k) result.retained_mask[k] = retained[k] != 0;
  return result;
}

void write_selection_csv(const std::string& path, const std::vector<std::string>& feature_names,
                         const SelectionResult& result) {
  if (feature_names.size() != result.p_values.size()) {
    throw data_error("write_selection_csv: name/result length mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("write_selection_csv: cannot open " + path);
  out << "feature_name,test,p_value,retained\n";
  for (std::size_t k = 0; k < feature_names.size(); ++k) {
    out << feature_names[k] << ','
        << (result.test_used[k] == FeatureTest::fisher ? "fisher" : "ks") << ','
        << csv::format_double(result.p_values[k]) << ',' << (result.retained_mask[k] ? 1 : 0)
        << '\n';
  }
}

void apply_selection(LabeledDataset& ds, const SelectionResult& result) {
  const std::size_t d = ds.n_features();
  if (result.retained_mask.size() != d) {
    throw data_error("apply_selection: mask length mismatch");
  }
  std::vector<std::string> names;
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < d; ++k) {
    if (result.retained_mask[k]) {
      keep.push_back(k);
      names.push_back(ds.feature_names[k]);
    }
  }
  std::vector<double> x(ds.n() * keep.size());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double* row = ds.row(i);
    for (std::size_t k = 0; k < keep.size(); ++k) x[i * keep.size() + k] = row[keep[k]];
  }
  ds.feature_names = std::move(names);
  ds.x = std::move(x);
}

namespace serial {

SelectionResult select_features(const std::vector<double>& matrix, std::size_t n_features,
                                const std::vector<int>& labels, double alpha) {
  check_selection_inputs(matrix, n_features, labels, alpha);

  SelectionResult result;
  result.retained_mask.assign(n_features, false);
  result.p_values.assign(n_features, 1.0);
  result.test_used.assign(n_features, FeatureTest::fisher);
  for (std::size_t k = 0; k < n_features; ++k) {
    FeatureTest used = FeatureTest::fisher;
    const double p = feature_p_value(matrix, n_features, labels, k, &used);
    result.test_used[k] = used;
    result.p_values[k] = p;
    result.retained_mask[k] = p < alpha;
  }
  return result;
}

}  // namespace serial

}  // namespace ntl
