// Times each OpenMP-parallel kernel against its serial reference on a
// moderate workload and checks that the two produce bitwise-identical
// results. When the toolchain lacks OpenMP the parallel column degenerates
// to a second serial run.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ntl/density.hpp"
#include "ntl/features.hpp"
#include "ntl/forest.hpp"
#include "ntl/serial_ref.hpp"
#include "ntl/stats_tests.hpp"
#include "ntl/synthgen.hpp"

namespace {

template <class F>
double time_s(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t digest_doubles(const std::vector<double>& v) {
  return fnv_bytes(0xCBF29CE484222325ULL, v.data(), v.size() * sizeof(double));
}

std::uint64_t digest_string(const std::string& s) {
  return fnv_bytes(0xCBF29CE484222325ULL, s.data(), s.size());
}

std::uint64_t digest_population(const ntl::SynthPopulation& pop) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const ntl::MonthlyTimeSeries& ts : pop.series) {
    h = fnv_bytes(h, ts.readings.data(), ts.readings.size() * sizeof(double));
  }
  h = fnv_bytes(h, pop.truth.selection_prob.data(),
                pop.truth.selection_prob.size() * sizeof(double));
  h = fnv_bytes(h, pop.truth.label.data(), pop.truth.label.size() * sizeof(int));
  return h;
}

std::uint64_t digest_search(const ntl::SearchResult& r) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = fnv_bytes(h, &r.best_index, sizeof(r.best_index));
  for (const ntl::SearchModelResult& m : r.models) {
    h = fnv_bytes(h, m.fold_aucs.data(), m.fold_aucs.size() * sizeof(double));
    h = fnv_bytes(h, &m.mean_auc, sizeof(double));
  }
  return h;
}

void print_row(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-22s %10.3fs %10.3fs %8.2fx   %s\n", name, serial_s, parallel_s,
              parallel_s > 0.0 ? serial_s / parallel_s : 0.0, identical ? "yes" : "NO");
}

}  // namespace

int main() {
  constexpr std::uint64_t kSeed = 20240715;

#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("serial reference vs parallel kernels, %d thread(s)\n", threads);
  std::printf("%-22s %11s %11s %9s   %s\n", "kernel", "serial", "parallel", "speedup",
              "identical");

  ntl::SynthConfig cfg = ntl::ntl_default();
  cfg.seed = kSeed;

  // generate_population: 20000 customers x 24 months.
  ntl::SynthPopulation pop_s, pop_p;
  const double gen_serial = time_s([&] { pop_s = ntl::serial::generate_population(cfg); });
  const double gen_parallel = time_s([&] { pop_p = ntl::generate_population(cfg, 0); });
  print_row("generate_population", gen_serial, gen_parallel,
            digest_population(pop_s) == digest_population(pop_p));

  ntl::SynthTrainingSet training = ntl::sample_biased_training(pop_p, pop_p.truth, cfg);
  const ntl::FeatureConfig fc = ntl::default_feature_config();
  const std::size_t d = ntl::feature_names(fc).size();

  // extract_matrix: full population, 107 features per customer.
  std::vector<double> fx_s, fx_p;
  const double fx_serial = time_s([&] { fx_s = ntl::serial::extract_matrix(pop_p.series, fc); });
  const double fx_parallel = time_s([&] { fx_p = ntl::extract_matrix(pop_p.series, fc, 0); });
  print_row("extract_matrix", fx_serial, fx_parallel, digest_doubles(fx_s) == digest_doubles(fx_p));

  // select_features: the biased training set against its labels.
  const std::vector<double> tx = ntl::extract_matrix(training.series, fc, 0);
  const std::vector<int>& ty = training.dataset.labels;
  ntl::SelectionResult sel_s, sel_p;
  const double sel_serial = time_s([&] { sel_s = ntl::serial::select_features(tx, d, ty, 0.05); });
  const double sel_parallel = time_s([&] { sel_p = ntl::select_features(tx, d, ty, 0.05, 0); });
  print_row("select_features", sel_serial, sel_parallel,
            digest_doubles(sel_s.p_values) == digest_doubles(sel_p.p_values));

  // kde_select: bandwidth search over one feature column, subsampled to keep
  // the quadratic fold scoring moderate.
  std::vector<double> column;
  for (std::size_t i = 0; i < training.dataset.n() && column.size() < 800; ++i) {
    column.push_back(tx[i * d]);
  }
  ntl::KdeSearchSpec spec;
  spec.bandwidth_lo = 0.05;
  spec.bandwidth_hi = 5.0;
  ntl::KdeSelection kde_s, kde_p;
  const double kde_serial = time_s([&] { kde_s = ntl::serial::kde_select(column, spec, kSeed); });
  const double kde_parallel = time_s([&] { kde_p = ntl::kde_select(column, spec, kSeed, 0); });
  const std::vector<double> kde_sig_s = {static_cast<double>(kde_s.kernel), kde_s.bandwidth,
                                         kde_s.cv_log_likelihood};
  const std::vector<double> kde_sig_p = {static_cast<double>(kde_p.kernel), kde_p.bandwidth,
                                         kde_p.cv_log_likelihood};
  print_row("kde_select", kde_serial, kde_parallel,
            digest_doubles(kde_sig_s) == digest_doubles(kde_sig_p));

  // fit_forest: the full training set with unit weights.
  const std::size_t n = training.dataset.n();
  const std::vector<double> unit(n, 1.0);
  ntl::ForestParams params;
  params.n_estimators = 20;
  ntl::ForestModel forest_s, forest_p;
  const double ff_serial =
      time_s([&] { forest_s = ntl::serial::fit_forest(tx, n, d, ty, unit, params, kSeed); });
  const double ff_parallel =
      time_s([&] { forest_p = ntl::fit_forest(tx, n, d, ty, unit, params, kSeed, 0); });
  print_row("fit_forest", ff_serial, ff_parallel,
            digest_string(ntl::model_json(forest_s)) == digest_string(ntl::model_json(forest_p)));

  // random_search: a small search on a training subset; each task is a full
  // cross-validated forest fit.
  const std::size_t ns = n < 800 ? n : 800;
  std::vector<double> sx(tx.begin(), tx.begin() + static_cast<std::ptrdiff_t>(ns * d));
  const std::vector<int> sy(ty.begin(), ty.begin() + static_cast<std::ptrdiff_t>(ns));
  const std::vector<double> sw(ns, 1.0);
  ntl::SearchResult search_s, search_p;
  const double rs_serial =
      time_s([&] { search_s = ntl::serial::random_search(sx, ns, d, sy, sw, 2, 3, kSeed); });
  const double rs_parallel =
      time_s([&] { search_p = ntl::random_search(sx, ns, d, sy, sw, 2, 3, kSeed, 0); });
  print_row("random_search", rs_serial, rs_parallel,
            digest_search(search_s) == digest_search(search_p));

  return 0;
}
