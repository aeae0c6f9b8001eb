#include "ntl/density.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ntl/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ntl {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
constexpr double kDensityFloor = 1e-300;

double kernel_value(Kernel kernel, double u) {
  switch (kernel) {
    case Kernel::gaussian:
      return kInvSqrt2Pi * std::exp(-0.5 * u * u);
    case Kernel::tophat:
      return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    case Kernel::epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case Kernel::exponential:
      return 0.5 * std::exp(-std::abs(u));
    case Kernel::linear:
      return std::abs(u) <= 1.0 ? 1.0 - std::abs(u) : 0.0;
    case Kernel::cosine:
      return std::abs(u) <= 1.0 ? (kPi / 4.0) * std::cos(kPi * u / 2.0) : 0.0;
  }
  return 0.0;
}

}  // namespace

const char* kernel_name(Kernel k) {
  switch (k) {
    case Kernel::gaussian: return "gaussian";
    case Kernel::tophat: return "tophat";
    case Kernel::epanechnikov: return "epanechnikov";
    case Kernel::exponential: return "exponential";
    case Kernel::linear: return "linear";
    case Kernel::cosine: return "cosine";
  }
  return "gaussian";
}

Kernel kernel_from_name(const std::string& name) {
  for (const Kernel k : {Kernel::gaussian, Kernel::tophat, Kernel::epanechnikov,
                         Kernel::exponential, Kernel::linear, Kernel::cosine}) {
    if (name == kernel_name(k)) return k;
  }
  throw config_error("unknown kernel: " + name);
}

DensityModel kde_fit(const std::vector<double>& sample, Kernel kernel, double bandwidth) {
  if (sample.empty()) throw data_error("kde_fit: empty sample");
  if (!(bandwidth > 0.0)) throw data_error("kde_fit: bandwidth must be positive");
  for (const double v : sample) {
    if (!std::isfinite(v)) throw data_error("kde_fit: non-finite sample value");
  }
  return DensityModel{kernel, bandwidth, sample};
}

double kde_eval(const DensityModel& model, double x) {
  const double h = model.bandwidth;
  double s = 0.0;
  for (const double v : model.sample) s += kernel_value(model.kernel, (x - v) / h);
  return s / (static_cast<double>(model.sample.size()) * h);
}

namespace {

// Mean held-out log-likelihood over folds; returns false when more than half
// of all held-out evaluations hit the density floor.
bool score_candidate(const std::vector<double>& sample, const std::vector<std::size_t>& order,
                     int folds, Kernel kernel, double bandwidth, double* out_score) {
  const std::size_t n = order.size();
  double total_ll = 0.0;
  std::size_t floored = 0, total_points = 0;
  for (int f = 0; f < folds; ++f) {
    const std::size_t lo = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(folds);
    const std::size_t hi = n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(folds);
    if (lo == hi) continue;
    std::vector<double> train;
    train.reserve(n - (hi - lo));
    for (std::size_t i = 0; i < n; ++i) {
      if (i < lo || i >= hi) train.push_back(sample[order[i]]);
    }
    if (train.empty()) return false;
    const DensityModel model{kernel, bandwidth, std::move(train)};
    double fold_ll = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double dens = kde_eval(model, sample[order[i]]);
      if (dens <= kDensityFloor) ++floored;
      fold_ll += std::log(std::max(dens, kDensityFloor));
      ++total_points;
    }
    total_ll += fold_ll;
  }
  *out_score = total_ll / static_cast<double>(total_points);
  return floored * 2 <= total_points;
}

}  // namespace

KdeSelection kde_select(const std::vector<double>& sample, const KdeSearchSpec& spec,
                        std::uint64_t seed, int threads) {
  if (spec.n_candidates < 1) throw config_error("kde_select: n_candidates must be >= 1");
  if (spec.folds < 2) throw config_error("kde_select: folds must be >= 2");
  if (spec.kernels.empty()) throw config_error("kde_select: empty kernel set");
  if (sample.size() < static_cast<std::size_t>(spec.folds)) {
    throw data_error("kde_select: sample smaller than fold count");
  }

  // One shared permutation defines the folds for every candidate.
  std::vector<std::size_t> order(sample.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RngStream fold_rng(seed, StreamTag::folds, 0);
  fold_rng.shuffle(order);

  const int nc = spec.n_candidates;
  std::vector<Kernel> cand_kernel(static_cast<std::size_t>(nc));
  std::vector<double> cand_bw(static_cast<std::size_t>(nc));
  std::vector<double> cand_score(static_cast<std::size_t>(nc));
  std::vector<char> cand_ok(static_cast<std::size_t>(nc), 0);

  const double log_lo = std::log(spec.bandwidth_lo);
  const double log_hi = std::log(spec.bandwidth_hi);
#ifdef _OPENMP
  const int want = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(want)
#endif
  for (int i = 0; i < nc; ++i) {
    RngStream rng(seed, StreamTag::kde_candidate, static_cast<std::uint64_t>(i));
    const auto ki = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(spec.kernels.size()) - 1));
    const Kernel kernel = spec.kernels[ki];
    const double bandwidth = std::exp(rng.uniform(log_lo, log_hi));
    cand_kernel[static_cast<std::size_t>(i)] = kernel;
    cand_bw[static_cast<std::size_t>(i)] = bandwidth;
    double score = 0.0;
    const bool ok = score_candidate(sample, order, spec.folds, kernel, bandwidth, &score);
    cand_score[static_cast<std::size_t>(i)] = score;
    cand_ok[static_cast<std::size_t>(i)] = ok ? 1 : 0;
  }
#ifndef _OPENMP
  (void)threads;
#endif

  // Serial scan in candidate order; ties keep the lowest index. If every
  // candidate was floored away, fall back to the best score regardless.
  int best = -1;
  for (int i = 0; i < nc; ++i) {
    if (!cand_ok[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || cand_score[static_cast<std::size_t>(i)] > cand_score[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  if (best < 0) {
    for (int i = 0; i < nc; ++i) {
      if (best < 0 || cand_score[static_cast<std::size_t>(i)] > cand_score[static_cast<std::size_t>(best)]) {
        best = i;
      }
    }
  }
  return KdeSelection{cand_kernel[static_cast<std::size_t>(best)],
                      cand_bw[static_cast<std::size_t>(best)],
                      cand_score[static_cast<std::size_t>(best)]};
}

std::string density_model_json(const DensityModel& model) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const double v : model.sample) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof v; ++i) {
      h ^= p[i];
      h *= 0x100000001B3ULL;
    }
  }
  nlohmann::json j;
  j["kernel"] = kernel_name(model.kernel);
  j["bandwidth"] = model.bandwidth;
  j["sample_digest"] = digest_hex(h);
  j["n"] = model.sample.size();
  return j.dump();
}

namespace serial {

KdeSelection kde_select(const std::vector<double>& sample, const KdeSearchSpec& spec,
                        std::uint64_t seed) {
  if (spec.n_candidates < 1) throw config_error("kde_select: n_candidates must be >= 1");
  if (spec.folds < 2) throw config_error("kde_select: folds must be >= 2");
  if (spec.kernels.empty()) throw config_error("kde_select: empty kernel set");
  if (sample.size() < static_cast<std::size_t>(spec.folds)) {
    throw data_error("kde_select: sample smaller than fold count");
  }

  std::vector<std::size_t> order(sample.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RngStream fold_rng(seed, StreamTag::folds, 0);
  fold_rng.shuffle(order);

  const double log_lo = std::log(spec.bandwidth_lo);
  const double log_hi = std::log(spec.bandwidth_hi);
  KdeSelection pick{spec.kernels.front(), spec.bandwidth_lo, 0.0};
  double fallback_score = 0.0;
  KdeSelection fallback = pick;
  bool have_pick = false, have_any = false;
  for (int i = 0; i < spec.n_candidates; ++i) {
    RngStream rng(seed, StreamTag::kde_candidate, static_cast<std::uint64_t>(i));
    const auto ki = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(spec.kernels.size()) - 1));
    const Kernel kernel = spec.kernels[ki];
    const double bandwidth = std::exp(rng.uniform(log_lo, log_hi));
    double score = 0.0;
    const bool ok = score_candidate(sample, order, spec.folds, kernel, bandwidth, &score);
    if (ok && (!have_pick || score > pick.cv_log_likelihood)) {
      pick = KdeSelection{kernel, bandwidth, score};
      have_pick = true;
    }
    if (!have_any || score > fallback_score) {
      fallback = KdeSelection{kernel, bandwidth, score};
      fallback_score = score;
      have_any = true;
    }
  }
  return have_pick ? pick : fallback;
}

}  // namespace serial

}  // namespace ntl
