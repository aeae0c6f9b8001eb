#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntl/core.hpp"

namespace ntl {

enum class Kernel { gaussian, tophat, epanechnikov, exponential, linear, cosine };

const char* kernel_name(Kernel k);
Kernel kernel_from_name(const std::string& name);

struct DensityModel {
  Kernel kernel = Kernel::gaussian;
  double bandwidth = 1.0;
  std::vector<double> sample;
};

struct KdeSearchSpec {
  std::vector<Kernel> kernels = {Kernel::gaussian,    Kernel::tophat,
                                 Kernel::epanechnikov, Kernel::exponential,
                                 Kernel::linear,       Kernel::cosine};
  double bandwidth_lo = 0.001;
  double bandwidth_hi = 10.0;   // sampled log-uniformly
  int n_candidates = 100;
  int folds = 5;
};

struct KdeSelection {
  Kernel kernel = Kernel::gaussian;
  double bandwidth = 1.0;
  double cv_log_likelihood = 0.0;
};

DensityModel kde_fit(const std::vector<double>& sample, Kernel kernel, double bandwidth);

// (1 / (m h)) sum_j K((x - s_j) / h), every kernel normalized to integrate to 1.
double kde_eval(const DensityModel& model, double x);

// Randomized search over (kernel, bandwidth) scored by mean held-out
// log-likelihood over k folds with a 1e-300 density floor; candidates floored
// on more than half of their held-out points are discarded. Deterministic for
// any thread count: candidate i draws from an RNG stream keyed by (seed, i),
// scores land in per-candidate slots, and the final scan is serial.
KdeSelection kde_select(const std::vector<double>& sample, const KdeSearchSpec& spec,
                        std::uint64_t seed, int threads);

std::string density_model_json(const DensityModel& model);

}  // namespace ntl
