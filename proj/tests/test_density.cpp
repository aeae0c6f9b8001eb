#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ntl/density.hpp"
#include "ntl/rng.hpp"

namespace {

const std::vector<ntl::Kernel> kAllKernels = {
    ntl::Kernel::gaussian, ntl::Kernel::tophat,      ntl::Kernel::epanechnikov,
    ntl::Kernel::exponential, ntl::Kernel::linear,   ntl::Kernel::cosine};

// Simpson quadrature of the fitted density over [lo, hi].
double integrate_density(const ntl::DensityModel& model, double lo, double hi, int intervals) {
  const double h = (hi - lo) / intervals;
  double s = ntl::kde_eval(model, lo) + ntl::kde_eval(model, hi);
  for (int i = 1; i < intervals; ++i) {
    s += ntl::kde_eval(model, lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("every kernel integrates to one for random fits") {
  ntl::RngStream rng(301);
  for (const ntl::Kernel kernel : kAllKernels) {
    for (int rep = 0; rep < 5; ++rep) {
      const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 40));
      std::vector<double> sample(n);
      for (double& v : sample) v = rng.uniform(-3.0, 3.0);
      const double bandwidth = std::exp(rng.uniform(std::log(0.1), std::log(2.0)));
      const ntl::DensityModel model = ntl::kde_fit(sample, kernel, bandwidth);
      const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
      // Exponential and gaussian tails need a wide window; 40 bandwidths is
      // enough for 1e-3 accuracy.
      const double lo = *lo_it - 40.0 * bandwidth;
      const double hi = *hi_it + 40.0 * bandwidth;
      const double mass = integrate_density(model, lo, hi, 20000);
      CHECK(std::abs(mass - 1.0) <= 1e-3);
    }
  }
}

TEST_CASE("single-sample evaluations match kernel formulas") {
  const std::vector<double> at_zero = {0.0};
  const double inv_sqrt_2pi = 0.3989422804014327;
  const double pi = 3.14159265358979323846;

  auto eval = [&](ntl::Kernel k, double h, double x) {
    return ntl::kde_eval(ntl::kde_fit(at_zero, k, h), x);
  };

  CHECK(eval(ntl::Kernel::gaussian, 1.0, 0.0) ==
        doctest::Approx(inv_sqrt_2pi).epsilon(1e-14));
  CHECK(eval(ntl::Kernel::gaussian, 2.0, 0.0) ==
        doctest::Approx(inv_sqrt_2pi / 2.0).epsilon(1e-14));
  CHECK(eval(ntl::Kernel::gaussian, 1.0, 1.0) ==
        doctest::Approx(inv_sqrt_2pi * std::exp(-0.5)).epsilon(1e-14));

  CHECK(eval(ntl::Kernel::tophat, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eval(ntl::Kernel::tophat, 1.0, 1.5) == 0.0);

  CHECK(eval(ntl::Kernel::epanechnikov, 1.0, 0.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(eval(ntl::Kernel::epanechnikov, 1.0, 0.5) ==
        doctest::Approx(0.75 * 0.75).epsilon(1e-14));
  CHECK(eval(ntl::Kernel::epanechnikov, 1.0, 2.0) == 0.0);

  CHECK(eval(ntl::Kernel::exponential, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eval(ntl::Kernel::exponential, 1.0, 2.0) ==
        doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-14));

  CHECK(eval(ntl::Kernel::linear, 1.0, 0.25) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(eval(ntl::Kernel::linear, 1.0, 1.25) == 0.0);

  CHECK(eval(ntl::Kernel::cosine, 1.0, 0.0) == doctest::Approx(pi / 4.0).epsilon(1e-14));
  CHECK(eval(ntl::Kernel::cosine, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("kde_eval averages over the sample and scales by bandwidth") {
  const std::vector<double> sample = {-1.0, 1.0};
  const ntl::DensityModel model = ntl::kde_fit(sample, ntl::Kernel::tophat, 0.5);
  // x = -1: only the first point is within half a bandwidth.
  CHECK(ntl::kde_eval(model, -1.0) == doctest::Approx(0.5 / (2.0 * 0.5)).epsilon(1e-14));
  // x = 0: neither point is within reach.
  CHECK(ntl::kde_eval(model, 0.0) == 0.0);
}

TEST_CASE("kde_fit validates inputs") {
  CHECK_THROWS_AS(ntl::kde_fit({}, ntl::Kernel::gaussian, 1.0), ntl::data_error);
  CHECK_THROWS_AS(ntl::kde_fit({1.0}, ntl::Kernel::gaussian, 0.0), ntl::data_error);
  CHECK_THROWS_AS(ntl::kde_fit({1.0}, ntl::Kernel::gaussian, -2.0), ntl::data_error);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(ntl::kde_fit({1.0, inf}, ntl::Kernel::gaussian, 1.0), ntl::data_error);
}

TEST_CASE("kernel names round-trip") {
  for (const ntl::Kernel k : kAllKernels) {
    CHECK(ntl::kernel_from_name(ntl::kernel_name(k)) == k);
  }
  CHECK_THROWS_AS(ntl::kernel_from_name("parabolic"), ntl::config_error);
}

TEST_CASE("kde_select is deterministic and lands in the searched range") {
  ntl::RngStream rng(55);
  std::vector<double> sample(300);
  for (double& v : sample) v = rng.normal();

  ntl::KdeSearchSpec spec;
  spec.n_candidates = 60;
  spec.bandwidth_lo = 0.05;
  spec.bandwidth_hi = 5.0;

  const ntl::KdeSelection a = ntl::kde_select(sample, spec, 17, 0);
  const ntl::KdeSelection b = ntl::kde_select(sample, spec, 17, 0);
  CHECK(a.kernel == b.kernel);
  CHECK(a.bandwidth == b.bandwidth);
  CHECK(a.cv_log_likelihood == b.cv_log_likelihood);

  CHECK(a.bandwidth >= spec.bandwidth_lo);
  CHECK(a.bandwidth <= spec.bandwidth_hi);
  CHECK(std::isfinite(a.cv_log_likelihood));

  // A different seed explores different candidates.
  const ntl::KdeSelection c = ntl::kde_select(sample, spec, 18, 0);
  CHECK((c.bandwidth != a.bandwidth || c.kernel != a.kernel));
}

TEST_CASE("kde_select prefers a sane bandwidth on standard normal data") {
  ntl::RngStream rng(77);
  std::vector<double> sample(400);
  for (double& v : sample) v = rng.normal();
  ntl::KdeSearchSpec spec;
  spec.n_candidates = 80;
  spec.bandwidth_lo = 0.001;
  spec.bandwidth_hi = 10.0;
  const ntl::KdeSelection sel = ntl::kde_select(sample, spec, 5, 0);
  // Anything within an order of magnitude of the Silverman scale (~0.3).
  CHECK(sel.bandwidth > 0.03);
  CHECK(sel.bandwidth < 3.0);
  // CV score is a mean held-out log density; for N(0,1) it sits near the
  // differential entropy, about -1.42.
  CHECK(sel.cv_log_likelihood > -2.5);
  CHECK(sel.cv_log_likelihood < -0.5);
}

TEST_CASE("kde_select survives candidates that floor away") {
  // Two tight clusters far apart: narrow-bandwidth compact kernels floor on
  // the opposite cluster and are discarded; selection still succeeds.
  std::vector<double> sample;
  for (int i = 0; i < 30; ++i) sample.push_back(0.001 * i);
  for (int i = 0; i < 30; ++i) sample.push_back(1000.0 + 0.001 * i);
  ntl::KdeSearchSpec spec;
  spec.n_candidates = 40;
  spec.bandwidth_lo = 0.0001;
  spec.bandwidth_hi = 0.01;  // guaranteed too narrow to bridge the gap
  spec.kernels = {ntl::Kernel::tophat, ntl::Kernel::linear};
  const ntl::KdeSelection sel = ntl::kde_select(sample, spec, 3, 0);
  CHECK(sel.bandwidth >= spec.bandwidth_lo);
  CHECK(sel.bandwidth <= spec.bandwidth_hi);
}

TEST_CASE("kde_select validates spec and sample") {
  const std::vector<double> sample = {1.0, 2.0, 3.0, 4.0, 5.0};
  ntl::KdeSearchSpec spec;
  spec.n_candidates = 0;
  CHECK_THROWS_AS(ntl::kde_select(sample, spec, 1, 0), ntl::config_error);
  spec = {};
  spec.folds = 1;
  CHECK_THROWS_AS(ntl::kde_select(sample, spec, 1, 0), ntl::config_error);
  spec = {};
  spec.kernels.clear();
  CHECK_THROWS_AS(ntl::kde_select(sample, spec, 1, 0), ntl::config_error);
  spec = {};
  CHECK_THROWS_AS(ntl::kde_select({1.0, 2.0}, spec, 1, 0), ntl::data_error);
}

TEST_CASE("density model json carries kernel, bandwidth, and sample digest") {
  const ntl::DensityModel model = ntl::kde_fit({1.0, 2.0}, ntl::Kernel::epanechnikov, 0.7);
  const std::string j = ntl::density_model_json(model);
  CHECK(j.find("\"kernel\":\"epanechnikov\"") != std::string::npos);
  CHECK(j.find("\"bandwidth\":0.7") != std::string::npos);
  CHECK(j.find("\"n\":2") != std::string::npos);
  CHECK(j.find("\"sample_digest\":\"") != std::string::npos);
}
