#include "ntl/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ntl/csv.hpp"
#include "ntl/rng.hpp"

namespace ntl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int resolve_threads(int threads) {
#ifdef _OPENMP
  return threads > 0 ? threads : omp_get_max_threads();
#else
  (void)threads;
  return 1;
#endif
}

void check_mixture(const std::vector<double>& mix, const char* what) {
  if (mix.empty()) throw config_error(std::string("validate_synth_config: empty ") + what);
  double total = 0.0;
  for (const double p : mix) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw config_error(std::string("validate_synth_config: ") + what +
                         " entries must be positive");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw config_error(std::string("validate_synth_config: ") + what + " must sum to 1");
  }
}

void check_len(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw config_error(std::string("validate_synth_config: ") + what +
                       " length must match its mixture");
  }
}

std::string customer_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "C%05zu", i);
  return buf;
}

std::vector<double> empirical_prior(const std::vector<int>& values, std::size_t n_levels) {
  std::vector<double> prior(n_levels, 0.0);
  for (const int v : values) prior[static_cast<std::size_t>(v)] += 1.0;
  for (double& p : prior) p /= static_cast<double>(values.size());
  return prior;
}

std::vector<double> empirical_prior_subset(const std::vector<int>& values,
                                           const std::vector<std::size_t>& ids,
                                           std::size_t n_levels) {
  std::vector<double> prior(n_levels, 0.0);
  for (const std::size_t i : ids) prior[static_cast<std::size_t>(values[i])] += 1.0;
  for (double& p : prior) p /= static_cast<double>(ids.size());
  return prior;
}

}  // namespace

SynthConfig ntl_default() {
  SynthConfig cfg;
  cfg.population = 20000;
  cfg.region_mix = {0.2, 0.2, 0.2, 0.2, 0.2};
  cfg.class_mix = {0.5, 0.3, 0.2};
  cfg.base_rate.assign(5, std::vector<double>(3, 0.08));
  cfg.base_level = 100.0;
  cfg.class_scale = {0.6, 1.0, 1.8};
  cfg.amp = {0.15, 0.18, 0.20, 0.22, 0.25};
  cfg.phase = {0.0, 3.0, 6.0, 9.0, 1.0};
  // Over-inspected region 0 carries a noisy, quickly saturating signal and a
  // large undetectable-theft share; under-inspected regions sit on the steep
  // part of the learning curve.
  cfg.sigma_region = {0.62, 0.50, 0.50, 0.50, 0.50};
  cfg.sigma_class = {0.08, 0.02, 0.0};
  cfg.depth_region = {0.26, 0.155, 0.155, 0.155, 0.155};
  cfg.depth_class = {0.06, 0.015, 0.0};
  cfg.undetect_region = {0.35, 0.05, 0.05, 0.05, 0.05};
  cfg.onset = 12;
  cfg.sel_region = {std::log(4.0), 0.0, 0.0, 0.0, 0.0};
  cfg.sel_class = {std::log(3.0), std::log(1.15), 0.0};
  cfg.gamma = 0.0;
  cfg.delta = std::log(8.5);
  cfg.target_train = 2400.0;
  return cfg;
}

SynthConfig separable_default() {
  SynthConfig cfg;
  cfg.population = 4000;
  cfg.region_mix = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  cfg.class_mix = {0.6, 0.4};
  cfg.base_rate.assign(3, std::vector<double>(2, 0.3));
  cfg.base_level = 100.0;
  cfg.class_scale = {1.0, 1.5};
  cfg.amp = {0.10, 0.12, 0.15};
  cfg.phase = {0.0, 4.0, 8.0};
  cfg.sigma_region = {0.18, 0.18, 0.18};
  cfg.sigma_class = {0.0, 0.0};
  cfg.depth_region = {0.5, 0.5, 0.5};
  cfg.depth_class = {0.0, 0.0};
  cfg.undetect_region = {0.0, 0.0, 0.0};
  cfg.onset = 12;
  cfg.sel_region = {0.0, 0.0, 0.0};
  cfg.sel_class = {0.0, 0.0};
  cfg.gamma = 0.0;
  cfg.delta = 0.0;
  cfg.target_train = 800.0;
  return cfg;
}

void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.population < 100) {
    throw config_error("validate_synth_config: population must be at least 100");
  }
  check_mixture(cfg.region_mix, "region_mix");
  check_mixture(cfg.class_mix, "class_mix");
  const std::size_t nr = cfg.n_regions();
  const std::size_t nc = cfg.n_classes();
  if (cfg.base_rate.size() != nr) {
    throw config_error("validate_synth_config: base_rate must have one row per region");
  }
  for (const auto& row : cfg.base_rate) {
    check_len(row.size(), nc, "base_rate row");
    for (const double p : row) {
      if (!(p > 0.0) || !(p < 1.0)) {
        throw config_error("validate_synth_config: base_rate entries must lie in (0, 1)");
      }
    }
  }
  if (!(cfg.base_level > 0.0)) {
    throw config_error("validate_synth_config: base_level must be positive");
  }
  check_len(cfg.class_scale.size(), nc, "class_scale");
  for (const double s : cfg.class_scale) {
    if (!(s > 0.0)) throw config_error("validate_synth_config: class_scale must be positive");
  }
  check_len(cfg.amp.size(), nr, "amp");
  for (const double a : cfg.amp) {
    if (a < 0.0 || a >= 1.0) {
      throw config_error("validate_synth_config: amp must lie in [0, 1)");
    }
  }
  check_len(cfg.phase.size(), nr, "phase");
  check_len(cfg.sigma_region.size(), nr, "sigma_region");
  check_len(cfg.sigma_class.size(), nc, "sigma_class");
  for (const double s : cfg.sigma_region) {
    if (s < 0.0) throw config_error("validate_synth_config: sigma_region must be nonnegative");
  }
  for (const double s : cfg.sigma_class) {
    if (s < 0.0) throw config_error("validate_synth_config: sigma_class must be nonnegative");
  }
  check_len(cfg.depth_region.size(), nr, "depth_region");
  check_len(cfg.depth_class.size(), nc, "depth_class");
  double max_depth_region = 0.0, max_depth_class = 0.0;
  for (const double v : cfg.depth_region) {
    if (v < 0.0) throw config_error("validate_synth_config: depth_region must be nonnegative");
    max_depth_region = std::max(max_depth_region, v);
  }
  for (const double v : cfg.depth_class) {
    if (v < 0.0) throw config_error("validate_synth_config: depth_class must be nonnegative");
    max_depth_class = std::max(max_depth_class, v);
  }
  if (max_depth_region + max_depth_class >= 1.0) {
    throw config_error("validate_synth_config: combined drop depth must stay below 1");
  }
  check_len(cfg.undetect_region.size(), nr, "undetect_region");
  for (const double u : cfg.undetect_region) {
    if (u < 0.0 || u > 1.0) {
      throw config_error("validate_synth_config: undetect_region must lie in [0, 1]");
    }
  }
  if (cfg.onset < 0 || cfg.onset >= kMonths) {
    throw config_error("validate_synth_config: onset must lie in [0, 24)");
  }
  check_len(cfg.sel_region.size(), nr, "sel_region");
  check_len(cfg.sel_class.size(), nc, "sel_class");
  for (const double c : cfg.sel_region) {
    if (!std::isfinite(c)) throw config_error("validate_synth_config: sel_region must be finite");
  }
  for (const double c : cfg.sel_class) {
    if (!std::isfinite(c)) throw config_error("validate_synth_config: sel_class must be finite");
  }
  if (!std::isfinite(cfg.gamma) || !std::isfinite(cfg.delta)) {
    throw config_error("validate_synth_config: gamma and delta must be finite");
  }
  if (!(cfg.target_train > 0.0)) {
    throw config_error("validate_synth_config: target_train must be positive");
  }
}

SynthPopulation generate_population(const SynthConfig& cfg, int threads) {
  validate_synth_config(cfg);
  const std::size_t n = cfg.population;

  SynthPopulation out;
  out.series.resize(n);
  out.truth.label.resize(n);
  out.truth.region_idx.resize(n);
  out.truth.class_idx.resize(n);
  out.truth.selection_prob.resize(n);
  out.dataset.ids.resize(n);
  out.dataset.region.resize(n);
  out.dataset.customer_class.resize(n);

  const std::vector<double> cum_region = cumulative_weights(cfg.region_mix);
  const std::vector<double> cum_class = cumulative_weights(cfg.class_mix);

  // Log-linear selection exponent per customer; summed serially afterwards so
  // output is independent of the thread count.
  std::vector<double> raw_sel(n);

  const int want = resolve_threads(threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(want)
#endif
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    RngStream rng(cfg.seed, StreamTag::customer, i);
    const std::size_t r = rng.discrete(cum_region);
    const std::size_t k = rng.discrete(cum_class);
    const int label = rng.bernoulli(cfg.base_rate[r][k]) ? 1 : 0;
    const bool undetectable = rng.bernoulli(cfg.undetect_region[r]);

    const double sigma = cfg.sigma_region[r] + cfg.sigma_class[k];
    const double depth =
        (label == 1 && !undetectable) ? cfg.depth_region[r] + cfg.depth_class[k] : 0.0;
    MonthlyTimeSeries& ts = out.series[i];
    ts.customer_id = customer_id(i);
    double mean = 0.0;
    for (int t = 0; t < kMonths; ++t) {
      const double seasonal =
          1.0 + cfg.amp[r] * std::sin(kTwoPi * (static_cast<double>(t) + cfg.phase[r]) / 12.0);
      double v = cfg.base_level * cfg.class_scale[k] * seasonal * std::exp(sigma * rng.normal());
      if (t >= cfg.onset) v *= 1.0 - depth;
      ts.readings[static_cast<std::size_t>(t)] = v;
      ts.period_days[static_cast<std::size_t>(t)] = 30;
      mean += v;
    }
    mean /= static_cast<double>(kMonths);

    out.truth.label[i] = label;
    out.truth.region_idx[i] = static_cast<int>(r);
    out.truth.class_idx[i] = static_cast<int>(k);
    out.dataset.ids[i] = ts.customer_id;
    out.dataset.region[i] = "R" + std::to_string(r);
    out.dataset.customer_class[i] = "C" + std::to_string(k);
    raw_sel[i] = std::exp(cfg.sel_region[r] + cfg.sel_class[k] + cfg.gamma * std::log(mean) +
                          cfg.delta * static_cast<double>(label));
  }
  (void)want;

  double raw_total = 0.0;
  for (const double v : raw_sel) raw_total += v;
  const double scale = cfg.target_train / raw_total;
  for (std::size_t i = 0; i < n; ++i) {
    out.truth.selection_prob[i] = std::clamp(scale * raw_sel[i], 1e-9, 1.0);
  }

  out.truth.population_region_prior = empirical_prior(out.truth.region_idx, cfg.n_regions());
  out.truth.population_class_prior = empirical_prior(out.truth.class_idx, cfg.n_classes());
  out.truth.population_label_prior = empirical_prior(out.truth.label, 2);
  return out;
}

SynthTrainingSet sample_biased_training(const SynthPopulation& population, SynthTruth& truth,
                                        const SynthConfig& cfg) {
  const std::size_t n = population.dataset.n();
  if (truth.selection_prob.size() != n) {
    throw std::invalid_argument("sample_biased_training: truth does not match the population");
  }
  SynthTrainingSet out;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(cfg.seed, StreamTag::selection, i);
    if (rng.uniform01() < truth.selection_prob[i]) out.selected_ids.push_back(i);
  }
  if (out.selected_ids.empty()) {
    throw data_error("sample_biased_training: selection produced an empty training set");
  }

  out.dataset.ids.reserve(out.selected_ids.size());
  out.series.reserve(out.selected_ids.size());
  for (const std::size_t i : out.selected_ids) {
    out.dataset.ids.push_back(population.dataset.ids[i]);
    out.dataset.region.push_back(population.dataset.region[i]);
    out.dataset.customer_class.push_back(population.dataset.customer_class[i]);
    out.dataset.labels.push_back(truth.label[i]);
    out.series.push_back(population.series[i]);
  }

  truth.training_region_prior =
      empirical_prior_subset(truth.region_idx, out.selected_ids, cfg.n_regions());
  truth.training_class_prior =
      empirical_prior_subset(truth.class_idx, out.selected_ids, cfg.n_classes());
  truth.training_label_prior = empirical_prior_subset(truth.label, out.selected_ids, 2);
  return out;
}

std::vector<double> oracle_weights(const SynthTruth& truth,
                                   const std::vector<std::size_t>& selected_ids) {
  if (selected_ids.empty()) {
    throw std::invalid_argument("oracle_weights: empty selected set");
  }
  std::vector<double> w(selected_ids.size());
  double total = 0.0;
  for (std::size_t j = 0; j < selected_ids.size(); ++j) {
    const double p = truth.selection_prob[selected_ids[j]];
    if (!(p > 0.0) || p > 1.0) {
      throw std::invalid_argument("oracle_weights: selection probabilities must lie in (0, 1]");
    }
    w[j] = 1.0 / p;
    total += w[j];
  }
  const double scale = static_cast<double>(selected_ids.size()) / total;
  for (double& v : w) v *= scale;
  return w;
}

void write_truth_csv(const std::string& path, const SynthPopulation& population) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("write_truth_csv: cannot open '" + path + "'");
  const SynthTruth& truth = population.truth;
  out << "customer_id,selection_prob,label,region,customer_class\n";
  for (std::size_t i = 0; i < population.dataset.n(); ++i) {
    out << population.dataset.ids[i] << ',' << csv::format_double(truth.selection_prob[i]) << ','
        << truth.label[i] << ',' << population.dataset.region[i] << ','
        << population.dataset.customer_class[i] << '\n';
  }
  if (!out) throw data_error("write_truth_csv: write failed for '" + path + "'");
}

namespace serial {

SynthPopulation generate_population(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  const std::size_t n = cfg.population;

  SynthPopulation out;
  out.series.resize(n);
  out.truth.label.resize(n);
  out.truth.region_idx.resize(n);
  out.truth.class_idx.resize(n);
  out.truth.selection_prob.resize(n);
  out.dataset.ids.resize(n);
  out.dataset.region.resize(n);
  out.dataset.customer_class.resize(n);

  const std::vector<double> cum_region = cumulative_weights(cfg.region_mix);
  const std::vector<double> cum_class = cumulative_weights(cfg.class_mix);
  std::vector<double> raw_sel(n);

  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(cfg.seed, StreamTag::customer, i);
    const std::size_t r = rng.discrete(cum_region);
    const std::size_t k = rng.discrete(cum_class);
    const int label = rng.bernoulli(cfg.base_rate[r][k]) ? 1 : 0;
    const bool undetectable = rng.bernoulli(cfg.undetect_region[r]);

    const double sigma = cfg.sigma_region[r] + cfg.sigma_class[k];
    const double depth =
        (label == 1 && !undetectable) ? cfg.depth_region[r] + cfg.depth_class[k] : 0.0;
    MonthlyTimeSeries& ts = out.series[i];
    ts.customer_id = customer_id(i);
    double mean = 0.0;
    for (int t = 0; t < kMonths; ++t) {
      const double seasonal =
          1.0 + cfg.amp[r] * std::sin(kTwoPi * (static_cast<double>(t) + cfg.phase[r]) / 12.0);
      double v = cfg.base_level * cfg.class_scale[k] * seasonal * std::exp(sigma * rng.normal());
      if (t >= cfg.onset) v *= 1.0 - depth;
      ts.readings[static_cast<std::size_t>(t)] = v;
      ts.period_days[static_cast<std::size_t>(t)] = 30;
      mean += v;
    }
    mean /= static_cast<double>(kMonths);

    out.truth.label[i] = label;
    out.truth.region_idx[i] = static_cast<int>(r);
    out.truth.class_idx[i] = static_cast<int>(k);
    out.dataset.ids[i] = ts.customer_id;
    out.dataset.region[i] = "R" + std::to_string(r);
    out.dataset.customer_class[i] = "C" + std::to_string(k);
    raw_sel[i] = std::exp(cfg.sel_region[r] + cfg.sel_class[k] + cfg.gamma * std::log(mean) +
                          cfg.delta * static_cast<double>(label));
  }

  double raw_total = 0.0;
  for (const double v : raw_sel) raw_total += v;
  const double scale = cfg.target_train / raw_total;
  for (std::size_t i = 0; i < n; ++i) {
    out.truth.selection_prob[i] = std::clamp(scale * raw_sel[i], 1e-9, 1.0);
  }

  out.truth.population_region_prior = empirical_prior(out.truth.region_idx, cfg.n_regions());
  out.truth.population_class_prior = empirical_prior(out.truth.class_idx, cfg.n_classes());
  out.truth.population_label_prior = empirical_prior(out.truth.label, 2);
  return out;
}

}  // namespace serial

}  // namespace ntl
