#include "ntl/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ntl/csv.hpp"
#include "ntl/rng.hpp"

namespace ntl {

namespace {

constexpr double kDensityFloor = 1e-300;

void validate_priors(const std::map<int, double>& priors, const char* which) {
  double sum = 0.0;
  for (const auto& [cls, p] : priors) {
    (void)cls;
    if (!(p > 0.0)) throw data_error(std::string("class priors: nonpositive entry in ") + which);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw data_error(std::string("class priors: ") + which + " does not sum to 1");
  }
}

std::map<int, double> empirical_priors(const std::vector<int>& labels) {
  std::map<int, std::size_t> counts;
  for (const int y : labels) ++counts[y];
  std::map<int, double> priors;
  for (const auto& [cls, c] : counts) {
    priors[cls] = static_cast<double>(c) / static_cast<double>(labels.size());
  }
  return priors;
}

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

std::size_t feature_index(const LabeledDataset& ds, const std::string& name) {
  for (std::size_t k = 0; k < ds.feature_names.size(); ++k) {
    if (ds.feature_names[k] == name) return k;
  }
  throw config_error("unknown feature for covariate shift: " + name);
}

std::vector<double> feature_column(const LabeledDataset& ds, std::size_t k) {
  std::vector<double> col(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) col[i] = ds.row(i)[k];
  return col;
}

}  // namespace

CategoricalTable categorical_table(const std::vector<std::string>& values) {
  if (values.empty()) throw data_error("categorical_table: empty values");
  CategoricalTable t;
  for (const auto& v : values) t.freq[v] += 1.0;
  for (auto& [cat, c] : t.freq) {
    (void)cat;
    c /= static_cast<double>(values.size());
  }
  return t;
}

std::vector<double> class_imbalance_weights(const std::vector<int>& labels,
                                            const ClassPriorSpec& spec) {
  validate_priors(spec.train_priors, "train");
  validate_priors(spec.target_priors, "target");
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto train_it = spec.train_priors.find(labels[i]);
    const auto target_it = spec.target_priors.find(labels[i]);
    if (train_it == spec.train_priors.end() || target_it == spec.target_priors.end()) {
      throw data_error("class_imbalance_weights: label missing from priors");
    }
    w[i] = target_it->second / train_it->second;
  }
  return w;
}

std::vector<double> covariate_shift_weights(const std::vector<double>& values,
                                            const CovariateShiftSpec& spec) {
  if (spec.clip_lo > spec.clip_hi) throw config_error("covariate shift: clip_lo > clip_hi");
  std::vector<double> w(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw data_error("covariate_shift_weights: non-finite value");
    const double ref = kde_eval(spec.reference_model, values[i]);
    const double train = std::max(kde_eval(spec.train_model, values[i]), kDensityFloor);
    w[i] = clip(ref / train, spec.clip_lo, spec.clip_hi);
  }
  return w;
}

std::vector<double> categorical_shift_weights(const std::vector<std::string>& values,
                                              const CategoricalTable& train,
                                              const CategoricalTable& reference,
                                              double clip_lo, double clip_hi) {
  std::vector<double> w(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto train_it = train.freq.find(values[i]);
    if (train_it == train.freq.end()) {
      throw data_error("categorical_shift_weights: category absent from train table: " + values[i]);
    }
    const auto ref_it = reference.freq.find(values[i]);
    const double ref = ref_it == reference.freq.end() ? 0.0 : ref_it->second;
    w[i] = clip(ref / train_it->second, clip_lo, clip_hi);
  }
  return w;
}

std::vector<double> combine_weights_harmonic(const std::vector<double>& per_bias,
                                             std::size_t n_biases) {
  if (n_biases == 0) throw data_error("combine_weights_harmonic: zero biases");
  if (per_bias.size() % n_biases != 0) {
    throw data_error("combine_weights_harmonic: matrix shape mismatch");
  }
  const std::size_t n = per_bias.size() / n_biases;
  std::vector<double> combined(n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t k = 0; k < n_biases; ++k) {
      const double w = per_bias[i * n_biases + k];
      if (!(w > 0.0)) throw data_error("combine_weights_harmonic: nonpositive weight");
      denom += 1.0 / w;
    }
    combined[i] = static_cast<double>(n_biases) / denom;
  }
  return combined;
}

WeightSet build_weight_set(const LabeledDataset& dataset, const LabeledDataset& reference,
                           const std::vector<std::string>& biases, const WeightOptions& options) {
  if (biases.empty()) throw config_error("build_weight_set: empty bias list");
  const std::size_t n = dataset.n();
  if (n == 0) throw data_error("build_weight_set: empty dataset");

  WeightSet ws;
  ws.bias_names = biases;
  ws.n_biases = biases.size();
  ws.per_bias.assign(n * ws.n_biases, 1.0);

  for (std::size_t k = 0; k < biases.size(); ++k) {
    const std::string& bias = biases[k];
    std::vector<double> col;
    if (bias == "class_imbalance") {
      if (!dataset.has_labels()) throw data_error("class_imbalance bias needs labels");
      ClassPriorSpec spec;
      spec.train_priors = empirical_priors(dataset.labels);
      if (options.target_priors) {
        spec.target_priors = *options.target_priors;
      } else if (reference.has_labels()) {
        spec.target_priors = empirical_priors(reference.labels);
      } else {
        spec.target_priors = {{0, 0.5}, {1, 0.5}};
      }
      col = class_imbalance_weights(dataset.labels, spec);
      for (double& w : col) w = clip(w, options.clip_lo, options.clip_hi);
    } else if (bias == "spatial") {
      if (reference.n() == 0) throw config_error("spatial bias needs a reference dataset");
      col = categorical_shift_weights(dataset.region, categorical_table(dataset.region),
                                      categorical_table(reference.region), options.clip_lo,
                                      options.clip_hi);
    } else if (bias == "customer_class") {
      if (reference.n() == 0) throw config_error("customer_class bias needs a reference dataset");
      col = categorical_shift_weights(dataset.customer_class,
                                      categorical_table(dataset.customer_class),
                                      categorical_table(reference.customer_class),
                                      options.clip_lo, options.clip_hi);
    } else if (bias.rfind("feature:", 0) == 0) {
      if (reference.n() == 0) throw config_error("feature bias needs a reference dataset");
      const std::string name = bias.substr(8);
      const std::vector<double> train_col = feature_column(dataset, feature_index(dataset, name));
      const std::vector<double> ref_col =
          feature_column(reference, feature_index(reference, name));
      // Independent model selection per distribution; streams keyed by the
      // bias index and side so added biases never disturb earlier columns.
      const KdeSelection train_sel = kde_select(
          train_col, options.kde_spec, mix_stream(options.seed, StreamTag::generic, 2 * k),
          options.threads);
      const KdeSelection ref_sel = kde_select(
          ref_col, options.kde_spec, mix_stream(options.seed, StreamTag::generic, 2 * k + 1),
          options.threads);
      CovariateShiftSpec spec;
      spec.attribute = name;
      spec.train_model = kde_fit(train_col, train_sel.kernel, train_sel.bandwidth);
      spec.reference_model = kde_fit(ref_col, ref_sel.kernel, ref_sel.bandwidth);
      spec.clip_lo = options.clip_lo;
      spec.clip_hi = options.clip_hi;
      col = covariate_shift_weights(train_col, spec);
    } else {
      throw config_error("build_weight_set: unknown bias " + bias);
    }
    for (std::size_t i = 0; i < n; ++i) ws.per_bias[i * ws.n_biases + k] = col[i];
  }

  std::vector<double> combined = combine_weights_harmonic(ws.per_bias, ws.n_biases);
  double sum = 0.0;
  for (const double w : combined) sum += w;
  ws.norm_scale = static_cast<double>(n) / sum;
  ws.combined.resize(n);
  for (std::size_t i = 0; i < n; ++i) ws.combined[i] = combined[i] * ws.norm_scale;
  return ws;
}

bool weight_set_consistent(const WeightSet& ws) {
  const std::vector<double> harmonic = combine_weights_harmonic(ws.per_bias, ws.n_biases);
  if (harmonic.size() != ws.combined.size()) return false;
  for (std::size_t i = 0; i < harmonic.size(); ++i) {
    if (harmonic[i] * ws.norm_scale != ws.combined[i]) return false;
  }
  return true;
}

void write_weights_csv(const std::string& path, const std::vector<std::string>& ids,
                       const WeightSet& ws) {
  if (ids.size() != ws.n_examples()) throw data_error("write_weights_csv: id count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("write_weights_csv: cannot open " + path);
  out << "customer_id";
  for (const auto& bias : ws.bias_names) {
    std::string col = bias == "class_imbalance" ? "class" : bias;
    std::replace(col.begin(), col.end(), ':', '_');
    out << ",w_" << col;
  }
  out << ",w_combined\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (std::size_t k = 0; k < ws.n_biases; ++k) {
      out << ',' << csv::format_double(ws.bias_row(i)[k]);
    }
    out << ',' << csv::format_double(ws.combined[i]) << '\n';
  }
}

}  // namespace ntl
