#include "ntl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntl/forest.hpp"

namespace ntl {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("roc_auc: scores and labels must be non-empty and aligned");
  }
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++pos;
    } else if (labels[i] == 0) {
      ++neg;
    } else {
      throw std::invalid_argument("roc_auc: labels must be 0 or 1");
    }
    if (!std::isfinite(scores[i])) {
      throw std::invalid_argument("roc_auc: scores must be finite");
    }
  }
  if (pos == 0 || neg == 0) {
    throw std::invalid_argument("roc_auc: both classes must be present");
  }

  // Rank statistic with average ranks over tie groups; equals
  // (concordant + 0.5 * tied) / (P * N) exactly, because tie-group average
  // ranks are half-integers and all partial sums stay integral multiples
  // of 0.5 (exact in doubles at test scales).
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  const double auc = (rank_sum_pos - p * (p + 1.0) / 2.0) /
                     (p * static_cast<double>(neg));
  return auc;
}

EvaluationReport run_bias_ladder(const LabeledDataset& dataset, const LabeledDataset& reference,
                                 const LadderConfig& ladder, std::uint64_t seed, int threads) {
  if (ladder.steps.empty()) {
    throw config_error("run_bias_ladder: ladder must contain at least one step");
  }
  if (!dataset.has_labels()) {
    throw data_error("run_bias_ladder: dataset must be labeled");
  }
  if (dataset.x.empty() || dataset.n_features() == 0) {
    throw data_error("run_bias_ladder: dataset has no feature matrix attached");
  }

  const std::size_t n = dataset.n();
  const std::size_t d = dataset.n_features();

  // Paired design: folds depend only on (seed, labels), never on the step.
  const std::vector<int> fold_ids = stratified_folds(dataset.labels, ladder.folds, seed);

  // Per-bias weight columns are identical across steps, so they are built
  // once for the union of all step bias sets and recombined per step.
  std::vector<std::string> union_biases;
  for (const LadderStep& step : ladder.steps) {
    for (const std::string& b : step.biases) {
      if (std::find(union_biases.begin(), union_biases.end(), b) == union_biases.end()) {
        union_biases.push_back(b);
      }
    }
  }
  WeightOptions wopts = ladder.weight_options;
  wopts.seed = seed;
  wopts.threads = threads;
  WeightSet union_set;
  if (!union_biases.empty()) {
    union_set = build_weight_set(dataset, reference, union_biases, wopts);
  }

  EvaluationReport report;
  report.seed = seed;
  report.dataset_digest = digest_hex(dataset_digest(dataset));

  for (const LadderStep& step : ladder.steps) {
    std::vector<double> w(n, 1.0);
    if (!step.biases.empty()) {
      std::vector<std::size_t> cols;
      for (const std::string& b : step.biases) {
        const auto it = std::find(union_set.bias_names.begin(), union_set.bias_names.end(), b);
        if (it == union_set.bias_names.end()) {
          throw config_error("run_bias_ladder: unknown bias '" + b + "'");
        }
        cols.push_back(static_cast<std::size_t>(it - union_set.bias_names.begin()));
      }
      std::vector<double> per_bias(n * cols.size());
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = union_set.bias_row(i);
        for (std::size_t c = 0; c < cols.size(); ++c) {
          per_bias[i * cols.size() + c] = row[cols[c]];
        }
      }
      const std::vector<double> harmonic = combine_weights_harmonic(per_bias, cols.size());
      double total = 0.0;
      for (const double h : harmonic) total += h;
      const double scale = static_cast<double>(n) / total;
      for (std::size_t i = 0; i < n; ++i) w[i] = harmonic[i] * scale;
    }

    const SearchResult search =
        random_search(dataset.x, n, d, dataset.labels, w, ladder.n_models, ladder.folds, seed,
                      threads, fold_ids);

    LadderStepResult res;
    res.label = step.label;
    res.biases = step.biases;
    res.fold_aucs = search.best_fold_aucs;
    res.mean_auc = search.best_mean_auc;
    report.configurations.push_back(std::move(res));
  }
  return report;
}

std::string report_json(const EvaluationReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const LadderStepResult& res : report.configurations) {
    arr.push_back({{"biases", res.biases},
                   {"fold_aucs", res.fold_aucs},
                   {"mean_auc", res.mean_auc}});
  }
  return arr.dump();
}

std::string report_table(const EvaluationReport& report) {
  std::string out;
  char buf[64];
  std::size_t label_width = 10;
  for (const LadderStepResult& res : report.configurations) {
    label_width = std::max(label_width, res.label.size());
  }
  out += "bias set";
  out.append(label_width - 7, ' ');
  out += " mean_auc  folds\n";
  for (const LadderStepResult& res : report.configurations) {
    out += res.label;
    out.append(label_width + 1 - res.label.size(), ' ');
    std::snprintf(buf, sizeof(buf), "%.5f", res.mean_auc);
    out += buf;
    out += "  ";
    for (std::size_t i = 0; i < res.fold_aucs.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.5f", res.fold_aucs[i]);
      if (i > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ntl
