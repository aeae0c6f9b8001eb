#include "ntl/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "ntl/csv.hpp"
#include "ntl/evaluation.hpp"

namespace ntl {

namespace {

int resolve_threads(int threads) {
#ifdef _OPENMP
  return threads > 0 ? threads : omp_get_max_threads();
#else
  (void)threads;
  return 1;
#endif
}

struct SortItem {
  double v;
  int y;
  double w;
};

// Per-node split candidate; rows are positions into the fit-time arrays.
struct NodeCtx {
  int id = 0;
  int depth = 0;
  std::vector<int> rows;
  double w0 = 0.0;
  double w1 = 0.0;
  double impurity = 0.0;
  bool has_split = false;
  int feat = -1;
  double thr = 0.0;
  double gain = 0.0;
};

struct FrontierOrder {
  // Largest gain first; equal gains fall back to the earliest-created node.
  bool operator()(const std::pair<double, int>& a, const std::pair<double, int>& b) const {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  }
};

struct Scratch {
  std::vector<SortItem> items;
  std::vector<std::size_t> feats;
};

void node_sums(const NodeCtx& ctx, const std::vector<int>& ys, const std::vector<double>& ws,
               double* w0, double* w1) {
  double a = 0.0, b = 0.0;
  for (const int pos : ctx.rows) {
    if (ys[pos] == 1) {
      b += ws[pos];
    } else {
      a += ws[pos];
    }
  }
  *w0 = a;
  *w1 = b;
}

// Scores every (feature, threshold) candidate for the node and stores the
// best one. Candidate features are a fresh random ceil(sqrt(d)) subset,
// evaluated in ascending index order so that a strict improvement test
// breaks ties toward the lowest feature index, then the lowest threshold.
void find_best_split(const ColMatrix& X, const std::vector<int>& row_ids,
                     const std::vector<int>& ys, const std::vector<double>& ws,
                     const ForestParams& params, RngStream& rng, Scratch& scratch, NodeCtx& ctx) {
  ctx.has_split = false;
  const std::size_t k = ctx.rows.size();
  if (ctx.depth >= params.max_depth) return;
  if (k < static_cast<std::size_t>(params.min_samples_split)) return;
  if (k < 2 * static_cast<std::size_t>(params.min_samples_leaf)) return;
  if (ctx.impurity <= 0.0) return;

  const std::size_t d = X.n_cols;
  const std::size_t m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  rng.sample_indices(d, m, scratch.feats);
  std::sort(scratch.feats.begin(), scratch.feats.end());

  const double w_total = ctx.w0 + ctx.w1;
  const double parent_metric = w_total * ctx.impurity;
  const std::size_t msl = static_cast<std::size_t>(params.min_samples_leaf);

  auto& items = scratch.items;
  items.resize(k);
  double best_gain = 0.0;
  for (const std::size_t f : scratch.feats) {
    for (std::size_t i = 0; i < k; ++i) {
      const int pos = ctx.rows[i];
      items[i].v = X.at(static_cast<std::size_t>(row_ids[static_cast<std::size_t>(pos)]), f);
      items[i].y = ys[pos];
      items[i].w = ws[pos];
    }
    std::sort(items.begin(), items.end(),
              [](const SortItem& a, const SortItem& b) { return a.v < b.v; });
    if (items.front().v == items.back().v) continue;

    double wl0 = 0.0, wl1 = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      if (items[i].y == 1) {
        wl1 += items[i].w;
      } else {
        wl0 += items[i].w;
      }
      if (items[i + 1].v == items[i].v) continue;
      const std::size_t cl = i + 1;
      const std::size_t cr = k - cl;
      if (cl < msl || cr < msl) continue;
      // The node totals were accumulated in row order, the prefix in sorted
      // order; when one class sits entirely left of the boundary the
      // remainder is exactly zero in real arithmetic but can round negative.
      const double wr0 = std::max(0.0, ctx.w0 - wl0);
      const double wr1 = std::max(0.0, ctx.w1 - wl1);
      const double wl = wl0 + wl1;
      const double wr = wr0 + wr1;
      if (wl <= 0.0 || wr <= 0.0) continue;
      const double child_metric =
          wl * weighted_impurity(wl0, wl1, params.criterion) +
          wr * weighted_impurity(wr0, wr1, params.criterion);
      const double gain = parent_metric - child_metric;
      if (gain > best_gain) {
        best_gain = gain;
        ctx.has_split = true;
        ctx.feat = static_cast<int>(f);
        ctx.thr = items[i].v + (items[i + 1].v - items[i].v) / 2.0;
        ctx.gain = gain;
      }
    }
  }
}

}  // namespace

const char* criterion_name(Criterion c) {
  return c == Criterion::gini ? "gini" : "entropy";
}

Criterion criterion_from_name(const std::string& name) {
  if (name == "gini") return Criterion::gini;
  if (name == "entropy") return Criterion::entropy;
  throw config_error("criterion_from_name: unknown criterion '" + name + "'");
}

void validate_forest_params(const ForestParams& params) {
  if (params.max_leaves < 2 || params.max_leaves >= 1000) {
    throw config_error("validate_forest_params: max_leaves must lie in [2, 1000)");
  }
  if (params.max_depth < 1 || params.max_depth >= 50) {
    throw config_error("validate_forest_params: max_depth must lie in [1, 50)");
  }
  if (params.min_samples_leaf < 1 || params.min_samples_leaf >= 1000) {
    throw config_error("validate_forest_params: min_samples_leaf must lie in [1, 1000)");
  }
  if (params.min_samples_split < 2 || params.min_samples_split >= 50) {
    throw config_error("validate_forest_params: min_samples_split must lie in [2, 50)");
  }
  if (params.n_estimators < 1) {
    throw config_error("validate_forest_params: n_estimators must be positive");
  }
}

ColMatrix to_col_major(const std::vector<double>& row_major, std::size_t n, std::size_t d) {
  if (row_major.size() != n * d) {
    throw std::invalid_argument("to_col_major: matrix size does not match n * d");
  }
  ColMatrix X;
  X.n_rows = n;
  X.n_cols = d;
  X.data.resize(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      X.data[c * n + r] = row_major[r * d + c];
    }
  }
  return X;
}

double weighted_impurity(double w0, double w1, Criterion criterion) {
  if (w0 < 0.0 || w1 < 0.0 || w0 + w1 <= 0.0) {
    throw std::invalid_argument("weighted_impurity: class weight sums must be nonnegative with a positive total");
  }
  const double total = w0 + w1;
  const double p0 = w0 / total;
  const double p1 = w1 / total;
  if (criterion == Criterion::gini) {
    return 1.0 - p0 * p0 - p1 * p1;
  }
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

Tree fit_tree(const ColMatrix& X, const std::vector<int>& rows, const std::vector<int>& y,
              const std::vector<double>& w, const ForestParams& params, RngStream& rng) {
  validate_forest_params(params);
  if (rows.empty()) throw std::invalid_argument("fit_tree: empty row set");

  // Position-indexed copies so node row lists stay small ints; feature
  // lookups go through row_ids into the shared matrix (columns are small
  // enough to stay cache resident, so no per-tree matrix copy is needed).
  const std::size_t k = rows.size();
  std::vector<int> ys(k);
  std::vector<double> ws(k);
  for (std::size_t i = 0; i < k; ++i) {
    const int r = rows[i];
    if (r < 0 || static_cast<std::size_t>(r) >= X.n_rows) {
      throw std::invalid_argument("fit_tree: row index out of range");
    }
    if (y[static_cast<std::size_t>(r)] != 0 && y[static_cast<std::size_t>(r)] != 1) {
      throw std::invalid_argument("fit_tree: labels must be 0 or 1");
    }
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
      throw std::invalid_argument("fit_tree: weights must be positive and finite");
    }
    ys[i] = y[static_cast<std::size_t>(r)];
    ws[i] = w[i];
  }

  Tree tree;
  std::vector<NodeCtx> ctxs;
  Scratch scratch;

  NodeCtx root;
  root.id = 0;
  root.depth = 0;
  root.rows.resize(k);
  for (std::size_t i = 0; i < k; ++i) root.rows[i] = static_cast<int>(i);
  node_sums(root, ys, ws, &root.w0, &root.w1);
  root.impurity = weighted_impurity(root.w0, root.w1, params.criterion);
  find_best_split(X, rows, ys, ws, params, rng, scratch, root);

  tree.nodes.emplace_back();
  tree.nodes[0].p0 = root.w0 / (root.w0 + root.w1);
  tree.nodes[0].p1 = root.w1 / (root.w0 + root.w1);
  ctxs.push_back(std::move(root));

  std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>, FrontierOrder>
      frontier;
  if (ctxs[0].has_split) frontier.emplace(ctxs[0].gain, 0);

  int leaves = 1;
  int depth = 0;
  while (!frontier.empty() && leaves < params.max_leaves) {
    const int id = frontier.top().second;
    frontier.pop();
    NodeCtx ctx = std::move(ctxs[static_cast<std::size_t>(id)]);

    NodeCtx left, right;
    left.depth = right.depth = ctx.depth + 1;
    for (const int pos : ctx.rows) {
      const std::size_t r = static_cast<std::size_t>(rows[static_cast<std::size_t>(pos)]);
      if (X.at(r, static_cast<std::size_t>(ctx.feat)) <= ctx.thr) {
        left.rows.push_back(pos);
      } else {
        right.rows.push_back(pos);
      }
    }
    // The accepted candidate guaranteed both sides non-empty.
    left.id = static_cast<int>(tree.nodes.size());
    right.id = left.id + 1;
    node_sums(left, ys, ws, &left.w0, &left.w1);
    node_sums(right, ys, ws, &right.w0, &right.w1);
    left.impurity = weighted_impurity(left.w0, left.w1, params.criterion);
    right.impurity = weighted_impurity(right.w0, right.w1, params.criterion);

    TreeNode& parent = tree.nodes[static_cast<std::size_t>(id)];
    parent.feature = ctx.feat;
    parent.threshold = ctx.thr;
    parent.left = left.id;
    parent.right = right.id;

    for (NodeCtx* child : {&left, &right}) {
      TreeNode node;
      const double total = child->w0 + child->w1;
      node.p0 = child->w0 / total;
      node.p1 = child->w1 / total;
      tree.nodes.push_back(node);
    }
    depth = std::max(depth, ctx.depth + 1);
    leaves += 1;  // one leaf replaced by two

    // Candidate-feature draws happen in child-creation order (left, right).
    find_best_split(X, rows, ys, ws, params, rng, scratch, left);
    find_best_split(X, rows, ys, ws, params, rng, scratch, right);
    const int left_id = left.id;
    const int right_id = right.id;
    ctxs.push_back(std::move(left));
    ctxs.push_back(std::move(right));
    if (leaves < params.max_leaves) {
      if (ctxs[static_cast<std::size_t>(left_id)].has_split) {
        frontier.emplace(ctxs[static_cast<std::size_t>(left_id)].gain, left_id);
      }
      if (ctxs[static_cast<std::size_t>(right_id)].has_split) {
        frontier.emplace(ctxs[static_cast<std::size_t>(right_id)].gain, right_id);
      }
    }
  }

  tree.leaf_count = leaves;
  tree.depth = depth;
  return tree;
}

ForestModel fit_forest_rows(const ColMatrix& X, const std::vector<int>& rows,
                            const std::vector<int>& y, const std::vector<double>& w,
                            const ForestParams& params, std::uint64_t seed, int threads) {
  validate_forest_params(params);
  if (rows.empty()) throw std::invalid_argument("fit_forest_rows: empty row set");
  if (rows.size() != w.size()) {
    throw std::invalid_argument("fit_forest_rows: rows and weights must align");
  }

  ForestModel model;
  model.params = params;
  model.feature_count = X.n_cols;
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));

  const std::size_t k = rows.size();
  const std::vector<double> cum = cumulative_weights(w);
  if (!(cum.back() > 0.0) || !std::isfinite(cum.back())) {
    throw std::invalid_argument("fit_forest_rows: weights must sum to a positive finite value");
  }

  const int want = resolve_threads(threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(want)
#endif
  for (int t = 0; t < params.n_estimators; ++t) {
    RngStream rng(seed, StreamTag::forest_tree, static_cast<std::uint64_t>(t));
    std::vector<int> boot_rows(k);
    std::vector<double> boot_w(k);
    if (params.weighted_bootstrap) {
      // Resample proportional to weights; copies carry unit weight.
      for (std::size_t i = 0; i < k; ++i) {
        boot_rows[i] = rows[rng.discrete(cum)];
        boot_w[i] = 1.0;
      }
    } else {
      // Uniform bootstrap; sample weights stay in the split criterion.
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1));
        boot_rows[i] = rows[j];
        boot_w[i] = w[j];
      }
    }
    model.trees[static_cast<std::size_t>(t)] = fit_tree(X, boot_rows, y, boot_w, params, rng);
  }
  (void)want;
  return model;
}

ForestModel fit_forest(const std::vector<double>& x_row_major, std::size_t n, std::size_t d,
                       const std::vector<int>& y, const std::vector<double>& w,
                       const ForestParams& params, std::uint64_t seed, int threads) {
  if (y.size() != n || w.size() != n) {
    throw std::invalid_argument("fit_forest: X, y, w sizes must agree");
  }
  for (std::size_t i = 0; i < x_row_major.size(); ++i) {
    if (!std::isfinite(x_row_major[i])) {
      throw std::invalid_argument("fit_forest: feature matrix must be finite");
    }
  }
  const ColMatrix X = to_col_major(x_row_major, n, d);
  std::vector<int> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
  return fit_forest_rows(X, rows, y, w, params, seed, threads);
}

double predict_tree(const Tree& tree, const double* x) {
  int id = 0;
  while (tree.nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    id = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return tree.nodes[static_cast<std::size_t>(id)].p1;
}

double predict_forest(const ForestModel& model, const double* x) {
  double acc = 0.0;
  for (const Tree& tree : model.trees) acc += predict_tree(tree, x);
  return acc / static_cast<double>(model.trees.size());
}

double predict_forest_col(const ForestModel& model, const ColMatrix& X, std::size_t row) {
  double acc = 0.0;
  for (const Tree& tree : model.trees) {
    int id = 0;
    while (tree.nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
      id = X.at(row, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left
                                                                               : node.right;
    }
    acc += tree.nodes[static_cast<std::size_t>(id)].p1;
  }
  return acc / static_cast<double>(model.trees.size());
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw config_error("stratified_folds: folds must be at least 2");
  std::vector<int> fold_of(labels.size(), -1);
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) idx.push_back(i);
    }
    if (idx.size() < static_cast<std::size_t>(folds)) {
      throw data_error("stratified_folds: class " + std::to_string(cls) +
                       " has fewer examples than folds; every fold needs both classes");
    }
    RngStream rng(seed, StreamTag::folds, static_cast<std::uint64_t>(cls));
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      fold_of[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(folds));
    }
  }
  return fold_of;
}

ForestParams sample_forest_params(RngStream& rng) {
  ForestParams p;
  p.max_leaves = static_cast<int>(rng.uniform_int(2, 999));
  p.max_depth = static_cast<int>(rng.uniform_int(1, 49));
  p.criterion = rng.uniform_int(0, 1) == 0 ? Criterion::entropy : Criterion::gini;
  p.min_samples_leaf = static_cast<int>(rng.uniform_int(1, 999));
  p.min_samples_split = static_cast<int>(rng.uniform_int(2, 49));
  p.n_estimators = 20;
  return p;
}

SearchResult random_search(const std::vector<double>& x_row_major, std::size_t n, std::size_t d,
                           const std::vector<int>& y, const std::vector<double>& w, int n_models,
                           int folds, std::uint64_t seed, int threads,
                           const std::vector<int>& fold_ids) {
  if (n_models < 1) throw config_error("random_search: n_models must be positive");
  if (y.size() != n || w.size() != n) {
    throw std::invalid_argument("random_search: X, y, w sizes must agree");
  }
  const ColMatrix X = to_col_major(x_row_major, n, d);
  const std::vector<int> fold_of =
      fold_ids.empty() ? stratified_folds(y, folds, seed) : fold_ids;
  if (fold_of.size() != n) {
    throw std::invalid_argument("random_search: fold ids must cover every example");
  }

  std::vector<ForestParams> params(static_cast<std::size_t>(n_models));
  for (int i = 0; i < n_models; ++i) {
    RngStream rng(seed, StreamTag::forest_params, static_cast<std::uint64_t>(i));
    params[static_cast<std::size_t>(i)] = sample_forest_params(rng);
  }

  const int total = n_models * folds;
  std::vector<double> task_auc(static_cast<std::size_t>(total), 0.0);
  const int want = resolve_threads(threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(want)
#endif
  for (int task = 0; task < total; ++task) {
    const int mi = task / folds;
    const int fi = task % folds;
    std::vector<int> train_rows;
    std::vector<double> train_w;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == fi) {
        held.push_back(i);
      } else {
        train_rows.push_back(static_cast<int>(i));
        train_w.push_back(w[i]);
      }
    }
    const std::uint64_t forest_seed =
        mix_stream(seed, StreamTag::search_task, static_cast<std::uint64_t>(task));
    const ForestModel model = fit_forest_rows(X, train_rows, y, train_w,
                                              params[static_cast<std::size_t>(mi)],
                                              forest_seed, 1);
    std::vector<double> scores(held.size());
    std::vector<int> held_y(held.size());
    for (std::size_t j = 0; j < held.size(); ++j) {
      scores[j] = predict_forest_col(model, X, held[j]);
      held_y[j] = y[held[j]];
    }
    task_auc[static_cast<std::size_t>(task)] = roc_auc(scores, held_y);
  }
  (void)want;

  SearchResult result;
  result.models.resize(static_cast<std::size_t>(n_models));
  for (int mi = 0; mi < n_models; ++mi) {
    SearchModelResult& mr = result.models[static_cast<std::size_t>(mi)];
    mr.params = params[static_cast<std::size_t>(mi)];
    mr.fold_aucs.resize(static_cast<std::size_t>(folds));
    double acc = 0.0;
    for (int fi = 0; fi < folds; ++fi) {
      const double a = task_auc[static_cast<std::size_t>(mi * folds + fi)];
      mr.fold_aucs[static_cast<std::size_t>(fi)] = a;
      acc += a;
    }
    mr.mean_auc = acc / static_cast<double>(folds);
    if (result.best_index < 0 || mr.mean_auc > result.best_mean_auc) {
      result.best_index = mi;
      result.best_mean_auc = mr.mean_auc;
    }
  }
  result.best_params = result.models[static_cast<std::size_t>(result.best_index)].params;
  result.best_fold_aucs = result.models[static_cast<std::size_t>(result.best_index)].fold_aucs;
  return result;
}

std::string model_json(const ForestModel& model) {
  nlohmann::json j;
  j["feature_count"] = model.feature_count;
  j["params"] = {
      {"max_leaves", model.params.max_leaves},
      {"max_depth", model.params.max_depth},
      {"criterion", criterion_name(model.params.criterion)},
      {"min_samples_leaf", model.params.min_samples_leaf},
      {"min_samples_split", model.params.min_samples_split},
      {"n_estimators", model.params.n_estimators},
      {"weighted_bootstrap", model.params.weighted_bootstrap},
  };
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
      if (node.feature >= 0) {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right}});
      } else {
        nodes.push_back({{"p0", node.p0}, {"p1", node.p1}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)},
                     {"leaf_count", tree.leaf_count},
                     {"depth", tree.depth}});
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

void write_search_csv(const std::string& path, const SearchResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("write_search_csv: cannot open '" + path + "'");
  out << "model_id,max_leaves,max_depth,criterion,min_samples_leaf,min_samples_split,fold,auc\n";
  for (std::size_t mi = 0; mi < result.models.size(); ++mi) {
    const SearchModelResult& mr = result.models[mi];
    for (std::size_t fi = 0; fi < mr.fold_aucs.size(); ++fi) {
      out << mi << ',' << mr.params.max_leaves << ',' << mr.params.max_depth << ','
          << criterion_name(mr.params.criterion) << ',' << mr.params.min_samples_leaf << ','
          << mr.params.min_samples_split << ',' << fi << ','
          << csv::format_double(mr.fold_aucs[fi]) << '\n';
    }
  }
  if (!out) throw data_error("write_search_csv: write failed for '" + path + "'");
}

namespace serial {

namespace {

ForestModel fit_rows(const ColMatrix& X, const std::vector<int>& rows, const std::vector<int>& y,
                     const std::vector<double>& w, const ForestParams& params,
                     std::uint64_t seed) {
  validate_forest_params(params);
  if (rows.empty()) throw std::invalid_argument("fit_forest_rows: empty row set");
  if (rows.size() != w.size()) {
    throw std::invalid_argument("fit_forest_rows: rows and weights must align");
  }

  ForestModel model;
  model.params = params;
  model.feature_count = X.n_cols;
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));

  const std::size_t k = rows.size();
  const std::vector<double> cum = cumulative_weights(w);
  if (!(cum.back() > 0.0) || !std::isfinite(cum.back())) {
    throw std::invalid_argument("fit_forest_rows: weights must sum to a positive finite value");
  }

  for (int t = 0; t < params.n_estimators; ++t) {
    RngStream rng(seed, StreamTag::forest_tree, static_cast<std::uint64_t>(t));
    std::vector<int> boot_rows(k);
    std::vector<double> boot_w(k);
    if (params.weighted_bootstrap) {
      for (std::size_t i = 0; i < k; ++i) {
        boot_rows[i] = rows[rng.discrete(cum)];
        boot_w[i] = 1.0;
      }
    } else {
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1));
        boot_rows[i] = rows[j];
        boot_w[i] = w[j];
      }
    }
    model.trees[static_cast<std::size_t>(t)] = fit_tree(X, boot_rows, y, boot_w, params, rng);
  }
  return model;
}

}  // namespace

ForestModel fit_forest(const std::vector<double>& x_row_major, std::size_t n, std::size_t d,
                       const std::vector<int>& y, const std::vector<double>& w,
                       const ForestParams& params, std::uint64_t seed) {
  if (y.size() != n || w.size() != n) {
    throw std::invalid_argument("fit_forest: X, y, w sizes must agree");
  }
  for (std::size_t i = 0; i < x_row_major.size(); ++i) {
    if (!std::isfinite(x_row_major[i])) {
      throw std::invalid_argument("fit_forest: feature matrix must be finite");
    }
  }
  const ColMatrix X = to_col_major(x_row_major, n, d);
  std::vector<int> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
  return fit_rows(X, rows, y, w, params, seed);
}

SearchResult random_search(const std::vector<double>& x_row_major, std::size_t n, std::size_t d,
                           const std::vector<int>& y, const std::vector<double>& w, int n_models,
                           int folds, std::uint64_t seed, const std::vector<int>& fold_ids) {
  if (n_models < 1) throw config_error("random_search: n_models must be positive");
  if (y.size() != n || w.size() != n) {
    throw std::invalid_argument("random_search: X, y, w sizes must agree");
  }
  const ColMatrix X = to_col_major(x_row_major, n, d);
  const std::vector<int> fold_of =
      fold_ids.empty() ? stratified_folds(y, folds, seed) : fold_ids;
  if (fold_of.size() != n) {
    throw std::invalid_argument("random_search: fold ids must cover every example");
  }

  std::vector<ForestParams> params(static_cast<std::size_t>(n_models));
  for (int i = 0; i < n_models; ++i) {
    RngStream rng(seed, StreamTag::forest_params, static_cast<std::uint64_t>(i));
    params[static_cast<std::size_t>(i)] = sample_forest_params(rng);
  }

  const int total = n_models * folds;
  std::vector<double> task_auc(static_cast<std::size_t>(total), 0.0);
  for (int task = 0; task < total; ++task) {
    const int mi = task / folds;
    const int fi = task % folds;
    std::vector<int> train_rows;
    std::vector<double> train_w;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == fi) {
        held.push_back(i);
      } else {
        train_rows.push_back(static_cast<int>(i));
        train_w.push_back(w[i]);
      }
    }
    const std::uint64_t forest_seed =
        mix_stream(seed, StreamTag::search_task, static_cast<std::uint64_t>(task));
    const ForestModel model =
        fit_rows(X, train_rows, y, train_w, params[static_cast<std::size_t>(mi)], forest_seed);
    std::vector<double> scores(held.size());
    std::vector<int> held_y(held.size());
    for (std::size_t j = 0; j < held.size(); ++j) {
      scores[j] = predict_forest_col(model, X, held[j]);
      held_y[j] = y[held[j]];
    }
    task_auc[static_cast<std::size_t>(task)] = roc_auc(scores, held_y);
  }

  SearchResult result;
  result.models.resize(static_cast<std::size_t>(n_models));
  for (int mi = 0; mi < n_models; ++mi) {
    SearchModelResult& mr = result.models[static_cast<std::size_t>(mi)];
    mr.params = params[static_cast<std::size_t>(mi)];
    mr.fold_aucs.resize(static_cast<std::size_t>(folds));
    double acc = 0.0;
    for (int fi = 0; fi < folds; ++fi) {
      const double a = task_auc[static_cast<std::size_t>(mi * folds + fi)];
      mr.fold_aucs[static_cast<std::size_t>(fi)] = a;
      acc += a;
    }
    mr.mean_auc = acc / static_cast<double>(folds);
    if (result.best_index < 0 || mr.mean_auc > result.best_mean_auc) {
      result.best_index = mi;
      result.best_mean_auc = mr.mean_auc;
    }
  }
  result.best_params = result.models[static_cast<std::size_t>(result.best_index)].params;
  result.best_fold_aucs = result.models[static_cast<std::size_t>(result.best_index)].fold_aucs;
  return result;
}

}  // namespace serial

}  // namespace ntl
