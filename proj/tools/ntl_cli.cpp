#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ntl/config.hpp"
#include "ntl/core.hpp"
#include "ntl/evaluation.hpp"
#include "ntl/features.hpp"
#include "ntl/forest.hpp"
#include "ntl/stats_tests.hpp"
#include "ntl/synthgen.hpp"
#include "ntl/weights.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

struct CliArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

// Flag values override config keys; the merged map is what gets digested, so
// a rerun with the same effective configuration reproduces every artifact.
ntl::RunConfig effective_config(const CliArgs& args) {
  ntl::ConfigMap map;
  if (!args.config_path.empty()) map = ntl::parse_config_file(args.config_path);
  if (args.seed) map["seed"] = std::to_string(*args.seed);
  if (args.threads) map["threads"] = std::to_string(*args.threads);
  if (args.out_dir) map["out_dir"] = *args.out_dir;
  ntl::RunConfig cfg = ntl::make_run_config(map);
  if (!cfg.seed) {
    throw ntl::config_error("seed is mandatory: set seed= in the config or pass --seed");
  }
  cfg.synth.seed = *cfg.seed;
  cfg.weight_options.seed = *cfg.seed;
  cfg.weight_options.threads = cfg.threads;
  cfg.ladder.weight_options = cfg.weight_options;
  return cfg;
}

void require_input(const std::string& path, const char* what) {
  if (path.empty()) {
    throw ntl::config_error(std::string(what) + " is required but not configured");
  }
  if (!fs::exists(path)) {
    throw ntl::config_error(std::string(what) + " does not exist: " + path);
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ntl::data_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ntl::data_error("write failed for '" + path + "'");
}

// CSV artifacts embed the config digest as a leading comment line, which the
// loader skips.
void prepend_digest(const std::string& path, const std::string& digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ntl::data_error("cannot reopen '" + path + "'");
  std::ostringstream buf;
  buf << "# config_digest=" << digest << "\n" << in.rdbuf();
  in.close();
  write_text(path, buf.str());
}

void write_manifest(const ntl::RunConfig& cfg, const std::string& subcommand,
                    const std::vector<std::string>& artifacts, json extra = json::object()) {
  json manifest;
  manifest["subcommand"] = subcommand;
  manifest["config_digest"] = ntl::config_digest(cfg.raw);
  manifest["seed"] = *cfg.seed;
  manifest["versions"] = {{"ntl", kVersion}, {"schema", 1}};
  manifest["artifacts"] = artifacts;
  for (auto& [key, value] : extra.items()) manifest[key] = value;
  const std::string path =
      (fs::path(cfg.out_dir) / ("manifest_" + subcommand + ".json")).string();
  write_text(path, manifest.dump(2) + "\n");
}

// Shared ingestion: canonical CSV -> dataset + series, enforcing the
// reject-fraction bound and writing the rejects report when non-empty.
ntl::LoadResult load_checked(const ntl::RunConfig& cfg, const std::string& path,
                             const std::string& rejects_artifact) {
  ntl::LoadResult loaded = ntl::load_dataset(path);
  const std::size_t total = loaded.dataset.n() + loaded.rejects.size();
  if (!loaded.rejects.empty() && !rejects_artifact.empty()) {
    ntl::write_rejects_csv(rejects_artifact, loaded.rejects);
  }
  if (total > 0 && static_cast<double>(loaded.rejects.size()) >
                       cfg.max_reject_fraction * static_cast<double>(total)) {
    throw ntl::data_error("load aborted: " + std::to_string(loaded.rejects.size()) + " of " +
                          std::to_string(total) + " rows rejected (limit " +
                          std::to_string(cfg.max_reject_fraction) + ")");
  }
  return loaded;
}

void attach_default_features(ntl::LabeledDataset& ds,
                             const std::vector<ntl::MonthlyTimeSeries>& series, int threads) {
  ntl::attach_features(ds, series, ntl::default_feature_config(), threads);
}

int cmd_synth(const ntl::RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const std::string digest = ntl::config_digest(cfg.raw);

  ntl::SynthPopulation population = ntl::generate_population(cfg.synth, cfg.threads);
  ntl::SynthTrainingSet training =
      ntl::sample_biased_training(population, population.truth, cfg.synth);

  const std::string pop_path = (fs::path(cfg.out_dir) / "population.csv").string();
  const std::string train_path = (fs::path(cfg.out_dir) / "training.csv").string();
  const std::string truth_path = (fs::path(cfg.out_dir) / "truth.csv").string();
  ntl::save_dataset(pop_path, population.dataset, population.series);
  ntl::save_dataset(train_path, training.dataset, training.series);
  ntl::write_truth_csv(truth_path, population);
  prepend_digest(pop_path, digest);
  prepend_digest(train_path, digest);
  prepend_digest(truth_path, digest);

  const ntl::SynthTruth& truth = population.truth;
  json priors = {
      {"population", {{"region", truth.population_region_prior},
                      {"class", truth.population_class_prior},
                      {"label", truth.population_label_prior}}},
      {"training", {{"region", truth.training_region_prior},
                    {"class", truth.training_class_prior},
                    {"label", truth.training_label_prior}}},
  };
  write_manifest(cfg, "synth", {"population.csv", "training.csv", "truth.csv"},
                 {{"priors", priors}, {"selected", training.dataset.n()}});
  return 0;
}

int cmd_features(const ntl::RunConfig& cfg) {
  require_input(cfg.train_csv, "train_csv");
  fs::create_directories(cfg.out_dir);
  const std::string digest = ntl::config_digest(cfg.raw);
  const std::string rejects_path = (fs::path(cfg.out_dir) / "rejects.csv").string();

  ntl::LoadResult loaded = load_checked(cfg, cfg.train_csv, rejects_path);
  attach_default_features(loaded.dataset, loaded.series, cfg.threads);

  std::vector<std::string> artifacts;
  if (cfg.selection_alpha > 0.0 && loaded.dataset.has_labels()) {
    const ntl::SelectionResult selection =
        ntl::select_features(loaded.dataset.x, loaded.dataset.n_features(),
                             loaded.dataset.labels, cfg.selection_alpha, cfg.threads);
    const std::string sel_path = (fs::path(cfg.out_dir) / "selection.csv").string();
    ntl::write_selection_csv(sel_path, loaded.dataset.feature_names, selection);
    prepend_digest(sel_path, digest);
    artifacts.push_back("selection.csv");
    ntl::apply_selection(loaded.dataset, selection);
  }

  const std::string feat_path = (fs::path(cfg.out_dir) / "features.csv").string();
  ntl::write_feature_matrix_csv(feat_path, loaded.dataset);
  prepend_digest(feat_path, digest);
  artifacts.push_back("features.csv");
  if (!loaded.rejects.empty()) artifacts.push_back("rejects.csv");

  write_manifest(cfg, "features", artifacts,
                 {{"n_examples", loaded.dataset.n()},
                  {"n_features", loaded.dataset.n_features()},
                  {"rejects", loaded.rejects.size()}});
  return 0;
}

// The weights stage needs feature matrices only when a feature:<name> bias is
// requested; categorical and class-imbalance biases work from raw columns.
bool wants_feature_bias(const std::vector<std::string>& biases) {
  for (const std::string& b : biases) {
    if (b.rfind("feature:", 0) == 0) return true;
  }
  return false;
}

bool wants_reference(const std::vector<std::string>& biases) {
  for (const std::string& b : biases) {
    if (b != "class_imbalance") return true;
  }
  return false;
}

int cmd_weights(const ntl::RunConfig& cfg) {
  require_input(cfg.train_csv, "train_csv");
  fs::create_directories(cfg.out_dir);
  const std::string digest = ntl::config_digest(cfg.raw);

  std::vector<std::string> biases = cfg.weight_biases;
  if (biases.empty()) biases = {"class_imbalance", "spatial", "customer_class"};

  ntl::LoadResult train = load_checked(cfg, cfg.train_csv, "");
  ntl::LoadResult reference;
  if (wants_reference(biases)) {
    require_input(cfg.reference_csv, "reference_csv (a covariate bias is requested)");
    reference = load_checked(cfg, cfg.reference_csv, "");
  }
  if (wants_feature_bias(biases)) {
    attach_default_features(train.dataset, train.series, cfg.threads);
    attach_default_features(reference.dataset, reference.series, cfg.threads);
  }

  const ntl::WeightSet ws =
      ntl::build_weight_set(train.dataset, reference.dataset, biases, cfg.weight_options);
  const std::string weights_path = (fs::path(cfg.out_dir) / "weights.csv").string();
  ntl::write_weights_csv(weights_path, train.dataset.ids, ws);
  prepend_digest(weights_path, digest);

  write_manifest(cfg, "weights", {"weights.csv"},
                 {{"biases", biases}, {"n_examples", ws.n_examples()}});
  return 0;
}

int cmd_train(const ntl::RunConfig& cfg) {
  require_input(cfg.train_csv, "train_csv");
  fs::create_directories(cfg.out_dir);
  const std::string digest = ntl::config_digest(cfg.raw);

  ntl::LoadResult train = load_checked(cfg, cfg.train_csv, "");
  if (!train.dataset.has_labels()) {
    throw ntl::data_error("train: training CSV must be labeled");
  }
  attach_default_features(train.dataset, train.series, cfg.threads);
  if (cfg.selection_alpha > 0.0) {
    const ntl::SelectionResult selection =
        ntl::select_features(train.dataset.x, train.dataset.n_features(), train.dataset.labels,
                             cfg.selection_alpha, cfg.threads);
    ntl::apply_selection(train.dataset, selection);
  }

  std::vector<double> w(train.dataset.n(), 1.0);
  std::vector<std::string> biases = cfg.weight_biases;
  if (!biases.empty()) {
    ntl::LoadResult reference;
    if (wants_reference(biases)) {
      require_input(cfg.reference_csv, "reference_csv (a covariate bias is requested)");
      reference = load_checked(cfg, cfg.reference_csv, "");
      if (wants_feature_bias(biases)) {
        attach_default_features(reference.dataset, reference.series, cfg.threads);
      }
    }
    const ntl::WeightSet ws =
        ntl::build_weight_set(train.dataset, reference.dataset, biases, cfg.weight_options);
    w = ws.combined;
  }

  const ntl::SearchResult search =
      ntl::random_search(train.dataset.x, train.dataset.n(), train.dataset.n_features(),
                         train.dataset.labels, w, cfg.ladder.n_models, cfg.ladder.folds,
                         *cfg.seed, cfg.threads);
  const std::string search_path = (fs::path(cfg.out_dir) / "search.csv").string();
  ntl::write_search_csv(search_path, search);
  prepend_digest(search_path, digest);

  const ntl::ForestModel model =
      ntl::fit_forest(train.dataset.x, train.dataset.n(), train.dataset.n_features(),
                      train.dataset.labels, w, search.best_params, *cfg.seed, cfg.threads);
  json model_doc = json::parse(ntl::model_json(model));
  model_doc["config_digest"] = digest;
  const std::string model_path = (fs::path(cfg.out_dir) / "model.json").string();
  write_text(model_path, model_doc.dump() + "\n");

  write_manifest(cfg, "train", {"search.csv", "model.json"},
                 {{"best_mean_auc", search.best_mean_auc},
                  {"best_model_index", search.best_index},
                  {"n_features", train.dataset.n_features()}});
  return 0;
}

int cmd_ladder(const ntl::RunConfig& cfg) {
  require_input(cfg.train_csv, "train_csv");
  fs::create_directories(cfg.out_dir);
  const std::string digest = ntl::config_digest(cfg.raw);

  std::vector<std::string> union_biases;
  for (const ntl::LadderStep& step : cfg.ladder.steps) {
    union_biases.insert(union_biases.end(), step.biases.begin(), step.biases.end());
  }

  ntl::LoadResult train = load_checked(cfg, cfg.train_csv, "");
  if (!train.dataset.has_labels()) {
    throw ntl::data_error("ladder: training CSV must be labeled");
  }
  ntl::LoadResult reference;
  if (wants_reference(union_biases)) {
    require_input(cfg.reference_csv, "reference_csv (a covariate bias is requested)");
    reference = load_checked(cfg, cfg.reference_csv, "");
  }

  attach_default_features(train.dataset, train.series, cfg.threads);
  if (cfg.selection_alpha > 0.0) {
    const ntl::SelectionResult selection =
        ntl::select_features(train.dataset.x, train.dataset.n_features(), train.dataset.labels,
                             cfg.selection_alpha, cfg.threads);
    ntl::apply_selection(train.dataset, selection);
  }
  if (wants_feature_bias(union_biases)) {
    attach_default_features(reference.dataset, reference.series, cfg.threads);
  }

  const ntl::EvaluationReport report =
      ntl::run_bias_ladder(train.dataset, reference.dataset, cfg.ladder, *cfg.seed, cfg.threads);

  json doc;
  doc["config_digest"] = digest;
  doc["seed"] = report.seed;
  doc["dataset_digest"] = report.dataset_digest;
  doc["configurations"] = json::parse(ntl::report_json(report));
  const std::string report_path = (fs::path(cfg.out_dir) / "report.json").string();
  write_text(report_path, doc.dump(2) + "\n");

  std::cout << ntl::report_table(report);
  write_manifest(cfg, "ladder", {"report.json"},
                 {{"steps", cfg.ladder.steps.size()},
                  {"n_models", cfg.ladder.n_models},
                  {"folds", cfg.ladder.folds}});
  return 0;
}

int cmd_report(const ntl::RunConfig& cfg) {
  std::string path = cfg.report_json_path;
  if (path.empty()) path = (fs::path(cfg.out_dir) / "report.json").string();
  require_input(path, "report_json");

  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ntl::data_error("report: cannot parse '" + path + "': " + e.what());
  }

  const json& configurations = doc.is_array() ? doc : doc.at("configurations");
  ntl::EvaluationReport report;
  if (doc.is_object()) {
    report.seed = doc.value("seed", 0ULL);
    report.dataset_digest = doc.value("dataset_digest", "");
  }
  for (const json& entry : configurations) {
    ntl::LadderStepResult res;
    res.biases = entry.at("biases").get<std::vector<std::string>>();
    res.fold_aucs = entry.at("fold_aucs").get<std::vector<double>>();
    res.mean_auc = entry.at("mean_auc").get<double>();
    res.label = res.biases.empty() ? "none" : "";
    for (std::size_t i = 0; i < res.biases.size(); ++i) {
      if (i > 0) res.label += ",";
      res.label += res.biases[i];
    }
    report.configurations.push_back(std::move(res));
  }
  std::cout << ntl::report_table(report);
  return 0;
}

int fail_with(const char* type, const std::string& message, int code) {
  json err;
  err["error"] = {{"type", type}, {"message", message}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bias-corrected NTL detection pipeline"};
  app.require_subcommand(1);

  CliArgs args;
  app.add_option("--config", args.config_path, "Path to a key=value config file");
  app.add_option("--seed", args.seed, "Seed override (mandatory here or in the config)");
  app.add_option("--threads", args.threads, "Worker threads (0 = all cores)");
  app.add_option("--out", args.out_dir, "Output directory override");

  // fallthrough lets the shared options appear after the subcommand name.
  CLI::App* sub_synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  CLI::App* sub_features = app.add_subcommand("features", "Extract and select features");
  CLI::App* sub_weights = app.add_subcommand("weights", "Build bias-correction weights");
  CLI::App* sub_train = app.add_subcommand("train", "Random search and fit a forest");
  CLI::App* sub_ladder = app.add_subcommand("ladder", "Run the bias-ladder experiment");
  CLI::App* sub_report = app.add_subcommand("report", "Render a report JSON as a table");
  for (CLI::App* sub : {sub_synth, sub_features, sub_weights, sub_train, sub_ladder, sub_report}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::ostringstream msg;
    msg << e.what();
    return fail_with("config", msg.str(), 2);
  }

  try {
    const ntl::RunConfig cfg = effective_config(args);
    if (sub_synth->parsed()) return cmd_synth(cfg);
    if (sub_features->parsed()) return cmd_features(cfg);
    if (sub_weights->parsed()) return cmd_weights(cfg);
    if (sub_train->parsed()) return cmd_train(cfg);
    if (sub_ladder->parsed()) return cmd_ladder(cfg);
    if (sub_report->parsed()) return cmd_report(cfg);
    return fail_with("config", "no subcommand selected", 2);
  } catch (const ntl::config_error& e) {
    return fail_with("config", e.what(), 2);
  } catch (const ntl::data_error& e) {
    return fail_with("data", e.what(), 3);
  } catch (const std::exception& e) {
    return fail_with("internal", e.what(), 4);
  }
}
