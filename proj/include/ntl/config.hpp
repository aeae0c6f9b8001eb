#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ntl/evaluation.hpp"
#include "ntl/synthgen.hpp"
#include "ntl/weights.hpp"

namespace ntl {

// Flat key=value configuration: one pair per line, '#' comments, blank lines
// ignored. Unknown or duplicate keys are config errors.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

// FNV-1a hex over the sorted canonical "key=value" form. The threads and
// out_dir keys are excluded: they control execution and artifact placement,
// not results, and artifact bytes must not depend on either.
std::string config_digest(const ConfigMap& map);

struct RunConfig {
  std::string train_csv;
  std::string reference_csv;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;        // mandatory for every subcommand
  int threads = 0;                          // 0 = all cores
  double selection_alpha = 0.05;            // 0 disables feature selection
  double max_reject_fraction = 0.1;         // ingestion aborts above this
  std::vector<std::string> weight_biases;   // biases for the weights subcommand
  WeightOptions weight_options;
  LadderConfig ladder;
  SynthConfig synth;
  std::string report_json_path;
  ConfigMap raw;
};

RunConfig make_run_config(const ConfigMap& map);

}  // namespace ntl
