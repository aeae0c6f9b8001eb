#include "ntl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ntl/csv.hpp"

namespace ntl {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(trim(std::string_view(s).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(s).substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "train_csv", "reference_csv", "out_dir", "seed", "threads", "selection_alpha",
      "max_reject_fraction", "report_json",
      "kde.kernels", "kde.bandwidth_lo", "kde.bandwidth_hi", "kde.candidates", "kde.folds",
      "weights.clip_lo", "weights.clip_hi", "weights.target_priors", "weights.biases",
      "ladder.steps", "search.n_models", "search.folds",
      "synth.preset", "synth.population", "synth.region_mix", "synth.class_mix",
      "synth.base_rate", "synth.base_level", "synth.class_scale", "synth.amp", "synth.phase",
      "synth.sigma_region", "synth.sigma_class", "synth.depth_region", "synth.depth_class",
      "synth.undetect_region", "synth.onset", "synth.sel_region", "synth.sel_class",
      "synth.gamma", "synth.delta", "synth.target_train",
  };
  return keys;
}

double require_double(const std::string& key, const std::string& value) {
  const auto v = csv::parse_double(value);
  if (!v || !std::isfinite(*v)) {
    throw config_error("make_run_config: key '" + key + "' needs a finite number, got '" +
                       value + "'");
  }
  return *v;
}

long long require_int(const std::string& key, const std::string& value) {
  const auto v = csv::parse_int(value);
  if (!v) {
    throw config_error("make_run_config: key '" + key + "' needs an integer, got '" + value +
                       "'");
  }
  return *v;
}

std::uint64_t require_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out, 10);
  if (ec != std::errc() || ptr != last || value.empty()) {
    throw config_error("make_run_config: key '" + key + "' needs an unsigned integer, got '" +
                       value + "'");
  }
  return out;
}

std::vector<double> require_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& tok : split(value, ',')) {
    out.push_back(require_double(key, tok));
  }
  return out;
}

void apply_synth_key(SynthConfig& synth, const std::string& key, const std::string& value) {
  const std::string field = key.substr(6);  // strip "synth."
  if (field == "preset") return;            // handled before field overrides
  if (field == "population") {
    const long long v = require_int(key, value);
    if (v < 0) throw config_error("make_run_config: synth.population must be nonnegative");
    synth.population = static_cast<std::size_t>(v);
  } else if (field == "region_mix") {
    synth.region_mix = require_doubles(key, value);
  } else if (field == "class_mix") {
    synth.class_mix = require_doubles(key, value);
  } else if (field == "base_rate") {
    // Single value fills the whole (region, class) grid; otherwise a
    // row-major list of n_regions * n_classes entries.
    const std::vector<double> vals = require_doubles(key, value);
    const std::size_t nr = synth.n_regions();
    const std::size_t nc = synth.n_classes();
    if (vals.size() == 1) {
      synth.base_rate.assign(nr, std::vector<double>(nc, vals[0]));
    } else if (vals.size() == nr * nc) {
      synth.base_rate.assign(nr, std::vector<double>(nc, 0.0));
      for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
          synth.base_rate[r][c] = vals[r * nc + c];
        }
      }
    } else {
      throw config_error(
          "make_run_config: synth.base_rate needs 1 or n_regions*n_classes values (set "
          "synth.region_mix and synth.class_mix first)");
    }
  } else if (field == "base_level") {
    synth.base_level = require_double(key, value);
  } else if (field == "class_scale") {
    synth.class_scale = require_doubles(key, value);
  } else if (field == "amp") {
    synth.amp = require_doubles(key, value);
  } else if (field == "phase") {
    synth.phase = require_doubles(key, value);
  } else if (field == "sigma_region") {
    synth.sigma_region = require_doubles(key, value);
  } else if (field == "sigma_class") {
    synth.sigma_class = require_doubles(key, value);
  } else if (field == "depth_region") {
    synth.depth_region = require_doubles(key, value);
  } else if (field == "depth_class") {
    synth.depth_class = require_doubles(key, value);
  } else if (field == "undetect_region") {
    synth.undetect_region = require_doubles(key, value);
  } else if (field == "onset") {
    synth.onset = static_cast<int>(require_int(key, value));
  } else if (field == "sel_region") {
    synth.sel_region = require_doubles(key, value);
  } else if (field == "sel_class") {
    synth.sel_class = require_doubles(key, value);
  } else if (field == "gamma") {
    synth.gamma = require_double(key, value);
  } else if (field == "delta") {
    synth.delta = require_double(key, value);
  } else if (field == "target_train") {
    synth.target_train = require_double(key, value);
  } else {
    throw config_error("make_run_config: unknown synth key '" + key + "'");
  }
}

LadderConfig parse_ladder_steps(const std::string& value) {
  LadderConfig ladder;
  for (const std::string& step_text : split(value, ';')) {
    if (step_text.empty()) {
      throw config_error("make_run_config: ladder.steps contains an empty step");
    }
    LadderStep step;
    step.label = step_text;
    if (step_text != "none") {
      for (const std::string& bias : split(step_text, ',')) {
        if (bias.empty()) {
          throw config_error("make_run_config: ladder.steps contains an empty bias name");
        }
        step.biases.push_back(bias);
      }
    }
    ladder.steps.push_back(std::move(step));
  }
  return ladder;
}

std::map<int, double> parse_target_priors(const std::string& value) {
  std::map<int, double> priors;
  for (const std::string& item : split(value, ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw config_error(
          "make_run_config: weights.target_priors entries must look like label:prior");
    }
    const long long label = require_int("weights.target_priors", trim(item.substr(0, colon)));
    const double prior = require_double("weights.target_priors", trim(item.substr(colon + 1)));
    if (!priors.emplace(static_cast<int>(label), prior).second) {
      throw config_error("make_run_config: duplicate label in weights.target_priors");
    }
  }
  return priors;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw config_error("parse_config_text: line " + std::to_string(line_no) +
                         " has no '=' separator");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw config_error("parse_config_text: line " + std::to_string(line_no) +
                         " has an empty key");
    }
    if (!map.emplace(key, value).second) {
      throw config_error("parse_config_text: duplicate key '" + key + "'");
    }
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("parse_config_file: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_digest(const ConfigMap& map) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64 offset basis
  auto mix = [&h](std::string_view s) {
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [key, value] : map) {
    if (key == "threads" || key == "out_dir") continue;
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig make_run_config(const ConfigMap& map) {
  RunConfig cfg;
  cfg.raw = map;
  for (const auto& [key, value] : map) {
    if (known_keys().find(key) == known_keys().end()) {
      throw config_error("make_run_config: unknown key '" + key + "'");
    }
    (void)value;
  }

  // Synth preset must be resolved before synth field overrides.
  cfg.synth = ntl_default();
  if (const auto it = map.find("synth.preset"); it != map.end()) {
    if (it->second == "ntl-default") {
      cfg.synth = ntl_default();
    } else if (it->second == "separable") {
      cfg.synth = separable_default();
    } else {
      throw config_error("make_run_config: unknown synth.preset '" + it->second + "'");
    }
  }

  // Default ladder: the four-step bias sequence used by the experiment.
  cfg.ladder = parse_ladder_steps(
      "none; class_imbalance; class_imbalance,spatial; "
      "class_imbalance,spatial,customer_class");

  for (const auto& [key, value] : map) {
    if (key == "train_csv") {
      cfg.train_csv = value;
    } else if (key == "reference_csv") {
      cfg.reference_csv = value;
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "seed") {
      cfg.seed = require_u64(key, value);
    } else if (key == "threads") {
      const long long v = require_int(key, value);
      if (v < 0) throw config_error("make_run_config: threads must be nonnegative");
      cfg.threads = static_cast<int>(v);
    } else if (key == "selection_alpha") {
      cfg.selection_alpha = require_double(key, value);
      if (cfg.selection_alpha < 0.0 || cfg.selection_alpha >= 1.0) {
        throw config_error("make_run_config: selection_alpha must lie in [0, 1)");
      }
    } else if (key == "max_reject_fraction") {
      cfg.max_reject_fraction = require_double(key, value);
      if (cfg.max_reject_fraction < 0.0 || cfg.max_reject_fraction > 1.0) {
        throw config_error("make_run_config: max_reject_fraction must lie in [0, 1]");
      }
    } else if (key == "report_json") {
      cfg.report_json_path = value;
    } else if (key == "kde.kernels") {
      cfg.weight_options.kde_spec.kernels.clear();
      for (const std::string& name : split(value, ',')) {
        cfg.weight_options.kde_spec.kernels.push_back(kernel_from_name(name));
      }
    } else if (key == "kde.bandwidth_lo") {
      cfg.weight_options.kde_spec.bandwidth_lo = require_double(key, value);
    } else if (key == "kde.bandwidth_hi") {
      cfg.weight_options.kde_spec.bandwidth_hi = require_double(key, value);
    } else if (key == "kde.candidates") {
      cfg.weight_options.kde_spec.n_candidates = static_cast<int>(require_int(key, value));
    } else if (key == "kde.folds") {
      cfg.weight_options.kde_spec.folds = static_cast<int>(require_int(key, value));
    } else if (key == "weights.clip_lo") {
      cfg.weight_options.clip_lo = require_double(key, value);
    } else if (key == "weights.clip_hi") {
      cfg.weight_options.clip_hi = require_double(key, value);
    } else if (key == "weights.target_priors") {
      cfg.weight_options.target_priors = parse_target_priors(value);
    } else if (key == "weights.biases") {
      cfg.weight_biases = split(value, ',');
    } else if (key == "ladder.steps") {
      const LadderConfig parsed = parse_ladder_steps(value);
      cfg.ladder.steps = parsed.steps;
    } else if (key == "search.n_models") {
      const long long v = require_int(key, value);
      if (v < 1) throw config_error("make_run_config: search.n_models must be positive");
      cfg.ladder.n_models = static_cast<int>(v);
    } else if (key == "search.folds") {
      const long long v = require_int(key, value);
      if (v < 2) throw config_error("make_run_config: search.folds must be at least 2");
      cfg.ladder.folds = static_cast<int>(v);
    } else if (key.rfind("synth.", 0) == 0) {
      apply_synth_key(cfg.synth, key, value);
    }
  }

  if (!(cfg.weight_options.clip_lo > 0.0) ||
      !(cfg.weight_options.clip_hi > cfg.weight_options.clip_lo)) {
    throw config_error("make_run_config: weight clip bounds must satisfy 0 < lo < hi");
  }
  cfg.ladder.weight_options = cfg.weight_options;
  return cfg;
}

}  // namespace ntl
