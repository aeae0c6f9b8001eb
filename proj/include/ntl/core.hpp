#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ntl {

// Error taxonomy mapped to CLI exit codes: config_error -> 2, data_error -> 3,
// anything else -> 4.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMonths = 24;

struct MonthlyTimeSeries {
  std::string customer_id;
  std::array<double, kMonths> readings{};     // kWh/month, finite, >= 0
  std::array<int, kMonths> period_days{};     // each in [1, 62]; defaults to 30
};

// Feature matrix is row-major; x is empty until a features stage attaches it.
// labels is empty for unlabeled (reference) datasets.
struct LabeledDataset {
  std::vector<std::string> ids;
  std::vector<double> x;                      // n() * n_features()
  std::vector<std::string> feature_names;
  std::vector<int> labels;                    // 0/1; empty if unlabeled
  std::vector<std::string> region;
  std::vector<std::string> customer_class;

  std::size_t n() const { return ids.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  bool has_labels() const { return !labels.empty(); }
  const double* row(std::size_t i) const { return x.data() + i * n_features(); }
};

struct WeightSet {
  std::vector<std::string> bias_names;        // one per bias column
  std::vector<double> per_bias;               // n_examples x bias count, row-major
  std::vector<double> combined;               // harmonic combination * norm_scale
  double norm_scale = 1.0;                    // applied after harmonic combination
  std::size_t n_biases = 0;

  std::size_t n_examples() const {
    return n_biases == 0 ? combined.size() : per_bias.size() / n_biases;
  }
  const double* bias_row(std::size_t i) const { return per_bias.data() + i * n_biases; }
};

struct IngestSchema {
  std::string id_column = "customer_id";
  std::string reading_prefix = "m";           // m01..m24
  std::string days_prefix = "days";           // days01..days24, optional
  std::string label_column = "label";         // optional: absent column -> unlabeled
  std::string region_column = "region";
  std::string class_column = "customer_class";
  int default_period_days = 30;
};

struct RejectedRow {
  std::size_t row_number = 0;                 // 1-based file line (header = line 1)
  std::string reason;
};

struct LoadResult {
  LabeledDataset dataset;
  std::vector<MonthlyTimeSeries> series;
  std::vector<RejectedRow> rejects;
};

struct ValidationReport {
  std::size_t n_examples = 0;
  std::map<int, std::size_t> class_counts;
  std::map<std::string, std::size_t> region_counts;
  std::map<std::string, std::size_t> customer_class_counts;
  std::vector<std::size_t> feature_nan_counts;
  std::vector<double> feature_min;
  std::vector<double> feature_max;
  bool degenerate = false;                    // empty dataset
};

// Loads and validates a canonical CSV. Rows violating MonthlyTimeSeries
// invariants are collected in rejects, never silently dropped.
LoadResult load_dataset(const std::string& path, const IngestSchema& schema = {});

ValidationReport validate_dataset(const LabeledDataset& ds);

// Writes accepted rows back in canonical column order (used by round-trip tests
// and synthgen emission). Includes days columns only when any differ from the
// default, and the label column only for labeled datasets.
void save_dataset(const std::string& path, const LabeledDataset& ds,
                  const std::vector<MonthlyTimeSeries>& series,
                  const IngestSchema& schema = {});

void write_rejects_csv(const std::string& path, const std::vector<RejectedRow>& rejects);

// FNV-1a 64-bit over a canonical serialization; stable across runs/platforms.
std::uint64_t dataset_digest(const LabeledDataset& ds);
std::string digest_hex(std::uint64_t digest);

}  // namespace ntl
