#include "ntl/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ntl/csv.hpp"

namespace ntl {

namespace {

std::string month_column(const std::string& prefix, int month_1based) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", month_1based);
  return prefix + buf;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

}  // namespace

LoadResult load_dataset(const std::string& path, const IngestSchema& schema) {
  const std::vector<std::string> lines = csv::read_lines(path);

  // '#' lines are comments; artifacts carry their config digest in one.
  std::size_t header_line = 0;
  while (header_line < lines.size() &&
         (lines[header_line].empty() || lines[header_line][0] == '#')) {
    ++header_line;
  }
  if (header_line == lines.size()) throw data_error("load_dataset: empty file " + path);

  const std::vector<std::string> header = csv::split_line(lines[header_line]);
  const int id_col = find_column(header, schema.id_column);
  if (id_col < 0) throw config_error("load_dataset: missing column " + schema.id_column);

  std::array<int, kMonths> reading_cols{};
  for (int m = 0; m < kMonths; ++m) {
    const std::string name = month_column(schema.reading_prefix, m + 1);
    const int col = find_column(header, name);
    if (col < 0) throw config_error("load_dataset: missing column " + name);
    reading_cols[m] = col;
  }
  // A 25th reading column means the file disagrees with the 24-month schema.
  if (find_column(header, month_column(schema.reading_prefix, kMonths + 1)) >= 0) {
    throw config_error("load_dataset: found column " +
                       month_column(schema.reading_prefix, kMonths + 1) +
                       " but schema declares exactly 24 readings");
  }

  std::array<int, kMonths> days_cols{};
  bool has_days = true;
  for (int m = 0; m < kMonths; ++m) {
    const int col = find_column(header, month_column(schema.days_prefix, m + 1));
    if (col < 0) {
      has_days = false;
      break;
    }
    days_cols[m] = col;
  }

  const int label_col = find_column(header, schema.label_column);
  const int region_col = find_column(header, schema.region_column);
  if (region_col < 0) throw config_error("load_dataset: missing column " + schema.region_column);
  const int class_col = find_column(header, schema.class_column);
  if (class_col < 0) throw config_error("load_dataset: missing column " + schema.class_column);

  LoadResult result;
  const bool labeled = label_col >= 0;
  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    if (lines[li].empty() || lines[li][0] == '#') continue;
    const std::vector<std::string> cells = csv::split_line(lines[li]);
    const std::size_t row_number = li + 1;
    if (cells.size() != header.size()) {
      result.rejects.push_back({row_number, "wrong field count"});
      continue;
    }

    MonthlyTimeSeries ts;
    ts.customer_id = cells[static_cast<std::size_t>(id_col)];
    std::string reason;
    for (int m = 0; m < kMonths && reason.empty(); ++m) {
      const auto v = csv::parse_double(cells[static_cast<std::size_t>(reading_cols[m])]);
      if (!v) {
        reason = "non-numeric reading";
      } else if (!std::isfinite(*v)) {
        reason = "non-finite reading";
      } else if (*v < 0.0) {
        reason = "negative reading";
      } else {
        ts.readings[static_cast<std::size_t>(m)] = *v;
      }
    }
    for (int m = 0; m < kMonths && reason.empty(); ++m) {
      if (!has_days) {
        ts.period_days[static_cast<std::size_t>(m)] = schema.default_period_days;
        continue;
      }
      const auto d = csv::parse_int(cells[static_cast<std::size_t>(days_cols[m])]);
      if (!d || *d < 1 || *d > 62) {
        reason = "period_days outside [1, 62]";
      } else {
        ts.period_days[static_cast<std::size_t>(m)] = static_cast<int>(*d);
      }
    }
    int label = -1;
    if (labeled && reason.empty()) {
      const auto l = csv::parse_int(cells[static_cast<std::size_t>(label_col)]);
      if (!l || (*l != 0 && *l != 1)) {
        reason = "label not in {0, 1}";
      } else {
        label = static_cast<int>(*l);
      }
    }
    if (!reason.empty()) {
      result.rejects.push_back({row_number, reason});
      continue;
    }

    result.dataset.ids.push_back(ts.customer_id);
    if (labeled) result.dataset.labels.push_back(label);
    result.dataset.region.push_back(cells[static_cast<std::size_t>(region_col)]);
    result.dataset.customer_class.push_back(cells[static_cast<std::size_t>(class_col)]);
    result.series.push_back(std::move(ts));
  }
  return result;
}

ValidationReport validate_dataset(const LabeledDataset& ds) {
  ValidationReport report;
  report.n_examples = ds.n();
  report.degenerate = ds.n() == 0;
  for (const int y : ds.labels) ++report.class_counts[y];
  for (const auto& r : ds.region) ++report.region_counts[r];
  for (const auto& c : ds.customer_class) ++report.customer_class_counts[c];

  const std::size_t d = ds.n_features();
  report.feature_nan_counts.assign(d, 0);
  report.feature_min.assign(d, std::numeric_limits<double>::infinity());
  report.feature_max.assign(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double* row = ds.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      if (std::isnan(row[k])) {
        ++report.feature_nan_counts[k];
        continue;
      }
      report.feature_min[k] = std::min(report.feature_min[k], row[k]);
      report.feature_max[k] = std::max(report.feature_max[k], row[k]);
    }
  }
  return report;
}

void save_dataset(const std::string& path, const LabeledDataset& ds,
                  const std::vector<MonthlyTimeSeries>& series, const IngestSchema& schema) {
  if (ds.n() != series.size()) {
    throw data_error("save_dataset: dataset and series sizes differ");
  }
  bool nondefault_days = false;
  for (const auto& ts : series) {
    for (const int d : ts.period_days) {
      if (d != schema.default_period_days) {
        nondefault_days = true;
        break;
      }
    }
    if (nondefault_days) break;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("save_dataset: cannot open " + path);
  out << schema.id_column;
  for (int m = 1; m <= kMonths; ++m) out << ',' << month_column(schema.reading_prefix, m);
  if (nondefault_days) {
    for (int m = 1; m <= kMonths; ++m) out << ',' << month_column(schema.days_prefix, m);
  }
  if (ds.has_labels()) out << ',' << schema.label_column;
  out << ',' << schema.region_column << ',' << schema.class_column << '\n';

  for (std::size_t i = 0; i < ds.n(); ++i) {
    out << series[i].customer_id;
    for (const double v : series[i].readings) out << ',' << csv::format_double(v);
    if (nondefault_days) {
      for (const int d : series[i].period_days) out << ',' << d;
    }
    if (ds.has_labels()) out << ',' << ds.labels[i];
    out << ',' << ds.region[i] << ',' << ds.customer_class[i] << '\n';
  }
}

void write_rejects_csv(const std::string& path, const std::vector<RejectedRow>& rejects) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("write_rejects_csv: cannot open " + path);
  out << "row_number,reason\n";
  for (const auto& r : rejects) out << r.row_number << ',' << r.reason << '\n';
}

namespace {

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
}

void fnv_string(std::uint64_t& h, const std::string& s) {
  fnv_bytes(h, s.data(), s.size());
  const unsigned char sep = 0x1F;
  fnv_bytes(h, &sep, 1);
}

}  // namespace

std::uint64_t dataset_digest(const LabeledDataset& ds) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const std::uint64_t n = ds.n(), d = ds.n_features();
  fnv_bytes(h, &n, sizeof n);
  fnv_bytes(h, &d, sizeof d);
  for (const auto& s : ds.ids) fnv_string(h, s);
  for (const auto& s : ds.feature_names) fnv_string(h, s);
  for (const int y : ds.labels) fnv_bytes(h, &y, sizeof y);
  for (const auto& s : ds.region) fnv_string(h, s);
  for (const auto& s : ds.customer_class) fnv_string(h, s);
  if (!ds.x.empty()) fnv_bytes(h, ds.x.data(), ds.x.size() * sizeof(double));
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace ntl
