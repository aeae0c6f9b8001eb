#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ntl::csv {

// Minimal CSV support for the canonical pipeline formats: comma-separated,
// UTF-8, header row, no quoting (none of the emitted fields contain commas).

std::vector<std::string> split_line(std::string_view line);

// Locale-independent parse; rejects trailing garbage, NaN and infinities pass
// through (callers validate finiteness).
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest round-trip formatting via std::to_chars so artifacts are
// byte-stable across runs and thread counts.
std::string format_double(double v);

std::vector<std::string> read_lines(const std::string& path);

}  // namespace ntl::csv
