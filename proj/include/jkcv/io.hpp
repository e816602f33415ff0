#pragma once

// Dataset ingestion: delimited numeric files and label-name mapping.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jkcv/core.hpp"

namespace jkcv::io {

struct LabelMapping {
  std::vector<Label> labels;
  std::vector<std::string> names;  // names[id] is the original label text
};

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline bool parse_unsigned(std::string_view s, long long& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && out >= 0;
}

/// Maps label strings to dense ids. If every label is a non-negative integer
/// the ids follow numeric order, otherwise lexicographic order.
inline LabelMapping map_labels(const std::vector<std::string>& raw) {
  bool numeric = true;
  for (const auto& s : raw) {
    long long v = 0;
    if (!parse_unsigned(s, v)) {
      numeric = false;
      break;
    }
  }
  std::vector<std::string> names(raw.begin(), raw.end());
  if (numeric) {
    std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
      return std::stoll(a) < std::stoll(b);
    });
    names.erase(std::unique(names.begin(), names.end(),
                            [](const std::string& a, const std::string& b) { return std::stoll(a) == std::stoll(b); }),
                names.end());
  } else {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
  }
  LabelMapping out;
  out.names = names;
  out.labels.reserve(raw.size());
  for (const auto& s : raw) {
    auto it = numeric ? std::find_if(names.begin(), names.end(),
                                     [&](const std::string& n) { return std::stoll(n) == std::stoll(s); })
                      : std::lower_bound(names.begin(), names.end(), s);
    out.labels.push_back(static_cast<Label>(it - names.begin()));
  }
  return out;
}

inline std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(where + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw Error(where + ": '" + s + "' is not a number");
  return v;
}

struct NumericTable {
  Dataset data;
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;
};

/// Header row required; the column named `label` holds class labels, every
/// other column is a numeric feature. Blank lines are skipped.
inline NumericTable read_numeric_stream(std::istream& in, const std::string& source, char delim = ',') {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line, delim);
      break;
    }
  }
  if (header.empty()) throw Error(source + ": missing header row");
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw Error(source + ": header has no 'label' column");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_col) feature_names.push_back(header[c]);
  if (feature_names.empty()) throw Error(source + ": no feature columns");

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, delim);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() != header.size())
      throw Error(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                  std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) {
        raw_labels.push_back(cells[c]);
      } else {
        const double v = parse_double(cells[c], where);
        if (!std::isfinite(v)) throw Error(where + ": non-finite feature value");
        values.push_back(v);
      }
    }
  }
  if (raw_labels.empty()) throw Error(source + ": no data rows");
  auto mapping = map_labels(raw_labels);
  const int classes = std::max<int>(2, static_cast<int>(mapping.names.size()));
  return {Dataset(std::move(values), feature_names.size(), std::move(mapping.labels), classes),
          std::move(feature_names), std::move(mapping.names)};
}

inline NumericTable read_numeric_file(const std::string& path, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file '" + path + "'");
  return read_numeric_stream(in, path, delim);
}

}  // namespace jkcv::io
