#pragma once

// Tabular report rendering shared by every CLI command. A table renders to
// CSV, to a JSON array of row objects with the same keys, or to an aligned
// text table for the terminal.

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include <nlohmann/json.hpp>

namespace jkcv::report {

struct Null {
  friend bool operator==(Null, Null) = default;
};

using Cell = std::variant<Null, std::string, double, std::int64_t, std::uint64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size())
      throw std::logic_error("report row has " + std::to_string(row.size()) + " cells for " +
                             std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
  }
};

inline Cell number_or_null(double v) { return std::isfinite(v) ? Cell{v} : Cell{Null{}}; }

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) { return fmt::format("{}", v); }

inline std::string cell_text(const Cell& cell) {
  struct Visitor {
    std::string operator()(Null) const { return ""; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double v) const { return std::isfinite(v) ? format_double(v) : ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "1" : "0"; }
  };
  return std::visit(Visitor{}, cell);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + csv_escape(table.columns[c]);
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + csv_escape(cell_text(row[c]));
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json cell_json(const Cell& cell) {
  struct Visitor {
    nlohmann::ordered_json operator()(Null) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(double v) const {
      return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
    }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(std::uint64_t v) const { return v; }
    nlohmann::ordered_json operator()(bool v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

inline nlohmann::ordered_json to_json(const Table& table) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[table.columns[c]] = cell_json(row[c]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

inline std::string to_text(const Table& table) {
  std::vector<std::size_t> width(table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) width[c] = table.columns[c].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : table.rows) {
    std::vector<std::string> texts;
    for (std::size_t c = 0; c < row.size(); ++c) {
      auto t = std::holds_alternative<double>(row[c]) && std::isfinite(std::get<double>(row[c]))
                   ? fmt::format("{:.6g}", std::get<double>(row[c]))
                   : cell_text(row[c]);
      if (t.empty()) t = "-";
      width[c] = std::max(width[c], t.size());
      texts.push_back(std::move(t));
    }
    cells.push_back(std::move(texts));
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& texts) {
    for (std::size_t c = 0; c < texts.size(); ++c) {
      if (c) out += "  ";
      out += fmt::format("{:>{}}", texts[c], width[c]);
    }
    out += '\n';
  };
  line(table.columns);
  for (const auto& texts : cells) line(texts);
  return out;
}

}  // namespace jkcv::report
