#pragma once

#include <cstring>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jkcv/core.hpp"

namespace jkcv {

/// One cell of a parameter grid: (name, value) pairs in axis order.
struct ParamPoint {
  std::vector<std::pair<std::string, double>> entries;

  ParamPoint() = default;
  ParamPoint(std::initializer_list<std::pair<std::string, double>> init) : entries(init) {}

  std::optional<double> get(const std::string& name) const {
    for (const auto& [key, value] : entries)
      if (key == name) return value;
    return std::nullopt;
  }

  double at(const std::string& name) const {
    if (auto v = get(name)) return *v;
    throw Error("parameter point has no entry '" + name + "'");
  }

  bool empty() const { return entries.empty(); }

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i) out += ", ";
      out += entries[i].first + "=" + std::to_string(entries[i].second);
    }
    return out + "}";
  }

  friend bool operator==(const ParamPoint&, const ParamPoint&) = default;
};

/// Canonical order: compare axis by axis (names first, then values).
inline bool param_less(const ParamPoint& a, const ParamPoint& b) {
  const std::size_t common = std::min(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (a.entries[i].first != b.entries[i].first) return a.entries[i].first < b.entries[i].first;
    if (a.entries[i].second != b.entries[i].second) return a.entries[i].second < b.entries[i].second;
  }
  return a.entries.size() < b.entries.size();
}

/// Seed-path component identifying a point by content rather than by its
/// position in the grid enumeration.
inline Seed point_key(const ParamPoint& point) {
  Seed h = splitmix64(0x706172616d73ULL);
  for (const auto& [name, value] : point.entries) {
    for (unsigned char ch : name) h = splitmix64(h ^ ch);
    std::uint64_t bits = 0;
    const double normalized = value == 0.0 ? 0.0 : value;  // fold -0.0 into 0.0
    std::memcpy(&bits, &normalized, sizeof bits);
    h = splitmix64(h ^ bits);
  }
  return h;
}

}  // namespace jkcv
