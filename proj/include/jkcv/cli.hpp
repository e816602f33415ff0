#pragma once

// Config-driven experiment runner behind the `jkcv` command-line tool.
//
// Config files are flat `key = value` text; see README.md for the grammar and
// the full key list. Each run writes, in the chosen format:
//   summary.<ext>          one row per (J, K) configuration
//   replicates.<ext>       per-replicate (or per-repetition / per-point) rows
//   histogram.<ext>        value counts for external plotting
//   joint_histogram.<ext>  joint chosen-point counts (tuning commands)
//   config.resolved        the fully resolved config; rerunning it
//                          reproduces every report byte for byte

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "jkcv/config.hpp"
#include "jkcv/estimate.hpp"
#include "jkcv/io.hpp"
#include "jkcv/meta.hpp"
#include "jkcv/report.hpp"
#include "jkcv/synthetic.hpp"
#include "jkcv/textfeat.hpp"
#include "jkcv/tune.hpp"

namespace jkcv::cli {

/// Invalid configuration; `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error("config field '" + field + "': " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Command { estimate, tune, meta_tune, meta_estimate, compare_budgets, variance_curve };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::estimate:
      return "estimate";
    case Command::tune:
      return "tune";
    case Command::meta_tune:
      return "meta-tune";
    case Command::meta_estimate:
      return "meta-estimate";
    case Command::compare_budgets:
      return "compare-budgets";
    case Command::variance_curve:
      return "variance-curve";
  }
  return "unknown";
}

inline std::optional<Command> parse_command(const std::string& s) {
  for (auto c : {Command::estimate, Command::tune, Command::meta_tune, Command::meta_estimate,
                 Command::compare_budgets, Command::variance_curve})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

enum class SourceKind { synthetic, csv, corpus_file, corpus_dir };

struct DataSource {
  SourceKind kind = SourceKind::synthetic;
  std::string path;
  char delimiter = ',';
  std::size_t n = 200;
  std::size_t d = 5;
  int classes = 2;
  double separation = 1.7;
  Seed seed = 0;
  std::size_t top_n = 300;
};

struct ExperimentConfig {
  Command command = Command::estimate;
  DataSource data;
  std::optional<DataSource> heldout;
  RunConfig run;
  ParamPoint params;
  std::vector<JKConfig> budgets;
  std::vector<std::size_t> j_values;
  std::string format = "csv";
};

// ---------------------------------------------------------------------------
// Key-value text

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

inline std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = io::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw Error(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key(io::trim(text.substr(0, eq)));
    std::string value(io::trim(text.substr(eq + 1)));
    if (key.empty()) throw Error(source + ":" + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once (line " + std::to_string(line_no) + ")");
    out.push_back({std::move(key), std::move(value), line_no});
  }
  return out;
}

namespace detail {

/// Hands out config values by key and remembers which keys were used.
class KeyReader {
 public:
  explicit KeyReader(const std::vector<KeyValue>& kvs) : kvs_(kvs), used_(kvs.size(), false) {}

  std::optional<std::string> get(const std::string& key) {
    for (std::size_t i = 0; i < kvs_.size(); ++i)
      if (kvs_[i].key == key) {
        used_[i] = true;
        return kvs_[i].value;
      }
    return std::nullopt;
  }

  std::string require(const std::string& key, const std::string& why = "is required") {
    auto v = get(key);
    if (!v) throw ConfigError(key, why);
    return *v;
  }

  double number(const std::string& key, const std::string& text) {
    try {
      return io::parse_double(text, key);
    } catch (const Error&) {
      throw ConfigError(key, "'" + text + "' is not a number");
    }
  }

  std::size_t count(const std::string& key, const std::string& text) {
    long long v = 0;
    if (!io::parse_unsigned(text, v)) throw ConfigError(key, "'" + text + "' is not a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  Seed seed(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
      throw ConfigError(key, "'" + text + "' is not an unsigned 64-bit integer");
    return v;
  }

  bool boolean(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key, "'" + text + "' is not a boolean (true/false)");
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) {
    auto v = get(key);
    return v ? count(key, *v) : fallback;
  }
  double number_or(const std::string& key, double fallback) {
    auto v = get(key);
    return v ? number(key, *v) : fallback;
  }

  /// Keys starting with `prefix`, in file order.
  std::vector<KeyValue> with_prefix(const std::string& prefix) {
    std::vector<KeyValue> out;
    for (std::size_t i = 0; i < kvs_.size(); ++i)
      if (kvs_[i].key.starts_with(prefix)) {
        used_[i] = true;
        out.push_back(kvs_[i]);
      }
    return out;
  }

  void reject_unused() const {
    for (std::size_t i = 0; i < kvs_.size(); ++i)
      if (!used_[i]) throw ConfigError(kvs_[i].key, "unknown or unused key for this command");
  }

 private:
  const std::vector<KeyValue>& kvs_;
  std::vector<bool> used_;
};

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& item : io::split(text, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline DataSource read_source(KeyReader& r, const std::string& prefix, const DataSource* inherit) {
  DataSource src = inherit ? *inherit : DataSource{};
  const auto kind = r.require(prefix + "source", "is required (synthetic, csv, corpus-file or corpus-dir)");
  if (kind == "synthetic") {
    src.kind = SourceKind::synthetic;
    src.n = r.count_or(prefix + "n", src.n);
    if (!inherit) {
      src.d = r.count_or(prefix + "d", src.d);
      auto classes = r.count_or(prefix + "classes", static_cast<std::size_t>(src.classes));
      src.classes = static_cast<int>(classes);
      src.separation = r.number_or(prefix + "separation", src.separation);
      if (src.classes < 2) throw ConfigError(prefix + "classes", "must be at least 2");
      if (src.d < 1) throw ConfigError(prefix + "d", "must be at least 1");
      if (!(src.separation >= 0.0)) throw ConfigError(prefix + "separation", "must be >= 0");
    }
    if (src.n < static_cast<std::size_t>(src.classes))
      throw ConfigError(prefix + "n", "must be at least the class count");
    src.seed = r.seed(prefix + "seed", r.require(prefix + "seed", "is required for synthetic data"));
  } else if (kind == "csv" || kind == "corpus-file" || kind == "corpus-dir") {
    if (inherit && inherit->kind != (kind == "csv"           ? SourceKind::csv
                                     : kind == "corpus-file" ? SourceKind::corpus_file
                                                             : SourceKind::corpus_dir)) {
      const bool both_corpus = inherit->kind != SourceKind::csv && kind != "csv";
      const bool both_table = inherit->kind == SourceKind::csv && kind == "csv";
      if (!both_corpus && !both_table)
        throw ConfigError(prefix + "source", "must produce the same kind of features as data.source");
    }
    src.kind = kind == "csv" ? SourceKind::csv : kind == "corpus-file" ? SourceKind::corpus_file : SourceKind::corpus_dir;
    src.path = r.require(prefix + "path");
    if (!std::filesystem::exists(src.path)) throw ConfigError(prefix + "path", "'" + src.path + "' does not exist");
    if (auto delim = r.get(prefix + "delimiter")) {
      if (*delim == "tab" || *delim == "\\t")
        src.delimiter = '\t';
      else if (delim->size() == 1)
        src.delimiter = (*delim)[0];
      else
        throw ConfigError(prefix + "delimiter", "must be a single character or 'tab'");
    } else {
      src.delimiter = src.kind == SourceKind::csv ? ',' : '\t';
    }
    if (src.kind != SourceKind::csv && !inherit) {
      src.top_n = r.count_or(prefix + "top_n", src.top_n);
      if (src.top_n < 1) throw ConfigError(prefix + "top_n", "must be at least 1");
    }
  } else {
    throw ConfigError(prefix + "source", "unknown source '" + kind + "'");
  }
  return src;
}

inline std::string source_name(SourceKind k) {
  switch (k) {
    case SourceKind::synthetic:
      return "synthetic";
    case SourceKind::csv:
      return "csv";
    case SourceKind::corpus_file:
      return "corpus-file";
    case SourceKind::corpus_dir:
      return "corpus-dir";
  }
  return "unknown";
}

inline std::string delimiter_text(char c) { return c == '\t' ? "tab" : std::string(1, c); }

}  // namespace detail

inline ExperimentConfig parse_config(const std::vector<KeyValue>& kvs) {
  detail::KeyReader r(kvs);
  ExperimentConfig cfg;

  const auto command = r.require("command");
  const auto parsed = parse_command(command);
  if (!parsed)
    throw ConfigError("command", "unknown command '" + command +
                                     "' (estimate, tune, meta-tune, meta-estimate, compare-budgets, variance-curve)");
  cfg.command = *parsed;
  const bool tuning = cfg.command == Command::tune || cfg.command == Command::meta_tune ||
                      cfg.command == Command::compare_budgets || cfg.command == Command::variance_curve;
  const bool meta = cfg.command != Command::estimate && cfg.command != Command::tune;

  cfg.run.master_seed = r.seed("seed", r.require("seed", "is required; there is no time-based default"));
  cfg.data = detail::read_source(r, "data.", nullptr);
  if (tuning && cfg.command != Command::tune && cfg.command != Command::variance_curve) {
    if (r.get("heldout.source")) cfg.heldout = detail::read_source(r, "heldout.", &cfg.data);
  }

  try {
    cfg.run.learner.kind = parse_learner_kind(r.require("learner"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("learner", e.what());
  }
  for (const auto& kv : r.with_prefix("learner.")) {
    const auto name = kv.key.substr(8);
    if (!accepts_param(cfg.run.learner.kind, name))
      throw ConfigError(kv.key, "not a parameter of " + to_string(cfg.run.learner.kind));
    cfg.run.learner.fixed_params[name] = r.number(kv.key, kv.value);
  }
  try {
    validate_spec(cfg.run.learner);
  } catch (const Error& e) {
    throw ConfigError("learner", e.what());
  }
  if (auto m = r.get("metric")) {
    try {
      cfg.run.metric = parse_metric(*m);
    } catch (const Error& e) {
      throw ConfigError("metric", e.what());
    }
  }

  if (cfg.command != Command::variance_curve) {
    cfg.run.j = r.count_or("J", 1);
    if (cfg.run.j < 1) throw ConfigError("J", "must be at least 1");
  }
  if (cfg.command != Command::compare_budgets) {
    cfg.run.k = r.count_or("K", 5);
    if (cfg.run.k < 2) throw ConfigError("K", "must be at least 2");
  }
  if (auto s = r.get("stratified")) cfg.run.stratified = r.boolean("stratified", *s);
  if (meta) {
    cfg.run.replicates = r.count_or("R", 300);
    if (cfg.run.replicates < 1) throw ConfigError("R", "must be at least 1");
  }

  const auto catalog = param_catalog(cfg.run.learner.kind);
  const bool slot_fixed = cfg.run.learner.fixed_params.contains(catalog.tunable_slot);
  if (tuning) {
    std::vector<GridAxis> axes;
    for (const auto& kv : r.with_prefix("grid.")) {
      const auto name = kv.key.substr(5);
      if (!accepts_param(cfg.run.learner.kind, name))
        throw ConfigError(kv.key, "not a parameter of " + to_string(cfg.run.learner.kind));
      GridAxis axis{name, {}};
      for (const auto& item : detail::split_list(kv.value)) axis.values.push_back(r.number(kv.key, item));
      if (axis.values.empty()) throw ConfigError(kv.key, "has no values");
      axes.push_back(std::move(axis));
    }
    if (axes.empty()) throw ConfigError("grid", "at least one grid.<parameter> axis is required");
    try {
      cfg.run.grid = ParamGrid(std::move(axes));
      for (const auto& p : cfg.run.grid.points()) resolve_params(cfg.run.learner, p);
    } catch (const Error& e) {
      throw ConfigError("grid", e.what());
    }
  } else {
    for (const auto& kv : r.with_prefix("params.")) {
      const auto name = kv.key.substr(7);
      if (!accepts_param(cfg.run.learner.kind, name))
        throw ConfigError(kv.key, "not a parameter of " + to_string(cfg.run.learner.kind));
      cfg.params.entries.emplace_back(name, r.number(kv.key, kv.value));
    }
    if (!slot_fixed && !cfg.params.get(catalog.tunable_slot))
      throw ConfigError("params." + catalog.tunable_slot, "is required (or set learner." + catalog.tunable_slot + ")");
    try {
      resolve_params(cfg.run.learner, cfg.params);
    } catch (const Error& e) {
      throw ConfigError("params", e.what());
    }
  }

  if (cfg.command == Command::compare_budgets) {
    const auto text = r.require("configs", "is required, e.g. 'configs = 1x10, 2x5'");
    for (const auto& item : detail::split_list(text)) {
      const auto x = item.find('x');
      if (x == std::string::npos) throw ConfigError("configs", "entry '" + item + "' is not of the form JxK");
      JKConfig c{r.count("configs", std::string(io::trim(item.substr(0, x)))),
                 r.count("configs", std::string(io::trim(item.substr(x + 1))))};
      if (c.j < 1 || c.k < 2) throw ConfigError("configs", "entry '" + item + "' needs J >= 1 and K >= 2");
      cfg.budgets.push_back(c);
    }
    if (cfg.budgets.empty()) throw ConfigError("configs", "has no entries");
  }
  if (cfg.command == Command::variance_curve) {
    const auto text = r.require("j_values", "is required, e.g. 'j_values = 1, 2, 4, 10'");
    for (const auto& item : detail::split_list(text)) cfg.j_values.push_back(r.count("j_values", item));
    if (cfg.j_values.empty()) throw ConfigError("j_values", "has no entries");
    for (std::size_t i = 0; i < cfg.j_values.size(); ++i) {
      if (cfg.j_values[i] < 1) throw ConfigError("j_values", "entries must be at least 1");
      if (i && cfg.j_values[i] <= cfg.j_values[i - 1]) throw ConfigError("j_values", "must be strictly ascending");
    }
  }

  if (auto f = r.get("format")) {
    if (*f != "csv" && *f != "json") throw ConfigError("format", "must be csv or json");
    cfg.format = *f;
  }
  r.reject_unused();
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  return parse_config(parse_key_values(in, path));
}

/// Canonical text of a resolved config. Parsing it yields an equivalent
/// config; output location and worker count are run-time flags, not part of
/// the experiment, and are left out.
inline std::string resolved_text(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto num = [](double v) { return report::format_double(v); };
  const bool tuning = cfg.command == Command::tune || cfg.command == Command::meta_tune ||
                      cfg.command == Command::compare_budgets || cfg.command == Command::variance_curve;
  const bool meta = cfg.command != Command::estimate && cfg.command != Command::tune;

  kv.emplace_back("command", to_string(cfg.command));
  kv.emplace_back("seed", std::to_string(cfg.run.master_seed));
  kv.emplace_back("format", cfg.format);
  kv.emplace_back("metric", jkcv::to_string(cfg.run.metric));
  kv.emplace_back("stratified", cfg.run.stratified ? "true" : "false");
  if (cfg.command != Command::variance_curve) kv.emplace_back("J", std::to_string(cfg.run.j));
  if (cfg.command != Command::compare_budgets) kv.emplace_back("K", std::to_string(cfg.run.k));
  if (meta) kv.emplace_back("R", std::to_string(cfg.run.replicates));
  if (cfg.command == Command::compare_budgets) {
    std::string s;
    for (const auto& b : cfg.budgets) s += (s.empty() ? "" : ", ") + fmt::format("{}x{}", b.j, b.k);
    kv.emplace_back("configs", s);
  }
  if (cfg.command == Command::variance_curve) {
    std::string s;
    for (auto j : cfg.j_values) s += (s.empty() ? "" : ", ") + std::to_string(j);
    kv.emplace_back("j_values", s);
  }

  auto emit_source = [&](const std::string& prefix, const DataSource& src, bool inherited) {
    kv.emplace_back(prefix + "source", detail::source_name(src.kind));
    if (src.kind == SourceKind::synthetic) {
      kv.emplace_back(prefix + "n", std::to_string(src.n));
      if (!inherited) {
        kv.emplace_back(prefix + "d", std::to_string(src.d));
        kv.emplace_back(prefix + "classes", std::to_string(src.classes));
        kv.emplace_back(prefix + "separation", num(src.separation));
      }
      kv.emplace_back(prefix + "seed", std::to_string(src.seed));
    } else {
      kv.emplace_back(prefix + "path", src.path);
      kv.emplace_back(prefix + "delimiter", detail::delimiter_text(src.delimiter));
      if (src.kind != SourceKind::csv && !inherited) kv.emplace_back(prefix + "top_n", std::to_string(src.top_n));
    }
  };
  emit_source("data.", cfg.data, false);
  if (cfg.heldout) emit_source("heldout.", *cfg.heldout, true);

  kv.emplace_back("learner", jkcv::to_string(cfg.run.learner.kind));
  for (const auto& [name, value] : cfg.run.learner.fixed_params) kv.emplace_back("learner." + name, num(value));
  if (tuning) {
    for (const auto& axis : cfg.run.grid.axes()) {
      std::string s;
      for (double v : axis.values) s += (s.empty() ? "" : ", ") + num(v);
      kv.emplace_back("grid." + axis.name, s);
    }
  } else {
    for (const auto& [name, value] : cfg.params.entries) kv.emplace_back("params." + name, num(value));
  }

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Data loading

struct Pools {
  Dataset train;
  std::optional<Dataset> heldout;
};

namespace detail {

inline std::vector<Label> remap_labels(const std::vector<Label>& labels, const std::vector<std::string>& from,
                                       const std::vector<std::string>& to, const std::string& field) {
  std::vector<Label> out;
  out.reserve(labels.size());
  for (Label y : labels) {
    const auto& name = from[static_cast<std::size_t>(y)];
    const auto it = std::find(to.begin(), to.end(), name);
    if (it == to.end()) throw ConfigError(field, "held-out label '" + name + "' does not occur in the training data");
    out.push_back(static_cast<Label>(it - to.begin()));
  }
  return out;
}

inline Corpus load_corpus(const DataSource& src) {
  return src.kind == SourceKind::corpus_file ? read_corpus_file(src.path, src.delimiter)
                                             : read_corpus_directory(src.path);
}

}  // namespace detail

inline Pools load_pools(const ExperimentConfig& cfg) {
  const DataSource& src = cfg.data;
  switch (src.kind) {
    case SourceKind::synthetic: {
      Pools pools{generate_synthetic(src.n, src.d, src.classes, src.separation, src.seed), std::nullopt};
      if (cfg.heldout)
        pools.heldout = generate_synthetic(cfg.heldout->n, src.d, src.classes, src.separation, cfg.heldout->seed);
      return pools;
    }
    case SourceKind::csv: {
      auto table = io::read_numeric_file(src.path, src.delimiter);
      Pools pools{std::move(table.data), std::nullopt};
      if (cfg.heldout) {
        auto held = io::read_numeric_file(cfg.heldout->path, cfg.heldout->delimiter);
        auto labels = detail::remap_labels(held.data.labels(), held.label_names, table.label_names, "heldout.path");
        pools.heldout = Dataset(held.data.features(), held.data.d(), std::move(labels), pools.train.class_count());
      }
      return pools;
    }
    case SourceKind::corpus_file:
    case SourceKind::corpus_dir: {
      const Corpus corpus = detail::load_corpus(src);
      const Vocabulary vocab = build_vocabulary(corpus, src.top_n);
      Pools pools{vectorize(corpus, vocab), std::nullopt};
      if (cfg.heldout) {
        Corpus held = detail::load_corpus(*cfg.heldout);
        auto labels = detail::remap_labels(held.labels, held.label_names, corpus.label_names, "heldout.path");
        const auto vec = vectorize(Corpus(held.documents, held.labels, held.label_names), vocab);
        pools.heldout = Dataset(vec.features(), vec.d(), std::move(labels), pools.train.class_count());
      }
      return pools;
    }
  }
  throw Error("unknown data source");
}

/// Checks that need the loaded data, reported against the config field.
inline void validate_against_data(const ExperimentConfig& cfg, const Dataset& data) {
  std::vector<std::size_t> ks;
  if (cfg.command == Command::compare_budgets)
    for (const auto& b : cfg.budgets) ks.push_back(b.k);
  else
    ks.push_back(cfg.run.k);
  const std::string field = cfg.command == Command::compare_budgets ? "configs" : "K";
  for (std::size_t k : ks) {
    RunConfig run = cfg.run;
    run.k = k;
    try {
      run.validate(data);
    } catch (const Error& e) {
      throw ConfigError(field, e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Reports

struct Output {
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  std::string table;  // summary for the terminal
};

namespace detail {

using report::Cell;
using report::Table;

inline std::vector<std::string> axis_names(const ParamGrid& grid) {
  std::vector<std::string> names;
  for (const auto& a : grid.axes()) names.push_back(a.name);
  return names;
}

inline std::vector<std::string> meta_columns(const std::vector<std::string>& axes, bool heldout) {
  std::vector<std::string> cols;
  for (const auto& a : axes) {
    cols.push_back("sd_chosen_" + a);
    cols.push_back("min_chosen_" + a);
    cols.push_back("max_chosen_" + a);
    cols.push_back("sd_log10_chosen_" + a);
  }
  for (const auto* c : {"mean_estimate", "sd_estimate", "min_estimate", "max_estimate"}) cols.emplace_back(c);
  if (heldout)
    for (const auto* c : {"mean_global", "sd_global", "min_global", "max_global"}) cols.emplace_back(c);
  cols.emplace_back("degenerate_count");
  return cols;
}

inline void append_meta_cells(std::vector<Cell>& row, const MetaReport& rep, bool heldout) {
  using report::number_or_null;
  for (const auto& a : rep.axes) {
    row.push_back(number_or_null(a.sd));
    row.push_back(a.min);
    row.push_back(a.max);
    row.push_back(a.sd_log10 ? number_or_null(*a.sd_log10) : Cell{report::Null{}});
  }
  row.push_back(rep.estimate.mean);
  row.push_back(number_or_null(rep.estimate.sd));
  row.push_back(rep.estimate.min);
  row.push_back(rep.estimate.max);
  if (heldout) {
    if (rep.global) {
      row.push_back(rep.global->mean);
      row.push_back(number_or_null(rep.global->sd));
      row.push_back(rep.global->min);
      row.push_back(rep.global->max);
    } else {
      for (int i = 0; i < 4; ++i) row.push_back(report::Null{});
    }
  }
  row.push_back(static_cast<std::uint64_t>(rep.degenerate_count));
}

/// Per-replicate, marginal-histogram and joint-histogram tables for a list of
/// meta runs; with `tagged` the rows carry J and K columns.
struct MetaTables {
  Table replicates, histogram, joint;
};

inline MetaTables meta_tables(const std::vector<std::string>& axes, bool heldout, bool tagged) {
  MetaTables t;
  std::vector<std::string> prefix = tagged ? std::vector<std::string>{"J", "K"} : std::vector<std::string>{};
  t.replicates.columns = prefix;
  t.replicates.columns.push_back("replicate_id");
  for (const auto& a : axes) t.replicates.columns.push_back("chosen_" + a);
  t.replicates.columns.push_back("chosen_estimate");
  if (heldout) t.replicates.columns.push_back("global_score");
  t.replicates.columns.push_back("degenerate_flag");

  t.histogram.columns = prefix;
  for (const auto* c : {"axis", "value", "count"}) t.histogram.columns.emplace_back(c);
  t.joint.columns = prefix;
  for (const auto& a : axes) t.joint.columns.push_back(a);
  t.joint.columns.emplace_back("count");
  return t;
}

inline void append_meta_rows(MetaTables& t, const MetaReport& rep, bool heldout, bool tagged) {
  auto tag = [&](std::vector<Cell>& row) {
    if (tagged) {
      row.push_back(static_cast<std::uint64_t>(rep.config.j));
      row.push_back(static_cast<std::uint64_t>(rep.config.k));
    }
  };
  for (const auto& rec : rep.records) {
    std::vector<Cell> row;
    tag(row);
    row.push_back(static_cast<std::uint64_t>(rec.replicate));
    for (const auto& [name, value] : rec.chosen.entries) row.push_back(value);
    row.push_back(rec.chosen_estimate);
    if (heldout) row.push_back(rec.global_score ? Cell{*rec.global_score} : Cell{report::Null{}});
    row.push_back(rec.degenerate);
    t.replicates.add(std::move(row));
  }
  for (const auto& axis : rep.axes)
    for (const auto& [value, count] : axis.histogram) {
      std::vector<Cell> row;
      tag(row);
      row.push_back(axis.name);
      row.push_back(value);
      row.push_back(static_cast<std::uint64_t>(count));
      t.histogram.add(std::move(row));
    }
  for (const auto& [point, count] : rep.joint_histogram) {
    std::vector<Cell> row;
    tag(row);
    for (const auto& [name, value] : point.entries) row.push_back(value);
    row.push_back(static_cast<std::uint64_t>(count));
    t.joint.add(std::move(row));
  }
}

inline std::string render(const Table& t, const std::string& format) {
  return format == "json" ? report::to_json(t).dump(2) + "\n" : report::to_csv(t);
}

inline nlohmann::ordered_json config_json(const std::string& resolved) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  std::istringstream in(resolved);
  for (const auto& kv : parse_key_values(in, "resolved config")) obj[kv.key] = kv.value;
  return obj;
}

}  // namespace detail

/// Runs the configured pipeline and renders every report in memory.
inline Output execute(const ExperimentConfig& cfg, const Executor& executor) {
  using detail::Cell;
  using detail::Table;
  const Pools pools = load_pools(cfg);
  validate_against_data(cfg, pools.train);
  const Dataset& data = pools.train;
  const Dataset* heldout = pools.heldout ? &*pools.heldout : nullptr;
  const auto& run = cfg.run;
  const SeedPath first{run.master_seed, {0}};

  Table summary, replicates, histogram;
  std::optional<Table> joint;

  MetaTuningOptions opt{run.j, run.k, run.stratified, run.replicates, run.master_seed, run.metric};

  switch (cfg.command) {
    case Command::estimate: {
      const auto est = jkfold_estimate(data, run.learner, cfg.params, run.j, run.k, run.stratified, run.metric, first,
                                       {}, executor);
      summary.columns = {"J", "K", "mean", "degenerate_flag"};
      summary.add({static_cast<std::uint64_t>(est.j), static_cast<std::uint64_t>(est.k), est.mean, est.degenerate});
      replicates.columns = {"repetition", "partition_seed", "mean", "degenerate_flag"};
      for (std::size_t f = 0; f < est.k; ++f) replicates.columns.push_back("fold_" + std::to_string(f));
      std::map<double, std::size_t> counts;
      for (std::size_t j = 0; j < est.repetitions.size(); ++j) {
        const auto& rep = est.repetitions[j];
        std::vector<Cell> row{static_cast<std::uint64_t>(j), rep.partition_seed, rep.mean, rep.degenerate};
        for (double s : rep.fold_scores) {
          row.push_back(s);
          ++counts[s];
        }
        replicates.add(std::move(row));
      }
      histogram.columns = {"fold_score", "count"};
      for (const auto& [v, c] : counts) histogram.add({v, static_cast<std::uint64_t>(c)});
      break;
    }
    case Command::tune: {
      const auto res = grid_tune(data, run.learner, run.grid, run.j, run.k, run.stratified, run.metric, first, executor);
      const auto axes = detail::axis_names(run.grid);
      summary.columns = {"J", "K"};
      for (const auto& a : axes) summary.columns.push_back("chosen_" + a);
      summary.columns.push_back("chosen_estimate");
      summary.columns.push_back("degenerate_flag");
      std::vector<Cell> row{static_cast<std::uint64_t>(res.j), static_cast<std::uint64_t>(res.k)};
      for (const auto& [n, v] : res.chosen.entries) row.push_back(v);
      row.push_back(res.chosen_estimate);
      row.push_back(res.degenerate);
      summary.add(std::move(row));

      replicates.columns = axes;
      replicates.columns.push_back("estimate");
      replicates.columns.push_back("degenerate_flag");
      for (const auto& [point, est] : res.estimates) {
        std::vector<Cell> r;
        for (const auto& [n, v] : point.entries) r.push_back(v);
        r.push_back(est.mean);
        r.push_back(est.degenerate);
        replicates.add(std::move(r));
      }
      histogram.columns = {"axis", "value", "count"};
      for (const auto& [n, v] : res.chosen.entries) histogram.add({n, v, std::uint64_t{1}});
      break;
    }
    case Command::meta_tune: {
      const auto rep = run_meta_tuning(data, heldout, run.learner, run.grid, opt, executor);
      const auto axes = detail::axis_names(run.grid);
      summary.columns = {"J", "K", "R"};
      for (auto& c : detail::meta_columns(axes, heldout != nullptr)) summary.columns.push_back(c);
      std::vector<Cell> row{static_cast<std::uint64_t>(run.j), static_cast<std::uint64_t>(run.k),
                            static_cast<std::uint64_t>(run.replicates)};
      detail::append_meta_cells(row, rep, heldout != nullptr);
      summary.add(std::move(row));
      auto t = detail::meta_tables(axes, heldout != nullptr, false);
      detail::append_meta_rows(t, rep, heldout != nullptr, false);
      replicates = std::move(t.replicates);
      histogram = std::move(t.histogram);
      joint = std::move(t.joint);
      break;
    }
    case Command::meta_estimate: {
      const auto s = run_meta_estimation(data, run.learner, cfg.params, opt, executor);
      summary.columns = {"J", "K", "R", "mean", "sd", "min", "q25", "median", "q75", "max", "degenerate_count"};
      std::uint64_t degenerate = 0;
      for (bool d : s.degenerate) degenerate += d ? 1 : 0;
      summary.add({static_cast<std::uint64_t>(s.j), static_cast<std::uint64_t>(s.k),
                   static_cast<std::uint64_t>(s.replicates), s.mean, report::number_or_null(s.sd), s.min, s.q25,
                   s.median, s.q75, s.max, degenerate});
      replicates.columns = {"replicate_id", "estimate", "degenerate_flag"};
      std::map<double, std::size_t> counts;
      for (std::size_t r = 0; r < s.estimates.size(); ++r) {
        replicates.add({static_cast<std::uint64_t>(r), s.estimates[r], static_cast<bool>(s.degenerate[r])});
        ++counts[s.estimates[r]];
      }
      histogram.columns = {"estimate", "count"};
      for (const auto& [v, c] : counts) histogram.add({v, static_cast<std::uint64_t>(c)});
      break;
    }
    case Command::compare_budgets: {
      const auto cmp = compare_budgets(data, heldout, run.learner, run.grid, cfg.budgets, opt, executor);
      const auto axes = detail::axis_names(run.grid);
      summary.columns = {"budget", "J", "K", "R"};
      for (auto& c : detail::meta_columns(axes, heldout != nullptr)) summary.columns.push_back(c);
      auto t = detail::meta_tables(axes, heldout != nullptr, true);
      for (const auto& group : cmp.groups)
        for (const auto& r : group.rows) {
          std::vector<Cell> row{static_cast<std::uint64_t>(group.budget), static_cast<std::uint64_t>(r.j),
                                static_cast<std::uint64_t>(r.k), static_cast<std::uint64_t>(run.replicates)};
          detail::append_meta_cells(row, r.report, heldout != nullptr);
          summary.add(std::move(row));
          detail::append_meta_rows(t, r.report, heldout != nullptr, true);
        }
      replicates = std::move(t.replicates);
      histogram = std::move(t.histogram);
      joint = std::move(t.joint);
      break;
    }
    case Command::variance_curve: {
      const auto curve = variance_curve(data, run.learner, run.grid, run.k, cfg.j_values, opt, executor);
      const auto axes = detail::axis_names(run.grid);
      summary.columns = {"J", "K", "R"};
      for (auto& c : detail::meta_columns(axes, false)) summary.columns.push_back(c);
      summary.columns.push_back("sd_estimate_times_sqrt_J");
      auto t = detail::meta_tables(axes, false, true);
      for (const auto& r : curve) {
        std::vector<Cell> row{static_cast<std::uint64_t>(r.j), static_cast<std::uint64_t>(run.k),
                              static_cast<std::uint64_t>(run.replicates)};
        detail::append_meta_cells(row, r.report, false);
        row.push_back(report::number_or_null(r.estimate_sd * std::sqrt(static_cast<double>(r.j))));
        summary.add(std::move(row));
        detail::append_meta_rows(t, r.report, false, true);
      }
      replicates = std::move(t.replicates);
      histogram = std::move(t.histogram);
      joint = std::move(t.joint);
      break;
    }
  }

  const std::string resolved = resolved_text(cfg);
  const std::string ext = cfg.format;
  Output out;
  if (cfg.format == "json") {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    doc["command"] = to_string(cfg.command);
    doc["config"] = detail::config_json(resolved);
    doc["summary"] = report::to_json(summary);
    out.files.emplace_back("summary.json", doc.dump(2) + "\n");
  } else {
    out.files.emplace_back("summary.csv", report::to_csv(summary));
  }
  out.files.emplace_back("replicates." + ext, detail::render(replicates, cfg.format));
  out.files.emplace_back("histogram." + ext, detail::render(histogram, cfg.format));
  if (joint) out.files.emplace_back("joint_histogram." + ext, detail::render(*joint, cfg.format));
  out.files.emplace_back("config.resolved", resolved);
  out.table = report::to_text(summary);
  return out;
}

/// Writes every output file into out_dir. On failure, files already written
/// by this call are removed before the error propagates.
inline void write_outputs(const Output& output, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  try {
    fs::create_directories(out_dir);
    for (const auto& [name, content] : output.files) {
      const fs::path path = fs::path(out_dir) / name;
      std::ofstream file(path, std::ios::binary | std::ios::trunc);
      if (!file) throw Error("cannot write '" + path.string() + "'");
      written.push_back(path);
      file << content;
      if (!file) throw Error("failed writing '" + path.string() + "'");
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

struct RunOptions {
  std::string config_path;
  std::string out_dir = "jkcv-out";
  std::optional<std::string> format;
  std::size_t workers = 1;
};

/// Exit status: 0 success, 2 invalid configuration, 1 runtime failure.
inline int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config_file(options.config_path);
    if (options.format) {
      if (*options.format != "csv" && *options.format != "json") throw ConfigError("--format", "must be csv or json");
      cfg.format = *options.format;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    const auto output = execute(cfg, Executor(options.workers));
    write_outputs(output, options.out_dir);
    out << to_string(cfg.command) << " summary\n" << output.table;
    out << "reports written to " << options.out_dir << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace jkcv::cli
