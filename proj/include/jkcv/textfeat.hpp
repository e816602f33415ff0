#pragma once

// Bag-of-words features restricted to the top-N terms by summed tf-idf.
//
// Tokens: lowercase ASCII letters and digits, with any byte >= 0x80 kept
// inside tokens so UTF-8 words survive intact; every other byte separates.
// idf_t = ln((1 + docs) / (1 + df_t)) + 1, and a term's selection score is
// the corpus sum of raw count * idf. Features are raw counts.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "jkcv/core.hpp"
#include "jkcv/io.hpp"

namespace jkcv {

struct Corpus {
  std::vector<std::string> documents;
  std::vector<Label> labels;
  std::vector<std::string> label_names;

  Corpus() = default;
  Corpus(std::vector<std::string> docs, std::vector<Label> ys, std::vector<std::string> names = {})
      : documents(std::move(docs)), labels(std::move(ys)), label_names(std::move(names)) {
    validate();
  }

  void validate() const {
    if (documents.size() != labels.size())
      throw Error("corpus: " + std::to_string(documents.size()) + " documents but " +
                  std::to_string(labels.size()) + " labels");
    if (documents.empty()) throw Error("corpus: no documents");
    for (Label y : labels)
      if (y < 0) throw Error("corpus: negative label");
    std::vector<char> seen(static_cast<std::size_t>(class_count()), 0);
    for (Label y : labels) seen[static_cast<std::size_t>(y)] = 1;
    for (std::size_t c = 0; c < seen.size(); ++c)
      if (!seen[c]) throw Error("corpus: class " + std::to_string(c) + " has no documents");
  }

  int class_count() const {
    int classes = 2;
    for (Label y : labels) classes = std::max(classes, y + 1);
    return std::max<int>(classes, static_cast<int>(label_names.size()));
  }
};

struct Vocabulary {
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  std::vector<double> idf;
  std::vector<double> score;

  std::size_t size() const { return terms.size(); }
};

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u >= 0x80 || std::isalnum(u)) {
      current.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline double smoothed_idf(std::size_t documents, std::size_t df) {
  return std::log((1.0 + static_cast<double>(documents)) / (1.0 + static_cast<double>(df))) + 1.0;
}

inline Vocabulary build_vocabulary(const Corpus& corpus, std::size_t top_n) {
  if (top_n < 1) throw Error("vocabulary size must be at least 1");
  corpus.validate();
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // term -> (df, total count)
  for (const auto& doc : corpus.documents) {
    std::unordered_map<std::string, std::size_t> counts;
    for (auto& tok : tokenize(doc)) ++counts[tok];
    for (const auto& [term, count] : counts) {
      auto& s = stats[term];
      ++s.first;
      s.second += count;
    }
  }
  struct Entry {
    std::string term;
    std::size_t df;
    double idf;
    double score;
  };
  std::vector<Entry> entries;
  entries.reserve(stats.size());
  for (const auto& [term, s] : stats) {
    const double idf = smoothed_idf(corpus.documents.size(), s.first);
    entries.push_back({term, s.first, idf, static_cast<double>(s.second) * idf});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  if (entries.size() < top_n)
    warn("corpus has " + std::to_string(entries.size()) + " distinct terms, fewer than the requested " +
         std::to_string(top_n) + "; keeping all");
  entries.resize(std::min(entries.size(), top_n));

  Vocabulary vocab;
  for (auto& e : entries) {
    vocab.terms.push_back(std::move(e.term));
    vocab.df.push_back(e.df);
    vocab.idf.push_back(e.idf);
    vocab.score.push_back(e.score);
  }
  return vocab;
}

inline Dataset vectorize(const Corpus& corpus, const Vocabulary& vocab) {
  if (vocab.terms.empty()) throw Error("vectorize: empty vocabulary");
  corpus.validate();
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t t = 0; t < vocab.terms.size(); ++t) column.emplace(vocab.terms[t], t);
  const std::size_t d = vocab.terms.size();
  std::vector<double> values(corpus.documents.size() * d, 0.0);
  for (std::size_t i = 0; i < corpus.documents.size(); ++i)
    for (const auto& tok : tokenize(corpus.documents[i]))
      if (auto it = column.find(tok); it != column.end()) values[i * d + it->second] += 1.0;
  return Dataset(std::move(values), d, corpus.labels, corpus.class_count());
}

/// One document per line: `label<TAB>text`. Blank lines are skipped.
inline Corpus read_corpus_stream(std::istream& in, const std::string& source, char delim = '\t') {
  std::vector<std::string> docs, raw_labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) continue;
    const auto pos = line.find(delim);
    if (pos == std::string::npos)
      throw Error(source + ":" + std::to_string(line_no) + ": expected label and document separated by a delimiter");
    raw_labels.emplace_back(io::trim(std::string_view(line).substr(0, pos)));
    docs.push_back(line.substr(pos + 1));
  }
  if (docs.empty()) throw Error(source + ": no documents");
  auto mapping = io::map_labels(raw_labels);
  return Corpus(std::move(docs), std::move(mapping.labels), std::move(mapping.names));
}

inline Corpus read_corpus_file(const std::string& path, char delim = '\t') {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return read_corpus_stream(in, path, delim);
}

/// root/<class name>/<any file>: each regular file is one document. Classes
/// and files are visited in sorted name order.
inline Corpus read_corpus_directory(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error("corpus directory '" + root + "' does not exist");
  std::vector<fs::path> classes;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) classes.push_back(entry.path());
  std::sort(classes.begin(), classes.end());
  if (classes.size() < 2) throw Error("corpus directory '" + root + "' needs at least two class subdirectories");

  Corpus corpus;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    corpus.label_names.push_back(classes[c].filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(classes[c]))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("corpus class directory '" + classes[c].string() + "' is empty");
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream text;
      text << in.rdbuf();
      corpus.documents.push_back(text.str());
      corpus.labels.push_back(static_cast<Label>(c));
    }
  }
  corpus.validate();
  return corpus;
}

}  // namespace jkcv
