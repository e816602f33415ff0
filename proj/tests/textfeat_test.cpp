#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "jkcv/textfeat.hpp"

namespace jkcv {
namespace {

TEST(Tokenize, LowercasesAndSplitsOnNonAlphanumerics) {
  EXPECT_EQ(tokenize("Hello, World!! 42x -- a"), (std::vector<std::string>{"hello", "world", "42x", "a"}));
  EXPECT_TRUE(tokenize("  ...  ").empty());
  EXPECT_EQ(tokenize("caf\xc3\xa9 ok"), (std::vector<std::string>{"caf\xc3\xa9", "ok"}));
}

TEST(BuildVocabulary, HandComputedScores) {
  const Corpus corpus({"a b", "a"}, {0, 1});
  // idf(a) = ln(3/3) + 1 = 1, score 2; idf(b) = ln(3/2) + 1, score ~1.405.
  const auto v1 = build_vocabulary(corpus, 1);
  ASSERT_EQ(v1.terms, std::vector<std::string>{"a"});
  EXPECT_DOUBLE_EQ(v1.idf[0], 1.0);
  EXPECT_DOUBLE_EQ(v1.score[0], 2.0);
  EXPECT_EQ(v1.df[0], 2u);

  const auto v2 = build_vocabulary(corpus, 2);
  ASSERT_EQ(v2.terms, (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(v2.score[1], std::log(1.5) + 1.0);
}

TEST(BuildVocabulary, SaturationWarnsAndKeepsEverythingSorted) {
  const Corpus corpus({"x y y z", "z z w"}, {0, 1});
  ::testing::internal::CaptureStderr();
  const auto v = build_vocabulary(corpus, 50);
  const auto err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("warning"), std::string::npos);
  ASSERT_EQ(v.size(), 4u);
  for (std::size_t i = 1; i < v.size(); ++i) {
    EXPECT_TRUE(v.score[i - 1] > v.score[i] || (v.score[i - 1] == v.score[i] && v.terms[i - 1] < v.terms[i]));
  }
}

TEST(BuildVocabulary, LexicographicTieBreak) {
  const Corpus corpus({"beta alpha", "gamma"}, {0, 1});
  const auto v = build_vocabulary(corpus, 2);
  // all three terms have df 1 and tf 1
  EXPECT_EQ(v.terms, (std::vector<std::string>{"alpha", "beta"}));
}

TEST(BuildVocabulary, DeterministicAndValidated) {
  const Corpus corpus({"the cat sat", "the dog ran", "a cat ran"}, {0, 1, 0});
  const auto a = build_vocabulary(corpus, 3), b = build_vocabulary(corpus, 3);
  EXPECT_EQ(a.terms, b.terms);
  EXPECT_THROW(build_vocabulary(corpus, 0), Error);
  EXPECT_THROW(Corpus({"a"}, {0, 1}), Error);
  EXPECT_THROW(Corpus({"a", "b"}, {0, 2}), Error);  // class 1 has no documents
}

TEST(Vectorize, RowsAndShape) {
  const Corpus corpus({"good good good", "nothing here", "bad good"}, {1, 0, 0});
  Vocabulary vocab;
  vocab.terms = {"good", "bad"};
  const auto data = vectorize(corpus, vocab);
  EXPECT_EQ(data.n(), 3u);
  EXPECT_EQ(data.d(), 2u);
  EXPECT_EQ(data.row(0)[0], 3.0);
  EXPECT_EQ(data.row(0)[1], 0.0);
  EXPECT_EQ(data.row(1)[0], 0.0);
  EXPECT_EQ(data.row(1)[1], 0.0);
  EXPECT_EQ(data.labels(), (std::vector<Label>{1, 0, 0}));
  EXPECT_THROW(vectorize(corpus, Vocabulary{}), Error);
}

TEST(Vectorize, WidthIsMinOfTopNAndDistinctTerms) {
  const Corpus corpus({"a b c", "c d"}, {0, 1});
  EXPECT_EQ(vectorize(corpus, build_vocabulary(corpus, 2)).d(), 2u);
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(vectorize(corpus, build_vocabulary(corpus, 10)).d(), 4u);
  ::testing::internal::GetCapturedStderr();
}

// Column sums equal a direct recount of each term over the raw documents.
TEST(Vectorize, ColumnSumsMatchRecount) {
  const Corpus corpus({"The movie was great, great fun.", "Terrible movie. Not fun!", "fun fun FUN and more fun",
                       "a great, great, GREAT film"},
                      {1, 0, 1, 1});
  const auto vocab = build_vocabulary(corpus, 6);
  const auto data = vectorize(corpus, vocab);
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    double column = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) column += data.row(i)[t];
    std::size_t recount = 0;
    for (const auto& doc : corpus.documents) {
      std::string lowered;
      for (char c : doc) lowered += static_cast<char>(std::isalnum(static_cast<unsigned char>(c)) ? std::tolower(c) : ' ');
      std::istringstream words(lowered);
      std::string w;
      while (words >> w) recount += w == vocab.terms[t] ? 1 : 0;
    }
    EXPECT_EQ(column, static_cast<double>(recount)) << vocab.terms[t];
  }
}

class CorpusFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = std::filesystem::temp_directory_path() /
            ("jkcv_corpus_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(root_);
    std::filesystem::create_directories(root_);
  }
  void TearDown() override { std::filesystem::remove_all(root_); }
  void write(const std::filesystem::path& rel, const std::string& text) {
    std::filesystem::create_directories((root_ / rel).parent_path());
    std::ofstream(root_ / rel) << text;
  }
  std::filesystem::path root_;
};

TEST_F(CorpusFiles, DelimitedFile) {
  write("c.tsv", "pos\tgreat film\n\nneg\tawful film\r\npos\tloved it\n");
  const auto corpus = read_corpus_file((root_ / "c.tsv").string());
  EXPECT_EQ(corpus.documents.size(), 3u);
  EXPECT_EQ(corpus.label_names, (std::vector<std::string>{"neg", "pos"}));
  EXPECT_EQ(corpus.labels, (std::vector<Label>{1, 0, 1}));
  EXPECT_EQ(corpus.documents[1], "awful film");
  write("bad.tsv", "pos great film\n");
  EXPECT_THROW(read_corpus_file((root_ / "bad.tsv").string()), Error);
}

TEST_F(CorpusFiles, DirectoryPerClass) {
  write("neg/b.txt", "bad");
  write("neg/a.txt", "worse");
  write("pos/z.txt", "good");
  const auto corpus = read_corpus_directory(root_.string());
  EXPECT_EQ(corpus.label_names, (std::vector<std::string>{"neg", "pos"}));
  EXPECT_EQ(corpus.documents, (std::vector<std::string>{"worse", "bad", "good"}));
  EXPECT_EQ(corpus.labels, (std::vector<Label>{0, 0, 1}));
}

}  // namespace
}  // namespace jkcv
