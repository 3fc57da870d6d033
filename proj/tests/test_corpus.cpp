#include <doctest.h>

#include <algorithm>
#include <set>

#include "promptlog/corpus.hpp"

#include "helpers.hpp"

using namespace promptlog;

namespace {

Corpus labelled_corpus(std::size_t abnormal, std::size_t normal) {
  Corpus corpus;
  corpus.name = "synthetic";
  for (std::size_t i = 0; i < abnormal + normal; ++i) {
    RawLog log;
    log.index = i;
    log.content = "event " + std::to_string(i);
    log.gold_anomaly = i < abnormal;
    corpus.logs.push_back(log);
  }
  corpus.has_anomaly_labels = true;
  return corpus;
}

}  // namespace

TEST_CASE("loading a three-line file with templates") {
  testutil::ScratchDir dir("corpus_basic");
  testutil::write_file(dir / "logs.tsv",
                       "Connection from 10.0.0.1 closed\tConnection from <*> closed\n"
                       "Took 2.5 seconds\tTook <*> seconds\n"
                       "Generating core.2275\tGenerating <*>\n");
  const Corpus corpus = load_corpus(
      dir / "logs.tsv", CorpusFormat::tsv({ColumnKind::Content, ColumnKind::Template}));
  CHECK(corpus.size() == 3);
  CHECK(corpus.has_templates);
  CHECK_FALSE(corpus.has_anomaly_labels);
  CHECK(corpus.logs[2].index == 2);
  CHECK(*corpus.logs[2].gold_template == "Generating <*>");
}

TEST_CASE("loading anomaly labels from a header file") {
  testutil::ScratchDir dir("corpus_anomaly");
  testutil::write_file(dir / "logs.csv",
                       "content,anomaly\n"
                       "\"kernel panic, not syncing\",1\n"
                       "session opened,0\n");
  const Corpus corpus = load_corpus(dir / "logs.csv", CorpusFormat::parse("csv:header"));
  CHECK(corpus.size() == 2);
  CHECK(corpus.has_anomaly_labels);
  CHECK(*corpus.logs[0].gold_anomaly);
  CHECK_FALSE(*corpus.logs[1].gold_anomaly);
  CHECK(corpus.logs[0].content == "kernel panic, not syncing");
}

TEST_CASE("loader errors carry line numbers") {
  testutil::ScratchDir dir("corpus_errors");

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_corpus(dir / "absent.tsv", CorpusFormat::tsv({ColumnKind::Content})),
                    CorpusError);
  }
  SUBCASE("wrong column count") {
    testutil::write_file(dir / "bad.tsv", "a\tb\nc\n");
    CHECK_THROWS_WITH_AS(
        load_corpus(dir / "bad.tsv",
                    CorpusFormat::tsv({ColumnKind::Content, ColumnKind::Template})),
        doctest::Contains(":2:"), CorpusError);
  }
  SUBCASE("inconsistent labels") {
    testutil::write_file(dir / "gap.tsv", "a\tt1\nb\t\n");
    CHECK_THROWS_WITH_AS(
        load_corpus(dir / "gap.tsv",
                    CorpusFormat::tsv({ColumnKind::Content, ColumnKind::Template})),
        doctest::Contains("inconsistent labeling"), CorpusError);
  }
  SUBCASE("bad anomaly value") {
    testutil::write_file(dir / "label.tsv", "a\t2\n");
    CHECK_THROWS_AS(load_corpus(dir / "label.tsv",
                                CorpusFormat::tsv({ColumnKind::Content, ColumnKind::Anomaly})),
                    CorpusError);
  }
  SUBCASE("empty content") {
    testutil::write_file(dir / "empty.tsv", "  \tt\n");
    CHECK_THROWS_AS(load_corpus(dir / "empty.tsv",
                                CorpusFormat::tsv({ColumnKind::Content, ColumnKind::Template})),
                    CorpusError);
  }
  SUBCASE("timestamps must be chronological") {
    testutil::write_file(dir / "ts.tsv", "a\t2005-01-02\nb\t2005-01-01\n");
    CHECK_THROWS_WITH_AS(
        load_corpus(dir / "ts.tsv",
                    CorpusFormat::tsv({ColumnKind::Content, ColumnKind::Timestamp})),
        doctest::Contains("chronological"), CorpusError);
  }
}

TEST_CASE("a two-thousand-line template file loads densely indexed") {
  testutil::ScratchDir dir("corpus_2k");
  std::string body;
  for (int i = 0; i < 2000; ++i) {
    body += "instruction cache parity error " + std::to_string(i) +
            "\tinstruction cache parity error <*>\n";
  }
  testutil::write_file(dir / "bgl.tsv", body);
  const Corpus corpus = load_corpus(
      dir / "bgl.tsv", CorpusFormat::tsv({ColumnKind::Content, ColumnKind::Template}), "BGL");
  CHECK(corpus.size() == 2000);
  CHECK(corpus.has_templates);
  CHECK(corpus.name == "BGL");
  for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(corpus.logs[i].index == i);

  const auto head = head_slice(corpus, 100);
  REQUIRE(head.size() == 100);
  CHECK(head.front().index == 0);
  CHECK(head.back().index == 99);

  const Split split = chronological_split(corpus, 0.1);
  CHECK(split.train.size() == 200);
  CHECK(split.test.size() == 1800);
}

TEST_CASE("identical inputs load identical corpora") {
  testutil::ScratchDir dir("corpus_determinism");
  testutil::write_file(dir / "logs.tsv", "a\nb\nc\n");
  const auto format = CorpusFormat::tsv({ColumnKind::Content});
  const Corpus first = load_corpus(dir / "logs.tsv", format);
  const Corpus second = load_corpus(dir / "logs.tsv", format);
  CHECK(first.logs == second.logs);
}

TEST_CASE("chronological split takes the floor prefix") {
  Corpus corpus = labelled_corpus(0, 2000);
  const Split split = chronological_split(corpus, 0.1);
  CHECK(split.train.size() == 200);
  CHECK(split.test.size() == 1800);

  Corpus ten = labelled_corpus(0, 10);
  const Split zero = chronological_split(ten, 0.0);
  CHECK(zero.train.empty());
  CHECK(zero.test.size() == 10);

  Corpus seven = labelled_corpus(0, 7);
  const Split half = chronological_split(seven, 0.5);
  CHECK(half.train.size() == 3);
  CHECK(half.test.size() == 4);
}

TEST_CASE("splits partition the corpus in order") {
  Corpus corpus = labelled_corpus(3, 17);
  for (double ratio : {0.0, 0.1, 0.33, 0.5, 0.99, 1.0}) {
    const Split split = chronological_split(corpus, ratio);
    std::vector<RawLog> joined = split.train;
    joined.insert(joined.end(), split.test.begin(), split.test.end());
    CHECK(joined == corpus.logs);
  }
  const Split at = split_at(corpus, 4000);
  CHECK(at.train.size() == 20);
  CHECK(at.test.empty());
  CHECK(split_at(corpus, 5).train.size() == 5);
}

TEST_CASE("head slice clamps") {
  Corpus corpus = labelled_corpus(0, 5);
  CHECK(head_slice(corpus, 100).size() == 5);
  CHECK(head_slice(corpus, 0).empty());
  CHECK(head_slice(corpus, 3).size() == 3);
  CHECK(head_slice(corpus, 3)[2].index == 2);
}

TEST_CASE("anomaly sampling balances the classes") {
  const Corpus corpus = labelled_corpus(30, 50);

  SUBCASE("even m") {
    const auto pairs = sample_incontext_pairs(corpus, 20, Task::Anomaly, 1);
    CHECK(pairs.size() == 20);
    CHECK(std::count_if(pairs.begin(), pairs.end(),
                        [](const LabelledPair& p) { return p.label == "1"; }) == 10);
    CHECK(std::count_if(pairs.begin(), pairs.end(),
                        [](const LabelledPair& p) { return p.label == "0"; }) == 10);
  }
  SUBCASE("odd m leans abnormal") {
    const auto pairs = sample_incontext_pairs(corpus, 3, Task::Anomaly, 1);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].label == "1");
    CHECK(pairs[1].label == "0");
    CHECK(pairs[2].label == "1");
  }
  SUBCASE("m of zero") {
    CHECK(sample_incontext_pairs(corpus, 0, Task::Anomaly, 1).empty());
  }
  SUBCASE("balance property across m and seeds") {
    for (std::size_t m : std::vector<std::size_t>{1, 2, 5, 8, 13}) {
      for (std::uint64_t seed : std::vector<std::uint64_t>{1, 2, 3}) {
        const auto pairs = sample_incontext_pairs(corpus, m, Task::Anomaly, seed);
        const auto abnormal = std::count_if(pairs.begin(), pairs.end(),
                                            [](const LabelledPair& p) { return p.label == "1"; });
        const auto normal = static_cast<long>(pairs.size()) - abnormal;
        CHECK(std::abs(abnormal - normal) <= 1);
      }
    }
  }
  SUBCASE("sampling is deterministic and without replacement") {
    const auto a = sample_incontext_pairs(corpus, 12, Task::Anomaly, 42);
    const auto b = sample_incontext_pairs(corpus, 12, Task::Anomaly, 42);
    CHECK(a == b);
    const auto c = sample_incontext_pairs(corpus, 12, Task::Anomaly, 43);
    CHECK(a != c);
    std::set<std::string> seen;
    for (const LabelledPair& pair : a) seen.insert(pair.log);
    CHECK(seen.size() == a.size());
  }
  SUBCASE("insufficient class members") {
    const Corpus small = labelled_corpus(1, 50);
    CHECK_THROWS_AS(sample_incontext_pairs(small, 4, Task::Anomaly, 1), CorpusError);
  }
}

TEST_CASE("parsing sampling pairs logs with gold templates") {
  Corpus corpus;
  for (std::size_t i = 0; i < 10; ++i) {
    RawLog log;
    log.index = i;
    log.content = "event " + std::to_string(i);
    log.gold_template = "event <*>";
    corpus.logs.push_back(log);
  }
  corpus.has_templates = true;
  const auto pairs = sample_incontext_pairs(corpus, 3, Task::Parsing, 9);
  CHECK(pairs.size() == 3);
  for (const LabelledPair& pair : pairs) CHECK(pair.label == "event <*>");

  Corpus unlabelled;
  unlabelled.logs.push_back({0, "x", {}, {}, {}});
  CHECK_THROWS_AS(sample_incontext_pairs(unlabelled, 1, Task::Parsing, 1), CorpusError);
}

TEST_CASE("template assignments load index and text") {
  testutil::ScratchDir dir("assignments");
  testutil::write_file(dir / "map.tsv", "# comment\n0\tConnection from <*> closed\n1\tTook <*>\n");
  const auto assignments = load_template_assignments(dir / "map.tsv");
  REQUIRE(assignments.size() == 2);
  CHECK(assignments[0].first == 0);
  CHECK(assignments[1].second == "Took <*>");

  testutil::write_file(dir / "bad.tsv", "zero\ttext\n");
  CHECK_THROWS_AS(load_template_assignments(dir / "bad.tsv"), CorpusError);
}
