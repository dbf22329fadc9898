#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <sstream>
#include <string>

#include "finsage/synthetic.hpp"

using namespace finsage;

namespace {

std::set<std::string> id_set(const Corpus& c) {
  std::set<std::string> ids;
  for (const auto& d : c.docs) ids.insert(d.id);
  return ids;
}

}  // namespace

TEST_CASE("separable corpus hits exact class counts") {
  Corpus c = gen_separable({});
  CHECK(c.docs.size() == 1000);
  CHECK(c.stats.total == 1000);
  CHECK(c.stats.labelled == 1000);
  CHECK(c.stats.label_histogram.at(Position::Long) == 806);
  CHECK(c.stats.label_histogram.at(Position::Short) == 180);
  CHECK(c.stats.label_histogram.at(Position::Education) == 14);
  CHECK(id_set(c).size() == 1000);
  for (const auto& d : c.docs) {
    CHECK_FALSE(d.content.empty());
    CHECK_FALSE(d.symbol.empty());
  }
}

TEST_CASE("separable corpus is deterministic per seed") {
  Corpus a = gen_separable({});
  Corpus b = gen_separable({});
  REQUIRE(a.docs.size() == b.docs.size());
  for (std::size_t i = 0; i < a.docs.size(); ++i) {
    CHECK(a.docs[i].id == b.docs[i].id);
    CHECK(a.docs[i].content == b.docs[i].content);
    CHECK(a.docs[i].position == b.docs[i].position);
  }
  SeparableOptions other;
  other.seed = 43;
  Corpus d = gen_separable(other);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.docs.size(); ++i)
    any_diff = any_diff || a.docs[i].content != d.docs[i].content;
  CHECK(any_diff);
}

TEST_CASE("separable pattern mentions always match the true label") {
  SeparableOptions opt;
  opt.noise = 0.5;  // even when the wording misleads
  opt.docs = 400;
  Corpus c = gen_separable(opt);
  preprocess_corpus(c);
  PatternLexicon lex = PatternLexicon::builtin();
  unify_corpus_patterns(c, lex);
  std::size_t with_patterns = 0;
  for (const auto& d : c.docs) {
    for (const auto& p : d.patterns) {
      ++with_patterns;
      REQUIRE(d.position.has_value());
      CHECK(lex.implication(p) == d.position);
    }
  }
  CHECK(with_patterns > 50);  // patterns actually get planted
}

TEST_CASE("planted corpus keeps plant vocabularies disjoint") {
  Corpus c = gen_planted_topics({});
  CHECK(c.docs.size() == 300);
  CHECK(c.stats.labelled == 0);
  preprocess_corpus(c);

  std::map<std::string, std::size_t> df;
  for (const auto& d : c.docs) {
    std::set<std::string> uniq(d.tokens.begin(), d.tokens.end());
    for (const auto& t : uniq) df[t] += 1;
  }
  std::size_t junk_words = 0, plant_words = 0;
  for (const auto& [token, n] : df) {
    if (token[0] == 'z') {
      CHECK(n == 1);  // junk tokens never repeat
      ++junk_words;
    } else {
      REQUIRE(token[0] == 'p');
      ++plant_words;
    }
  }
  CHECK(plant_words == 30);
  CHECK(junk_words > 50);

  // every non-junk document draws from exactly one plant
  for (const auto& d : c.docs) {
    std::set<char> plants;
    for (const auto& t : d.tokens)
      if (t[0] == 'p') plants.insert(t[1]);
    CHECK(plants.size() <= 1);
  }
}

TEST_CASE("pattern driven corpus carries the label in the pattern") {
  Corpus c = gen_pattern_driven({});
  CHECK(c.docs.size() == 600);
  CHECK(c.stats.label_histogram.at(Position::Long) == 270);
  CHECK(c.stats.label_histogram.at(Position::Short) == 270);
  CHECK(c.stats.label_histogram.at(Position::Education) == 60);

  preprocess_corpus(c);
  PatternLexicon lex = PatternLexicon::builtin();
  unify_corpus_patterns(c, lex);
  for (const auto& d : c.docs) {
    REQUIRE(d.position.has_value());
    if (d.position == Position::Education) {
      CHECK(d.patterns.empty());
    } else {
      REQUIRE(d.patterns.size() == 1);
      CHECK(lex.implication(d.patterns[0]) == d.position);
    }
  }
}

TEST_CASE("paper stats corpus reproduces the published shape") {
  Corpus c = gen_paper_stats({});
  CHECK(c.docs.size() == 24420);
  CHECK(c.stats.total == 24420);
  CHECK(c.stats.labelled == 16590);
  CHECK(c.stats.label_histogram.at(Position::Long) == 13379);
  CHECK(c.stats.label_histogram.at(Position::Short) == 2984);
  CHECK(c.stats.label_histogram.at(Position::Education) == 227);
  CHECK(id_set(c).size() == 24420);

  preprocess_corpus(c);
  auto stats = token_length_stats(c);
  CHECK(stats.mean == doctest::Approx(70.05).epsilon(0.05));
  CHECK(stats.median == doctest::Approx(34.0).epsilon(0.06));
}

TEST_CASE("jsonl output round trips through the parser") {
  SeparableOptions opt;
  opt.docs = 50;
  Corpus original = gen_separable(opt);
  std::ostringstream out;
  write_corpus_jsonl(out, original);

  std::istringstream in(out.str());
  Corpus parsed = parse_corpus(in);
  REQUIRE(parsed.docs.size() == original.docs.size());
  CHECK(parsed.stats.labelled == original.stats.labelled);
  for (std::size_t i = 0; i < parsed.docs.size(); ++i) {
    CHECK(parsed.docs[i].id == original.docs[i].id);
    CHECK(parsed.docs[i].content == original.docs[i].content);
    CHECK(parsed.docs[i].position == original.docs[i].position);
    CHECK(parsed.docs[i].symbol == original.docs[i].symbol);
    CHECK(parsed.docs[i].title == original.docs[i].title);
  }

  // serialization itself is stable
  std::ostringstream again;
  write_corpus_jsonl(again, original);
  CHECK(again.str() == out.str());
}
