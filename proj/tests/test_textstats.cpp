#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "finsage/rng.hpp"
#include "finsage/textstats.hpp"

using namespace finsage;

namespace {

using Tokens = std::vector<std::string>;

Corpus corpus_from_tokens(const std::vector<Tokens>& docs) {
  Corpus c;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Document d;
    d.id = "d" + std::to_string(i);
    d.tokens = docs[i];
    c.docs.push_back(std::move(d));
  }
  return c;
}

// Naive window counter: materialize every window as a set of strings.
struct NaiveCounts {
  std::size_t total = 0;
  std::map<std::string, std::size_t> word;
  std::map<std::pair<std::string, std::string>, std::size_t> pair;
};

NaiveCounts naive_count(const Corpus& corpus, std::size_t w) {
  NaiveCounts out;
  for (const auto& doc : corpus.docs) {
    const auto& t = doc.tokens;
    if (t.empty()) continue;
    std::vector<std::set<std::string>> windows;
    if (t.size() <= w) {
      windows.emplace_back(t.begin(), t.end());
    } else {
      for (std::size_t s = 0; s + w <= t.size(); ++s)
        windows.emplace_back(t.begin() + s, t.begin() + s + w);
    }
    out.total += windows.size();
    for (const auto& win : windows) {
      for (auto a = win.begin(); a != win.end(); ++a) {
        out.word[*a] += 1;
        for (auto b = std::next(a); b != win.end(); ++b)
          out.pair[{*a, *b}] += 1;
      }
    }
  }
  return out;
}

std::map<std::pair<std::string, std::string>, double> naive_pmi(const NaiveCounts& c) {
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [key, joint] : c.pair) {
    const double v = std::log(static_cast<double>(joint) * static_cast<double>(c.total) /
                              (static_cast<double>(c.word.at(key.first)) *
                               static_cast<double>(c.word.at(key.second))));
    if (v > 0.0) out[key] = v;
  }
  return out;
}

std::map<std::pair<std::string, std::string>, double> naive_tfidf(const Corpus& corpus,
                                                                  const Vocabulary& vocab) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus.docs) {
    std::set<std::string> uniq(doc.tokens.begin(), doc.tokens.end());
    for (const auto& t : uniq) df[t] += 1;
  }
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& doc : corpus.docs) {
    std::map<std::string, std::size_t> tf;
    for (const auto& t : doc.tokens)
      if (vocab.index_of(t)) tf[t] += 1;
    for (const auto& [t, count] : tf) {
      const double v = static_cast<double>(count) *
                       std::log(static_cast<double>(corpus.docs.size()) /
                                static_cast<double>(df.at(t)));
      if (v > 0.0) out[{doc.id, t}] = v;
    }
  }
  return out;
}

Corpus random_corpus(Rng& rng, std::size_t n_docs, std::size_t max_len,
                     std::size_t vocab_size) {
  std::vector<Tokens> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    Tokens t;
    const std::size_t len = rng.below(max_len + 1);
    for (std::size_t i = 0; i < len; ++i)
      t.push_back("w" + std::to_string(rng.below(vocab_size)));
    docs.push_back(std::move(t));
  }
  return corpus_from_tokens(docs);
}

}  // namespace

TEST_CASE("window counting matches the worked examples") {
  {
    auto c = count_windows(corpus_from_tokens({{"a", "b", "c"}}), 2);
    CHECK(c.total_windows == 2);
    CHECK(c.windows_with("a") == 1);
    CHECK(c.windows_with("b") == 2);
    CHECK(c.windows_with("c") == 1);
    CHECK(c.windows_with("a", "b") == 1);
    CHECK(c.windows_with("b", "c") == 1);
    CHECK(c.windows_with("a", "c") == 0);
  }
  {
    auto c = count_windows(corpus_from_tokens({{"a"}}), 20);
    CHECK(c.total_windows == 1);
    CHECK(c.windows_with("a") == 1);
  }
  {
    // repeated word counts once per window
    auto c = count_windows(corpus_from_tokens({{"a", "a", "b"}}), 3);
    CHECK(c.total_windows == 1);
    CHECK(c.windows_with("a") == 1);
    CHECK(c.windows_with("a", "b") == 1);
  }
}

TEST_CASE("window counting edge cases") {
  CHECK_THROWS(count_windows(Corpus{}, 1));
  CHECK_THROWS(count_windows(Corpus{}, 0));

  auto empty = count_windows(Corpus{}, 20);
  CHECK(empty.total_windows == 0);

  // a tokenless document contributes no windows
  auto c = count_windows(corpus_from_tokens({{}, {"a", "b"}}), 5);
  CHECK(c.total_windows == 1);

  // windows never cross document boundaries
  auto split = count_windows(corpus_from_tokens({{"a"}, {"b"}}), 5);
  CHECK(split.total_windows == 2);
  CHECK(split.windows_with("a", "b") == 0);
}

TEST_CASE("pmi matches the worked example") {
  CooccurrenceCounts c;
  c.total_windows = 100;
  c.word_windows["a"] = 10;
  c.word_windows["b"] = 10;
  c.pair_windows[{"a", "b"}] = 10;
  auto edges = pmi(c);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].weight == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("pmi omits independent and negatively associated pairs") {
  CooccurrenceCounts c;
  c.total_windows = 100;
  c.word_windows["a"] = 10;
  c.word_windows["b"] = 10;
  c.pair_windows[{"a", "b"}] = 1;  // p(a,b) = p(a)p(b) exactly -> PMI 0
  CHECK(pmi(c).empty());
  c.pair_windows[{"a", "b"}] = 2;  // positive
  CHECK(pmi(c).size() == 1);
  CHECK(pmi(CooccurrenceCounts{}).empty());
}

TEST_CASE("counts and pmi match a naive reference on random corpora") {
  Rng rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t window = 2 + rng.below(8);
    Corpus corpus = random_corpus(rng, 1 + rng.below(6), 50, 8);
    auto fast = count_windows(corpus, window);
    auto naive = naive_count(corpus, window);

    CHECK(fast.total_windows == naive.total);
    CHECK(fast.word_windows.size() == naive.word.size());
    for (const auto& [w, n] : naive.word) CHECK(fast.windows_with(w) == n);
    CHECK(fast.pair_windows == naive.pair);

    auto edges = pmi(fast);
    auto expect = naive_pmi(naive);
    REQUIRE(edges.size() == expect.size());
    for (const auto& e : edges) {
      auto it = expect.find({e.source, e.target});
      REQUIRE(it != expect.end());
      CHECK(e.weight == doctest::Approx(it->second).epsilon(1e-12));
      CHECK(e.weight > 0.0);
    }
  }
}

TEST_CASE("counting invariants hold on random corpora") {
  Rng rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    Corpus corpus = random_corpus(rng, 1 + rng.below(8), 40, 6);
    const std::size_t window = 2 + rng.below(10);
    auto c = count_windows(corpus, window);
    for (const auto& [key, joint] : c.pair_windows) {
      CHECK(joint <= std::min(c.windows_with(key.first), c.windows_with(key.second)));
      CHECK(std::min(c.windows_with(key.first), c.windows_with(key.second)) <=
            c.total_windows);
      CHECK(key.first < key.second);  // stored once, smaller token first
    }

    // dropping a document never increases any joint count
    if (corpus.docs.size() > 1) {
      Corpus smaller = corpus;
      smaller.docs.pop_back();
      auto c2 = count_windows(smaller, window);
      for (const auto& [key, joint] : c2.pair_windows)
        CHECK(joint <= c.pair_windows.at(key));
    }
  }
}

TEST_CASE("tfidf matches the worked examples") {
  // 4 docs, "w" appears twice in one of them -> 2 ln 4
  Corpus c = corpus_from_tokens({{"w", "w", "x"}, {"x", "y"}, {"x", "z"}, {"x", "q"}});
  Vocabulary v = Vocabulary::build(c, 1);
  auto edges = tfidf(c, v);
  double w_weight = 0.0;
  bool saw_x = false;
  for (const auto& e : edges) {
    if (e.target == "w") w_weight = e.weight;
    if (e.target == "x") saw_x = true;
    CHECK(e.weight > 0.0);
  }
  CHECK(w_weight == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-12));
  CHECK_FALSE(saw_x);  // idf of a word in every document is 0
}

TEST_CASE("tfidf matches a naive reference") {
  Rng rng(4321);
  for (int trial = 0; trial < 5; ++trial) {
    Corpus corpus = random_corpus(rng, 2 + rng.below(5), 30, 6);
    Vocabulary vocab = Vocabulary::build(corpus, 1);
    auto edges = tfidf(corpus, vocab);
    auto expect = naive_tfidf(corpus, vocab);
    REQUIRE(edges.size() == expect.size());
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : edges) {
      auto it = expect.find({e.source, e.target});
      REQUIRE(it != expect.end());
      CHECK(e.weight == doctest::Approx(it->second).epsilon(1e-12));
      CHECK(seen.insert({e.source, e.target}).second);  // no duplicate pairs
    }
  }
}

TEST_CASE("tfidf respects the vocabulary") {
  Corpus c = corpus_from_tokens({{"rare", "btc"}, {"btc", "eth"}});
  Vocabulary v = Vocabulary::build(c, 2);  // drops "rare" and "eth"
  for (const auto& e : tfidf(c, v)) CHECK(e.target == "btc");
}

TEST_CASE("edge list tsv export") {
  WeightedEdgeList edges{{"a", "b", 1.5}, {"d0", "w", std::log(10.0)}};
  std::ostringstream out;
  write_edges_tsv(out, edges);
  CHECK(out.str() == "a\tb\t1.5\nd0\tw\t2.30258509299\n");
}
