#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "finsage/synthetic.hpp"
#include "finsage/topics.hpp"

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

void check_conservation(const TopicModel& m) {
  std::size_t from_topics = 0;
  for (std::size_t t = 0; t < m.K; ++t) {
    std::size_t row = 0;
    for (std::size_t w = 0; w < m.vocab_size; ++w) row += m.topic_word[t][w];
    CHECK(row == m.topic_total[t]);
    from_topics += row;
  }
  std::size_t from_docs = 0, tokens = 0;
  for (std::size_t d = 0; d < m.doc_topic.size(); ++d) {
    std::size_t row = 0;
    for (std::size_t t = 0; t < m.K; ++t) row += m.doc_topic[d][t];
    CHECK(row == m.doc_total[d]);
    from_docs += row;
    tokens += m.doc_words[d].size();
  }
  CHECK(from_topics == from_docs);
  CHECK(from_topics == tokens);
}

void check_rows_sum_to_one(const TopicModel& m) {
  for (std::size_t t = 0; t < m.K; ++t) {
    double s = 0.0;
    for (double p : m.p_w_given_t(t)) {
      CHECK(p >= 0.0);
      s += p;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (std::size_t d = 0; d < m.doc_topic.size(); ++d) {
    double s = 0.0;
    for (double p : m.p_t_given_d(d)) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  double s = 0.0;
  for (double p : m.p_t()) s += p;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}

// Planted corpus, preprocessed, with every one-off junk token kept in-vocab.
struct PlantedFixture {
  Corpus corpus;
  Vocabulary vocab;
  LdaOptions opt;
  PlantedFixture() {
    corpus = gen_planted_topics({});
    preprocess_corpus(corpus);
    vocab = Vocabulary::build(corpus, 1);
    opt.alpha = 0.1;
    opt.sweeps = 200;
    opt.seed = 7;
  }
};

double plant_purity(const TopicModel& m, const Vocabulary& vocab, std::size_t plants,
                    std::size_t words_per_plant) {
  // cluster plant words by their argmax topic, then score the best
  // plant-per-cluster assignment
  std::vector<std::map<std::size_t, std::size_t>> cluster_plant_counts(m.K);
  std::size_t total = 0;
  for (std::size_t p = 0; p < plants; ++p) {
    for (std::size_t j = 0; j < words_per_plant; ++j) {
      auto idx = vocab.index_of("p" + std::to_string(p) + "w" + std::to_string(j));
      REQUIRE(idx.has_value());
      std::size_t best_t = 0;
      for (std::size_t t = 1; t < m.K; ++t)
        if (m.topic_word[t][*idx] > m.topic_word[best_t][*idx]) best_t = t;
      cluster_plant_counts[best_t][p] += 1;
      total += 1;
    }
  }
  std::size_t agree = 0;
  for (const auto& counts : cluster_plant_counts) {
    std::size_t best = 0;
    for (const auto& [plant, n] : counts) best = std::max(best, n);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("fit_lda validates input") {
  Corpus c = corpus_from_tokens({{"a", "b"}});
  Vocabulary empty;
  CHECK_THROWS(fit_lda(c, empty, 2));
  Vocabulary v = Vocabulary::build(c, 1);
  CHECK_THROWS(fit_lda(c, v, 0));
}

TEST_CASE("single topic is a fixed point") {
  Corpus c = corpus_from_tokens({{"a", "b", "a"}, {"b", "c"}});
  Vocabulary v = Vocabulary::build(c, 1);
  TopicModel m = fit_lda(c, v, 1, {.sweeps = 10});
  for (std::size_t d = 0; d < c.docs.size(); ++d) {
    auto p = m.p_t_given_d(d);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  check_conservation(m);

  auto dist = distributions(m, v, {"a"});
  CHECK(dist.theta.at(0, 0) == doctest::Approx(1.0));
  CHECK(dist.p_t_pp.at(0, 0) == doctest::Approx(1.0));
  double phi_sum = 0.0;
  for (std::size_t w = 0; w < v.size(); ++w) phi_sum += dist.phi.at(0, w);
  CHECK(phi_sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("same seed gives identical models") {
  Corpus c = corpus_from_tokens(
      {{"a", "b", "c", "a"}, {"c", "d"}, {"d", "e", "a"}, {"b", "b", "e"}});
  Vocabulary v = Vocabulary::build(c, 1);
  LdaOptions opt;
  opt.sweeps = 50;
  opt.seed = 9;
  TopicModel m1 = fit_lda(c, v, 3, opt);
  TopicModel m2 = fit_lda(c, v, 3, opt);
  CHECK(m1.topic_word == m2.topic_word);
  CHECK(m1.doc_topic == m2.doc_topic);
  CHECK(m1.assignments == m2.assignments);
}

TEST_CASE("counts are conserved and distributions normalized") {
  Corpus c = corpus_from_tokens({{"a", "b", "oov", "c"}, {"c", "d", "a"}, {"e", "e"}});
  // min_df 1 but "oov" removed by hand to exercise out-of-vocabulary skipping
  Vocabulary v;
  {
    Corpus no_oov = c;
    no_oov.docs[0].tokens = {"a", "b", "c"};
    v = Vocabulary::build(no_oov, 1);
  }
  CHECK_FALSE(v.index_of("oov").has_value());
  TopicModel m = fit_lda(c, v, 2, {.sweeps = 30, .seed = 3});
  CHECK(m.doc_words[0].size() == 3);  // oov token skipped
  check_conservation(m);
  check_rows_sum_to_one(m);
  CHECK(m.alpha == doctest::Approx(25.0));  // 50/K default
}

TEST_CASE("top words order by count then index") {
  TopicModel m;
  m.K = 1;
  m.vocab_size = 5;
  m.topic_word = {{3, 0, 5, 3, 1}};
  m.topic_total = {12};
  m.beta = 0.01;
  CHECK(m.top_words(0, 3) == std::vector<std::uint32_t>{2, 0, 3});
  CHECK(m.top_words(0, 10) == std::vector<std::uint32_t>{2, 0, 3, 4});  // zero-count excluded
}

TEST_CASE("lda recovers planted topics") {
  PlantedFixture fx;
  TopicModel m = fit_lda(fx.corpus, fx.vocab, 3, fx.opt);
  CHECK(plant_purity(m, fx.vocab, 3, 10) >= 0.9);
}

TEST_CASE("coherence: zero context vectors score zero") {
  // single-token documents produce no co-occurrence pairs at all
  Corpus c = corpus_from_tokens({{"x"}, {"y"}});
  Vocabulary v = Vocabulary::build(c, 1);
  TopicModel m = fit_lda(c, v, 1, {.sweeps = 5});
  auto counts = count_windows(c, 2);
  auto report = coherence(m, counts, v, 2);
  CHECK(report.per_topic[0] == 0.0);
  CHECK(report.mean == 0.0);
  CHECK_FALSE(report.flagged[0]);  // exactly top_n observed words

  auto flagged = coherence(m, counts, v, 3);
  CHECK(flagged.flagged[0]);  // fewer observed words than requested
}

TEST_CASE("coherence: identical context vectors score one") {
  // x and y each co-occur only with a; their context vectors are parallel
  Corpus c = corpus_from_tokens({{"x", "a"}, {"y", "a"}, {"b", "q"}});
  Vocabulary v = Vocabulary::build(c, 1);
  auto counts = count_windows(c, 2);

  TopicModel m;
  m.K = 1;
  m.vocab_size = v.size();
  m.beta = 0.01;
  m.topic_word.assign(1, std::vector<std::size_t>(v.size(), 0));
  m.topic_word[0][*v.index_of("x")] = 5;
  m.topic_word[0][*v.index_of("y")] = 4;
  m.topic_total = {9};
  auto report = coherence(m, counts, v, 2);
  CHECK(report.per_topic[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coherence: fewer than two observed words scores zero and flags") {
  Corpus c = corpus_from_tokens({{"x", "y"}});
  Vocabulary v = Vocabulary::build(c, 1);
  TopicModel m;
  m.K = 2;
  m.vocab_size = v.size();
  m.beta = 0.01;
  m.topic_word = {{3, 0}, {0, 0}};  // topic 1 never observed anything
  m.topic_total = {3, 0};
  auto counts = count_windows(c, 2);
  auto report = coherence(m, counts, v, 2);
  CHECK(report.per_topic[1] == 0.0);
  CHECK(report.flagged[0]);
  CHECK(report.flagged[1]);
  CHECK_THROWS(coherence(m, counts, v, 1));
}

TEST_CASE("coherence is invariant to topic permutation") {
  PlantedFixture fx;
  TopicModel m = fit_lda(fx.corpus, fx.vocab, 3, fx.opt);
  auto counts = count_windows(fx.corpus, 20);
  auto before = coherence(m, counts, fx.vocab, 10);

  std::swap(m.topic_word[0], m.topic_word[2]);
  std::swap(m.topic_total[0], m.topic_total[2]);
  auto after = coherence(m, counts, fx.vocab, 10);
  CHECK(after.mean == doctest::Approx(before.mean).epsilon(1e-12));
  CHECK(after.per_topic[0] == doctest::Approx(before.per_topic[2]).epsilon(1e-12));
  CHECK(after.per_topic[2] == doctest::Approx(before.per_topic[0]).epsilon(1e-12));
}

TEST_CASE("coherence of the planted K beats twice the K") {
  PlantedFixture fx;
  auto counts = count_windows(fx.corpus, 20);
  TopicModel m3 = fit_lda(fx.corpus, fx.vocab, 3, fx.opt);
  TopicModel m6 = fit_lda(fx.corpus, fx.vocab, 6, fx.opt);
  const double c3 = coherence(m3, counts, fx.vocab, 10).mean;
  const double c6 = coherence(m6, counts, fx.vocab, 10).mean;
  CHECK(c3 > c6);
}

TEST_CASE("select_from_table matches the published sweep") {
  std::map<std::size_t, double> scores{
      {4, 0.4504}, {5, 0.4367}, {6, 0.450488}, {7, 0.425672}};
  CHECK(select_from_table(scores) == 6);
  CHECK(select_from_table({{5, 0.3}}) == 5);
  CHECK(select_from_table({{3, 0.5}, {9, 0.5}}) == 3);  // tie -> smaller K
  CHECK_THROWS(select_from_table({}));
}

TEST_CASE("select_k finds the planted topic count") {
  PlantedFixture fx;
  auto counts = count_windows(fx.corpus, 20);
  auto result = select_k(fx.corpus, fx.vocab, counts, {2, 3, 4, 6}, fx.opt, 10);
  CHECK(result.chosen == 3);
  CHECK(result.scores.size() == 4);
  for (const auto& [k, score] : result.scores) {
    if (k != 3) CHECK(result.scores.at(3) > score);
  }

  // deterministic across repeat runs
  auto again = select_k(fx.corpus, fx.vocab, counts, {2, 3, 4, 6}, fx.opt, 10);
  CHECK(again.chosen == result.chosen);
  CHECK(again.scores == result.scores);
}

TEST_CASE("pattern topic affinity via Bayes inversion") {
  // "double-top" appears only in the first half of the documents
  std::vector<Tokens> docs;
  for (int i = 0; i < 8; ++i) docs.push_back({"sell", "double-top", "drop", "double-top"});
  for (int i = 0; i < 8; ++i) docs.push_back({"moon", "rocket", "hold"});
  Corpus c = corpus_from_tokens(docs);
  Vocabulary v = Vocabulary::build(c, 1);
  TopicModel m = fit_lda(c, v, 2, {.alpha = 0.1, .sweeps = 150, .seed = 11});

  auto dist = distributions(m, v, {"double-top", "never-seen"});
  REQUIRE(dist.p_t_pp.rows() == 2);
  // the pattern should lean hard toward whichever topic owns its documents
  const double best = std::max(dist.p_t_pp.at(0, 0), dist.p_t_pp.at(0, 1));
  CHECK(best > 0.9);
  CHECK_FALSE(dist.pattern_oov[0]);

  CHECK(dist.pattern_oov[1]);
  CHECK(dist.p_t_pp.at(1, 0) == doctest::Approx(0.5));
  CHECK(dist.p_t_pp.at(1, 1) == doctest::Approx(0.5));

  // every row is a distribution
  for (std::size_t r = 0; r < 2; ++r) {
    double s = dist.p_t_pp.at(r, 0) + dist.p_t_pp.at(r, 1);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("uniform topics give uniform pattern affinity") {
  Corpus c = corpus_from_tokens({{"a", "b"}, {"a", "b"}});
  Vocabulary v = Vocabulary::build(c, 1);
  TopicModel m;
  m.K = 2;
  m.alpha = 1.0;
  m.beta = 0.01;
  m.vocab_size = 2;
  m.topic_word = {{5, 5}, {5, 5}};
  m.topic_total = {10, 10};
  m.doc_topic = {{1, 1}, {1, 1}};
  m.doc_total = {2, 2};
  auto dist = distributions(m, v, {"a"});
  CHECK(dist.p_t_pp.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dist.p_t_pp.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("topic report lists top words with probabilities") {
  Corpus c = corpus_from_tokens({{"btc", "btc", "moon"}});
  Vocabulary v = Vocabulary::build(c, 1);
  TopicModel m = fit_lda(c, v, 1, {.sweeps = 2});
  std::ostringstream out;
  write_topic_report(out, m, v, 2);
  const std::string line = out.str();
  CHECK(line.find("topic 0:") == 0);
  CHECK(line.find("btc(") != std::string::npos);
  CHECK(line.find("moon(") != std::string::npos);
}
