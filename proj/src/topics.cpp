#include "finsage/topics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

#include "finsage/rng.hpp"

namespace finsage {

std::vector<double> TopicModel::p_w_given_t(std::size_t t) const {
  std::vector<double> p(vocab_size);
  const double denom = static_cast<double>(topic_total[t]) + beta * static_cast<double>(vocab_size);
  for (std::size_t w = 0; w < vocab_size; ++w)
    p[w] = (static_cast<double>(topic_word[t][w]) + beta) / denom;
  return p;
}

std::vector<double> TopicModel::p_t_given_d(std::size_t d) const {
  std::vector<double> p(K);
  const double denom = static_cast<double>(doc_total[d]) + alpha * static_cast<double>(K);
  for (std::size_t t = 0; t < K; ++t)
    p[t] = (static_cast<double>(doc_topic[d][t]) + alpha) / denom;
  return p;
}

std::vector<double> TopicModel::p_t() const {
  std::vector<double> p(K);
  double total = 0.0;
  for (std::size_t t = 0; t < K; ++t) total += static_cast<double>(topic_total[t]);
  const double denom = total + alpha * static_cast<double>(K);
  for (std::size_t t = 0; t < K; ++t)
    p[t] = (static_cast<double>(topic_total[t]) + alpha) / denom;
  return p;
}

std::vector<std::uint32_t> TopicModel::top_words(std::size_t t, std::size_t n) const {
  std::vector<std::uint32_t> observed;
  for (std::size_t w = 0; w < vocab_size; ++w)
    if (topic_word[t][w] > 0) observed.push_back(static_cast<std::uint32_t>(w));
  std::sort(observed.begin(), observed.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (topic_word[t][a] != topic_word[t][b]) return topic_word[t][a] > topic_word[t][b];
    return a < b;
  });
  if (observed.size() > n) observed.resize(n);
  return observed;
}

TopicModel fit_lda(const Corpus& corpus, const Vocabulary& vocab, std::size_t K,
                   const LdaOptions& opt) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (vocab.size() == 0) throw std::runtime_error("cannot fit topics on an empty vocabulary");

  TopicModel m;
  m.K = K;
  m.alpha = opt.alpha > 0.0 ? opt.alpha : 50.0 / static_cast<double>(K);
  m.beta = opt.beta;
  m.seed = opt.seed;
  m.vocab_size = vocab.size();
  m.topic_word.assign(K, std::vector<std::size_t>(vocab.size(), 0));
  m.doc_topic.assign(corpus.docs.size(), std::vector<std::size_t>(K, 0));
  m.topic_total.assign(K, 0);
  m.doc_total.assign(corpus.docs.size(), 0);
  m.doc_words.resize(corpus.docs.size());
  m.assignments.resize(corpus.docs.size());

  Rng rng(opt.seed);
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    for (const auto& tok : corpus.docs[d].tokens) {
      if (auto idx = vocab.index_of(tok))
        m.doc_words[d].push_back(static_cast<std::uint32_t>(*idx));
    }
    m.assignments[d].resize(m.doc_words[d].size());
    for (std::size_t i = 0; i < m.doc_words[d].size(); ++i) {
      const int z = static_cast<int>(rng.below(K));
      m.assignments[d][i] = z;
      m.topic_word[z][m.doc_words[d][i]] += 1;
      m.doc_topic[d][z] += 1;
      m.topic_total[z] += 1;
      m.doc_total[d] += 1;
    }
  }

  const double v_beta = m.beta * static_cast<double>(vocab.size());
  std::vector<double> weight(K);
  for (std::size_t sweep = 0; sweep < opt.sweeps; ++sweep) {
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
      auto& words = m.doc_words[d];
      auto& zs = m.assignments[d];
      for (std::size_t i = 0; i < words.size(); ++i) {
        const std::uint32_t w = words[i];
        const int old_z = zs[i];
        m.topic_word[old_z][w] -= 1;
        m.doc_topic[d][old_z] -= 1;
        m.topic_total[old_z] -= 1;

        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          weight[t] = (static_cast<double>(m.topic_word[t][w]) + m.beta) /
                      (static_cast<double>(m.topic_total[t]) + v_beta) *
                      (static_cast<double>(m.doc_topic[d][t]) + m.alpha);
          total += weight[t];
        }
        double r = rng.next_double() * total;
        int new_z = static_cast<int>(K) - 1;
        for (std::size_t t = 0; t < K; ++t) {
          r -= weight[t];
          if (r <= 0.0) {
            new_z = static_cast<int>(t);
            break;
          }
        }
        zs[i] = new_z;
        m.topic_word[new_z][w] += 1;
        m.doc_topic[d][new_z] += 1;
        m.topic_total[new_z] += 1;
      }
    }
  }
  return m;
}

namespace {

// Sparse positive-PMI context vectors keyed by vocab index.
using SparseVec = std::unordered_map<std::uint32_t, double>;

double sparse_cosine(const SparseVec& a, const SparseVec& b) {
  if (a.empty() || b.empty()) return 0.0;
  const SparseVec& small = a.size() <= b.size() ? a : b;
  const SparseVec& large = a.size() <= b.size() ? b : a;
  double dot = 0.0;
  for (const auto& [k, v] : small) {
    auto it = large.find(k);
    if (it != large.end()) dot += v * it->second;
  }
  if (dot == 0.0) return 0.0;
  double na = 0.0, nb = 0.0;
  for (const auto& [k, v] : a) {
    (void)k;
    na += v * v;
  }
  for (const auto& [k, v] : b) {
    (void)k;
    nb += v * v;
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

CoherenceReport coherence(const TopicModel& model, const CooccurrenceCounts& counts,
                          const Vocabulary& vocab, std::size_t top_n) {
  if (top_n < 2) throw std::invalid_argument("top_n must be >= 2");

  // Context vectors for exactly the words that show up in some topic's top list.
  std::vector<std::vector<std::uint32_t>> tops(model.K);
  std::vector<bool> needed(vocab.size(), false);
  for (std::size_t t = 0; t < model.K; ++t) {
    tops[t] = model.top_words(t, top_n);
    for (auto w : tops[t]) needed[w] = true;
  }
  std::unordered_map<std::uint32_t, SparseVec> context;
  const WeightedEdgeList pmi_edges = pmi(counts);
  for (const auto& e : pmi_edges) {
    auto si = vocab.index_of(e.source);
    auto ti = vocab.index_of(e.target);
    if (!si || !ti) continue;
    const auto s = static_cast<std::uint32_t>(*si), t = static_cast<std::uint32_t>(*ti);
    if (needed[s]) context[s][t] = e.weight;
    if (needed[t]) context[t][s] = e.weight;
  }

  CoherenceReport report;
  report.per_topic.resize(model.K, 0.0);
  report.flagged.resize(model.K, false);
  static const SparseVec kEmpty;
  for (std::size_t t = 0; t < model.K; ++t) {
    const auto& words = tops[t];
    report.flagged[t] = words.size() < top_n;
    if (words.size() < 2) continue;
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      auto ai = context.find(words[i]);
      const SparseVec& va = ai == context.end() ? kEmpty : ai->second;
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        auto bj = context.find(words[j]);
        const SparseVec& vb = bj == context.end() ? kEmpty : bj->second;
        sum += sparse_cosine(va, vb);
        ++pairs;
      }
    }
    report.per_topic[t] = sum / static_cast<double>(pairs);
  }
  double total = 0.0;
  for (double s : report.per_topic) total += s;
  report.mean = model.K ? total / static_cast<double>(model.K) : 0.0;
  return report;
}

std::size_t select_from_table(const std::map<std::size_t, double>& scores) {
  if (scores.empty()) throw std::invalid_argument("empty score table");
  std::size_t best_k = scores.begin()->first;
  double best = scores.begin()->second;
  for (const auto& [k, s] : scores) {
    if (s > best) {  // strict: ties keep the smaller K
      best = s;
      best_k = k;
    }
  }
  return best_k;
}

SelectKResult select_k(const Corpus& corpus, const Vocabulary& vocab,
                       const CooccurrenceCounts& counts,
                       const std::vector<std::size_t>& k_values, const LdaOptions& opt,
                       std::size_t top_n) {
  if (k_values.empty()) throw std::invalid_argument("no candidate K values");
  SelectKResult result;
  for (std::size_t k : k_values) {
    LdaOptions per_k = opt;
    per_k.seed = hash_combine(opt.seed, mix64(k));
    TopicModel model = fit_lda(corpus, vocab, k, per_k);
    result.scores[k] = coherence(model, counts, vocab, top_n).mean;
  }
  result.chosen = select_from_table(result.scores);
  return result;
}

TopicDistributions distributions(const TopicModel& model, const Vocabulary& vocab,
                                 const std::vector<std::string>& patterns) {
  TopicDistributions out;
  const std::size_t K = model.K, V = model.vocab_size, D = model.doc_topic.size();
  out.phi = Tensor({K, V});
  for (std::size_t t = 0; t < K; ++t) {
    auto row = model.p_w_given_t(t);
    std::copy(row.begin(), row.end(), out.phi.row(t));
  }
  out.theta = Tensor({D == 0 ? 1 : D, K});  // keep rank-2 even for an empty corpus
  for (std::size_t d = 0; d < D; ++d) {
    auto row = model.p_t_given_d(d);
    std::copy(row.begin(), row.end(), out.theta.row(d));
  }
  const std::vector<double> pt = model.p_t();
  out.p_t_pp = Tensor({patterns.empty() ? 1 : patterns.size(), K});
  out.pattern_oov.assign(patterns.size(), false);
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    const auto idx = vocab.index_of(patterns[p]);
    if (!idx) {
      out.pattern_oov[p] = true;
      for (std::size_t t = 0; t < K; ++t)
        out.p_t_pp.at(p, t) = 1.0 / static_cast<double>(K);
      continue;
    }
    double total = 0.0;
    const double denom_base = model.beta * static_cast<double>(V);
    for (std::size_t t = 0; t < K; ++t) {
      const double p_pp_t = (static_cast<double>(model.topic_word[t][*idx]) + model.beta) /
                            (static_cast<double>(model.topic_total[t]) + denom_base);
      out.p_t_pp.at(p, t) = p_pp_t * pt[t];
      total += out.p_t_pp.at(p, t);
    }
    for (std::size_t t = 0; t < K; ++t) out.p_t_pp.at(p, t) /= total;
  }
  return out;
}

void write_topic_report(std::ostream& out, const TopicModel& model,
                        const Vocabulary& vocab, std::size_t top_n) {
  char buf[32];
  for (std::size_t t = 0; t < model.K; ++t) {
    out << "topic " << t << ":";
    const auto p = model.p_w_given_t(t);
    for (auto w : model.top_words(t, top_n)) {
      std::snprintf(buf, sizeof(buf), "%.4f", p[w]);
      out << ' ' << vocab.token(w) << '(' << buf << ')';
    }
    out << '\n';
  }
}

}  // namespace finsage
