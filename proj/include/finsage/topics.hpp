#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "finsage/corpus.hpp"
#include "finsage/tensor.hpp"
#include "finsage/textstats.hpp"

namespace finsage {

struct LdaOptions {
  double alpha = 0.0;  // <= 0 means the 50/K default
  double beta = 0.01;
  std::size_t sweeps = 500;
  std::uint64_t seed = 42;
};

// Collapsed Gibbs state. Count matrices are the model; distributions are
// smoothed point estimates derived from them.
struct TopicModel {
  std::size_t K = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t vocab_size = 0;

  std::vector<std::vector<std::size_t>> topic_word;  // K x V
  std::vector<std::vector<std::size_t>> doc_topic;   // D x K
  std::vector<std::size_t> topic_total;              // K
  std::vector<std::size_t> doc_total;                // D
  std::vector<std::vector<std::uint32_t>> doc_words; // vocab index per in-vocab token
  std::vector<std::vector<int>> assignments;         // aligned with doc_words

  std::vector<double> p_w_given_t(std::size_t t) const;
  std::vector<double> p_t_given_d(std::size_t d) const;
  std::vector<double> p_t() const;  // smoothed corpus-wide topic proportions

  // words with nonzero count in topic t, ordered by probability descending
  std::vector<std::uint32_t> top_words(std::size_t t, std::size_t n) const;
};

// Out-of-vocabulary tokens are skipped. Throws if the vocabulary is empty.
// K = 1 is allowed and trivially assigns everything to the single topic.
TopicModel fit_lda(const Corpus& corpus, const Vocabulary& vocab, std::size_t K,
                   const LdaOptions& opt = {});

struct CoherenceReport {
  std::vector<double> per_topic;
  std::vector<bool> flagged;  // fewer than top_n observed words
  double mean = 0.0;
};

// Context-vector coherence: each top word gets a vector of its positive PMI
// values against co-occurring words; a topic scores the mean pairwise cosine
// of its top_n words' vectors. All-zero vectors contribute cosine 0.
CoherenceReport coherence(const TopicModel& model, const CooccurrenceCounts& counts,
                          const Vocabulary& vocab, std::size_t top_n = 10);

// Argmax of the score table; ties broken toward the smaller K.
std::size_t select_from_table(const std::map<std::size_t, double>& scores);

struct SelectKResult {
  std::size_t chosen = 0;
  std::map<std::size_t, double> scores;
};

// Fits one model per candidate (seed forked per K) and picks the most
// coherent. Deterministic for fixed seeds.
SelectKResult select_k(const Corpus& corpus, const Vocabulary& vocab,
                       const CooccurrenceCounts& counts,
                       const std::vector<std::size_t>& k_values,
                       const LdaOptions& opt = {}, std::size_t top_n = 10);

struct TopicDistributions {
  Tensor phi;                     // K x V, P(w|t)
  Tensor theta;                   // D x K, P(t|d)
  Tensor p_t_pp;                  // patterns x K, P(t|pp)
  std::vector<bool> pattern_oov;  // true -> uniform fallback row
};

// P(w|t), P(t|d) from smoothed counts; P(t|pp) by Bayes inversion over the
// pattern's canonical token: P(t|pp) proportional to P(pp|t) P(t). Patterns
// whose token never made the vocabulary get a uniform row and a flag.
TopicDistributions distributions(const TopicModel& model, const Vocabulary& vocab,
                                 const std::vector<std::string>& patterns);

void write_topic_report(std::ostream& out, const TopicModel& model,
                        const Vocabulary& vocab, std::size_t top_n = 10);

}  // namespace finsage
