#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "finsage/corpus.hpp"

namespace finsage {

// Sliding-window co-occurrence counts. Windows slide with stride 1 inside
// each document; a document shorter than the window contributes exactly one
// window; a word or pair counts at most once per window. Pairs are stored
// once per unordered pair (lexicographically smaller token first).
struct CooccurrenceCounts {
  std::size_t total_windows = 0;
  std::unordered_map<std::string, std::size_t> word_windows;
  std::map<std::pair<std::string, std::string>, std::size_t> pair_windows;

  std::size_t windows_with(const std::string& w) const;
  std::size_t windows_with(const std::string& a, const std::string& b) const;
};

// Throws on window_size < 2. Documents with no tokens contribute no windows.
CooccurrenceCounts count_windows(const Corpus& corpus, std::size_t window_size);

struct WeightedEdge {
  std::string source;
  std::string target;
  double weight;
};
using WeightedEdgeList = std::vector<WeightedEdge>;

// Word-word edges: ln(p(a,b) / (p(a) p(b))) over window probabilities; only
// strictly positive values are emitted, one edge per unordered pair.
WeightedEdgeList pmi(const CooccurrenceCounts& counts);

// Document-word edges: raw term count times ln(N / df); zero weights (words
// in every document) are omitted. Sources are document ids.
WeightedEdgeList tfidf(const Corpus& corpus, const Vocabulary& vocab);

void write_edges_tsv(std::ostream& out, const WeightedEdgeList& edges);

}  // namespace finsage
