#include "finsage/textstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace finsage {

std::size_t CooccurrenceCounts::windows_with(const std::string& w) const {
  auto it = word_windows.find(w);
  return it == word_windows.end() ? 0 : it->second;
}

std::size_t CooccurrenceCounts::windows_with(const std::string& a,
                                             const std::string& b) const {
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  auto it = pair_windows.find(key);
  return it == pair_windows.end() ? 0 : it->second;
}

CooccurrenceCounts count_windows(const Corpus& corpus, std::size_t window_size) {
  if (window_size < 2) throw std::invalid_argument("window_size must be >= 2");
  CooccurrenceCounts counts;

  // Intern tokens so the hot counting loop works on integers.
  std::unordered_map<std::string, std::uint32_t> intern;
  std::vector<const std::string*> names;
  auto id_of = [&](const std::string& t) {
    auto [it, fresh] = intern.emplace(t, static_cast<std::uint32_t>(names.size()));
    if (fresh) names.push_back(&it->first);
    return it->second;
  };

  std::unordered_map<std::uint32_t, std::size_t> word_w;
  std::unordered_map<std::uint64_t, std::size_t> pair_w;
  std::vector<std::uint32_t> window;
  for (const auto& doc : corpus.docs) {
    const auto& toks = doc.tokens;
    if (toks.empty()) continue;
    const std::size_t n_windows = toks.size() <= window_size ? 1 : toks.size() - window_size + 1;
    counts.total_windows += n_windows;
    for (std::size_t start = 0; start < n_windows; ++start) {
      const std::size_t end = std::min(start + window_size, toks.size());
      window.clear();
      for (std::size_t i = start; i < end; ++i) window.push_back(id_of(toks[i]));
      std::sort(window.begin(), window.end());
      window.erase(std::unique(window.begin(), window.end()), window.end());
      for (std::size_t i = 0; i < window.size(); ++i) {
        word_w[window[i]] += 1;
        for (std::size_t j = i + 1; j < window.size(); ++j)
          pair_w[(static_cast<std::uint64_t>(window[i]) << 32) | window[j]] += 1;
      }
    }
  }

  for (const auto& [id, c] : word_w) counts.word_windows[*names[id]] = c;
  for (const auto& [key, c] : pair_w) {
    const std::string& a = *names[static_cast<std::uint32_t>(key >> 32)];
    const std::string& b = *names[static_cast<std::uint32_t>(key)];
    counts.pair_windows[a < b ? std::make_pair(a, b) : std::make_pair(b, a)] = c;
  }
  return counts;
}

WeightedEdgeList pmi(const CooccurrenceCounts& counts) {
  WeightedEdgeList edges;
  if (counts.total_windows == 0) return edges;
  const double w_total = static_cast<double>(counts.total_windows);
  for (const auto& [pair, joint] : counts.pair_windows) {
    const double pa = static_cast<double>(counts.windows_with(pair.first));
    const double pb = static_cast<double>(counts.windows_with(pair.second));
    const double value =
        std::log(static_cast<double>(joint) * w_total / (pa * pb));
    if (value > 0.0) edges.push_back({pair.first, pair.second, value});
  }
  return edges;
}

WeightedEdgeList tfidf(const Corpus& corpus, const Vocabulary& vocab) {
  WeightedEdgeList edges;
  const double n_docs = static_cast<double>(corpus.docs.size());
  for (const auto& doc : corpus.docs) {
    std::map<std::size_t, std::size_t> tf;  // vocab index -> raw count
    for (const auto& t : doc.tokens) {
      if (auto idx = vocab.index_of(t)) tf[*idx] += 1;
    }
    for (const auto& [idx, count] : tf) {
      const double idf = std::log(n_docs / static_cast<double>(vocab.df(vocab.token(idx))));
      const double weight = static_cast<double>(count) * idf;
      if (weight > 0.0) edges.push_back({doc.id, vocab.token(idx), weight});
    }
  }
  return edges;
}

void write_edges_tsv(std::ostream& out, const WeightedEdgeList& edges) {
  char buf[64];
  for (const auto& e : edges) {
    std::snprintf(buf, sizeof(buf), "%.12g", e.weight);
    out << e.source << '\t' << e.target << '\t' << buf << '\n';
  }
}

}  // namespace finsage
