#include "finsage/stopwords.hpp"

#include <algorithm>
#include <vector>

#include "finsage/rng.hpp"

namespace finsage {

namespace {

// Function words only. Tokenization deletes apostrophes before splitting, so
// contraction fragments ("t", "s", "ll") never reach the filter; whole
// contractions like "dont" are kept — they show up as genuine topic words in
// this domain.
const char* const kStopwords[] = {
    "a",        "about",   "after",   "again",      "against", "all",
    "am",       "an",      "and",     "any",        "are",     "as",
    "at",       "be",      "because", "been",       "before",  "being",
    "both",     "but",     "by",      "can",        "could",   "did",
    "do",       "does",    "doing",   "done",       "during",  "each",
    "few",      "for",     "from",    "further",    "had",     "has",
    "have",     "having",  "he",      "her",        "here",    "hers",
    "herself",  "him",     "himself", "his",        "how",     "i",
    "if",       "in",      "into",    "is",         "it",      "its",
    "itself",   "just",    "me",      "more",       "most",    "my",
    "myself",   "no",      "nor",     "not",        "now",     "of",
    "off",      "on",      "once",    "only",       "or",      "other",
    "our",      "ours",    "ourselves", "out",      "own",     "same",
    "she",      "should",  "so",      "some",       "such",    "than",
    "that",     "the",     "their",   "theirs",     "them",    "themselves",
    "then",     "there",   "these",   "they",       "this",    "those",
    "through",  "to",      "too",     "very",       "was",     "we",
    "were",     "what",    "when",    "where",      "which",   "while",
    "who",      "whom",    "why",     "will",       "with",    "would",
    "you",      "your",    "yours",   "yourself",   "yourselves",
};

}  // namespace

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> set(std::begin(kStopwords),
                                                   std::end(kStopwords));
  return set;
}

bool is_stopword(const std::string& token) { return stopwords().count(token) != 0; }

std::uint64_t stopwords_fingerprint() {
  static const std::uint64_t fp = [] {
    std::vector<std::string> sorted(std::begin(kStopwords), std::end(kStopwords));
    std::sort(sorted.begin(), sorted.end());
    std::string joined;
    for (const auto& w : sorted) {
      joined += w;
      joined += '\n';
    }
    return fnv1a(joined);
  }();
  return fp;
}

}  // namespace finsage
