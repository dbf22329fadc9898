#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace finsage {

// Market stance of a report. Order fixes the label indices and the
// position-node one-hot layout everywhere downstream.
enum class Position { Long = 0, Short = 1, Education = 2 };
inline constexpr std::size_t kNumPositions = 3;

const char* position_name(Position p);
std::optional<Position> parse_position(std::string_view s);  // case-insensitive

struct Document {
  std::string id;
  std::string content;
  std::optional<Position> position;
  std::string symbol;
  std::string author;
  std::string time;
  std::string timeframe;
  std::string title;
  std::vector<std::string> tokens;    // derived; empty until preprocessed
  std::vector<std::string> patterns;  // canonical names, sorted unique
};

struct IngestStats {
  std::size_t total = 0;      // documents kept
  std::size_t labelled = 0;
  std::size_t discarded = 0;  // records with empty/whitespace-only content
  std::map<Position, std::size_t> label_histogram;
};

struct Corpus {
  std::vector<Document> docs;
  IngestStats stats;
};

// Line-delimited records; extra fields ignored. Throws std::runtime_error
// with the 1-based line number for malformed records and for duplicate ids.
Corpus load_corpus(const std::string& path);
Corpus parse_corpus(std::istream& in, const std::string& origin = "corpus");

struct PreprocessOptions {
  bool remove_stopwords = true;
  std::size_t min_token_len = 1;
};

// Lowercase, strip URLs/emails, delete apostrophes, treat every remaining
// non-alphanumeric byte (punctuation, emoji, newlines) as a separator, then
// drop stopwords. Token order is preserved; numbers are kept.
std::vector<std::string> preprocess(const std::string& text,
                                    const PreprocessOptions& opt = {});
void preprocess_corpus(Corpus& corpus, const PreprocessOptions& opt = {});

struct TokenLengthStats {
  double mean = 0.0;
  double median = 0.0;
};
TokenLengthStats token_length_stats(const Corpus& corpus);

// Named chart formations and their conventional market implication. Variants
// are stored pre-normalized (same pipeline as document text) so matching is
// consistent with tokenized content.
class PatternLexicon {
 public:
  struct Entry {
    std::string canonical;                            // single hyphenated token
    std::vector<std::vector<std::string>> variants;   // normalized token runs
    std::optional<Position> implication;              // nullopt = None
  };

  // The four patterns with published implications.
  static PatternLexicon builtin();
  // Tab-separated: canonical_name <TAB> variant|variant|... <TAB> implication.
  // Implication is one of Long, Short, None (case-insensitive). '#' comments
  // and blank lines allowed.
  static PatternLexicon load_tsv(const std::string& path);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool is_canonical(const std::string& token) const;
  std::optional<Position> implication(const std::string& canonical) const;
  std::vector<std::string> canonical_names() const;

  // Replaces every variant span in tokens with the canonical token and
  // returns the canonical names found (sorted unique). Longest match wins;
  // tokens outside matched spans are untouched.
  std::vector<std::string> unify(std::vector<std::string>& tokens) const;

 private:
  void add_entry(std::string canonical, const std::vector<std::string>& raw_variants,
                 std::optional<Position> implication, const std::string& where);
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_canonical_;
  // first token of a variant -> (variant tokens, entry index), longest first
  std::unordered_map<std::string, std::vector<std::pair<std::vector<std::string>, std::size_t>>>
      by_first_token_;
};

void unify_corpus_patterns(Corpus& corpus, const PatternLexicon& lexicon);

// Adjacent-pair collocations worth merging into single hyphenated tokens.
// Only plain (hyphen-free) tokens participate, which makes a second
// application of the same table a no-op.
struct PhraseTable {
  std::map<std::pair<std::string, std::string>, double> pairs;  // score per pair
  bool contains(const std::string& a, const std::string& b) const {
    return pairs.count({a, b}) != 0;
  }
};

// score(a,b) = (count(a,b) - min_count) * total_tokens / (count(a)*count(b));
// pairs kept when count(a,b) >= min_count and score >= threshold.
PhraseTable detect_ngrams(const Corpus& corpus, std::size_t min_count, double threshold);
std::vector<std::string> apply_ngrams(const std::vector<std::string>& tokens,
                                      const PhraseTable& table);
void apply_ngrams(Corpus& corpus, const PhraseTable& table);

class Vocabulary {
 public:
  // Tokens with document frequency >= min_df, ordered by df descending then
  // lexicographically. Canonical pattern tokens present in the corpus bypass
  // the min_df cut so every detected pattern stays representable.
  static Vocabulary build(const Corpus& corpus, std::size_t min_df,
                          const PatternLexicon* whitelist = nullptr);

  std::optional<std::size_t> index_of(const std::string& token) const;
  const std::string& token(std::size_t idx) const { return tokens_[idx]; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t df(const std::string& token) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::size_t> df_;
};

}  // namespace finsage
