#include "finsage/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "finsage/stopwords.hpp"

namespace finsage {

using nlohmann::json;

const char* position_name(Position p) {
  switch (p) {
    case Position::Long: return "Long";
    case Position::Short: return "Short";
    case Position::Education: return "Education";
  }
  return "?";
}

std::optional<Position> parse_position(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "long") return Position::Long;
  if (lower == "short") return Position::Short;
  if (lower == "education") return Position::Education;
  return std::nullopt;
}

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string string_field(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return "";
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  if (it->is_number()) return std::to_string(it->get<double>());
  throw std::runtime_error(std::string("field '") + key + "' has an unsupported type");
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& origin) {
  Corpus corpus;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": malformed record: " + e.what());
    }
    if (!rec.is_object())
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": record is not an object");
    std::string id, content;
    try {
      id = string_field(rec, "id");
      content = string_field(rec, "content");
    } catch (const std::exception& e) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (id.empty())
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": missing required field 'id'");
    if (!rec.contains("content"))
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": missing required field 'content'");
    if (!seen_ids.insert(id).second)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": duplicate document id '" + id + "'");
    if (blank(content)) {
      corpus.stats.discarded += 1;
      continue;
    }
    Document doc;
    doc.id = std::move(id);
    doc.content = std::move(content);
    const std::string pos = string_field(rec, "position");
    if (!pos.empty()) {
      auto parsed = parse_position(pos);
      if (!parsed)
        throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                 ": unknown position label '" + pos + "'");
      doc.position = parsed;
    }
    doc.symbol = string_field(rec, "symbol");
    doc.author = string_field(rec, "author");
    doc.time = string_field(rec, "time");
    doc.timeframe = string_field(rec, "timeframe");
    doc.title = string_field(rec, "title");
    corpus.docs.push_back(std::move(doc));
  }
  corpus.stats.total = corpus.docs.size();
  for (const auto& d : corpus.docs) {
    if (d.position) {
      corpus.stats.labelled += 1;
      corpus.stats.label_histogram[*d.position] += 1;
    }
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return parse_corpus(in, path);
}

std::vector<std::string> preprocess(const std::string& text, const PreprocessOptions& opt) {
  static const std::regex url_re(R"((https?://\S+|www\.\S+))",
                                 std::regex::optimize);
  static const std::regex email_re(R"([^\s@]+@[^\s@]+\.[^\s@]+)", std::regex::optimize);

  std::string s;
  s.reserve(text.size());
  for (char c : text)
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  s = std::regex_replace(s, url_re, " ");
  s = std::regex_replace(s, email_re, " ");

  // Delete apostrophes (ASCII and U+2019) so contractions collapse to single
  // tokens ("don't" -> "dont") instead of shedding fragments.
  std::string joined;
  joined.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\'') continue;
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xe2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x99) {
      i += 2;
      continue;
    }
    joined.push_back(s[i]);
  }

  // Everything outside [a-z0-9] separates tokens; this also sheds emoji and
  // any other multi-byte sequences.
  for (char& c : joined) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (!((u >= 'a' && u <= 'z') || (u >= '0' && u <= '9'))) c = ' ';
  }

  std::vector<std::string> tokens;
  std::istringstream stream(joined);
  std::string tok;
  while (stream >> tok) {
    if (tok.size() < opt.min_token_len) continue;
    if (opt.remove_stopwords && is_stopword(tok)) continue;
    tokens.push_back(tok);
  }
  return tokens;
}

void preprocess_corpus(Corpus& corpus, const PreprocessOptions& opt) {
  for (auto& doc : corpus.docs) doc.tokens = preprocess(doc.content, opt);
}

TokenLengthStats token_length_stats(const Corpus& corpus) {
  TokenLengthStats out;
  if (corpus.docs.empty()) return out;
  std::vector<std::size_t> lens;
  lens.reserve(corpus.docs.size());
  double sum = 0.0;
  for (const auto& d : corpus.docs) {
    lens.push_back(d.tokens.size());
    sum += static_cast<double>(d.tokens.size());
  }
  out.mean = sum / static_cast<double>(lens.size());
  std::sort(lens.begin(), lens.end());
  const std::size_t n = lens.size();
  out.median = n % 2 ? static_cast<double>(lens[n / 2])
                     : (static_cast<double>(lens[n / 2 - 1]) + static_cast<double>(lens[n / 2])) / 2.0;
  return out;
}

// --- pattern lexicon ---

void PatternLexicon::add_entry(std::string canonical,
                               const std::vector<std::string>& raw_variants,
                               std::optional<Position> implication,
                               const std::string& where) {
  if (canonical.empty()) throw std::runtime_error(where + ": empty canonical name");
  if (by_canonical_.count(canonical))
    throw std::runtime_error(where + ": duplicate canonical name '" + canonical + "'");
  Entry entry;
  entry.canonical = canonical;
  entry.implication = implication;
  const std::size_t entry_idx = entries_.size();

  // The canonical name itself always matches, normalized like document text.
  std::vector<std::vector<std::string>> runs;
  runs.push_back(preprocess(canonical));
  for (const auto& raw : raw_variants) runs.push_back(preprocess(raw));

  std::set<std::vector<std::string>> seen;
  for (auto& run : runs) {
    if (run.empty())
      throw std::runtime_error(where + ": variant of '" + canonical +
                               "' normalizes to nothing");
    if (!seen.insert(run).second) continue;  // duplicate within the entry
    for (const auto& [token, lst] : by_first_token_) {
      (void)token;
      for (const auto& [other_run, other_idx] : lst) {
        if (other_run == run)
          throw std::runtime_error(where + ": variant of '" + canonical +
                                   "' already maps to '" + entries_[other_idx].canonical + "'");
      }
    }
    entry.variants.push_back(run);
    by_first_token_[run.front()].push_back({run, entry_idx});
  }
  // longest-first so greedy matching prefers the most specific variant
  auto& bucket_ordering = by_first_token_;
  for (auto& [tok, lst] : bucket_ordering) {
    (void)tok;
    std::stable_sort(lst.begin(), lst.end(), [](const auto& a, const auto& b) {
      return a.first.size() > b.first.size();
    });
  }
  by_canonical_[canonical] = entry_idx;
  entries_.push_back(std::move(entry));
}

PatternLexicon PatternLexicon::builtin() {
  PatternLexicon lex;
  lex.add_entry("head-and-shoulders",
                {"head and shoulders", "head n shoulders", "h&s", "hns",
                 "inverse head and shoulders", "head and shoulder"},
                Position::Short, "builtin lexicon");
  lex.add_entry("double-top", {"double top", "double tops", "dbl top"}, Position::Short,
                "builtin lexicon");
  lex.add_entry("cup-and-handle",
                {"cup and handle", "cup n handle", "cup with handle"}, Position::Long,
                "builtin lexicon");
  lex.add_entry("bearish-flag", {"bearish flag", "bear flag"}, Position::Short,
                "builtin lexicon");
  return lex;
}

PatternLexicon PatternLexicon::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  PatternLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(line_no);
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3)
      throw std::runtime_error(where + ": expected 3 tab-separated columns, got " +
                               std::to_string(cols.size()));
    std::vector<std::string> variants;
    std::stringstream vs(cols[1]);
    std::string v;
    while (std::getline(vs, v, '|'))
      if (!blank(v)) variants.push_back(v);
    std::optional<Position> implication;
    std::string imp = cols[2];
    for (char& c : imp) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    // strip surrounding whitespace
    while (!imp.empty() && std::isspace(static_cast<unsigned char>(imp.back()))) imp.pop_back();
    while (!imp.empty() && std::isspace(static_cast<unsigned char>(imp.front())))
      imp.erase(imp.begin());
    if (imp != "none") {
      implication = parse_position(imp);
      if (!implication)
        throw std::runtime_error(where + ": implication must be Long, Short, or None, got '" +
                                 cols[2] + "'");
    }
    lex.add_entry(cols[0], variants, implication, where);
  }
  return lex;
}

bool PatternLexicon::is_canonical(const std::string& token) const {
  return by_canonical_.count(token) != 0;
}

std::optional<Position> PatternLexicon::implication(const std::string& canonical) const {
  auto it = by_canonical_.find(canonical);
  if (it == by_canonical_.end()) return std::nullopt;
  return entries_[it->second].implication;
}

std::vector<std::string> PatternLexicon::canonical_names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& e : entries_) names.push_back(e.canonical);
  return names;
}

std::vector<std::string> PatternLexicon::unify(std::vector<std::string>& tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::set<std::string> found;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const auto bucket = by_first_token_.find(tokens[i]);
    bool matched = false;
    if (bucket != by_first_token_.end()) {
      for (const auto& [run, entry_idx] : bucket->second) {
        if (i + run.size() > tokens.size()) continue;
        if (std::equal(run.begin(), run.end(), tokens.begin() + i)) {
          out.push_back(entries_[entry_idx].canonical);
          found.insert(entries_[entry_idx].canonical);
          i += run.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  tokens = std::move(out);
  return {found.begin(), found.end()};
}

void unify_corpus_patterns(Corpus& corpus, const PatternLexicon& lexicon) {
  for (auto& doc : corpus.docs) doc.patterns = lexicon.unify(doc.tokens);
}

// --- n-gram detection ---

namespace {
bool plain_token(const std::string& t) { return t.find('-') == std::string::npos; }
}  // namespace

PhraseTable detect_ngrams(const Corpus& corpus, std::size_t min_count, double threshold) {
  std::unordered_map<std::string, std::size_t> unigram;
  std::map<std::pair<std::string, std::string>, std::size_t> bigram;
  std::size_t total = 0;
  for (const auto& doc : corpus.docs) {
    total += doc.tokens.size();
    for (const auto& t : doc.tokens) unigram[t] += 1;
    for (std::size_t i = 0; i + 1 < doc.tokens.size(); ++i) {
      if (plain_token(doc.tokens[i]) && plain_token(doc.tokens[i + 1]))
        bigram[{doc.tokens[i], doc.tokens[i + 1]}] += 1;
    }
  }
  PhraseTable table;
  for (const auto& [pair, count] : bigram) {
    if (count < min_count) continue;
    const double score = static_cast<double>(count - min_count) *
                         static_cast<double>(total) /
                         (static_cast<double>(unigram[pair.first]) *
                          static_cast<double>(unigram[pair.second]));
    if (score >= threshold) table.pairs.emplace(pair, score);
  }
  return table;
}

std::vector<std::string> apply_ngrams(const std::vector<std::string>& tokens,
                                      const PhraseTable& table) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (i + 1 < tokens.size() && plain_token(tokens[i]) && plain_token(tokens[i + 1]) &&
        table.contains(tokens[i], tokens[i + 1])) {
      out.push_back(tokens[i] + "-" + tokens[i + 1]);
      i += 2;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

void apply_ngrams(Corpus& corpus, const PhraseTable& table) {
  for (auto& doc : corpus.docs) doc.tokens = apply_ngrams(doc.tokens, table);
}

// --- vocabulary ---

Vocabulary Vocabulary::build(const Corpus& corpus, std::size_t min_df,
                             const PatternLexicon* whitelist) {
  Vocabulary vocab;
  for (const auto& doc : corpus.docs) {
    std::set<std::string> uniq(doc.tokens.begin(), doc.tokens.end());
    for (const auto& t : uniq) vocab.df_[t] += 1;
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, df] : vocab.df_) {
    const bool whitelisted = whitelist && whitelist->is_canonical(token);
    if (df >= min_df || whitelisted) kept.push_back({token, df});
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [token, df] : kept) {
    (void)df;
    vocab.index_[token] = vocab.tokens_.size();
    vocab.tokens_.push_back(token);
  }
  return vocab;
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::df(const std::string& token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

}  // namespace finsage
