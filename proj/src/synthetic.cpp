#include "finsage/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsage/rng.hpp"

namespace finsage {

namespace {

const std::vector<std::string> kLongWords = {
    "up",      "breakout",   "bullish", "buy",     "rally",  "support",
    "uptrend", "higher",     "surge",   "moon",    "target", "gain",
    "ascending", "strong",   "accumulate"};
const std::vector<std::string> kShortWords = {
    "down",      "breakdown",    "bearish", "sell",  "dump",  "resistance",
    "downtrend", "lower",        "drop",    "crash", "weak",  "correction",
    "descending", "distribution", "loss"};
const std::vector<std::string> kEducationWords = {
    "lesson",  "tutorial",  "learn",        "basics",  "guide",
    "concept", "definition", "example",     "practice", "explained",
    "introduction", "theory", "method",     "principle", "overview"};
const std::vector<std::string> kFillerWords = {
    "price",   "chart",        "market",   "volume", "candle",  "level",
    "line",    "zone",         "week",     "day",    "session", "analysis",
    "signal",  "move",         "area",     "point",  "view",    "setup",
    "entry",   "stop",         "profit",   "risk",   "ratio",   "wave",
    "fib",     "retracement",  "structure", "momentum", "action", "close",
    "open",    "high",         "low",      "range",  "consolidation", "btc",
    "eth",     "usdt",         "timeframe", "idea"};
const std::vector<std::string> kSymbols = {"BTCUSDT", "ETHUSDT", "XRPUSDT",
                                           "ADAUSDT", "SOLUSDT", "EURUSD"};
const std::vector<std::string> kTimeframes = {"15m", "1h", "4h", "1d", "1w"};

const std::vector<std::string> kShortPatternPhrases = {
    "head and shoulders", "double top", "bearish flag"};
const std::string kLongPatternPhrase = "cup and handle";

std::array<std::size_t, 3> quota_counts(std::size_t n, const std::array<double, 3>& fr) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double q = static_cast<double>(n) * fr[c];
    counts[c] = static_cast<std::size_t>(q);
    frac[c] = q - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c)
      if (frac[c] > frac[best]) best = c;
    counts[best] += 1;
    frac[best] = -1.0;
    assigned += 1;
  }
  return counts;
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.below(pool.size())];
}

void insert_phrase(std::vector<std::string>& tokens, const std::string& phrase, Rng& rng) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < phrase.size()) {
    const std::size_t sp = phrase.find(' ', start);
    words.push_back(phrase.substr(start, sp == std::string::npos ? sp : sp - start));
    if (sp == std::string::npos) break;
    start = sp + 1;
  }
  const std::size_t at = rng.below(tokens.size() + 1);
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), words.begin(), words.end());
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

void fill_metadata(Document& doc, std::size_t i, Rng& rng) {
  doc.symbol = kSymbols[rng.below(kSymbols.size())];
  doc.author = "user" + std::to_string(rng.below(40));
  doc.time = "2021-" + std::to_string(1 + i % 12) + "-" + std::to_string(1 + i % 28);
  doc.timeframe = kTimeframes[rng.below(kTimeframes.size())];
  const std::size_t cut = doc.content.find(' ');
  doc.title = cut == std::string::npos ? doc.content : doc.content.substr(0, cut);
}

void fill_stats(Corpus& corpus) {
  corpus.stats = IngestStats{};
  corpus.stats.total = corpus.docs.size();
  for (const auto& d : corpus.docs) {
    if (d.position) {
      corpus.stats.labelled += 1;
      corpus.stats.label_histogram[*d.position] += 1;
    }
  }
}

}  // namespace

Corpus gen_separable(const SeparableOptions& opt) {
  Rng rng(opt.seed);
  const auto counts = quota_counts(opt.docs, opt.class_fractions);
  std::vector<Position> labels;
  for (std::size_t c = 0; c < 3; ++c)
    labels.insert(labels.end(), counts[c], static_cast<Position>(c));
  rng.shuffle(labels);

  const std::vector<std::string>* pools[3] = {&kLongWords, &kShortWords, &kEducationWords};
  Corpus corpus;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Position label = labels[i];
    const bool noisy = rng.next_double() < opt.noise;
    const std::vector<std::string>& signal_pool =
        noisy ? *pools[rng.below(3)] : *pools[static_cast<std::size_t>(label)];

    const std::size_t len = 20 + rng.below(31);
    const std::size_t n_signal = std::max<std::size_t>(4, 2 * len / 5);
    std::vector<std::string> tokens;
    tokens.reserve(len + 3);
    for (std::size_t k = 0; k < n_signal; ++k) tokens.push_back(pick(signal_pool, rng));
    for (std::size_t k = n_signal; k < len; ++k) tokens.push_back(pick(kFillerWords, rng));
    rng.shuffle(tokens);

    if (opt.with_patterns && label != Position::Education && rng.next_double() < 0.6) {
      const std::string& phrase = label == Position::Long
                                      ? kLongPatternPhrase
                                      : kShortPatternPhrases[rng.below(3)];
      insert_phrase(tokens, phrase, rng);
    }

    Document doc;
    doc.id = "doc" + std::to_string(1000 + i);
    doc.content = join(tokens);
    doc.position = label;
    fill_metadata(doc, i, rng);
    corpus.docs.push_back(std::move(doc));
  }
  fill_stats(corpus);
  return corpus;
}

Corpus gen_planted_topics(const PlantedTopicsOptions& opt) {
  Rng rng(opt.seed);
  std::vector<std::vector<std::string>> plants(opt.plants);
  for (std::size_t p = 0; p < opt.plants; ++p)
    for (std::size_t j = 0; j < opt.words_per_plant; ++j)
      plants[p].push_back("p" + std::to_string(p) + "w" + std::to_string(j));

  const std::size_t n_junk_docs =
      static_cast<std::size_t>(std::lround(static_cast<double>(opt.docs) * opt.junk_fraction));
  Corpus corpus;
  std::size_t junk_counter = 0;
  for (std::size_t i = 0; i < opt.docs; ++i) {
    std::vector<std::string> tokens;
    if (i < n_junk_docs) {
      const std::size_t len = 4 + rng.below(3);
      for (std::size_t k = 0; k < len; ++k)
        tokens.push_back("z" + std::to_string(junk_counter++));  // never repeats
    } else {
      const std::size_t plant = (i - n_junk_docs) % opt.plants;
      const std::size_t len = 20 + rng.below(21);
      for (std::size_t k = 0; k < len; ++k) tokens.push_back(pick(plants[plant], rng));
    }

    Document doc;
    doc.id = "doc" + std::to_string(1000 + i);
    doc.content = join(tokens);
    fill_metadata(doc, i, rng);
    corpus.docs.push_back(std::move(doc));
  }
  fill_stats(corpus);
  return corpus;
}

Corpus gen_pattern_driven(const PatternDrivenOptions& opt) {
  Rng rng(opt.seed);
  const auto counts = quota_counts(opt.docs, opt.class_fractions);
  std::vector<Position> labels;
  for (std::size_t c = 0; c < 3; ++c)
    labels.insert(labels.end(), counts[c], static_cast<Position>(c));
  rng.shuffle(labels);

  Corpus corpus;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Position label = labels[i];
    const std::size_t len = 15 + rng.below(26);
    std::vector<std::string> tokens;
    tokens.reserve(len + 3);
    // Wording is deliberately label-free; the chart pattern carries the label.
    for (std::size_t k = 0; k < len; ++k) tokens.push_back(pick(kFillerWords, rng));
    if (label == Position::Long) {
      insert_phrase(tokens, kLongPatternPhrase, rng);
    } else if (label == Position::Short) {
      insert_phrase(tokens, kShortPatternPhrases[rng.below(3)], rng);
    } else {
      for (std::size_t k = 0; k < 4; ++k) tokens.push_back(pick(kEducationWords, rng));
      rng.shuffle(tokens);
    }

    Document doc;
    doc.id = "doc" + std::to_string(1000 + i);
    doc.content = join(tokens);
    doc.position = label;
    fill_metadata(doc, i, rng);
    corpus.docs.push_back(std::move(doc));
  }
  fill_stats(corpus);
  return corpus;
}

Corpus gen_paper_stats(const PaperStatsOptions& opt) {
  Rng rng(opt.seed);
  const std::size_t labelled = opt.n_long + opt.n_short + opt.n_education;
  std::vector<std::optional<Position>> labels;
  labels.reserve(opt.total);
  labels.insert(labels.end(), opt.n_long, Position::Long);
  labels.insert(labels.end(), opt.n_short, Position::Short);
  labels.insert(labels.end(), opt.n_education, Position::Education);
  labels.insert(labels.end(), opt.total - labelled, std::nullopt);
  rng.shuffle(labels);

  const double mu = std::log(opt.median_tokens);
  const double sigma = std::sqrt(2.0 * std::log(opt.mean_tokens / opt.median_tokens));

  Corpus corpus;
  corpus.docs.reserve(opt.total);
  for (std::size_t i = 0; i < opt.total; ++i) {
    const double raw = std::exp(mu + sigma * rng.next_gauss());
    const std::size_t len =
        static_cast<std::size_t>(std::clamp(std::llround(raw), 1ll, 5000ll));
    std::vector<std::string> tokens;
    tokens.reserve(len);
    for (std::size_t k = 0; k < len; ++k) {
      if (rng.next_double() < 0.7)
        tokens.push_back(pick(kFillerWords, rng));
      else
        tokens.push_back("w" + std::to_string(rng.below(800)));
    }
    Document doc;
    doc.id = "post" + std::to_string(100000 + i);
    doc.content = join(tokens);
    doc.position = labels[i];
    fill_metadata(doc, i, rng);
    corpus.docs.push_back(std::move(doc));
  }
  fill_stats(corpus);
  return corpus;
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.docs) {
    nlohmann::json rec;
    rec["id"] = doc.id;
    rec["content"] = doc.content;
    if (doc.position) rec["position"] = position_name(*doc.position);
    if (!doc.symbol.empty()) rec["symbol"] = doc.symbol;
    if (!doc.author.empty()) rec["author"] = doc.author;
    if (!doc.time.empty()) rec["time"] = doc.time;
    if (!doc.timeframe.empty()) rec["timeframe"] = doc.timeframe;
    if (!doc.title.empty()) rec["title"] = doc.title;
    out << rec.dump() << '\n';
  }
}

}  // namespace finsage
