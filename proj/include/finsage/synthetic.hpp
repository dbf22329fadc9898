#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>

#include "finsage/corpus.hpp"

namespace finsage {

// Deterministic corpus generators used by tests, docs, and the gen-synthetic
// command. The real dataset behind the published statistics is not
// distributable, so these produce controlled stand-ins with known structure.

struct SeparableOptions {
  std::size_t docs = 1000;
  // Published label imbalance; exact counts via largest remainder.
  std::array<double, 3> class_fractions = {0.806, 0.18, 0.014};
  // Fraction of documents whose *word* signal is drawn from a random class.
  // Pattern mentions always stay consistent with the true label: wording can
  // mislead, the chart formation does not.
  double noise = 0.0;
  bool with_patterns = true;
  std::uint64_t seed = 42;
};
// Labelled corpus where class-specific keywords make the label learnable.
Corpus gen_separable(const SeparableOptions& opt);

struct PlantedTopicsOptions {
  std::size_t docs = 300;
  std::size_t plants = 3;
  // Matches the coherence top-list size: splitting a plant across surplus
  // topics then pulls one-off junk words into the top list, which tanks the
  // score, while merged plants score low through cross-plant zero cosines.
  std::size_t words_per_plant = 10;
  // Fraction of documents made entirely of one-off junk tokens. They give
  // surplus topics something incoherent to absorb.
  double junk_fraction = 0.12;
  std::uint64_t seed = 42;
};
// Unlabelled corpus with disjoint per-plant vocabularies.
Corpus gen_planted_topics(const PlantedTopicsOptions& opt);

struct PatternDrivenOptions {
  std::size_t docs = 600;
  std::array<double, 3> class_fractions = {0.45, 0.45, 0.10};
  std::uint64_t seed = 42;
};
// The label is carried by planted chart-pattern phrases; ordinary words are
// shared filler across classes.
Corpus gen_pattern_driven(const PatternDrivenOptions& opt);

struct PaperStatsOptions {
  std::uint64_t seed = 42;
  std::size_t total = 24420;
  std::size_t n_long = 13379;
  std::size_t n_short = 2984;
  std::size_t n_education = 227;
  // Log-normal token lengths matching the published mean 70.05 / median 34.
  double median_tokens = 34.0;
  double mean_tokens = 70.05;
};
// Shape-only replica of the published dataset statistics.
Corpus gen_paper_stats(const PaperStatsOptions& opt);

// One record per line, matching the ingest schema.
void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);

}  // namespace finsage
