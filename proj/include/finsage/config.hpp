#pragma once

// One structured config drives every command. Every field has a default;
// loading rejects keys it does not know about, at any nesting depth, so a
// typo cannot silently fall back to a default.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsage/corpus.hpp"
#include "finsage/gnn.hpp"
#include "finsage/hetgraph.hpp"
#include "finsage/pipeline.hpp"
#include "finsage/synthetic.hpp"
#include "finsage/topics.hpp"

namespace finsage {

struct RunConfig {
  std::string corpus;       // JSONL records, one document per line
  std::string lexicon;      // pattern TSV; empty = built-in lexicon
  std::string output_dir = "out";
  std::uint64_t seed = 42;  // master seed; stages derive theirs from it

  struct Preprocess {
    bool remove_stopwords = true;
    std::size_t min_token_len = 1;
    bool detect_ngrams = false;
    std::size_t ngram_min_count = 10;
    double ngram_threshold = 1.0;
  } preprocess;

  struct Text {
    std::size_t window = 20;  // PMI sliding window
    std::size_t min_df = 5;   // vocabulary document-frequency cut
  } text;

  struct Topics {
    std::size_t k = 6;
    std::vector<std::size_t> k_candidates;  // non-empty: pick K by coherence
    double alpha = 0.0;                     // <= 0 means 50/K
    double beta = 0.01;
    std::size_t sweeps = 500;
    std::size_t top_n = 10;  // words per topic in coherence and reports
  } topics;

  struct Graph {
    bool include_word = true;
    bool include_topic = true;
    bool include_pattern = true;
    bool include_position = true;
    std::size_t topic_top_words = 20;
    double min_p_td = 0.05;
  } graph;

  struct Features {
    std::size_t word_dim = 100;
    std::size_t doc_dim = 384;
  } features;

  struct Model {
    std::vector<std::size_t> layer_dims{96, 96};
    std::vector<std::size_t> sample_sizes{10, 5};
    double dropout = 0.1;
    bool weighted_mean = false;
  } model;

  struct Train {
    std::string tasks = "both";     // "nc", "lp", or "both"
    std::string pretrain = "none";  // "none", "features", "fine_tune"
    std::size_t pretrain_steps = 150;
    double pretrain_lr = 0.01;
    double lr = 0.01;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
  } train;

  struct Split {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
  } split;

  struct Synthetic {
    std::string kind = "separable";  // separable | planted | pattern | paper_stats
    std::size_t docs = 1000;
    double noise = 0.0;
    std::vector<double> class_fractions{0.806, 0.18, 0.014};
  } synthetic;

  // Views onto the module-level option structs.
  PreprocessOptions preprocess_options() const;
  LdaOptions lda_options() const;
  GraphConfig graph_config() const;
  FeatureConfig feature_config() const;
  GnnConfig gnn_config() const;
  TrainConfig train_config() const;
  SplitConfig split_config() const;
};

// Throws std::runtime_error naming the offending dotted key for unknown keys
// and for values of the wrong type.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Full snapshot, defaults included; parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfig& cfg);

// "a.b.c=value" applied onto the raw JSON before parsing; the value is read
// as JSON when it parses, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Range checks plus path existence. `needs_corpus` is off for commands that
// create the corpus instead of reading it.
void validate_config(const RunConfig& cfg, bool needs_corpus);

}  // namespace finsage
