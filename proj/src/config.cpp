#include "finsage/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace finsage {

namespace {

std::string join_key(const std::string& scope, const std::string& key) {
  return scope.empty() ? key : scope + "." + key;
}

// Reads fields out of one JSON object, tracking which keys were consumed so
// the leftovers can be rejected by name.
class Section {
 public:
  Section(const nlohmann::json& j, std::string scope) : j_(j), scope_(std::move(scope)) {
    if (!j_.is_object())
      throw std::runtime_error("config: '" + scope_ + "' must be an object");
  }

  // Call after all expected keys were pulled; anything left is a typo.
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key))
        throw std::runtime_error("config: unknown key '" + join_key(scope_, key) + "'");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      it->get_to(out);
    } catch (const nlohmann::json::exception&) {
      throw std::runtime_error("config: bad value for '" + join_key(scope_, key) + "'");
    }
  }

  bool child(const std::string& key, const nlohmann::json*& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    out = &*it;
    return true;
  }

 private:
  const nlohmann::json& j_;
  std::string scope_;
  std::set<std::string> seen_;
};

template <typename Fn>
void parse_child(Section& parent, const std::string& key, Fn fill) {
  const nlohmann::json* sub = nullptr;
  if (!parent.child(key, sub)) return;
  Section s(*sub, key);
  fill(s);
  s.finish();
}

}  // namespace

PreprocessOptions RunConfig::preprocess_options() const {
  PreprocessOptions opt;
  opt.remove_stopwords = preprocess.remove_stopwords;
  opt.min_token_len = preprocess.min_token_len;
  return opt;
}

LdaOptions RunConfig::lda_options() const {
  LdaOptions opt;
  opt.alpha = topics.alpha;
  opt.beta = topics.beta;
  opt.sweeps = topics.sweeps;
  opt.seed = seed;
  return opt;
}

GraphConfig RunConfig::graph_config() const {
  GraphConfig g;
  g.include_word = graph.include_word;
  g.include_topic = graph.include_topic;
  g.include_pattern = graph.include_pattern;
  g.include_position = graph.include_position;
  g.topic_top_words = graph.topic_top_words;
  g.min_p_td = graph.min_p_td;
  return g;
}

FeatureConfig RunConfig::feature_config() const {
  FeatureConfig f;
  f.word_dim = features.word_dim;
  f.doc_dim = features.doc_dim;
  f.seed = seed;
  return f;
}

GnnConfig RunConfig::gnn_config() const {
  GnnConfig g;
  g.layer_dims = model.layer_dims;
  g.sample_sizes = model.sample_sizes;
  g.dropout = model.dropout;
  g.weighted_mean = model.weighted_mean;
  return g;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.gnn = gnn_config();
  t.pretrain = train.pretrain;
  t.pretrain_steps = train.pretrain_steps;
  t.pretrain_lr = train.pretrain_lr;
  t.lr = train.lr;
  t.max_epochs = train.max_epochs;
  t.patience = train.patience;
  t.seed = seed;
  return t;
}

SplitConfig RunConfig::split_config() const {
  SplitConfig s;
  s.train = split.train;
  s.val = split.val;
  s.test = split.test;
  s.seed = seed;
  return s;
}

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  Section root(j, "");
  root.get("corpus", cfg.corpus);
  root.get("lexicon", cfg.lexicon);
  root.get("output_dir", cfg.output_dir);
  root.get("seed", cfg.seed);
  parse_child(root, "preprocess", [&](Section& s) {
    s.get("remove_stopwords", cfg.preprocess.remove_stopwords);
    s.get("min_token_len", cfg.preprocess.min_token_len);
    s.get("detect_ngrams", cfg.preprocess.detect_ngrams);
    s.get("ngram_min_count", cfg.preprocess.ngram_min_count);
    s.get("ngram_threshold", cfg.preprocess.ngram_threshold);
  });
  parse_child(root, "text", [&](Section& s) {
    s.get("window", cfg.text.window);
    s.get("min_df", cfg.text.min_df);
  });
  parse_child(root, "topics", [&](Section& s) {
    s.get("k", cfg.topics.k);
    s.get("k_candidates", cfg.topics.k_candidates);
    s.get("alpha", cfg.topics.alpha);
    s.get("beta", cfg.topics.beta);
    s.get("sweeps", cfg.topics.sweeps);
    s.get("top_n", cfg.topics.top_n);
  });
  parse_child(root, "graph", [&](Section& s) {
    s.get("include_word", cfg.graph.include_word);
    s.get("include_topic", cfg.graph.include_topic);
    s.get("include_pattern", cfg.graph.include_pattern);
    s.get("include_position", cfg.graph.include_position);
    s.get("topic_top_words", cfg.graph.topic_top_words);
    s.get("min_p_td", cfg.graph.min_p_td);
  });
  parse_child(root, "features", [&](Section& s) {
    s.get("word_dim", cfg.features.word_dim);
    s.get("doc_dim", cfg.features.doc_dim);
  });
  parse_child(root, "model", [&](Section& s) {
    s.get("layer_dims", cfg.model.layer_dims);
    s.get("sample_sizes", cfg.model.sample_sizes);
    s.get("dropout", cfg.model.dropout);
    s.get("weighted_mean", cfg.model.weighted_mean);
  });
  parse_child(root, "train", [&](Section& s) {
    s.get("tasks", cfg.train.tasks);
    s.get("pretrain", cfg.train.pretrain);
    s.get("pretrain_steps", cfg.train.pretrain_steps);
    s.get("pretrain_lr", cfg.train.pretrain_lr);
    s.get("lr", cfg.train.lr);
    s.get("max_epochs", cfg.train.max_epochs);
    s.get("patience", cfg.train.patience);
  });
  parse_child(root, "split", [&](Section& s) {
    s.get("train", cfg.split.train);
    s.get("val", cfg.split.val);
    s.get("test", cfg.split.test);
  });
  parse_child(root, "synthetic", [&](Section& s) {
    s.get("kind", cfg.synthetic.kind);
    s.get("docs", cfg.synthetic.docs);
    s.get("noise", cfg.synthetic.noise);
    s.get("class_fractions", cfg.synthetic.class_fractions);
  });
  root.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["corpus"] = cfg.corpus;
  j["lexicon"] = cfg.lexicon;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["preprocess"] = {{"remove_stopwords", cfg.preprocess.remove_stopwords},
                     {"min_token_len", cfg.preprocess.min_token_len},
                     {"detect_ngrams", cfg.preprocess.detect_ngrams},
                     {"ngram_min_count", cfg.preprocess.ngram_min_count},
                     {"ngram_threshold", cfg.preprocess.ngram_threshold}};
  j["text"] = {{"window", cfg.text.window}, {"min_df", cfg.text.min_df}};
  j["topics"] = {{"k", cfg.topics.k},
                 {"k_candidates", cfg.topics.k_candidates},
                 {"alpha", cfg.topics.alpha},
                 {"beta", cfg.topics.beta},
                 {"sweeps", cfg.topics.sweeps},
                 {"top_n", cfg.topics.top_n}};
  j["graph"] = {{"include_word", cfg.graph.include_word},
                {"include_topic", cfg.graph.include_topic},
                {"include_pattern", cfg.graph.include_pattern},
                {"include_position", cfg.graph.include_position},
                {"topic_top_words", cfg.graph.topic_top_words},
                {"min_p_td", cfg.graph.min_p_td}};
  j["features"] = {{"word_dim", cfg.features.word_dim}, {"doc_dim", cfg.features.doc_dim}};
  j["model"] = {{"layer_dims", cfg.model.layer_dims},
                {"sample_sizes", cfg.model.sample_sizes},
                {"dropout", cfg.model.dropout},
                {"weighted_mean", cfg.model.weighted_mean}};
  j["train"] = {{"tasks", cfg.train.tasks},
                {"pretrain", cfg.train.pretrain},
                {"pretrain_steps", cfg.train.pretrain_steps},
                {"pretrain_lr", cfg.train.pretrain_lr},
                {"lr", cfg.train.lr},
                {"max_epochs", cfg.train.max_epochs},
                {"patience", cfg.train.patience}};
  j["split"] = {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
  j["synthetic"] = {{"kind", cfg.synthetic.kind},
                    {"docs", cfg.synthetic.docs},
                    {"noise", cfg.synthetic.noise},
                    {"class_fractions", cfg.synthetic.class_fractions}};
  return j;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::runtime_error("override must look like key.path=value: '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // unquoted strings

  nlohmann::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty())
      throw std::runtime_error("override has an empty key segment: '" + assignment + "'");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null())
      throw std::runtime_error("override descends into a non-object: '" + path + "'");
    start = dot + 1;
  }
}

void validate_config(const RunConfig& cfg, bool needs_corpus) {
  namespace fs = std::filesystem;
  if (needs_corpus) {
    if (cfg.corpus.empty()) throw std::runtime_error("config: 'corpus' path is required");
    if (!fs::exists(cfg.corpus))
      throw std::runtime_error("config: corpus file '" + cfg.corpus + "' does not exist");
  }
  if (!cfg.lexicon.empty() && !fs::exists(cfg.lexicon))
    throw std::runtime_error("config: lexicon file '" + cfg.lexicon + "' does not exist");
  if (cfg.output_dir.empty()) throw std::runtime_error("config: 'output_dir' must be set");

  if (cfg.text.window < 2) throw std::runtime_error("config: text.window must be at least 2");
  if (cfg.topics.k < 1) throw std::runtime_error("config: topics.k must be at least 1");
  for (std::size_t k : cfg.topics.k_candidates)
    if (k < 1) throw std::runtime_error("config: topics.k_candidates entries must be at least 1");
  if (cfg.topics.sweeps == 0) throw std::runtime_error("config: topics.sweeps must be positive");

  if (cfg.model.layer_dims.empty())
    throw std::runtime_error("config: model.layer_dims must not be empty");
  if (cfg.model.sample_sizes.size() != cfg.model.layer_dims.size())
    throw std::runtime_error("config: model.sample_sizes must match model.layer_dims in length");
  if (cfg.model.dropout < 0.0 || cfg.model.dropout >= 1.0)
    throw std::runtime_error("config: model.dropout must be in [0, 1)");
  if (cfg.features.word_dim == 0 || cfg.features.doc_dim == 0)
    throw std::runtime_error("config: feature dims must be positive");

  if (cfg.train.tasks != "nc" && cfg.train.tasks != "lp" && cfg.train.tasks != "both")
    throw std::runtime_error("config: train.tasks must be one of nc, lp, both");
  if (cfg.train.pretrain != "none" && cfg.train.pretrain != "features" &&
      cfg.train.pretrain != "fine_tune")
    throw std::runtime_error("config: train.pretrain must be one of none, features, fine_tune");

  const double sum = cfg.split.train + cfg.split.val + cfg.split.test;
  if (cfg.split.train < 0 || cfg.split.val < 0 || cfg.split.test < 0 ||
      std::abs(sum - 1.0) > 1e-9)
    throw std::runtime_error("config: split fractions must be non-negative and sum to 1");

  if (cfg.synthetic.kind != "separable" && cfg.synthetic.kind != "planted" &&
      cfg.synthetic.kind != "pattern" && cfg.synthetic.kind != "paper_stats")
    throw std::runtime_error(
        "config: synthetic.kind must be one of separable, planted, pattern, paper_stats");
  if (cfg.synthetic.class_fractions.size() != 3)
    throw std::runtime_error("config: synthetic.class_fractions needs exactly 3 entries");
}

}  // namespace finsage
