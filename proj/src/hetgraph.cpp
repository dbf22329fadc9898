#include "finsage/hetgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace finsage {

const char* node_type_name(NodeType t) {
  switch (t) {
    case NodeType::Document: return "document";
    case NodeType::Word: return "word";
    case NodeType::Topic: return "topic";
    case NodeType::Pattern: return "pattern";
    case NodeType::Position: return "position";
  }
  return "?";
}

std::optional<NodeType> parse_node_type(const std::string& name) {
  for (std::size_t i = 0; i < kNumNodeTypes; ++i) {
    const auto t = static_cast<NodeType>(i);
    if (name == node_type_name(t)) return t;
  }
  return std::nullopt;
}

std::vector<Relation> standard_schema() {
  return {
      {"pmi", NodeType::Word, NodeType::Word, true},
      {"tfidf", NodeType::Document, NodeType::Word, true},
      {"pwt", NodeType::Word, NodeType::Topic, true},
      {"ptd", NodeType::Document, NodeType::Topic, true},
      {"mention", NodeType::Document, NodeType::Pattern, true},
      {"ptpp", NodeType::Pattern, NodeType::Topic, true},
      {"label", NodeType::Document, NodeType::Position, false},  // supervision only
      {"implication", NodeType::Pattern, NodeType::Position, true},
  };
}

std::vector<Relation> masked_schema(const GraphConfig& cfg) {
  std::vector<Relation> out;
  for (const auto& rel : standard_schema()) {
    bool keep = true;
    if (rel.name == "pmi" || rel.name == "tfidf") keep = cfg.include_word;
    if (rel.name == "pwt") keep = cfg.include_word && cfg.include_topic;
    if (rel.name == "ptd") keep = cfg.include_topic;
    if (rel.name == "mention") keep = cfg.include_pattern;
    if (rel.name == "ptpp") keep = cfg.include_pattern && cfg.include_topic;
    if (rel.name == "implication") keep = cfg.include_pattern && cfg.include_position;
    // label edges always stay: they are the supervision targets
    if (keep) out.push_back(rel);
  }
  return out;
}

HeteroGraph::HeteroGraph(std::vector<Relation> schema) : schema_(std::move(schema)) {
  edges_.resize(schema_.size());
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    const Relation& rel = schema_[i];
    if (!relation_index_.emplace(rel.name, i).second)
      throw std::invalid_argument("duplicate relation name '" + rel.name + "'");
    if (!rel.message_passing) continue;
    const std::string fwd = rel.name + ".fwd";
    views_[fwd] = DirectedView{rel.dst, rel.src, {}};
    keys_by_receiver_[type_idx(rel.dst)].push_back(fwd);
    if (rel.src != rel.dst) {
      const std::string bwd = rel.name + ".bwd";
      views_[bwd] = DirectedView{rel.src, rel.dst, {}};
      keys_by_receiver_[type_idx(rel.src)].push_back(bwd);
    }
  }
}

std::size_t HeteroGraph::add_node(NodeType t, const std::string& id) {
  auto& index = index_[type_idx(t)];
  auto [it, fresh] = index.emplace(id, nodes_[type_idx(t)].size());
  if (!fresh)
    throw std::invalid_argument(std::string("duplicate ") + node_type_name(t) +
                                " node '" + id + "'");
  nodes_[type_idx(t)].push_back(id);
  return it->second;
}

std::optional<std::size_t> HeteroGraph::node_index(NodeType t, const std::string& id) const {
  const auto& index = index_[type_idx(t)];
  auto it = index.find(id);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

const std::string& HeteroGraph::node_id(NodeType t, std::size_t idx) const {
  return nodes_[type_idx(t)].at(idx);
}

bool HeteroGraph::has_relation(const std::string& name) const {
  return relation_index_.count(name) != 0;
}

const Relation& HeteroGraph::relation(const std::string& name) const {
  auto it = relation_index_.find(name);
  if (it == relation_index_.end())
    throw std::invalid_argument("unknown relation '" + name + "'");
  return schema_[it->second];
}

const std::vector<HeteroGraph::Edge>& HeteroGraph::edges(const std::string& name) const {
  auto it = relation_index_.find(name);
  if (it == relation_index_.end())
    throw std::invalid_argument("unknown relation '" + name + "'");
  return edges_[it->second];
}

void HeteroGraph::push_directed(const std::string& key, NodeType receiver, NodeType sender,
                                std::size_t recv_idx, std::size_t send_idx, double weight) {
  (void)receiver;
  (void)sender;
  auto& adj = views_[key].adj;
  if (adj.size() < nodes_[type_idx(views_[key].receiver)].size())
    adj.resize(nodes_[type_idx(views_[key].receiver)].size());
  adj[recv_idx].push_back({static_cast<std::uint32_t>(send_idx), weight});
}

void HeteroGraph::add_edge(const std::string& name, std::size_t src, std::size_t dst,
                           double weight) {
  auto it = relation_index_.find(name);
  if (it == relation_index_.end())
    throw std::invalid_argument("unknown relation '" + name + "'");
  const Relation& rel = schema_[it->second];
  if (src >= n_nodes(rel.src) || dst >= n_nodes(rel.dst))
    throw std::out_of_range("edge endpoint out of range for relation '" + name + "'");
  edges_[it->second].push_back(
      {static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst), weight});
  if (!rel.message_passing) return;
  const std::string fwd = name + ".fwd";
  push_directed(fwd, rel.dst, rel.src, dst, src, weight);
  if (rel.src == rel.dst) {
    push_directed(fwd, rel.dst, rel.src, src, dst, weight);  // symmetrize in place
  } else {
    push_directed(name + ".bwd", rel.src, rel.dst, src, dst, weight);
  }
}

const std::vector<std::string>& HeteroGraph::relation_keys(NodeType receiver) const {
  return keys_by_receiver_[type_idx(receiver)];
}

const HeteroGraph::DirectedView& HeteroGraph::view(const std::string& key) const {
  auto it = views_.find(key);
  if (it == views_.end())
    throw std::invalid_argument("unknown relation key '" + key + "'");
  return it->second;
}

NodeType HeteroGraph::receiver_type(const std::string& key) const {
  return view(key).receiver;
}

NodeType HeteroGraph::sender_type(const std::string& key) const {
  return view(key).sender;
}

const HeteroGraph::NeighborList& HeteroGraph::neighbors(const std::string& key,
                                                        std::size_t node) const {
  static const NeighborList kEmpty;
  const DirectedView& v = view(key);
  if (node >= v.adj.size()) return kEmpty;
  return v.adj[node];
}

HeteroGraph::NeighborList HeteroGraph::sample_neighbors(const std::string& key,
                                                        std::size_t node, std::size_t k,
                                                        Rng& rng) const {
  const NeighborList& all = neighbors(key, node);
  if (all.size() <= k) return all;
  std::vector<std::uint32_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
  NeighborList out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(order.size() - i);
    std::swap(order[i], order[j]);
    out.push_back(all[order[i]]);
  }
  return out;
}

void HeteroGraph::set_features(NodeType t, Tensor features) {
  if (features.rank() != 2)
    throw std::invalid_argument("feature matrix must be rank 2");
  if (features.rows() != n_nodes(t))
    throw std::invalid_argument(std::string("feature rows for ") + node_type_name(t) +
                                " != node count");
  features_[type_idx(t)] = std::move(features);
}

const Tensor& HeteroGraph::features(NodeType t) const {
  if (features_[type_idx(t)].size() == 0)
    throw std::runtime_error(std::string("no features set for ") + node_type_name(t));
  return features_[type_idx(t)];
}

void HeteroGraph::write_nodes_tsv(std::ostream& out) const {
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const auto t = static_cast<NodeType>(ti);
    for (const auto& id : nodes_[ti]) out << node_type_name(t) << '\t' << id << '\n';
  }
}

void HeteroGraph::write_edges_tsv(std::ostream& out) const {
  char buf[64];
  for (std::size_t ri = 0; ri < schema_.size(); ++ri) {
    const Relation& rel = schema_[ri];
    for (const Edge& e : edges_[ri]) {
      std::snprintf(buf, sizeof(buf), "%.12g", e.weight);
      out << rel.name << '\t' << nodes_[type_idx(rel.src)][e.src] << '\t'
          << nodes_[type_idx(rel.dst)][e.dst] << '\t' << buf << '\t'
          << (rel.message_passing ? 0 : 1) << '\n';
    }
  }
}

HeteroGraph build_graph(const Corpus& corpus, const Vocabulary& vocab,
                        const WeightedEdgeList& word_word,
                        const WeightedEdgeList& doc_word,
                        const TopicDistributions& dists, const PatternLexicon& lexicon,
                        const GraphConfig& cfg) {
  if (corpus.docs.empty())
    throw std::runtime_error("cannot build a graph from an empty corpus");

  HeteroGraph g(masked_schema(cfg));

  for (const auto& doc : corpus.docs) g.add_node(NodeType::Document, doc.id);
  if (cfg.include_word)
    for (const auto& token : vocab.tokens()) g.add_node(NodeType::Word, token);
  const std::size_t K = cfg.include_topic ? dists.phi.rows() : 0;
  for (std::size_t t = 0; t < K; ++t)
    g.add_node(NodeType::Topic, "topic" + std::to_string(t));
  if (cfg.include_pattern)
    for (const auto& name : lexicon.canonical_names()) g.add_node(NodeType::Pattern, name);
  for (std::size_t p = 0; p < kNumPositions; ++p)
    g.add_node(NodeType::Position, position_name(static_cast<Position>(p)));

  if (cfg.include_word) {
    for (const auto& e : word_word) {
      auto a = g.node_index(NodeType::Word, e.source);
      auto b = g.node_index(NodeType::Word, e.target);
      if (a && b) g.add_edge("pmi", *a, *b, e.weight);  // sub-min_df words drop out
    }
    for (const auto& e : doc_word) {
      auto d = g.node_index(NodeType::Document, e.source);
      auto w = g.node_index(NodeType::Word, e.target);
      if (!d) throw std::runtime_error("tf-idf edge references unknown document " + e.source);
      if (w) g.add_edge("tfidf", *d, *w, e.weight);
    }
  }

  if (cfg.include_topic && cfg.include_word) {
    const std::size_t V = dists.phi.cols();
    std::vector<std::uint32_t> order(V);
    for (std::size_t t = 0; t < K; ++t) {
      for (std::size_t w = 0; w < V; ++w) order[w] = static_cast<std::uint32_t>(w);
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (dists.phi.at(t, a) != dists.phi.at(t, b))
          return dists.phi.at(t, a) > dists.phi.at(t, b);
        return a < b;
      });
      const std::size_t n = std::min(cfg.topic_top_words, V);
      for (std::size_t i = 0; i < n; ++i)
        g.add_edge("pwt", order[i], t, dists.phi.at(t, order[i]));
    }
  }

  if (cfg.include_topic) {
    std::size_t n_ptd = 0;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
      for (std::size_t t = 0; t < K; ++t) {
        if (dists.theta.at(d, t) >= cfg.min_p_td) {
          g.add_edge("ptd", d, t, dists.theta.at(d, t));
          ++n_ptd;
        }
      }
    }
    if (n_ptd == 0)
      g.add_warning("document-topic threshold " + std::to_string(cfg.min_p_td) +
                    " excluded every edge");
  }

  if (cfg.include_pattern) {
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
      for (const auto& name : corpus.docs[d].patterns) {
        auto p = g.node_index(NodeType::Pattern, name);
        if (!p)
          throw std::runtime_error("document pattern '" + name +
                                   "' is missing from the lexicon");
        g.add_edge("mention", d, *p, 1.0);
      }
    }
    if (cfg.include_topic && lexicon.size() > 0) {
      if (dists.p_t_pp.rows() != lexicon.size())
        throw std::runtime_error("pattern-topic rows do not match the lexicon");
      for (std::size_t p = 0; p < lexicon.size(); ++p)
        for (std::size_t t = 0; t < K; ++t)
          g.add_edge("ptpp", p, t, dists.p_t_pp.at(p, t));
    }
    if (cfg.include_position) {
      const auto names = lexicon.canonical_names();
      for (std::size_t p = 0; p < names.size(); ++p) {
        if (auto imp = lexicon.implication(names[p]))
          g.add_edge("implication", p, static_cast<std::size_t>(*imp), 1.0);
      }
    }
  }

  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    if (corpus.docs[d].position)
      g.add_edge("label", d, static_cast<std::size_t>(*corpus.docs[d].position), 1.0);
  }

  return g;
}

void HashedWordProvider::fill(const HeteroGraph& g, NodeType t, std::size_t node,
                              double* out) const {
  Rng rng(hash_combine(seed_, fnv1a(g.node_id(t, node))));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
  double norm_sq = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    out[j] = rng.next_gauss() * scale;
    norm_sq += out[j] * out[j];
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (std::size_t j = 0; j < dim_; ++j) out[j] /= norm;
}

const std::vector<double>& TfidfProjectionProvider::word_row(std::size_t word_idx) const {
  auto it = cache_.find(word_idx);
  if (it != cache_.end()) return it->second;
  Rng rng(hash_combine(seed_, mix64(word_idx + 1)));
  std::vector<double> row(dim_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
  for (std::size_t j = 0; j < dim_; ++j) row[j] = rng.next_gauss() * scale;
  return cache_.emplace(word_idx, std::move(row)).first->second;
}

void TfidfProjectionProvider::fill(const HeteroGraph& g, NodeType t, std::size_t node,
                                   double* out) const {
  (void)g;
  (void)t;
  if (node >= corpus_->docs.size())
    throw std::out_of_range("document node index outside the corpus");
  std::map<std::size_t, std::size_t> tf;
  for (const auto& tok : corpus_->docs[node].tokens)
    if (auto idx = vocab_->index_of(tok)) tf[*idx] += 1;

  const double n_docs = static_cast<double>(corpus_->docs.size());
  for (std::size_t j = 0; j < dim_; ++j) out[j] = 0.0;
  for (const auto& [w, count] : tf) {
    const double idf = std::log(n_docs / static_cast<double>(vocab_->df(vocab_->token(w))));
    const double weight = static_cast<double>(count) * idf;
    if (weight <= 0.0) continue;
    const auto& row = word_row(w);
    for (std::size_t j = 0; j < dim_; ++j) out[j] += weight * row[j];
  }
  double norm_sq = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) norm_sq += out[j] * out[j];
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (std::size_t j = 0; j < dim_; ++j) out[j] /= norm;
}

void init_features(HeteroGraph& g,
                   const std::map<NodeType, const FeatureProvider*>& providers) {
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const auto t = static_cast<NodeType>(ti);
    const std::size_t n = g.n_nodes(t);
    if (n == 0) continue;
    auto it = providers.find(t);
    if (it == providers.end() || it->second == nullptr)
      throw std::invalid_argument(std::string("no feature provider for ") +
                                  node_type_name(t));
    const std::size_t d = it->second->dim(g, t);
    if (d == 0)
      throw std::invalid_argument(std::string("feature dimension 0 for ") +
                                  node_type_name(t));
    Tensor f = Tensor::zeros({n, d});
    for (std::size_t i = 0; i < n; ++i) it->second->fill(g, t, i, f.row(i));
    f.check_finite(std::string("features for ") + node_type_name(t));
    g.set_features(t, std::move(f));
  }
}

}  // namespace finsage
