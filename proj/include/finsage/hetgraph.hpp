#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "finsage/corpus.hpp"
#include "finsage/rng.hpp"
#include "finsage/tensor.hpp"
#include "finsage/textstats.hpp"
#include "finsage/topics.hpp"

namespace finsage {

enum class NodeType { Document = 0, Word, Topic, Pattern, Position };
inline constexpr std::size_t kNumNodeTypes = 5;
const char* node_type_name(NodeType t);
std::optional<NodeType> parse_node_type(const std::string& name);

// One schema relation. Edges always run src -> dst; message passing treats
// them as undirected, with a distinct parameter key per direction.
struct Relation {
  std::string name;
  NodeType src;
  NodeType dst;
  bool message_passing = true;
};

// The full eight-relation schema in canonical order.
std::vector<Relation> standard_schema();

struct GraphConfig {
  // Document nodes and label supervision edges are always present; these
  // flags gate the other node types' message-passing relations.
  bool include_word = true;
  bool include_topic = true;
  bool include_pattern = true;
  bool include_position = true;  // Pattern-Position edges only
  std::size_t topic_top_words = 20;
  double min_p_td = 0.05;
};

// standard_schema filtered down to the relations the config keeps.
std::vector<Relation> masked_schema(const GraphConfig& cfg);

class HeteroGraph {
 public:
  struct Edge {
    std::uint32_t src;
    std::uint32_t dst;
    double weight;
  };
  using NeighborList = std::vector<std::pair<std::uint32_t, double>>;

  explicit HeteroGraph(std::vector<Relation> schema);

  std::size_t add_node(NodeType t, const std::string& id);
  std::optional<std::size_t> node_index(NodeType t, const std::string& id) const;
  const std::string& node_id(NodeType t, std::size_t idx) const;
  std::size_t n_nodes(NodeType t) const { return nodes_[type_idx(t)].size(); }

  void add_edge(const std::string& relation, std::size_t src, std::size_t dst,
                double weight);

  const std::vector<Relation>& schema() const { return schema_; }
  bool has_relation(const std::string& name) const;
  const Relation& relation(const std::string& name) const;
  const std::vector<Edge>& edges(const std::string& relation) const;

  // Directed message-passing views. "name.fwd" sends src -> dst, "name.bwd"
  // sends dst -> src; self-relations have only a symmetrized forward key.
  // relation_keys(t) lists the keys t receives on, in schema order.
  const std::vector<std::string>& relation_keys(NodeType receiver) const;
  NodeType receiver_type(const std::string& key) const;
  NodeType sender_type(const std::string& key) const;
  const NeighborList& neighbors(const std::string& key, std::size_t node) const;

  // All neighbors if degree <= k, otherwise a uniform k-subset.
  NeighborList sample_neighbors(const std::string& key, std::size_t node,
                                std::size_t k, Rng& rng) const;

  void set_features(NodeType t, Tensor features);
  bool has_features(NodeType t) const { return features_[type_idx(t)].size() > 0; }
  const Tensor& features(NodeType t) const;

  void write_nodes_tsv(std::ostream& out) const;
  void write_edges_tsv(std::ostream& out) const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  static std::size_t type_idx(NodeType t) { return static_cast<std::size_t>(t); }
  struct DirectedView {
    NodeType receiver;
    NodeType sender;
    std::vector<NeighborList> adj;  // indexed by receiver node
  };
  const DirectedView& view(const std::string& key) const;
  void push_directed(const std::string& key, NodeType receiver, NodeType sender,
                     std::size_t recv_idx, std::size_t send_idx, double weight);

  std::vector<Relation> schema_;
  std::map<std::string, std::size_t> relation_index_;
  std::vector<std::vector<Edge>> edges_;  // aligned with schema_
  std::array<std::vector<std::string>, kNumNodeTypes> nodes_;
  std::array<std::unordered_map<std::string, std::size_t>, kNumNodeTypes> index_;
  std::map<std::string, DirectedView> views_;
  std::array<std::vector<std::string>, kNumNodeTypes> keys_by_receiver_;
  std::array<Tensor, kNumNodeTypes> features_;
  std::vector<std::string> warnings_;
};

// Assembles nodes and edges from the upstream artifacts. Topic count comes
// from dists; pattern nodes cover the whole lexicon (detected or not);
// position nodes are always the three labels. Throws on an empty corpus.
HeteroGraph build_graph(const Corpus& corpus, const Vocabulary& vocab,
                        const WeightedEdgeList& word_word,
                        const WeightedEdgeList& doc_word,
                        const TopicDistributions& dists,
                        const PatternLexicon& lexicon, const GraphConfig& cfg = {});

class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual std::size_t dim(const HeteroGraph& g, NodeType t) const = 0;
  virtual void fill(const HeteroGraph& g, NodeType t, std::size_t node,
                    double* out) const = 0;
};

// Unit-norm gaussian vector seeded from the token string.
class HashedWordProvider : public FeatureProvider {
 public:
  explicit HashedWordProvider(std::size_t dim = 100, std::uint64_t seed = 42)
      : dim_(dim), seed_(seed) {}
  std::size_t dim(const HeteroGraph&, NodeType) const override { return dim_; }
  void fill(const HeteroGraph& g, NodeType t, std::size_t node, double* out) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Document TF-IDF vector pushed through a seeded random projection, then
// L2-normalized. Projection rows are generated per word on demand, so the
// V x dim matrix is never materialized beyond the words actually used.
class TfidfProjectionProvider : public FeatureProvider {
 public:
  TfidfProjectionProvider(const Corpus& corpus, const Vocabulary& vocab,
                          std::size_t dim = 384, std::uint64_t seed = 42)
      : corpus_(&corpus), vocab_(&vocab), dim_(dim), seed_(seed) {}
  std::size_t dim(const HeteroGraph&, NodeType) const override { return dim_; }
  void fill(const HeteroGraph& g, NodeType t, std::size_t node, double* out) const override;

 private:
  const std::vector<double>& word_row(std::size_t word_idx) const;
  const Corpus* corpus_;
  const Vocabulary* vocab_;
  std::size_t dim_;
  std::uint64_t seed_;
  mutable std::unordered_map<std::size_t, std::vector<double>> cache_;
};

// Identity features: dimension equals the node count of the type.
class OneHotProvider : public FeatureProvider {
 public:
  std::size_t dim(const HeteroGraph& g, NodeType t) const override {
    return g.n_nodes(t);
  }
  void fill(const HeteroGraph&, NodeType, std::size_t node, double* out) const override {
    out[node] = 1.0;
  }
};

// Fills feature matrices for every node type present in the graph. Types with
// zero nodes are skipped; a missing provider or zero dimension is an error.
void init_features(HeteroGraph& g,
                   const std::map<NodeType, const FeatureProvider*>& providers);

}  // namespace finsage
