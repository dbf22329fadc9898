#pragma once

// Heterogeneous GraphSAGE-style encoder over a HeteroGraph, plus the training
// heads that sit on top of it: a softmax document classifier, a sigmoid link
// scorer, a positive/negative pair loss over graph edges, and a mutual-info
// discriminator (real vs. feature-shuffled graph) for unsupervised pretraining.
//
// One encoder layer, per node type t:
//   h_t = l2norm( act( [ W_self x_t  ||  W_r mean(x_nbrs(r)) for each relation
//                        key r incident to t ] + b_t ) )
// Neighbors are sampled without replacement (fixed fan-out per hop); an empty
// neighborhood contributes a zero block. Every layer emits the same total
// width D, split as D / (1 + #relations) per block so embeddings of different
// node types stay comparable under dot products.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "finsage/autograd.hpp"
#include "finsage/hetgraph.hpp"
#include "finsage/optim.hpp"
#include "finsage/rng.hpp"
#include "finsage/tensor.hpp"

namespace finsage {

struct GnnConfig {
  // Output width of each layer; every entry must be divisible by 1 + R for
  // every node type's incident relation count R. Last entry is the embedding
  // dimension shared by all node types.
  std::vector<std::size_t> layer_dims = {96, 96};
  // Fan-out per hop away from the batch: sample_sizes[0] neighbors of each
  // batch node, sample_sizes[1] neighbors of those, ... One entry per layer.
  std::vector<std::size_t> sample_sizes = {10, 5};
  double dropout = 0.1;
  // Weight the neighbor mean by edge weight instead of uniformly.
  bool weighted_mean = false;

  std::size_t layers() const { return layer_dims.size(); }
};

// Which nodes to embed, per type. Output rows align with these vectors.
using Batch = std::map<NodeType, std::vector<std::uint32_t>>;

// Binds ParamStore tensors onto a tape as named leaves, once each, so a
// forward pass can be built incrementally and named_grads() maps back to the
// store after backward().
class ParamBinder {
 public:
  ParamBinder(ag::Tape& tape, ParamStore& store) : tape_(&tape), store_(&store) {}
  ag::Var operator[](const std::string& name);
  ag::Tape& tape() { return *tape_; }

 private:
  ag::Tape* tape_;
  ParamStore* store_;
  std::map<std::string, ag::Var> bound_;
};

// Creates every encoder parameter for the graph's schema and feature dims:
//   L{k}.self.{type}   (in_dim_t, block_t)
//   L{k}.neigh.{key}   (in_dim_sender, block_t)  one per directed relation key
//   L{k}.bias.{type}   (layer_dims[k],)
// Weights are Glorot-initialized, biases N(0, 0.1). Features must be attached
// to the graph first. Throws if a layer width is not divisible by 1 + R_t.
ParamStore init_hinsage_params(const HeteroGraph& g, const GnnConfig& cfg, Rng& rng);

// head.nc.W (in_dim, n_classes), head.nc.b
void init_nc_head(ParamStore& params, std::size_t in_dim, std::size_t n_classes, Rng& rng);
// head.lp.W (in_dim, 1), head.lp.b — scores a (source, target) pair
void init_lp_head(ParamStore& params, std::size_t in_dim, Rng& rng);
// dgi.B.{type} (dim, dim) bilinear discriminator per node type present in g
void init_dgi_params(ParamStore& params, const HeteroGraph& g, std::size_t dim, Rng& rng);

// Embeds the batch nodes. `seed` fixes neighbor sampling and dropout; eval
// mode (train = false) samples the same neighborhoods but skips dropout.
// `feature_override` substitutes input features for selected types (same
// shape as the graph's); used by the corruption pass of DGI.
std::map<NodeType, ag::Var> hinsage_forward(
    const HeteroGraph& g, ParamBinder& params, const Batch& batch, const GnnConfig& cfg,
    bool train, std::uint64_t seed,
    const std::map<NodeType, Tensor>* feature_override = nullptr);

// Eval-mode embeddings of every node, as plain tensors (one per type).
std::map<NodeType, Tensor> compute_embeddings(const HeteroGraph& g, ParamStore& params,
                                              const GnnConfig& cfg, std::uint64_t seed);

// Class logits for rows of z.
ag::Var nc_logits(ParamBinder& params, ag::Var z);
// P(link) for aligned row pairs: sigmoid((z_u * z_v) W + b) with an
// elementwise product, shape (n, 1). A plain concat head cannot rank
// targets per source — the source term is constant across candidates.
ag::Var lp_scores(ParamBinder& params, ag::Var z_u, ag::Var z_v);

// Pair ranking loss: mean_i [ -log s(zu_i . zv_i) ] + q * mean_ij [ -log
// s(-zu_i . zneg_ij) ], with z_neg holding q negatives per pair (row-major:
// all negatives of pair 0, then pair 1, ...). With every dot zero and q = 1
// this evaluates to 2 ln 2.
ag::Var unsup_loss(ag::Var z_u, ag::Var z_v, ag::Var z_neg, double q);

// Co-occurring node pairs drawn through one directed relation key: u is a
// uniform receiver-type node with at least one neighbor, v a uniform neighbor
// of u. Empty when the relation has no populated receivers.
struct PairBatch {
  std::vector<std::uint32_t> u;
  std::vector<std::uint32_t> v;
};
PairBatch sample_positive_pairs(const HeteroGraph& g, const std::string& relkey,
                                std::size_t count, Rng& rng);

// Row-shuffled copy of a feature matrix (the DGI corruption: same feature
// multiset, broken node-feature alignment).
Tensor dgi_corrupt(const Tensor& features, Rng& rng);

// sigmoid of the column mean of h: the (1, D) readout of a set of embeddings.
ag::Var dgi_summary(ag::Var h);
// Discriminator scores sigmoid(h B s^T), shape (n, 1).
ag::Var dgi_scores(ag::Var h, ag::Var bilinear, ag::Var summary);

// One full discriminator objective: embeds all nodes twice (real features and
// row-shuffled features), scores both against the real summary per node type,
// and sums binary cross-entropy with targets 1 (real) / 0 (shuffled).
ag::Var dgi_loss(const HeteroGraph& g, ParamBinder& params, const GnnConfig& cfg,
                 std::uint64_t seed, Rng& corrupt_rng);

// JSON checkpoint of a ParamStore (shapes + row-major data).
void save_checkpoint(const ParamStore& params, std::ostream& out);
ParamStore load_checkpoint(std::istream& in);
void save_checkpoint(const ParamStore& params, const std::string& path);
ParamStore load_checkpoint(const std::string& path);

}  // namespace finsage
