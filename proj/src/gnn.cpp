#include "finsage/gnn.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace finsage {

namespace {

std::string layer_prefix(std::size_t k) { return "L" + std::to_string(k); }

// Stable sub-seed for one (purpose, layer-or-hop, relation/type, node) slot.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                       std::uint64_t b = 0, std::uint64_t c = 0) {
  return hash_combine(hash_combine(hash_combine(hash_combine(seed, tag), a), b), c);
}

void validate_config(const GnnConfig& cfg) {
  if (cfg.layer_dims.empty()) throw std::runtime_error("gnn: need at least one layer");
  if (cfg.sample_sizes.size() != cfg.layer_dims.size())
    throw std::runtime_error("gnn: sample_sizes must have one entry per layer");
  for (std::size_t d : cfg.layer_dims)
    if (d == 0) throw std::runtime_error("gnn: zero layer width");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    throw std::runtime_error("gnn: dropout must be in [0, 1)");
}

std::size_t block_width(const HeteroGraph& g, const GnnConfig& cfg, std::size_t k,
                        NodeType t) {
  const std::size_t r = g.relation_keys(t).size();
  const std::size_t dim = cfg.layer_dims[k];
  if (dim % (1 + r) != 0)
    throw std::runtime_error("gnn: layer width " + std::to_string(dim) +
                             " not divisible by " + std::to_string(1 + r) + " blocks for " +
                             std::string(node_type_name(t)));
  return dim / (1 + r);
}

}  // namespace

ag::Var ParamBinder::operator[](const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  ag::Var v = tape_->leaf(store_->at(name), name);
  bound_.emplace(name, v);
  return v;
}

ParamStore init_hinsage_params(const HeteroGraph& g, const GnnConfig& cfg, Rng& rng) {
  validate_config(cfg);
  ParamStore params;
  for (std::size_t k = 0; k < cfg.layers(); ++k) {
    const std::string prefix = layer_prefix(k);
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const NodeType t = static_cast<NodeType>(ti);
      if (g.n_nodes(t) == 0) continue;
      const std::size_t in_dim = k == 0 ? g.features(t).cols() : cfg.layer_dims[k - 1];
      const std::size_t block = block_width(g, cfg, k, t);
      params.add(prefix + ".self." + std::string(node_type_name(t)),
                 Tensor::glorot(in_dim, block, rng));
      for (const auto& key : g.relation_keys(t)) {
        const NodeType sender = g.sender_type(key);
        // a relation whose sender side has no nodes can never pass messages;
        // its block stays zero and needs no weight
        if (g.n_nodes(sender) == 0) continue;
        const std::size_t sender_dim = k == 0 ? g.features(sender).cols() : cfg.layer_dims[k - 1];
        params.add(prefix + ".neigh." + key, Tensor::glorot(sender_dim, block, rng));
      }
      params.add(prefix + ".bias." + std::string(node_type_name(t)),
                 Tensor::gauss({cfg.layer_dims[k]}, rng, 0.1));
    }
  }
  return params;
}

void init_nc_head(ParamStore& params, std::size_t in_dim, std::size_t n_classes, Rng& rng) {
  params.add("head.nc.W", Tensor::glorot(in_dim, n_classes, rng));
  params.add("head.nc.b", Tensor::gauss({n_classes}, rng, 0.1));
}

void init_lp_head(ParamStore& params, std::size_t in_dim, Rng& rng) {
  params.add("head.lp.W", Tensor::glorot(in_dim, 1, rng));
  params.add("head.lp.b", Tensor::gauss({1}, rng, 0.1));
}

void init_dgi_params(ParamStore& params, const HeteroGraph& g, std::size_t dim, Rng& rng) {
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const NodeType t = static_cast<NodeType>(ti);
    if (g.n_nodes(t) == 0) continue;
    params.add("dgi.B." + std::string(node_type_name(t)), Tensor::glorot(dim, dim, rng));
  }
}

std::map<NodeType, ag::Var> hinsage_forward(const HeteroGraph& g, ParamBinder& params,
                                            const Batch& batch, const GnnConfig& cfg,
                                            bool train, std::uint64_t seed,
                                            const std::map<NodeType, Tensor>* feature_override) {
  validate_config(cfg);
  const std::size_t K = cfg.layers();
  ag::Tape& tape = params.tape();

  using NodeList = std::array<std::vector<std::uint32_t>, kNumNodeTypes>;
  using SampleMap =
      std::map<std::string, std::unordered_map<std::uint32_t,
                                               std::vector<std::pair<std::uint32_t, double>>>>;

  // needed[k][t]: sorted unique nodes whose layer-k representation is required.
  std::vector<NodeList> needed(K + 1);
  for (const auto& [t, ids] : batch) {
    if (ids.empty()) continue;
    auto& dst = needed[K][static_cast<std::size_t>(t)];
    dst = ids;
    std::sort(dst.begin(), dst.end());
    dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
    if (dst.back() >= g.n_nodes(t))
      throw std::runtime_error("gnn: batch node out of range for " +
                               std::string(node_type_name(t)));
  }

  // Expand outward: needed[k-1] = needed[k] plus its sampled neighbors. The
  // sample for (hop, relation, node) is seeded independently of everything
  // else, so the same node sees the same neighborhood wherever it appears.
  std::vector<SampleMap> samples(K);
  for (std::size_t k = K; k >= 1; --k) {
    const std::size_t hop = K - k;
    const std::size_t fan_out = cfg.sample_sizes[hop];
    NodeList next = needed[k];
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const NodeType t = static_cast<NodeType>(ti);
      for (const auto& key : g.relation_keys(t)) {
        const std::size_t sender = static_cast<std::size_t>(g.sender_type(key));
        const std::uint64_t key_seed = hash_combine(seed, fnv1a(key));
        auto& per_node = samples[hop][key];
        for (std::uint32_t u : needed[k][ti]) {
          Rng rng(sub_seed(key_seed, 0x5a17, hop, u));
          auto picked = g.sample_neighbors(key, u, fan_out, rng);
          for (const auto& [v, w] : picked) {
            (void)w;
            next[sender].push_back(v);
          }
          per_node.emplace(u, std::move(picked));
        }
      }
    }
    for (auto& list : next) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    needed[k - 1] = std::move(next);
  }

  // Row position of each node inside a level's per-type matrix.
  auto index_of = [](const std::vector<std::uint32_t>& list) {
    std::unordered_map<std::uint32_t, std::size_t> pos;
    pos.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) pos.emplace(list[i], i);
    return pos;
  };

  // Layer 0: raw features.
  std::array<ag::Var, kNumNodeTypes> h;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const auto& ids = needed[0][ti];
    if (ids.empty()) continue;
    const NodeType t = static_cast<NodeType>(ti);
    const Tensor* feats = &g.features(t);
    if (feature_override) {
      auto it = feature_override->find(t);
      if (it != feature_override->end()) {
        if (!it->second.same_shape(g.features(t)))
          throw std::runtime_error("gnn: feature override shape mismatch for " +
                                   std::string(node_type_name(t)));
        feats = &it->second;
      }
    }
    std::vector<std::size_t> rows(ids.begin(), ids.end());
    h[ti] = ag::gather_rows(tape.constant(*feats), rows);
  }

  for (std::size_t k = 1; k <= K; ++k) {
    const std::size_t hop = K - k;  // aggregation uses the hop-level samples
    const std::string prefix = layer_prefix(k - 1);
    std::array<ag::Var, kNumNodeTypes> h_next;
    std::array<std::unordered_map<std::uint32_t, std::size_t>, kNumNodeTypes> prev_pos;
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti)
      prev_pos[ti] = index_of(needed[k - 1][ti]);

    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const auto& ids = needed[k][ti];
      if (ids.empty()) continue;
      const NodeType t = static_cast<NodeType>(ti);
      const std::string type_name(node_type_name(t));

      std::vector<std::size_t> self_rows;
      self_rows.reserve(ids.size());
      for (std::uint32_t u : ids) self_rows.push_back(prev_pos[ti].at(u));
      ag::Var self_in = ag::gather_rows(h[ti], self_rows);
      Rng self_drop(sub_seed(seed, 0xd401, k, ti));
      self_in = ag::dropout(self_in, cfg.dropout, self_drop, train);

      std::vector<ag::Var> parts;
      parts.push_back(ag::matmul(self_in, params[prefix + ".self." + type_name]));

      for (const auto& key : g.relation_keys(t)) {
        const std::size_t sender = static_cast<std::size_t>(g.sender_type(key));
        const std::size_t block = block_width(g, cfg, k - 1, t);
        std::vector<std::size_t> flat_rows;
        std::vector<std::size_t> groups;
        std::vector<double> weights;
        if (g.n_nodes(static_cast<NodeType>(sender)) > 0) {
          const auto& per_node = samples[hop].at(key);
          for (std::size_t i = 0; i < ids.size(); ++i) {
            for (const auto& [v, w] : per_node.at(ids[i])) {
              flat_rows.push_back(prev_pos[sender].at(v));
              groups.push_back(i);
              weights.push_back(w);
            }
          }
        }
        if (flat_rows.empty()) {
          // nothing sampled anywhere for this relation: its whole block is a
          // zero mean times the weight, i.e. zeros — skip the matmul
          parts.push_back(tape.constant(Tensor::zeros({ids.size(), block})));
          continue;
        }
        ag::Var rows = ag::gather_rows(h[sender], flat_rows);
        Rng nbr_drop(sub_seed(seed, 0xd402, k, fnv1a(key)));
        rows = ag::dropout(rows, cfg.dropout, nbr_drop, train);
        if (cfg.weighted_mean) {
          // scale row i by w_i / sum(w) * n so the group mean becomes the
          // weighted mean; zero-total groups fall back to uniform
          std::vector<double> group_sum(ids.size(), 0.0);
          std::vector<std::size_t> group_n(ids.size(), 0);
          for (std::size_t j = 0; j < groups.size(); ++j) {
            group_sum[groups[j]] += weights[j];
            group_n[groups[j]] += 1;
          }
          const std::size_t d = rows.value().cols();
          Tensor scales({flat_rows.size(), d});
          for (std::size_t j = 0; j < groups.size(); ++j) {
            const double total = group_sum[groups[j]];
            const double s =
                total > 0.0 ? weights[j] / total * static_cast<double>(group_n[groups[j]])
                            : 1.0;
            for (std::size_t c = 0; c < d; ++c) scales.at(j, c) = s;
          }
          rows = ag::mul(rows, tape.constant(std::move(scales)));
        }
        ag::Var agg = ag::group_mean(rows, groups, ids.size());
        parts.push_back(ag::matmul(agg, params[prefix + ".neigh." + key]));
      }

      ag::Var pre = ag::add_rowvec(ag::concat_cols(parts), params[prefix + ".bias." + type_name]);
      if (k < K) pre = ag::relu(pre);
      h_next[ti] = ag::l2_normalize_rows(pre);
    }
    h = std::move(h_next);
  }

  // Map back to the caller's row order (duplicates allowed).
  std::map<NodeType, ag::Var> out;
  for (const auto& [t, ids] : batch) {
    if (ids.empty()) continue;
    const std::size_t ti = static_cast<std::size_t>(t);
    auto pos = index_of(needed[K][ti]);
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (std::uint32_t u : ids) rows.push_back(pos.at(u));
    out[t] = ag::gather_rows(h[ti], rows);
  }
  return out;
}

std::map<NodeType, Tensor> compute_embeddings(const HeteroGraph& g, ParamStore& params,
                                              const GnnConfig& cfg, std::uint64_t seed) {
  Batch batch;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const NodeType t = static_cast<NodeType>(ti);
    const std::size_t n = g.n_nodes(t);
    if (n == 0) continue;
    std::vector<std::uint32_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::uint32_t>(i);
    batch[t] = std::move(ids);
  }
  ag::Tape tape;
  ParamBinder binder(tape, params);
  auto embedded = hinsage_forward(g, binder, batch, cfg, /*train=*/false, seed);
  std::map<NodeType, Tensor> out;
  for (const auto& [t, var] : embedded) out.emplace(t, var.value());
  return out;
}

ag::Var nc_logits(ParamBinder& params, ag::Var z) {
  return ag::add_rowvec(ag::matmul(z, params["head.nc.W"]), params["head.nc.b"]);
}

ag::Var lp_scores(ParamBinder& params, ag::Var z_u, ag::Var z_v) {
  ag::Var prod = ag::mul(z_u, z_v);
  return ag::sigmoid(ag::add_rowvec(ag::matmul(prod, params["head.lp.W"]), params["head.lp.b"]));
}

ag::Var unsup_loss(ag::Var z_u, ag::Var z_v, ag::Var z_neg, double q) {
  const std::size_t n = z_u.value().rows();
  if (z_v.value().rows() != n) throw std::runtime_error("unsup_loss: pair size mismatch");
  ag::Var pos = ag::rowwise_dot(z_u, z_v);
  ag::Var loss = ag::neg(ag::mean_all(ag::log_clamped(ag::sigmoid(pos))));
  if (q > 0.0) {
    const std::size_t per = static_cast<std::size_t>(q);
    if (z_neg.value().rows() != n * per)
      throw std::runtime_error("unsup_loss: expected " + std::to_string(n * per) +
                               " negative rows");
    std::vector<std::size_t> rep;
    rep.reserve(n * per);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < per; ++j) rep.push_back(i);
    ag::Var negdot = ag::rowwise_dot(ag::gather_rows(z_u, rep), z_neg);
    ag::Var term = ag::neg(ag::mean_all(ag::log_clamped(ag::sigmoid(ag::neg(negdot)))));
    loss = ag::add(loss, ag::scale(term, q));
  }
  return loss;
}

PairBatch sample_positive_pairs(const HeteroGraph& g, const std::string& relkey,
                                std::size_t count, Rng& rng) {
  const NodeType rt = g.receiver_type(relkey);
  std::vector<std::uint32_t> populated;
  for (std::size_t i = 0; i < g.n_nodes(rt); ++i)
    if (!g.neighbors(relkey, static_cast<std::uint32_t>(i)).empty())
      populated.push_back(static_cast<std::uint32_t>(i));
  PairBatch out;
  if (populated.empty()) return out;
  out.u.reserve(count);
  out.v.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t u = populated[rng.below(populated.size())];
    const auto& nbrs = g.neighbors(relkey, u);
    out.u.push_back(u);
    out.v.push_back(nbrs[rng.below(nbrs.size())].first);
  }
  return out;
}

Tensor dgi_corrupt(const Tensor& features, Rng& rng) {
  const std::size_t n = features.rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  Tensor out({n, features.cols()});
  for (std::size_t i = 0; i < n; ++i)
    std::copy(features.row(perm[i]), features.row(perm[i]) + features.cols(), out.row(i));
  return out;
}

ag::Var dgi_summary(ag::Var h) {
  std::vector<std::size_t> one_group(h.value().rows(), 0);
  return ag::sigmoid(ag::group_mean(h, one_group, 1));
}

ag::Var dgi_scores(ag::Var h, ag::Var bilinear, ag::Var summary) {
  return ag::sigmoid(ag::matmul(ag::matmul(h, bilinear), ag::transpose(summary)));
}

ag::Var dgi_loss(const HeteroGraph& g, ParamBinder& params, const GnnConfig& cfg,
                 std::uint64_t seed, Rng& corrupt_rng) {
  Batch batch;
  std::map<NodeType, Tensor> shuffled;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const NodeType t = static_cast<NodeType>(ti);
    const std::size_t n = g.n_nodes(t);
    if (n == 0) continue;
    std::vector<std::uint32_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::uint32_t>(i);
    batch[t] = std::move(ids);
    shuffled.emplace(t, dgi_corrupt(g.features(t), corrupt_rng));
  }
  // same seed for both passes: identical sampled neighborhoods and dropout
  // masks, so the discriminator only sees the feature shuffle
  auto real = hinsage_forward(g, params, batch, cfg, /*train=*/true, seed);
  auto fake = hinsage_forward(g, params, batch, cfg, /*train=*/true, seed, &shuffled);

  ag::Var total;
  for (const auto& [t, h_real] : real) {
    const std::size_t n = h_real.value().rows();
    ag::Var b = params["dgi.B." + std::string(node_type_name(t))];
    ag::Var s = dgi_summary(h_real);
    ag::Var on = ag::binary_cross_entropy(dgi_scores(h_real, b, s), Tensor::full({n, 1}, 1.0));
    ag::Var off = ag::binary_cross_entropy(dgi_scores(fake.at(t), b, s), Tensor::zeros({n, 1}));
    ag::Var both = ag::add(on, off);
    total = total.valid() ? ag::add(total, both) : both;
  }
  return total;
}

void save_checkpoint(const ParamStore& params, std::ostream& out) {
  nlohmann::json j;
  j["format"] = "finsage-checkpoint";
  j["version"] = 1;
  nlohmann::json items = nlohmann::json::object();
  for (const auto& [name, tensor] : params.items()) {
    nlohmann::json entry;
    entry["shape"] = tensor.shape();
    entry["data"] = std::vector<double>(tensor.data(), tensor.data() + tensor.size());
    items[name] = std::move(entry);
  }
  j["params"] = std::move(items);
  out << j.dump(2) << "\n";
}

ParamStore load_checkpoint(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "finsage-checkpoint")
    throw std::runtime_error("checkpoint: unrecognized format");
  if (j.value("version", 0) != 1) throw std::runtime_error("checkpoint: unsupported version");
  ParamStore params;
  const auto& items = j.at("params");
  for (auto it = items.begin(); it != items.end(); ++it) {
    std::vector<std::size_t> shape = it.value().at("shape").get<std::vector<std::size_t>>();
    std::vector<double> data = it.value().at("data").get<std::vector<double>>();
    Tensor t(shape, std::move(data));
    t.check_finite("checkpoint:" + it.key());
    params.add(it.key(), std::move(t));
  }
  return params;
}

void save_checkpoint(const ParamStore& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  save_checkpoint(params, out);
}

ParamStore load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  return load_checkpoint(in);
}

}  // namespace finsage
