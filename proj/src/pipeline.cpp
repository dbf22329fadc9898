#include "finsage/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace finsage {

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Largest-remainder apportionment of n items into the three split buckets.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& fractions) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = static_cast<double>(n) * fractions[i];
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    frac[i] = quota - std::floor(quota);
    used += counts[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a < b;
  });
  for (std::size_t r = 0; r < n - used; ++r) counts[order[r % 3]] += 1;
  return counts;
}

void append_split(Splits& out, const std::vector<std::uint32_t>& ids,
                  const std::array<std::size_t, 3>& counts) {
  std::size_t at = 0;
  for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(ids[at++]);
  for (std::size_t i = 0; i < counts[1]; ++i) out.val.push_back(ids[at++]);
  for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(ids[at++]);
}

std::vector<int> labels_of(const Corpus& corpus, const std::vector<std::uint32_t>& ids) {
  std::vector<int> y;
  y.reserve(ids.size());
  for (std::uint32_t id : ids) {
    const auto& pos = corpus.docs.at(id).position;
    if (!pos) throw std::runtime_error("split contains an unlabelled document");
    y.push_back(static_cast<int>(*pos));
  }
  return y;
}

std::vector<std::string> position_names() {
  return {position_name(Position::Long), position_name(Position::Short),
          position_name(Position::Education)};
}

// Placeholder report for a split with nothing in it.
EvalReport empty_report(const std::vector<std::string>& class_names) {
  EvalReport r;
  r.class_names = class_names;
  const std::size_t c = class_names.size();
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  r.precision.assign(c, 0.0);
  r.recall.assign(c, 0.0);
  r.f1.assign(c, 0.0);
  r.support.assign(c, 0);
  r.flags.push_back("empty evaluation set");
  return r;
}

std::vector<int> argmax_rows(const Tensor& scores) {
  std::vector<int> out(scores.rows());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    int best = 0;
    for (std::size_t j = 1; j < scores.cols(); ++j)
      if (scores.at(i, j) > scores.at(i, best)) best = static_cast<int>(j);
    out[i] = best;
  }
  return out;
}

}  // namespace

Splits make_splits(const Corpus& corpus, const SplitConfig& cfg) {
  const std::array<double, 3> fractions{cfg.train, cfg.val, cfg.test};
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::runtime_error("split fractions must be non-negative");
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::runtime_error("split fractions must sum to 1");

  std::array<std::vector<std::uint32_t>, kNumPositions> by_class;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i)
    if (corpus.docs[i].position)
      by_class[static_cast<std::size_t>(*corpus.docs[i].position)].push_back(
          static_cast<std::uint32_t>(i));

  std::size_t total = 0;
  bool can_stratify = true;
  for (const auto& ids : by_class) {
    total += ids.size();
    if (!ids.empty() && ids.size() < 3) can_stratify = false;
  }
  if (total == 0) throw std::runtime_error("no labelled documents to split");

  Splits out;
  out.stratified = can_stratify;
  Rng base(cfg.seed);
  if (can_stratify) {
    for (std::size_t c = 0; c < kNumPositions; ++c) {
      auto ids = by_class[c];
      if (ids.empty()) continue;
      Rng rng = base.fork(c);
      rng.shuffle(ids);
      append_split(out, ids, apportion(ids.size(), fractions));
    }
  } else {
    out.notes.push_back("a class has fewer than 3 labelled documents; split is unstratified");
    std::vector<std::uint32_t> ids;
    for (const auto& cls : by_class) ids.insert(ids.end(), cls.begin(), cls.end());
    std::sort(ids.begin(), ids.end());
    Rng rng = base.fork(99);
    rng.shuffle(ids);
    append_split(out, ids, apportion(ids.size(), fractions));
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  if (out.val.empty()) out.notes.push_back("validation split is empty");
  if (out.test.empty()) out.notes.push_back("test split is empty");
  return out;
}

EvalReport evaluate(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                    const std::vector<std::string>& class_names) {
  if (y_true.empty()) throw std::runtime_error("evaluate: empty input");
  if (y_true.size() != y_pred.size())
    throw std::runtime_error("evaluate: prediction/label size mismatch");
  const int c = static_cast<int>(class_names.size());
  EvalReport r;
  r.class_names = class_names;
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  r.support.assign(c, 0);

  std::vector<std::size_t> pred_count(c, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= c) throw std::runtime_error("evaluate: label out of range");
    if (y_pred[i] >= c) throw std::runtime_error("evaluate: prediction out of range");
    r.support[y_true[i]] += 1;
    if (y_pred[i] >= 0) {
      pred_count[y_pred[i]] += 1;
      r.confusion[y_true[i]][y_pred[i]] += 1;
      if (y_pred[i] == y_true[i]) ++correct;
    }
  }

  r.precision.assign(c, 0.0);
  r.recall.assign(c, 0.0);
  r.f1.assign(c, 0.0);
  double weighted = 0.0, macro = 0.0;
  for (int k = 0; k < c; ++k) {
    const double tp = static_cast<double>(r.confusion[k][k]);
    if (pred_count[k] > 0) r.precision[k] = tp / static_cast<double>(pred_count[k]);
    if (r.support[k] > 0) r.recall[k] = tp / static_cast<double>(r.support[k]);
    if (r.precision[k] + r.recall[k] > 0.0)
      r.f1[k] = 2.0 * r.precision[k] * r.recall[k] / (r.precision[k] + r.recall[k]);
    weighted += static_cast<double>(r.support[k]) * r.f1[k];
    macro += r.f1[k];
    if (r.support[k] < 30)
      r.flags.push_back("class " + class_names[k] + " has thin support (" +
                        std::to_string(r.support[k]) + ")");
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  r.weighted_f1 = weighted / static_cast<double>(y_true.size());
  r.macro_f1 = macro / static_cast<double>(c);
  return r;
}

nlohmann::json eval_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["weighted_f1"] = report.weighted_f1;
  j["macro_f1"] = report.macro_f1;
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t k = 0; k < report.class_names.size(); ++k) {
    classes.push_back({{"name", report.class_names[k]},
                       {"precision", report.precision[k]},
                       {"recall", report.recall[k]},
                       {"f1", report.f1[k]},
                       {"support", report.support[k]}});
  }
  j["classes"] = std::move(classes);
  j["confusion"] = report.confusion;
  j["flags"] = report.flags;
  return j;
}

void write_eval_tsv(std::ostream& out, const EvalReport& report) {
  out << "class\tprecision\trecall\tf1\tsupport\n";
  for (std::size_t k = 0; k < report.class_names.size(); ++k)
    out << report.class_names[k] << '\t' << fmt_g(report.precision[k]) << '\t'
        << fmt_g(report.recall[k]) << '\t' << fmt_g(report.f1[k]) << '\t' << report.support[k]
        << '\n';
  const std::size_t total = std::accumulate(report.support.begin(), report.support.end(),
                                            std::size_t{0});
  out << "weighted\t\t\t" << fmt_g(report.weighted_f1) << '\t' << total << '\n';
  out << "macro\t\t\t" << fmt_g(report.macro_f1) << '\t' << total << '\n';
  out << "accuracy\t\t\t" << fmt_g(report.accuracy) << '\t' << total << '\n';
}

EvalReport majority_baseline(const std::vector<int>& y_train, const std::vector<int>& y_test,
                             const std::vector<std::string>& class_names) {
  if (y_train.empty()) throw std::runtime_error("majority baseline needs training labels");
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (int y : y_train) counts.at(y) += 1;
  int mode = 0;
  for (std::size_t k = 1; k < counts.size(); ++k)
    if (counts[k] > counts[mode]) mode = static_cast<int>(k);
  std::vector<int> pred(y_test.size(), mode);
  return evaluate(y_test, pred, class_names);
}

DgiResult run_dgi_pretrain(const HeteroGraph& g, const GnnConfig& cfg, std::size_t steps,
                           double lr, std::uint64_t seed) {
  DgiResult res;
  Rng prng(hash_combine(seed, fnv1a("params")));
  res.params = init_hinsage_params(g, cfg, prng);
  init_dgi_params(res.params, g, cfg.layer_dims.back(), prng);

  AdamState state;
  AdamConfig adam;
  adam.lr = lr;
  res.loss.reserve(steps);
  for (std::size_t step = 0; step < steps; ++step) {
    ag::Tape tape;
    ParamBinder binder(tape, res.params);
    Rng corrupt(hash_combine(seed, 2 * step));
    ag::Var loss = dgi_loss(g, binder, cfg, hash_combine(seed, 2 * step + 1), corrupt);
    res.loss.push_back(loss.value().item());
    tape.backward(loss);
    adam_step(res.params, tape.named_grads(), state, adam);
  }
  res.embeddings = compute_embeddings(g, res.params, cfg, hash_combine(seed, fnv1a("embed")));
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const NodeType t = static_cast<NodeType>(ti);
    if (g.n_nodes(t) == 0 || !g.relation_keys(t).empty()) continue;
    res.embeddings[t] = g.features(t);
    res.notes.push_back(std::string(node_type_name(t)) +
                        " has no message-passing relations; original features passed through");
  }
  return res;
}

namespace {

struct EncoderSetup {
  ParamStore params;
  std::optional<HeteroGraph> replaced;  // features mode: inputs swapped for embeddings
  std::vector<std::string> notes;
  const HeteroGraph& graph(const HeteroGraph& original) const {
    return replaced ? *replaced : original;
  }
};

EncoderSetup prepare_encoder(const HeteroGraph& g, const TrainConfig& cfg) {
  EncoderSetup setup;
  Rng rng(hash_combine(cfg.seed, fnv1a("init")));
  if (cfg.pretrain == "none") {
    setup.params = init_hinsage_params(g, cfg.gnn, rng);
    return setup;
  }
  if (cfg.pretrain != "features" && cfg.pretrain != "fine_tune")
    throw std::runtime_error("unknown pretrain mode '" + cfg.pretrain + "'");
  DgiResult dgi = run_dgi_pretrain(g, cfg.gnn, cfg.pretrain_steps, cfg.pretrain_lr,
                                   hash_combine(cfg.seed, fnv1a("dgi")));
  setup.notes = std::move(dgi.notes);
  if (cfg.pretrain == "features") {
    setup.replaced = g;
    for (auto& [t, z] : dgi.embeddings) setup.replaced->set_features(t, std::move(z));
    setup.params = init_hinsage_params(*setup.replaced, cfg.gnn, rng);
    setup.notes.push_back("pretrained embeddings (" + std::to_string(cfg.pretrain_steps) +
                          " steps) replace the input features; fresh encoder on top");
  } else {
    setup.params = std::move(dgi.params);
    setup.notes.push_back("encoder pretrained for " + std::to_string(cfg.pretrain_steps) +
                          " steps, fine-tuning");
  }
  return setup;
}

// Shared epoch loop: runs one_epoch, monitors validation weighted F1, keeps
// the best weights, stops after `patience` stale epochs.
template <typename EpochFn, typename ScoreFn>
void train_with_early_stopping(ParamStore& params, const TrainConfig& cfg, EpochFn one_epoch,
                               ScoreFn monitor_score, TrainResult& res) {
  AdamState state;
  AdamConfig adam;
  adam.lr = cfg.lr;
  ParamStore best_params = params;
  double best = -1.0;
  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    ag::Tape tape;
    ParamBinder binder(tape, params);
    ag::Var loss = one_epoch(binder, epoch);
    res.train_loss.push_back(loss.value().item());
    tape.backward(loss);
    adam_step(params, tape.named_grads(), state, adam);

    const double score = monitor_score();
    if (score > best) {
      best = score;
      best_params = params;
      res.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  res.epochs_run = res.train_loss.size();
  params = std::move(best_params);
}

}  // namespace

TrainResult run_node_classification(const HeteroGraph& g, const Corpus& corpus,
                                    const Splits& splits, const TrainConfig& cfg) {
  if (splits.train.empty()) throw std::runtime_error("empty training split");
  const std::size_t dim = cfg.gnn.layer_dims.back();
  const auto names = position_names();

  TrainResult res;
  EncoderSetup enc = prepare_encoder(g, cfg);
  res.notes = enc.notes;
  const HeteroGraph& net = enc.graph(g);
  ParamStore params = std::move(enc.params);
  Rng hrng(hash_combine(cfg.seed, fnv1a("head")));
  init_nc_head(params, dim, kNumPositions, hrng);

  auto doc_var = [&](ParamBinder& b, const std::vector<std::uint32_t>& ids, bool train,
                     std::uint64_t seed) -> ag::Var {
    Batch batch{{NodeType::Document, ids}};
    return hinsage_forward(net, b, batch, cfg.gnn, train, seed).at(NodeType::Document);
  };

  // per-class probabilities, one row per document
  auto score_matrix = [&](const std::vector<std::uint32_t>& ids) -> Tensor {
    ag::Tape tape;
    ParamBinder b(tape, params);
    ag::Var z = doc_var(b, ids, false, hash_combine(cfg.seed, fnv1a("eval")));
    return softmax_rows(nc_logits(b, z).value());
  };

  auto predict = [&](const std::vector<std::uint32_t>& ids) -> std::vector<int> {
    if (ids.empty()) return {};
    return argmax_rows(score_matrix(ids));
  };

  const std::vector<int> y_train = labels_of(corpus, splits.train);
  const auto& monitor_ids = splits.val.empty() ? splits.train : splits.val;
  if (splits.val.empty())
    res.notes.push_back("validation split empty; monitoring the training score");
  const std::vector<int> y_monitor = labels_of(corpus, monitor_ids);

  train_with_early_stopping(
      params, cfg,
      [&](ParamBinder& b, std::size_t epoch) {
        ag::Var z = doc_var(b, splits.train, true, hash_combine(cfg.seed, epoch));
        return ag::softmax_cross_entropy(nc_logits(b, z), y_train);
      },
      [&]() { return evaluate(y_monitor, predict(monitor_ids), names).weighted_f1; }, res);

  res.val = splits.val.empty()
                ? empty_report(names)
                : evaluate(labels_of(corpus, splits.val), predict(splits.val), names);
  res.test = splits.test.empty()
                 ? empty_report(names)
                 : evaluate(labels_of(corpus, splits.test), predict(splits.test), names);
  res.baseline = splits.test.empty()
                     ? empty_report(names)
                     : majority_baseline(y_train, labels_of(corpus, splits.test), names);
  res.test_ids = splits.test;
  if (!splits.test.empty()) res.test_scores = score_matrix(splits.test);
  res.embeddings = compute_embeddings(net, params, cfg.gnn, hash_combine(cfg.seed, fnv1a("embed")));
  res.params = std::move(params);
  return res;
}

TrainResult run_link_prediction(const HeteroGraph& g, const Corpus& corpus, const Splits& splits,
                                const TrainConfig& cfg) {
  if (splits.train.empty()) throw std::runtime_error("empty training split");
  if (g.n_nodes(NodeType::Position) != kNumPositions)
    throw std::runtime_error("link prediction needs the position nodes");
  const std::size_t dim = cfg.gnn.layer_dims.back();
  const auto names = position_names();

  TrainResult res;
  EncoderSetup enc = prepare_encoder(g, cfg);
  res.notes = enc.notes;
  const HeteroGraph& net = enc.graph(g);
  ParamStore params = std::move(enc.params);
  Rng hrng(hash_combine(cfg.seed, fnv1a("head")));
  init_lp_head(params, dim, hrng);

  const std::vector<std::uint32_t> all_positions{0, 1, 2};

  // embeds docs and the three position nodes on one tape
  auto embed = [&](ParamBinder& b, const std::vector<std::uint32_t>& ids, bool train,
                   std::uint64_t seed) -> std::pair<ag::Var, ag::Var> {
    Batch batch{{NodeType::Document, ids}, {NodeType::Position, all_positions}};
    auto out = hinsage_forward(net, b, batch, cfg.gnn, train, seed);
    return {out.at(NodeType::Document), out.at(NodeType::Position)};
  };

  // every document against all three positions, row d * 3 + position
  auto all_pair_scores = [&](ParamBinder& b, ag::Var z_docs, ag::Var z_pos,
                             std::size_t n_docs) -> ag::Var {
    std::vector<std::size_t> du, pv;
    du.reserve(n_docs * 3);
    pv.reserve(n_docs * 3);
    for (std::size_t i = 0; i < n_docs; ++i)
      for (std::size_t j = 0; j < kNumPositions; ++j) {
        du.push_back(i);
        pv.push_back(j);
      }
    return lp_scores(b, ag::gather_rows(z_docs, du), ag::gather_rows(z_pos, pv));
  };

  const std::vector<int> y_train = labels_of(corpus, splits.train);
  Tensor targets({splits.train.size() * 3, 1});
  for (std::size_t i = 0; i < y_train.size(); ++i)
    for (std::size_t j = 0; j < kNumPositions; ++j)
      targets.at(i * 3 + j, 0) = static_cast<int>(j) == y_train[i] ? 1.0 : 0.0;

  // raw link score of every document against each position
  auto score_matrix = [&](const std::vector<std::uint32_t>& ids) -> Tensor {
    ag::Tape tape;
    ParamBinder b(tape, params);
    auto [z_docs, z_pos] = embed(b, ids, false, hash_combine(cfg.seed, fnv1a("eval")));
    Tensor flat = all_pair_scores(b, z_docs, z_pos, ids.size()).value();
    Tensor scores({ids.size(), kNumPositions});
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < kNumPositions; ++j) scores.at(i, j) = flat.at(i * 3 + j, 0);
    return scores;
  };

  auto predict = [&](const std::vector<std::uint32_t>& ids) -> std::vector<int> {
    if (ids.empty()) return {};
    return argmax_rows(score_matrix(ids));
  };

  const auto& monitor_ids = splits.val.empty() ? splits.train : splits.val;
  if (splits.val.empty())
    res.notes.push_back("validation split empty; monitoring the training score");
  const std::vector<int> y_monitor = labels_of(corpus, monitor_ids);

  train_with_early_stopping(
      params, cfg,
      [&](ParamBinder& b, std::size_t epoch) {
        auto [z_docs, z_pos] = embed(b, splits.train, true, hash_combine(cfg.seed, epoch));
        ag::Var probs = all_pair_scores(b, z_docs, z_pos, splits.train.size());
        return ag::binary_cross_entropy(probs, targets);
      },
      [&]() { return evaluate(y_monitor, predict(monitor_ids), names).weighted_f1; }, res);

  res.val = splits.val.empty()
                ? empty_report(names)
                : evaluate(labels_of(corpus, splits.val), predict(splits.val), names);
  res.test = splits.test.empty()
                 ? empty_report(names)
                 : evaluate(labels_of(corpus, splits.test), predict(splits.test), names);
  res.baseline = splits.test.empty()
                     ? empty_report(names)
                     : majority_baseline(y_train, labels_of(corpus, splits.test), names);
  res.test_ids = splits.test;
  if (!splits.test.empty()) res.test_scores = score_matrix(splits.test);
  res.embeddings = compute_embeddings(net, params, cfg.gnn, hash_combine(cfg.seed, fnv1a("embed")));
  res.params = std::move(params);
  return res;
}

HeteroGraph assemble_graph(const GraphInputs& in, const GraphConfig& mask,
                           const FeatureConfig& feats) {
  HeteroGraph g = build_graph(in.corpus, in.vocab, in.word_word, in.doc_word, in.dists,
                              in.lexicon, mask);
  HashedWordProvider words(feats.word_dim, feats.seed);
  TfidfProjectionProvider docs(in.corpus, in.vocab, feats.doc_dim, feats.seed);
  OneHotProvider one_hot;
  std::map<NodeType, const FeatureProvider*> providers{{NodeType::Document, &docs},
                                                       {NodeType::Word, &words},
                                                       {NodeType::Topic, &one_hot},
                                                       {NodeType::Pattern, &one_hot},
                                                       {NodeType::Position, &one_hot}};
  init_features(g, providers);
  return g;
}

std::vector<AblationRow> run_ablations(
    const GraphInputs& in, const std::vector<std::pair<std::string, GraphConfig>>& masks,
    const FeatureConfig& feats, const SplitConfig& split_cfg, const TrainConfig& train_cfg) {
  Splits splits = make_splits(in.corpus, split_cfg);
  std::vector<AblationRow> rows;
  rows.reserve(masks.size());
  for (const auto& [name, mask] : masks) {
    HeteroGraph g = assemble_graph(in, mask, feats);
    AblationRow row;
    row.name = name;
    row.mask = mask;
    row.nc_test = run_node_classification(g, in.corpus, splits, train_cfg).test;
    row.lp_test = run_link_prediction(g, in.corpus, splits, train_cfg).test;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ablation_tsv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << "ablation\tnc_weighted_f1\tnc_macro_f1\tnc_accuracy\t"
         "lp_weighted_f1\tlp_macro_f1\tlp_accuracy\n";
  for (const auto& r : rows)
    out << r.name << '\t' << fmt_g(r.nc_test.weighted_f1) << '\t' << fmt_g(r.nc_test.macro_f1)
        << '\t' << fmt_g(r.nc_test.accuracy) << '\t' << fmt_g(r.lp_test.weighted_f1) << '\t'
        << fmt_g(r.lp_test.macro_f1) << '\t' << fmt_g(r.lp_test.accuracy) << '\n';
}

void write_embeddings_tsv(std::ostream& out, const HeteroGraph& g,
                          const std::map<NodeType, Tensor>& embeddings) {
  std::size_t dim = 0;
  for (const auto& [t, z] : embeddings) {
    if (dim == 0) dim = z.cols();
    if (z.cols() != dim)
      throw std::runtime_error("embedding widths differ across node types");
  }
  out << "id\ttype";
  for (std::size_t j = 0; j < dim; ++j) out << "\te" << j;
  out << '\n';
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const NodeType t = static_cast<NodeType>(ti);
    auto it = embeddings.find(t);
    if (it == embeddings.end()) continue;
    const Tensor& z = it->second;
    if (z.rows() != g.n_nodes(t))
      throw std::runtime_error("embedding rows do not match node count");
    for (std::size_t i = 0; i < z.rows(); ++i) {
      out << g.node_id(t, i) << '\t' << node_type_name(t);
      for (std::size_t j = 0; j < dim; ++j) out << '\t' << fmt_g(z.at(i, j));
      out << '\n';
    }
  }
}

}  // namespace finsage
