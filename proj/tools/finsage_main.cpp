// finsage: build heterogeneous text graphs from market reports and train
// graph models on them. One JSON config file drives every subcommand; all
// outputs land under the config's output_dir.

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "finsage/config.hpp"
#include "finsage/corpus.hpp"
#include "finsage/gnn.hpp"
#include "finsage/hetgraph.hpp"
#include "finsage/pipeline.hpp"
#include "finsage/rng.hpp"
#include "finsage/synthetic.hpp"
#include "finsage/textstats.hpp"
#include "finsage/topics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace finsage;

namespace {

RunConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::runtime_error("config '" + path + "' is not valid JSON: " + e.what());
    }
  }
  for (const auto& assignment : overrides) apply_override(j, assignment);
  return parse_config(j);
}

fs::path prepare_output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

PatternLexicon load_lexicon(const RunConfig& cfg) {
  return cfg.lexicon.empty() ? PatternLexicon::builtin() : PatternLexicon::load_tsv(cfg.lexicon);
}

// Ingest chain shared by every corpus-consuming command: parse, normalize,
// canonicalize pattern mentions, then optional collocation merging.
Corpus prepared_corpus(const RunConfig& cfg, const PatternLexicon& lexicon) {
  Corpus corpus = load_corpus(cfg.corpus);
  preprocess_corpus(corpus, cfg.preprocess_options());
  unify_corpus_patterns(corpus, lexicon);
  if (cfg.preprocess.detect_ngrams) {
    PhraseTable table =
        detect_ngrams(corpus, cfg.preprocess.ngram_min_count, cfg.preprocess.ngram_threshold);
    apply_ngrams(corpus, table);
  }
  return corpus;
}

struct TopicStage {
  std::size_t k = 0;
  std::map<std::size_t, double> coherence_scores;
  TopicModel model;
};

// Fits the topic model, picking K by coherence when candidates are given.
TopicStage run_topic_stage(const RunConfig& cfg, const Corpus& corpus, const Vocabulary& vocab,
                           const CooccurrenceCounts& counts) {
  TopicStage stage;
  if (!cfg.topics.k_candidates.empty()) {
    SelectKResult sel =
        select_k(corpus, vocab, counts, cfg.topics.k_candidates, cfg.lda_options(),
                 cfg.topics.top_n);
    stage.k = sel.chosen;
    stage.coherence_scores = std::move(sel.scores);
    stage.model = fit_lda(corpus, vocab, stage.k, cfg.lda_options());
  } else {
    stage.k = cfg.topics.k;
    stage.model = fit_lda(corpus, vocab, stage.k, cfg.lda_options());
    stage.coherence_scores[stage.k] = coherence(stage.model, counts, vocab, cfg.topics.top_n).mean;
  }
  return stage;
}

// Everything from the corpus file to assembled GraphInputs.
GraphInputs build_inputs(const RunConfig& cfg) {
  GraphInputs in;
  in.lexicon = load_lexicon(cfg);
  in.corpus = prepared_corpus(cfg, in.lexicon);
  in.vocab = Vocabulary::build(in.corpus, cfg.text.min_df, &in.lexicon);
  CooccurrenceCounts counts = count_windows(in.corpus, cfg.text.window);
  in.word_word = pmi(counts);
  in.doc_word = tfidf(in.corpus, in.vocab);
  TopicStage topics = run_topic_stage(cfg, in.corpus, in.vocab, counts);
  in.dists = distributions(topics.model, in.vocab, in.lexicon.canonical_names());
  return in;
}

int cmd_ingest(const RunConfig& cfg) {
  validate_config(cfg, true);
  PatternLexicon lexicon = load_lexicon(cfg);
  Corpus corpus = prepared_corpus(cfg, lexicon);
  TokenLengthStats lengths = token_length_stats(corpus);

  json hist = json::object();
  for (std::size_t p = 0; p < kNumPositions; ++p) hist[position_name(Position(p))] = 0;
  for (const auto& [pos, n] : corpus.stats.label_histogram) hist[position_name(pos)] = n;

  json summary{{"total", corpus.stats.total},
               {"labelled", corpus.stats.labelled},
               {"discarded", corpus.stats.discarded},
               {"label_histogram", hist},
               {"mean_tokens", lengths.mean},
               {"median_tokens", lengths.median}};

  fs::path dir = prepare_output_dir(cfg);
  write_json(dir / "ingest.json", summary);

  std::cout << "documents: " << corpus.stats.total << " (labelled " << corpus.stats.labelled
            << ", discarded " << corpus.stats.discarded << ")\n";
  for (const auto& [name, n] : hist.items()) std::cout << "  " << name << ": " << n << "\n";
  std::cout << "tokens per document: mean " << lengths.mean << ", median " << lengths.median
            << "\n";
  std::cout << "wrote " << (dir / "ingest.json").string() << "\n";
  return 0;
}

int cmd_topics(const RunConfig& cfg) {
  validate_config(cfg, true);
  PatternLexicon lexicon = load_lexicon(cfg);
  Corpus corpus = prepared_corpus(cfg, lexicon);
  Vocabulary vocab = Vocabulary::build(corpus, cfg.text.min_df, &lexicon);
  CooccurrenceCounts counts = count_windows(corpus, cfg.text.window);
  TopicStage stage = run_topic_stage(cfg, corpus, vocab, counts);

  std::ostringstream report;
  report << "coherence by K:\n";
  for (const auto& [k, score] : stage.coherence_scores)
    report << "  K=" << k << "\t" << score << "\n";
  report << "chosen K: " << stage.k << "\n\n";
  write_topic_report(report, stage.model, vocab, cfg.topics.top_n);

  json scores = json::object();
  for (const auto& [k, score] : stage.coherence_scores) scores[std::to_string(k)] = score;

  fs::path dir = prepare_output_dir(cfg);
  write_text(dir / "topics.txt", report.str());
  write_json(dir / "topics.json", json{{"chosen_k", stage.k}, {"coherence", scores}});

  std::cout << report.str();
  std::cout << "wrote " << (dir / "topics.txt").string() << " and topics.json\n";
  return 0;
}

int cmd_build_graph(const RunConfig& cfg) {
  validate_config(cfg, true);
  GraphInputs in = build_inputs(cfg);
  HeteroGraph g = assemble_graph(in, cfg.graph_config(), cfg.feature_config());

  std::ostringstream nodes, edges;
  g.write_nodes_tsv(nodes);
  g.write_edges_tsv(edges);

  json node_counts = json::object();
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const NodeType t = static_cast<NodeType>(ti);
    node_counts[node_type_name(t)] = g.n_nodes(t);
  }
  json edge_counts = json::object();
  for (const Relation& rel : g.schema()) edge_counts[rel.name] = g.edges(rel.name).size();

  fs::path dir = prepare_output_dir(cfg);
  write_text(dir / "nodes.tsv", nodes.str());
  write_text(dir / "edges.tsv", edges.str());
  write_json(dir / "graph_stats.json",
             json{{"nodes", node_counts}, {"edges", edge_counts}, {"warnings", g.warnings()}});

  std::cout << "nodes: " << node_counts.dump() << "\n";
  std::cout << "edges: " << edge_counts.dump() << "\n";
  for (const auto& w : g.warnings()) std::cout << "warning: " << w << "\n";
  std::cout << "wrote nodes.tsv, edges.tsv, graph_stats.json under " << dir.string() << "\n";
  return 0;
}

json split_summary(const Splits& splits) {
  return json{{"train", splits.train.size()},
              {"val", splits.val.size()},
              {"test", splits.test.size()},
              {"stratified", splits.stratified},
              {"notes", splits.notes}};
}

void write_train_artifacts(const RunConfig& cfg, const fs::path& dir, const std::string& task,
                           const Corpus& corpus, const Splits& splits, const TrainResult& res) {
  json report{{"task", task},
              {"seed", cfg.seed},
              {"config", config_to_json(cfg)},
              {"splits", split_summary(splits)},
              {"train_loss", res.train_loss},
              {"best_epoch", res.best_epoch},
              {"epochs_run", res.epochs_run},
              {"val", eval_to_json(res.val)},
              {"test", eval_to_json(res.test)},
              {"majority_baseline", eval_to_json(res.baseline)},
              {"notes", res.notes}};
  write_json(dir / ("report_" + task + ".json"), report);

  // flat row for cross-run aggregation
  std::ostringstream metrics;
  metrics << "task\tseed\ttest_weighted_f1\ttest_macro_f1\ttest_accuracy\tval_weighted_f1\t"
             "baseline_weighted_f1\tbest_epoch\tepochs_run\n";
  char buf[64];
  auto g = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  metrics << task << '\t' << cfg.seed << '\t' << g(res.test.weighted_f1) << '\t'
          << g(res.test.macro_f1) << '\t' << g(res.test.accuracy) << '\t'
          << g(res.val.weighted_f1) << '\t' << g(res.baseline.weighted_f1) << '\t'
          << res.best_epoch << '\t' << res.epochs_run << '\n';
  write_text(dir / ("metrics_" + task + ".tsv"), metrics.str());

  // raw per-document scores against every class/position
  std::ostringstream preds;
  preds << "id\ttrue\tpredicted";
  for (std::size_t p = 0; p < kNumPositions; ++p)
    preds << "\tscore_" << position_name(Position(p));
  preds << '\n';
  for (std::size_t i = 0; i < res.test_ids.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < kNumPositions; ++p)
      if (res.test_scores.at(i, p) > res.test_scores.at(i, best)) best = p;
    const auto& doc = corpus.docs.at(res.test_ids[i]);
    preds << doc.id << '\t' << (doc.position ? position_name(*doc.position) : "") << '\t'
          << position_name(Position(best));
    for (std::size_t p = 0; p < kNumPositions; ++p) preds << '\t' << g(res.test_scores.at(i, p));
    preds << '\n';
  }
  write_text(dir / ("predictions_" + task + ".tsv"), preds.str());

  save_checkpoint(res.params, (dir / ("checkpoint_" + task + ".json")).string());
}

int cmd_train(const RunConfig& cfg) {
  validate_config(cfg, true);
  GraphInputs in = build_inputs(cfg);
  HeteroGraph g = assemble_graph(in, cfg.graph_config(), cfg.feature_config());
  Splits splits = make_splits(in.corpus, cfg.split_config());
  TrainConfig train_cfg = cfg.train_config();

  fs::path dir = prepare_output_dir(cfg);
  const bool run_nc = cfg.train.tasks == "nc" || cfg.train.tasks == "both";
  const bool run_lp = cfg.train.tasks == "lp" || cfg.train.tasks == "both";
  if (run_nc) {
    TrainResult res = run_node_classification(g, in.corpus, splits, train_cfg);
    write_train_artifacts(cfg, dir, "nc", in.corpus, splits, res);
    std::cout << "nc: test weighted F1 " << res.test.weighted_f1 << " (baseline "
              << res.baseline.weighted_f1 << ", " << res.epochs_run << " epochs)\n";
  }
  if (run_lp) {
    TrainResult res = run_link_prediction(g, in.corpus, splits, train_cfg);
    write_train_artifacts(cfg, dir, "lp", in.corpus, splits, res);
    std::cout << "lp: test weighted F1 " << res.test.weighted_f1 << " (baseline "
              << res.baseline.weighted_f1 << ", " << res.epochs_run << " epochs)\n";
  }
  std::cout << "wrote reports under " << dir.string() << "\n";
  return 0;
}

int cmd_export_embeddings(const RunConfig& cfg, const std::string& checkpoint) {
  validate_config(cfg, true);
  if (!fs::exists(checkpoint))
    throw std::runtime_error("checkpoint '" + checkpoint + "' does not exist");
  ParamStore params = load_checkpoint(checkpoint);

  GraphInputs in = build_inputs(cfg);
  HeteroGraph g = assemble_graph(in, cfg.graph_config(), cfg.feature_config());
  GnnConfig gnn = cfg.gnn_config();
  if (cfg.train.pretrain == "features") {
    // the checkpointed encoder was trained on pretrained-embedding inputs;
    // rebuild them (deterministic for the same seed) before loading it
    DgiResult dgi = run_dgi_pretrain(g, gnn, cfg.train.pretrain_steps, cfg.train.pretrain_lr,
                                     hash_combine(cfg.seed, fnv1a("dgi")));
    for (auto& [t, z] : dgi.embeddings) g.set_features(t, std::move(z));
  }
  auto embeddings = compute_embeddings(g, params, gnn, hash_combine(cfg.seed, fnv1a("embed")));

  std::ostringstream tsv;
  write_embeddings_tsv(tsv, g, embeddings);
  fs::path dir = prepare_output_dir(cfg);
  write_text(dir / "embeddings.tsv", tsv.str());

  std::size_t nodes = 0;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti)
    nodes += g.n_nodes(static_cast<NodeType>(ti));
  std::cout << "wrote " << nodes << " embeddings to " << (dir / "embeddings.tsv").string()
            << "\n";
  return 0;
}

int cmd_gen_synthetic(const RunConfig& cfg) {
  validate_config(cfg, false);
  const auto& s = cfg.synthetic;
  std::array<double, 3> fractions{s.class_fractions[0], s.class_fractions[1],
                                  s.class_fractions[2]};
  Corpus corpus;
  if (s.kind == "separable") {
    SeparableOptions opt;
    opt.docs = s.docs;
    opt.class_fractions = fractions;
    opt.noise = s.noise;
    opt.seed = cfg.seed;
    corpus = gen_separable(opt);
  } else if (s.kind == "planted") {
    PlantedTopicsOptions opt;
    opt.docs = s.docs;
    opt.seed = cfg.seed;
    corpus = gen_planted_topics(opt);
  } else if (s.kind == "pattern") {
    PatternDrivenOptions opt;
    opt.docs = s.docs;
    opt.class_fractions = fractions;
    opt.seed = cfg.seed;
    corpus = gen_pattern_driven(opt);
  } else {  // paper_stats; sizes fixed to the published histogram
    PaperStatsOptions opt;
    opt.seed = cfg.seed;
    corpus = gen_paper_stats(opt);
  }

  std::ostringstream jsonl;
  write_corpus_jsonl(jsonl, corpus);
  fs::path dir = prepare_output_dir(cfg);
  write_text(dir / "corpus.jsonl", jsonl.str());

  std::cout << "generated " << corpus.docs.size() << " " << s.kind << " documents -> "
            << (dir / "corpus.jsonl").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous text-graph models for market reports"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "JSON config file (defaults apply when omitted)");
  app.add_option("--set", overrides, "override a config value, e.g. --set topics.k=4");

  CLI::App* ingest = app.add_subcommand("ingest", "load the corpus and report its shape");
  CLI::App* topics = app.add_subcommand("topics", "fit the topic model, choosing K if asked");
  CLI::App* build = app.add_subcommand("build-graph", "assemble and export the graph");
  CLI::App* train = app.add_subcommand("train", "train the configured task(s) on the graph");
  CLI::App* exp = app.add_subcommand("export-embeddings",
                                     "write per-node embeddings from a trained checkpoint");
  CLI::App* gen = app.add_subcommand("gen-synthetic", "write a synthetic corpus");
  for (CLI::App* sub : {ingest, topics, build, train, exp, gen}) sub->fallthrough();

  std::string checkpoint;
  exp->add_option("-k,--checkpoint", checkpoint, "trained checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = resolve_config(config_path, overrides);
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (topics->parsed()) return cmd_topics(cfg);
    if (build->parsed()) return cmd_build_graph(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (exp->parsed()) return cmd_export_embeddings(cfg, checkpoint);
    if (gen->parsed()) return cmd_gen_synthetic(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
