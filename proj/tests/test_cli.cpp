// Drives the installed binary end to end through std::system; every case gets
// its own scratch directory under the system temp path.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "finsage/corpus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path capture =
      fs::temp_directory_path() / ("finsage_capture_" + std::to_string(++counter) + ".txt");
  std::string cmd =
      std::string(FINSAGE_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  res.output = ss.str();
  fs::remove(capture);
  return res;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "finsage_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// shared overrides for a corpus small enough to train in seconds
std::string tiny_knobs() {
  return " --set text.min_df=2 --set text.window=10 --set topics.k=3"
         " --set topics.sweeps=30 --set 'model.layer_dims=[12,12]'"
         " --set 'model.sample_sizes=[4,4]' --set train.max_epochs=6"
         " --set train.patience=6 --set features.doc_dim=32 --set features.word_dim=16";
}

}  // namespace

TEST_CASE("gen-synthetic produces a corpus the rest of the pipeline accepts") {
  fs::path dir = fresh_dir("gen");
  CliResult gen = run_cli("gen-synthetic --set output_dir=" + dir.string() +
                          " --set synthetic.docs=40 --set seed=5");
  CHECK(gen.exit_code == 0);
  fs::path corpus = dir / "corpus.jsonl";
  REQUIRE(fs::exists(corpus));

  finsage::Corpus loaded = finsage::load_corpus(corpus.string());
  CHECK(loaded.docs.size() == 40);
  CHECK(loaded.stats.discarded == 0);

  CliResult ing = run_cli("ingest --set corpus=" + corpus.string() +
                          " --set output_dir=" + dir.string());
  CHECK(ing.exit_code == 0);
  json summary = slurp_json(dir / "ingest.json");
  CHECK(summary["total"] == 40);
  CHECK(summary["labelled"] == 40);
}

TEST_CASE("ingest reports hand-countable corpus statistics") {
  fs::path dir = fresh_dir("ingest");
  {
    std::ofstream out(dir / "corpus.jsonl");
    out << R"({"id": "a1", "content": "alpha beta", "position": "Long"})" << "\n";
    out << R"({"id": "a2", "content": "gamma delta", "position": "short"})" << "\n";
    out << "\n";  // blank lines are skipped, not documents
    out << R"({"id": "a3", "content": "epsilon"})" << "\n";
    out << R"({"id": "a4", "content": "   "})" << "\n";
  }
  CliResult res = run_cli("ingest --set corpus=" + (dir / "corpus.jsonl").string() +
                          " --set output_dir=" + dir.string());
  CHECK(res.exit_code == 0);

  json summary = slurp_json(dir / "ingest.json");
  CHECK(summary["total"] == 3);
  CHECK(summary["labelled"] == 2);
  CHECK(summary["discarded"] == 1);
  CHECK(summary["label_histogram"]["Long"] == 1);
  CHECK(summary["label_histogram"]["Short"] == 1);
  CHECK(summary["label_histogram"]["Education"] == 0);
  CHECK(summary["mean_tokens"].get<double>() == doctest::Approx(5.0 / 3.0));
  CHECK(summary["median_tokens"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("ingest of an empty corpus file succeeds with zeros") {
  fs::path dir = fresh_dir("ingest_empty");
  { std::ofstream out(dir / "corpus.jsonl"); }
  CliResult res = run_cli("ingest --set corpus=" + (dir / "corpus.jsonl").string() +
                          " --set output_dir=" + dir.string());
  CHECK(res.exit_code == 0);
  json summary = slurp_json(dir / "ingest.json");
  CHECK(summary["total"] == 0);
  CHECK(summary["discarded"] == 0);
  CHECK(summary["mean_tokens"] == 0.0);
}

TEST_CASE("topics honours the candidate list and reports its choice") {
  fs::path dir = fresh_dir("topics");
  REQUIRE(run_cli("gen-synthetic --set output_dir=" + dir.string() +
                  " --set synthetic.docs=30 --set seed=3")
              .exit_code == 0);
  CliResult res = run_cli("topics --set corpus=" + (dir / "corpus.jsonl").string() +
                          " --set output_dir=" + dir.string() +
                          " --set 'topics.k_candidates=[3]'" + tiny_knobs());
  CHECK(res.exit_code == 0);

  json report = slurp_json(dir / "topics.json");
  CHECK(report["chosen_k"] == 3);
  CHECK(report["coherence"].contains("3"));

  std::string txt = slurp(dir / "topics.txt");
  CHECK(txt.find("chosen K: 3") != std::string::npos);
  CHECK(txt.find("topic 0:") != std::string::npos);
}

TEST_CASE("build-graph is reproducible byte for byte") {
  fs::path dir = fresh_dir("graph");
  REQUIRE(run_cli("gen-synthetic --set output_dir=" + dir.string() +
                  " --set synthetic.docs=40 --set seed=7")
              .exit_code == 0);
  std::string corpus_arg = " --set corpus=" + (dir / "corpus.jsonl").string();

  fs::path a = fresh_dir("graph_a");
  fs::path b = fresh_dir("graph_b");
  REQUIRE(run_cli("build-graph" + corpus_arg + " --set output_dir=" + a.string() + tiny_knobs())
              .exit_code == 0);
  REQUIRE(run_cli("build-graph" + corpus_arg + " --set output_dir=" + b.string() + tiny_knobs())
              .exit_code == 0);

  for (const char* file : {"nodes.tsv", "edges.tsv", "graph_stats.json"})
    CHECK(slurp(a / file) == slurp(b / file));

  json stats = slurp_json(a / "graph_stats.json");
  CHECK(stats["nodes"]["document"] == 40);
  CHECK(stats["nodes"]["position"] == 3);
  for (const char* rel :
       {"pmi", "tfidf", "pwt", "ptd", "mention", "ptpp", "label", "implication"})
    CHECK(stats["edges"].contains(rel));
}

TEST_CASE("train writes the full artifact set deterministically") {
  fs::path dir = fresh_dir("train");
  REQUIRE(run_cli("gen-synthetic --set output_dir=" + dir.string() +
                  " --set synthetic.docs=40 --set seed=11")
              .exit_code == 0);
  std::string args = "train --set corpus=" + (dir / "corpus.jsonl").string() +
                     " --set output_dir=" + dir.string() + tiny_knobs();

  REQUIRE(run_cli(args).exit_code == 0);
  for (const char* task : {"nc", "lp"}) {
    const std::string t(task);
    CHECK(fs::exists(dir / ("report_" + t + ".json")));
    CHECK(fs::exists(dir / ("metrics_" + t + ".tsv")));
    CHECK(fs::exists(dir / ("predictions_" + t + ".tsv")));
    CHECK(fs::exists(dir / ("checkpoint_" + t + ".json")));
  }

  json report = slurp_json(dir / "report_nc.json");
  CHECK(report["task"] == "nc");
  CHECK(report["train_loss"].is_array());
  CHECK(report["test"].contains("weighted_f1"));
  CHECK(report["majority_baseline"].contains("weighted_f1"));
  CHECK(report["splits"]["train"].get<std::size_t>() +
            report["splits"]["val"].get<std::size_t>() +
            report["splits"]["test"].get<std::size_t>() ==
        40);

  std::string metrics = slurp(dir / "metrics_nc.tsv");
  CHECK(metrics.rfind("task\tseed\ttest_weighted_f1", 0) == 0);
  CHECK(count_lines(metrics) == 2);  // header + one row

  // predictions carry one row per test document plus the header
  std::string preds = slurp(dir / "predictions_lp.tsv");
  CHECK(count_lines(preds) == 1 + report["splits"]["test"].get<std::size_t>());
  CHECK(preds.rfind("id\ttrue\tpredicted\tscore_Long\tscore_Short\tscore_Education", 0) == 0);

  // byte-stable across a full re-run into the same directory
  std::string before_metrics = slurp(dir / "metrics_lp.tsv");
  std::string before_preds = slurp(dir / "predictions_lp.tsv");
  std::string before_report = slurp(dir / "report_nc.json");
  std::string before_ckpt = slurp(dir / "checkpoint_nc.json");
  REQUIRE(run_cli(args).exit_code == 0);
  CHECK(slurp(dir / "metrics_lp.tsv") == before_metrics);
  CHECK(slurp(dir / "predictions_lp.tsv") == before_preds);
  CHECK(slurp(dir / "report_nc.json") == before_report);
  CHECK(slurp(dir / "checkpoint_nc.json") == before_ckpt);
}

TEST_CASE("export-embeddings covers every node in the graph") {
  fs::path dir = fresh_dir("embed");
  REQUIRE(run_cli("gen-synthetic --set output_dir=" + dir.string() +
                  " --set synthetic.docs=40 --set seed=11")
              .exit_code == 0);
  std::string common = " --set corpus=" + (dir / "corpus.jsonl").string() +
                       " --set output_dir=" + dir.string() + tiny_knobs();
  REQUIRE(run_cli("train --set train.tasks=nc" + common).exit_code == 0);
  REQUIRE(run_cli("build-graph" + common).exit_code == 0);

  CliResult res = run_cli("export-embeddings -k " + (dir / "checkpoint_nc.json").string() + common);
  CHECK(res.exit_code == 0);

  json stats = slurp_json(dir / "graph_stats.json");
  std::size_t nodes = 0;
  for (const auto& [type, n] : stats["nodes"].items()) nodes += n.get<std::size_t>();

  std::string tsv = slurp(dir / "embeddings.tsv");
  CHECK(count_lines(tsv) == 1 + nodes);
  CHECK(tsv.rfind("id\ttype\te0", 0) == 0);
}

TEST_CASE("a bad config fails before anything is written") {
  fs::path dir = fresh_dir("badcfg");
  fs::path cfg = dir / "config.json";
  fs::path out = dir / "never_created";
  {
    std::ofstream f(cfg);
    f << R"({"output_dir": ")" << out.string() << R"(", "text": {"mindf": 3}})";
  }
  CliResult res = run_cli("ingest -c " + cfg.string());
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("unknown key 'text.mindf'") != std::string::npos);
  CHECK_FALSE(fs::exists(out));

  // out-of-range values caught by validation, still before any side effects
  fs::path corpus = dir / "corpus.jsonl";
  { std::ofstream f(corpus); }
  CliResult range = run_cli("ingest --set corpus=" + corpus.string() + " --set output_dir=" +
                            out.string() + " --set model.dropout=2");
  CHECK(range.exit_code == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("export-embeddings rejects a file that is not a checkpoint") {
  fs::path dir = fresh_dir("badckpt");
  fs::path corpus = dir / "corpus.jsonl";
  {
    std::ofstream f(corpus);
    f << R"({"id": "d", "content": "alpha"})" << "\n";
  }
  fs::path not_ckpt = dir / "not_a_checkpoint.json";
  {
    std::ofstream f(not_ckpt);
    f << "{}";
  }
  fs::path out = dir / "never_created";
  CliResult res = run_cli("export-embeddings -k " + not_ckpt.string() + " --set corpus=" +
                          corpus.string() + " --set output_dir=" + out.string());
  CHECK(res.exit_code == 1);
  CHECK_FALSE(fs::exists(out));

  // the option itself is required
  CliResult missing = run_cli("export-embeddings --set corpus=" + corpus.string());
  CHECK(missing.exit_code != 0);
}
