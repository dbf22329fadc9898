#pragma once

// End-to-end orchestration: label splits, metric computation, the two
// supervised tasks (document stance classification and document->position
// link scoring), optional unsupervised pretraining, and the ablation grid.
// Everything is deterministic given the seeds in the configs.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsage/corpus.hpp"
#include "finsage/gnn.hpp"
#include "finsage/hetgraph.hpp"
#include "finsage/optim.hpp"
#include "finsage/textstats.hpp"
#include "finsage/topics.hpp"

namespace finsage {

struct SplitConfig {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  std::uint64_t seed = 42;
};

// Document node indices (= corpus positions) of the labelled documents,
// partitioned once per run. Stratified by class via largest-remainder
// apportionment; classes too small to stratify (1 or 2 members) drop the
// whole split back to plain shuffling, recorded in `notes`.
struct Splits {
  std::vector<std::uint32_t> train, val, test;
  bool stratified = true;
  std::vector<std::string> notes;
};

Splits make_splits(const Corpus& corpus, const SplitConfig& cfg);

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::size_t>> confusion;  // [true][pred]
  std::vector<double> precision, recall, f1;
  std::vector<std::size_t> support;
  double accuracy = 0.0;
  double weighted_f1 = 0.0;  // support-weighted
  double macro_f1 = 0.0;
  std::vector<std::string> flags;  // e.g. thin support
};

// y values index into class_names; -1 predictions count as wrong everywhere.
// Throws on empty input — an empty split is reported upstream, not scored.
EvalReport evaluate(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                    const std::vector<std::string>& class_names);

nlohmann::json eval_to_json(const EvalReport& report);
void write_eval_tsv(std::ostream& out, const EvalReport& report);

// Most frequent training label applied to every test row.
EvalReport majority_baseline(const std::vector<int>& y_train, const std::vector<int>& y_test,
                             const std::vector<std::string>& class_names);

struct TrainConfig {
  GnnConfig gnn;
  // "none": train encoder + head supervised from scratch.
  // "features": unsupervised-pretrain, then swap every node type's input
  //             features for its pretrained embeddings and train a fresh
  //             encoder + head on top. Types with no message-passing
  //             relations keep their original features (noted).
  // "fine_tune": unsupervised-pretrain, then continue supervised end to end.
  std::string pretrain = "none";
  std::size_t pretrain_steps = 150;
  double pretrain_lr = 0.01;
  double lr = 0.01;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;  // epochs without val improvement before stopping
  std::uint64_t seed = 42;
};

struct TrainResult {
  ParamStore params;                      // best-on-validation weights
  EvalReport val, test;
  EvalReport baseline;                    // majority-class floor on the test split
  std::vector<double> train_loss;         // one entry per completed epoch
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::vector<std::string> notes;
  std::map<NodeType, Tensor> embeddings;  // eval-mode, best weights, all nodes
  std::vector<std::uint32_t> test_ids;    // rows of test_scores
  Tensor test_scores;                     // per-class probabilities / link scores
};

struct DgiResult {
  ParamStore params;
  std::vector<double> loss;
  std::map<NodeType, Tensor> embeddings;
  std::vector<std::string> notes;
};

// Trains the encoder against the real-vs-shuffled discriminator objective.
// Embeddings cover every populated node type; a type without message-passing
// relations gets its original features passed through, with a note.
DgiResult run_dgi_pretrain(const HeteroGraph& g, const GnnConfig& cfg, std::size_t steps,
                           double lr, std::uint64_t seed);

// Softmax head over document embeddings; Adam, early stopping on validation
// weighted F1, best weights restored before the test evaluation.
TrainResult run_node_classification(const HeteroGraph& g, const Corpus& corpus,
                                    const Splits& splits, const TrainConfig& cfg);

// Sigmoid scorer on (document, position) pairs: each training document
// contributes its true position (target 1) and the other two (target 0).
// Prediction takes the argmax score over the three positions per document.
TrainResult run_link_prediction(const HeteroGraph& g, const Corpus& corpus,
                                const Splits& splits, const TrainConfig& cfg);

// Everything build_graph needs, computed once and shared across ablations.
struct GraphInputs {
  Corpus corpus;
  Vocabulary vocab;
  WeightedEdgeList word_word;
  WeightedEdgeList doc_word;
  TopicDistributions dists;
  PatternLexicon lexicon;
};

struct FeatureConfig {
  std::size_t word_dim = 100;
  std::size_t doc_dim = 384;
  std::uint64_t seed = 42;
};

// Builds the graph for one relation mask and attaches features: hashed
// word vectors, random-projected tf-idf document vectors, one-hot topics,
// patterns and positions.
HeteroGraph assemble_graph(const GraphInputs& in, const GraphConfig& mask,
                           const FeatureConfig& feats);

struct AblationRow {
  std::string name;
  GraphConfig mask;
  EvalReport nc_test;
  EvalReport lp_test;
};

// Runs both tasks once per mask on freshly assembled graphs.
std::vector<AblationRow> run_ablations(const GraphInputs& in,
                                       const std::vector<std::pair<std::string, GraphConfig>>& masks,
                                       const FeatureConfig& feats, const SplitConfig& split_cfg,
                                       const TrainConfig& train_cfg);

void write_ablation_tsv(std::ostream& out, const std::vector<AblationRow>& rows);

// "id<TAB>type<TAB>dim0<TAB>dim1..." for every node, types in enum order.
void write_embeddings_tsv(std::ostream& out, const HeteroGraph& g,
                          const std::map<NodeType, Tensor>& embeddings);

}  // namespace finsage
