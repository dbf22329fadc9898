#pragma once

// Reverse-mode autodiff on a flat tape. Ops record a backward closure; calling
// Tape::backward on a scalar loss walks the tape in reverse and accumulates
// gradients into every node that (transitively) depends on a leaf.

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "finsage/rng.hpp"
#include "finsage/tensor.hpp"

namespace finsage {
namespace ag {

class Tape;

// Lightweight handle into a tape. Copyable; valid as long as the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t idx) : tape_(tape), idx_(idx) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  Tape* tape() const { return tape_; }
  std::size_t index() const { return idx_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t idx_ = 0;
};

using Gradients = std::map<std::string, Tensor>;

class Tape {
 public:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backward;  // empty for leaves and constants
    std::string name;                     // set for named parameters
  };

  // Trainable input; gradients for named leaves end up in named_grads().
  Var leaf(Tensor value, std::string name = "");
  // Fixed input, no gradient tracked.
  Var constant(Tensor value);

  // Runs reverse accumulation from a scalar loss. Clears old gradients first.
  void backward(Var loss);

  Gradients named_grads() const;

  Node& node(std::size_t idx) { return nodes_[idx]; }
  const Node& node(std::size_t idx) const { return nodes_[idx]; }
  std::size_t size() const { return nodes_.size(); }

  Var emit(Tensor value, bool requires_grad, std::function<void(Tape&)> backward);

 private:
  std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double c);
// (m,n) plus a length-n vector added to every row.
Var add_rowvec(Var a, Var b);
Var concat_cols(const std::vector<Var>& parts);
Var gather_rows(Var a, const std::vector<std::size_t>& idx);
// Mean of the rows of `a` that share a group id; groups with no rows give a
// zero row. group.size() must equal a.rows(), ids in [0, n_groups).
Var group_mean(Var a, const std::vector<std::size_t>& group, std::size_t n_groups);
Var relu(Var a);
Var sigmoid(Var a);
// Inverted dropout: scales kept entries by 1/(1-p). Identity when !train or p==0.
Var dropout(Var a, double p, Rng& rng, bool train);
// Rows scaled to unit L2 norm; all-zero rows pass through unchanged.
Var l2_normalize_rows(Var a);
Var transpose(Var a);
Var reshape(Var a, std::vector<std::size_t> shape);
// (m,n),(m,n) -> length-m vector of per-row dot products.
Var rowwise_dot(Var a, Var b);
Var neg(Var a);
// ln(max(x, eps)); gradient is zero where the clamp is active.
Var log_clamped(Var a, double eps = 1e-12);
Var mean_all(Var a);
Var sum_all(Var a);
// Mean negative log-likelihood over rows; stable log-sum-exp inside.
Var softmax_cross_entropy(Var logits, const std::vector<int>& labels);
// Mean BCE over all entries, probabilities clamped to [eps, 1-eps].
Var binary_cross_entropy(Var probs, const Tensor& targets, double eps = 1e-12);

}  // namespace ag

// Plain (non-differentiable) row-wise softmax, used for predictions.
Tensor softmax_rows(const Tensor& logits);

}  // namespace finsage
