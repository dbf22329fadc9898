#pragma once

#include <map>
#include <string>
#include <vector>

#include "finsage/autograd.hpp"
#include "finsage/tensor.hpp"

namespace finsage {

// Named trainable parameters. std::map keeps iteration order stable
// (alphabetical), which keeps checkpoints and update order deterministic.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor value);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  std::size_t size() const { return params_.size(); }

  std::map<std::string, Tensor>& items() { return params_; }
  const std::map<std::string, Tensor>& items() const { return params_; }

 private:
  std::map<std::string, Tensor> params_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moment estimates, keyed like the ParamStore. `t` counts
// completed steps and drives bias correction.
struct AdamState {
  std::map<std::string, std::pair<Tensor, Tensor>> moments;
  long t = 0;
};

// One Adam update over every parameter that has an entry in `grads`.
// Parameters without a gradient are left untouched.
void adam_step(ParamStore& params, const ag::Gradients& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace finsage
