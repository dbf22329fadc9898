#include "finsage/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace finsage {

Tensor& ParamStore::add(const std::string& name, Tensor value) {
  auto [it, inserted] = params_.emplace(name, std::move(value));
  if (!inserted) throw std::runtime_error("parameter already registered: " + name);
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::runtime_error("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::runtime_error("unknown parameter: " + name);
  return it->second;
}

void adam_step(ParamStore& params, const ag::Gradients& grads, AdamState& state,
               const AdamConfig& cfg) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    if (!p.same_shape(g))
      throw std::runtime_error("gradient shape mismatch for " + name + ": " + p.shape_str() +
                               " vs " + g.shape_str());
    auto& [m, v] = state.moments.try_emplace(name, Tensor(p.shape()), Tensor(p.shape()))
                       .first->second;
    double* pd = p.data();
    double* md = m.data();
    double* vd = v.data();
    const double* gd = g.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      md[i] = cfg.beta1 * md[i] + (1.0 - cfg.beta1) * gd[i];
      vd[i] = cfg.beta2 * vd[i] + (1.0 - cfg.beta2) * gd[i] * gd[i];
      const double mhat = md[i] / bc1;
      const double vhat = vd[i] / bc2;
      pd[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace finsage
