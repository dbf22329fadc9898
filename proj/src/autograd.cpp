#include "finsage/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "finsage/kernels.hpp"

namespace finsage {
namespace ag {

const Tensor& Var::value() const { return tape_->node(idx_).value; }
const Tensor& Var::grad() const { return tape_->node(idx_).grad; }

Var Tape::leaf(Tensor value, std::string name) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.name = std::move(name);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = false;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::emit(Tensor value, bool requires_grad, std::function<void(Tape&)> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw std::runtime_error("backward: loss lives on another tape");
  if (loss.value().size() != 1)
    throw std::runtime_error("backward needs a scalar loss, got " + loss.value().shape_str());
  const std::size_t top = loss.index();
  for (std::size_t i = 0; i <= top; ++i)
    nodes_[i].grad = Tensor(nodes_[i].value.shape());
  if (!nodes_[top].requires_grad) return;
  nodes_[top].grad.data()[0] = 1.0;
  for (std::size_t i = top + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward(*this);
  }
}

Gradients Tape::named_grads() const {
  Gradients g;
  for (const Node& n : nodes_) {
    if (!n.name.empty()) g.emplace(n.name, n.grad);
  }
  return g;
}

namespace {

Tape* common_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw std::runtime_error("operands live on different tapes");
  return a.tape();
}

bool rg(Tape& t, Var v) { return t.node(v.index()).requires_grad; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw std::runtime_error(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                             b.shape_str());
}

Tensor transposed(const Tensor& x) {
  const std::size_t m = x.rows(), n = x.cols();
  Tensor y({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y.at(j, i) = x.at(i, j);
  return y;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *common_tape(a, b);
  Tensor out = finsage::matmul(a.value(), b.value());
  const std::size_t ai = a.index(), bi = b.index();
  const bool need = rg(t, a) || rg(t, b);
  const std::size_t oi = t.size();
  return t.emit(std::move(out), need, [ai, bi, oi](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    if (tp.node(ai).requires_grad) {
      Tensor ga = finsage::matmul(g, transposed(tp.node(bi).value));
      const auto& ker = kernels::active();
      ker.vadd(ga.size(), tp.node(ai).grad.data(), ga.data(), tp.node(ai).grad.data());
    }
    if (tp.node(bi).requires_grad) {
      Tensor gb = finsage::matmul(transposed(tp.node(ai).value), g);
      const auto& ker = kernels::active();
      ker.vadd(gb.size(), tp.node(bi).grad.data(), gb.data(), tp.node(bi).grad.data());
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = *common_tape(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out(a.value().shape());
  kernels::active().vadd(out.size(), a.value().data(), b.value().data(), out.data());
  const std::size_t ai = a.index(), bi = b.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a) || rg(t, b), [ai, bi, oi](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    const auto& ker = kernels::active();
    if (tp.node(ai).requires_grad)
      ker.vadd(g.size(), tp.node(ai).grad.data(), g.data(), tp.node(ai).grad.data());
    if (tp.node(bi).requires_grad)
      ker.vadd(g.size(), tp.node(bi).grad.data(), g.data(), tp.node(bi).grad.data());
  });
}

Var sub(Var a, Var b) {
  Tape& t = *common_tape(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out(a.value().shape());
  kernels::active().vsub(out.size(), a.value().data(), b.value().data(), out.data());
  const std::size_t ai = a.index(), bi = b.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a) || rg(t, b), [ai, bi, oi](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    const auto& ker = kernels::active();
    if (tp.node(ai).requires_grad)
      ker.vadd(g.size(), tp.node(ai).grad.data(), g.data(), tp.node(ai).grad.data());
    if (tp.node(bi).requires_grad)
      ker.axpy(g.size(), -1.0, g.data(), tp.node(bi).grad.data());
  });
}

Var mul(Var a, Var b) {
  Tape& t = *common_tape(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out(a.value().shape());
  kernels::active().vmul(out.size(), a.value().data(), b.value().data(), out.data());
  const std::size_t ai = a.index(), bi = b.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a) || rg(t, b), [ai, bi, oi](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    const double* gd = g.data();
    if (tp.node(ai).requires_grad) {
      const double* bd = tp.node(bi).value.data();
      double* ga = tp.node(ai).grad.data();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += gd[i] * bd[i];
    }
    if (tp.node(bi).requires_grad) {
      const double* ad = tp.node(ai).value.data();
      double* gb = tp.node(bi).grad.data();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += gd[i] * ad[i];
    }
  });
}

Var scale(Var a, double c) {
  Tape& t = *a.tape();
  Tensor out(a.value().shape());
  kernels::active().vscale(out.size(), c, a.value().data(), out.data());
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi, c](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    kernels::active().axpy(g.size(), c, g.data(), tp.node(ai).grad.data());
  });
}

Var add_rowvec(Var a, Var b) {
  Tape& t = *common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t m = av.rows(), n = av.cols();
  if (bv.size() != n || (bv.rank() == 2 && bv.rows() != 1))
    throw std::runtime_error("add_rowvec: vector " + bv.shape_str() + " does not match " +
                             av.shape_str());
  Tensor out(av.shape());
  for (std::size_t i = 0; i < m; ++i)
    kernels::active().vadd(n, av.row(i), bv.data(), out.row(i));
  const std::size_t ai = a.index(), bi = b.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a) || rg(t, b), [ai, bi, oi, m, n](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    const auto& ker = kernels::active();
    if (tp.node(ai).requires_grad)
      ker.vadd(g.size(), tp.node(ai).grad.data(), g.data(), tp.node(ai).grad.data());
    if (tp.node(bi).requires_grad) {
      double* gb = tp.node(bi).grad.data();
      for (std::size_t i = 0; i < m; ++i) ker.vadd(n, gb, g.row(i), gb);
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_cols: no inputs");
  Tape& t = *parts[0].tape();
  const std::size_t m = parts[0].value().rows();
  std::size_t total = 0;
  bool need = false;
  std::vector<std::size_t> idx, width;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw std::runtime_error("operands live on different tapes");
    if (p.value().rows() != m)
      throw std::runtime_error("concat_cols: row count mismatch " + p.value().shape_str());
    idx.push_back(p.index());
    width.push_back(p.value().cols());
    total += p.value().cols();
    need = need || rg(t, p);
  }
  Tensor out({m, total});
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < m; ++i)
      std::copy(v.row(i), v.row(i) + v.cols(), out.row(i) + off);
    off += v.cols();
  }
  const std::size_t oi = t.size();
  return t.emit(std::move(out), need, [idx, width, oi, m](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    std::size_t off = 0;
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (tp.node(idx[p]).requires_grad) {
        Tensor& gp = tp.node(idx[p]).grad;
        for (std::size_t i = 0; i < m; ++i) {
          const double* src = g.row(i) + off;
          double* dst = gp.row(i);
          for (std::size_t j = 0; j < width[p]; ++j) dst[j] += src[j];
        }
      }
      off += width[p];
    }
  });
}

Var gather_rows(Var a, const std::vector<std::size_t>& idx) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  if (av.rank() != 2) throw std::runtime_error("gather_rows needs a rank-2 tensor");
  if (idx.empty()) throw std::runtime_error("gather_rows: empty index list");
  const std::size_t n = av.cols();
  Tensor out({idx.size(), n});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= av.rows()) throw std::runtime_error("gather_rows: index out of range");
    std::copy(av.row(idx[i]), av.row(idx[i]) + n, out.row(i));
  }
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi, idx, n](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    Tensor& ga = tp.node(ai).grad;
    for (std::size_t i = 0; i < idx.size(); ++i)
      kernels::active().vadd(n, ga.row(idx[i]), g.row(i), ga.row(idx[i]));
  });
}

Var group_mean(Var a, const std::vector<std::size_t>& group, std::size_t n_groups) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  if (av.rank() != 2) throw std::runtime_error("group_mean needs a rank-2 tensor");
  if (group.size() != av.rows())
    throw std::runtime_error("group_mean: one group id per row required");
  if (n_groups == 0) throw std::runtime_error("group_mean: n_groups must be positive");
  const std::size_t n = av.cols();
  std::vector<double> count(n_groups, 0.0);
  for (std::size_t gid : group) {
    if (gid >= n_groups) throw std::runtime_error("group_mean: group id out of range");
    count[gid] += 1.0;
  }
  Tensor out({n_groups, n});
  for (std::size_t i = 0; i < group.size(); ++i)
    kernels::active().vadd(n, out.row(group[i]), av.row(i), out.row(group[i]));
  for (std::size_t g = 0; g < n_groups; ++g) {
    if (count[g] > 0.0)
      kernels::active().vscale(n, 1.0 / count[g], out.row(g), out.row(g));
  }
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi, group, count, n](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    Tensor& ga = tp.node(ai).grad;
    for (std::size_t i = 0; i < group.size(); ++i)
      kernels::active().axpy(n, 1.0 / count[group[i]], g.row(group[i]), ga.row(i));
  });
}

Var relu(Var a) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i)
    out.data()[i] = av.data()[i] > 0.0 ? av.data()[i] : 0.0;
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    const double* x = tp.node(ai).value.data();
    double* ga = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x[i] > 0.0) ga[i] += g.data()[i];
  });
}

static double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var sigmoid(Var a) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out.data()[i] = stable_sigmoid(av.data()[i]);
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    const double* y = tp.node(oi).value.data();
    double* ga = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g.data()[i] * y[i] * (1.0 - y[i]);
  });
}

Var dropout(Var a, double p, Rng& rng, bool train) {
  if (p < 0.0 || p >= 1.0) throw std::runtime_error("dropout: p must be in [0, 1)");
  if (!train || p == 0.0) return a;
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(av.size());
  for (double& m : mask) m = rng.next_double() < p ? 0.0 : keep_scale;
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out.data()[i] = av.data()[i] * mask[i];
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi, mask](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    double* ga = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g.data()[i] * mask[i];
  });
}

Var l2_normalize_rows(Var a) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const std::size_t m = av.rows(), n = av.cols();
  Tensor out(av.shape());
  std::vector<double> norm(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    norm[i] = std::sqrt(kernels::active().sumsq(n, av.row(i)));
    if (norm[i] > 0.0)
      kernels::active().vscale(n, 1.0 / norm[i], av.row(i), out.row(i));
    else
      std::copy(av.row(i), av.row(i) + n, out.row(i));
  }
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi, norm, m, n](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    const Tensor& y = tp.node(oi).value;
    Tensor& ga = tp.node(ai).grad;
    for (std::size_t i = 0; i < m; ++i) {
      if (norm[i] == 0.0) {
        kernels::active().vadd(n, ga.row(i), g.row(i), ga.row(i));
        continue;
      }
      const double gy = kernels::active().dot(n, g.row(i), y.row(i));
      const double* gr = g.row(i);
      const double* yr = y.row(i);
      double* dst = ga.row(i);
      for (std::size_t j = 0; j < n; ++j) dst[j] += (gr[j] - gy * yr[j]) / norm[i];
    }
  });
}

Var transpose(Var a) {
  Tape& t = *a.tape();
  if (a.value().rank() != 2) throw std::runtime_error("transpose needs a rank-2 tensor");
  Tensor out = transposed(a.value());
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi](Tape& tp) {
    Tensor gt = transposed(tp.node(oi).grad);
    Tensor& ga = tp.node(ai).grad;
    kernels::active().vadd(gt.size(), ga.data(), gt.data(), ga.data());
  });
}

Var reshape(Var a, std::vector<std::size_t> shape) {
  Tape& t = *a.tape();
  Tensor out(std::move(shape), std::vector<double>(a.value().data(), a.value().data() + a.value().size()));
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    Tensor& ga = tp.node(ai).grad;
    kernels::active().vadd(g.size(), ga.data(), g.data(), ga.data());
  });
}

Var rowwise_dot(Var a, Var b) {
  Tape& t = *common_tape(a, b);
  require_same_shape(a.value(), b.value(), "rowwise_dot");
  if (a.value().rank() != 2) throw std::runtime_error("rowwise_dot needs rank-2 tensors");
  const std::size_t m = a.value().rows(), n = a.value().cols();
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i)
    out.data()[i] = kernels::active().dot(n, a.value().row(i), b.value().row(i));
  const std::size_t ai = a.index(), bi = b.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a) || rg(t, b), [ai, bi, oi, m, n](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    if (tp.node(ai).requires_grad) {
      Tensor& ga = tp.node(ai).grad;
      const Tensor& bv = tp.node(bi).value;
      for (std::size_t i = 0; i < m; ++i)
        kernels::active().axpy(n, g.data()[i], bv.row(i), ga.row(i));
    }
    if (tp.node(bi).requires_grad) {
      Tensor& gb = tp.node(bi).grad;
      const Tensor& av = tp.node(ai).value;
      for (std::size_t i = 0; i < m; ++i)
        kernels::active().axpy(n, g.data()[i], av.row(i), gb.row(i));
    }
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var log_clamped(Var a, double eps) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i)
    out.data()[i] = std::log(std::max(av.data()[i], eps));
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi, eps](Tape& tp) {
    const Tensor& g = tp.node(oi).grad;
    const double* x = tp.node(ai).value.data();
    double* ga = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x[i] >= eps) ga[i] += g.data()[i] / x[i];
  });
}

Var mean_all(Var a) {
  Tape& t = *a.tape();
  const std::size_t sz = a.value().size();
  Tensor out({1});
  out.data()[0] = kernels::active().sum(sz, a.value().data()) / static_cast<double>(sz);
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi, sz](Tape& tp) {
    const double g = tp.node(oi).grad.data()[0] / static_cast<double>(sz);
    double* ga = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < sz; ++i) ga[i] += g;
  });
}

Var sum_all(Var a) {
  Tape& t = *a.tape();
  const std::size_t sz = a.value().size();
  Tensor out({1});
  out.data()[0] = kernels::active().sum(sz, a.value().data());
  const std::size_t ai = a.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, a), [ai, oi, sz](Tape& tp) {
    const double g = tp.node(oi).grad.data()[0];
    double* ga = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < sz; ++i) ga[i] += g;
  });
}

Var softmax_cross_entropy(Var logits, const std::vector<int>& labels) {
  Tape& t = *logits.tape();
  const Tensor& x = logits.value();
  if (x.rank() != 2) throw std::runtime_error("softmax_cross_entropy needs rank-2 logits");
  const std::size_t m = x.rows(), c = x.cols();
  if (labels.size() != m)
    throw std::runtime_error("softmax_cross_entropy: one label per row required");
  Tensor probs({m, c});
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c)
      throw std::runtime_error("softmax_cross_entropy: label out of range");
    const double* xi = x.row(i);
    double mx = xi[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, xi[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(xi[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) probs.at(i, j) = std::exp(xi[j] - lse);
    total += lse - xi[labels[i]];
  }
  Tensor out({1});
  out.data()[0] = total / static_cast<double>(m);
  const std::size_t ai = logits.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, logits), [ai, oi, labels, probs, m, c](Tape& tp) {
    const double g = tp.node(oi).grad.data()[0] / static_cast<double>(m);
    Tensor& ga = tp.node(ai).grad;
    for (std::size_t i = 0; i < m; ++i) {
      double* dst = ga.row(i);
      const double* pr = probs.row(i);
      for (std::size_t j = 0; j < c; ++j) dst[j] += g * pr[j];
      dst[labels[i]] -= g;
    }
  });
}

Var binary_cross_entropy(Var probs, const Tensor& targets, double eps) {
  Tape& t = *probs.tape();
  const Tensor& p = probs.value();
  require_same_shape(p, targets, "binary_cross_entropy");
  const std::size_t sz = p.size();
  double total = 0.0;
  for (std::size_t i = 0; i < sz; ++i) {
    const double ph = std::clamp(p.data()[i], eps, 1.0 - eps);
    const double y = targets.data()[i];
    total -= y * std::log(ph) + (1.0 - y) * std::log(1.0 - ph);
  }
  Tensor out({1});
  out.data()[0] = total / static_cast<double>(sz);
  const std::size_t ai = probs.index(), oi = t.size();
  return t.emit(std::move(out), rg(t, probs), [ai, oi, targets, eps, sz](Tape& tp) {
    const double g = tp.node(oi).grad.data()[0] / static_cast<double>(sz);
    const double* pd = tp.node(ai).value.data();
    double* ga = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < sz; ++i) {
      if (pd[i] < eps || pd[i] > 1.0 - eps) continue;  // inside the clamp: flat
      const double y = targets.data()[i];
      ga[i] -= g * (y / pd[i] - (1.0 - y) / (1.0 - pd[i]));
    }
  });
}

}  // namespace ag

Tensor softmax_rows(const Tensor& logits) {
  const std::size_t m = logits.rows(), c = logits.cols();
  Tensor out({m, c});
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = logits.rank() == 2 ? logits.row(i) : logits.data();
    double mx = xi[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, xi[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(xi[j] - mx);
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) = std::exp(xi[j] - mx) / z;
  }
  return out;
}

}  // namespace finsage
