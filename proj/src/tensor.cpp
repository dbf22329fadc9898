#include "finsage/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "finsage/kernels.hpp"

namespace finsage {

namespace {
std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= d;
  }
  return shape.empty() ? 0 : n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_size(shape_) != data_.size())
    throw std::invalid_argument("tensor shape does not match value count");
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t(std::move(shape));
  for (double& x : t.data_) x = v;
  return t;
}

Tensor Tensor::eye(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::gauss(std::vector<std::size_t> shape, Rng& rng, double stddev) {
  Tensor t(std::move(shape));
  for (double& x : t.data_) x = stddev * rng.next_gauss();
  return t;
}

Tensor Tensor::glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Tensor t({fan_in, fan_out});
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& x : t.data_) x = limit * (2.0 * rng.next_double() - 1.0);
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  if (shape_.size() == 1) return 1;
  throw std::runtime_error("rows() needs a rank-1 or rank-2 tensor, got " + shape_str());
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  throw std::runtime_error("cols() needs a rank-1 or rank-2 tensor, got " + shape_str());
}

double Tensor::item() const {
  if (size() != 1) throw std::runtime_error("item() on non-scalar tensor " + shape_str());
  return data_[0];
}

void Tensor::check_finite(const std::string& where) const {
  for (double v : data_) {
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite value encountered in " + where);
  }
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw std::runtime_error("matmul needs rank-2 tensors, got " + a.shape_str() + " and " +
                             b.shape_str());
  if (a.cols() != b.rows())
    throw std::runtime_error("matmul shape mismatch: " + a.shape_str() + " * " + b.shape_str());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c({m, n});
  const auto& ker = kernels::active();
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      if (ai[p] != 0.0) ker.axpy(n, ai[p], b.row(p), ci);
    }
  }
  return c;
}

}  // namespace finsage
