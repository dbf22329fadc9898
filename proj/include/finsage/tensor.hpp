#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "finsage/rng.hpp"

namespace finsage {

// Dense row-major tensor of doubles. Rank is 1 or 2 in practice; shape is
// kept general. Values are expected to stay finite; ops in the autograd
// layer call check_finite at their boundaries.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor eye(std::size_t n);
  static Tensor gauss(std::vector<std::size_t> shape, Rng& rng, double stddev = 1.0);
  // Glorot/Xavier uniform for a (fan_in x fan_out) weight matrix.
  static Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t rank() const { return shape_.size(); }

  // 2-d accessors; a rank-1 tensor behaves as a single row.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double* row(std::size_t r) { return data_.data() + r * cols(); }
  const double* row(std::size_t r) const { return data_.data() + r * cols(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  double item() const;  // requires size() == 1

  // Throws std::runtime_error naming `where` if any value is NaN/Inf.
  void check_finite(const std::string& where) const;

  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// C = A * B for 2-d tensors; uses the active kernel backend.
Tensor matmul(const Tensor& a, const Tensor& b);

}  // namespace finsage
