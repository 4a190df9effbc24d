#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rce/rng.hpp"

namespace rce {

// Dense row-major tensor of 64-bit reals. Rank 1 and 2 cover everything
// in this project. Plain value type: copying copies the buffer.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v);
  static Tensor from(std::vector<int> shape, std::vector<double> values);
  static Tensor scalar(double v) { return from({1}, {v}); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }

  int rows() const { return shape_[0]; }
  int cols() const { return rank() == 2 ? shape_[1] : 1; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * shape_[1] + j]; }
  double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * shape_[1] + j]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;
  void fill(double v);

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// Uniform init in ±sqrt(6 / (shape[0] + shape[1])). Shape must be 2-D.
Tensor xavier_init(const std::vector<int>& shape, Rng& rng);
Tensor xavier_init(const std::vector<int>& shape, std::uint64_t seed);

// Uniform init in ±limit.
Tensor uniform_init(const std::vector<int>& shape, double limit, Rng& rng);

}  // namespace rce
