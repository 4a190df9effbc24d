#include "rce/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rce {

namespace {
std::size_t checked_size(const std::vector<int>& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor shape must not be empty");
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(checked_size(shape_), 0.0);
}

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values) {
  if (checked_size(shape) != values.size())
    throw std::invalid_argument("tensor value count does not match shape");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(values);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

Tensor xavier_init(const std::vector<int>& shape, Rng& rng) {
  if (shape.size() != 2)
    throw std::invalid_argument("xavier_init requires a 2-D shape, got " +
                                std::to_string(shape.size()) + "-D");
  double limit = std::sqrt(6.0 / (shape[0] + shape[1]));
  return uniform_init(shape, limit, rng);
}

Tensor xavier_init(const std::vector<int>& shape, std::uint64_t seed) {
  Rng rng(seed);
  return xavier_init(shape, rng);
}

Tensor uniform_init(const std::vector<int>& shape, double limit, Rng& rng) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

}  // namespace rce
