#include "rce/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace rce {

OptKind opt_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptKind::Sgd;
  if (s == "adam") return OptKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected sgd or adam)");
}

std::string to_string(OptKind k) { return k == OptKind::Sgd ? "sgd" : "adam"; }

Optimizer::Optimizer(OptimizerConfig config, std::vector<Parameter*> params)
    : config_(config), params_(std::move(params)) {
  if (config_.kind == OptKind::Adam) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Parameter* p : params_) {
      m_.push_back(Tensor::zeros(p->value.shape()));
      v_.push_back(Tensor::zeros(p->value.shape()));
    }
  }
}

void Optimizer::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void Optimizer::step() {
  ++step_count_;
  double lr = config_.learning_rate;
  if (config_.kind == OptKind::Sgd) {
    for (Parameter* p : params_) {
      if (!p->grad.same_shape(p->value))
        throw std::invalid_argument("optimizer: gradient shape " + p->grad.shape_str() +
                                    " does not match parameter " + p->value.shape_str());
      double* w = p->value.data();
      const double* g = p->grad.data();
      for (std::size_t i = 0; i < p->value.size(); ++i) w[i] -= lr * g[i];
    }
    return;
  }
  double b1 = config_.beta1, b2 = config_.beta2, eps = config_.epsilon;
  double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter* p = params_[k];
    if (!p->grad.same_shape(p->value))
      throw std::invalid_argument("optimizer: gradient shape " + p->grad.shape_str() +
                                  " does not match parameter " + p->value.shape_str());
    double* w = p->value.data();
    const double* g = p->grad.data();
    double* m = m_[k].data();
    double* v = v_[k].data();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace rce
