#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rce/tape.hpp"

namespace rce {

enum class OptKind { Sgd, Adam };

struct OptimizerConfig {
  OptKind kind = OptKind::Sgd;
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

OptKind opt_kind_from_string(const std::string& s);
std::string to_string(OptKind k);

// Parameter updater over a fixed list of parameters. Adam keeps
// bias-corrected first/second moment buffers per parameter, positionally
// matched to the list given at construction.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::vector<Parameter*> params);

  void zero_grad();
  void step();

  std::int64_t step_count() const { return step_count_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_;  // Adam first moments
  std::vector<Tensor> v_;  // Adam second moments
  std::int64_t step_count_ = 0;
};

}  // namespace rce
