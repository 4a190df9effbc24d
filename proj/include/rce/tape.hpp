#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "rce/rng.hpp"
#include "rce/tensor.hpp"

namespace rce {

// Trainable tensor: value plus persistent gradient accumulator.
struct Parameter {
  Tensor value;
  Tensor grad;

  Parameter() = default;
  explicit Parameter(Tensor v) : value(std::move(v)), grad(Tensor::zeros(value.shape())) {}

  void zero_grad() { grad.fill(0.0); }
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode differentiation tape over tensor-granularity operations.
// Nodes are recorded in construction order, which is a topological order
// of the forward graph; backward() replays them once in reverse and
// accumulates gradients additively. A tape is built per training step
// and discarded afterwards.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Var constant(Tensor v);                 // no gradient tracking
  Var constant_ref(const Tensor* v);      // shared, not copied; no gradient
  Var leaf(Tensor v);                     // gradient tracked, read via grad()
  Var param(Parameter& p);                // gradient flows into p.grad; memoized per tape

  // Elementwise, same shape.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double c);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var exp(Var a);

  // Linear algebra. matmul: {r,c}x{c,k}->{r,k} or {r,c}x{c}->{r}.
  // matvec_t: transpose(M)·v with M {r,c}, v {r} -> {c}.
  Var matmul(Var a, Var b);
  Var matvec_t(Var m, Var v);

  // Shape plumbing (vectors unless noted).
  Var concat(Var a, Var b);
  Var slice(Var a, int offset, int len);
  Var row(Var m, int i);                            // matrix row -> vector
  Var rows(Var m, std::vector<int> idx);            // gather rows -> {k,c}
  Var sum_cols(Var m);                              // {r,c} -> {r}, per-row sums
  Var stack_rows(const std::vector<Var>& vs);       // k vectors {c} -> {k,c}
  Var stack_scalars(const std::vector<Var>& vs);    // k scalars {1} -> {k}

  // Reductions.
  Var sum(Var a);   // -> {1}
  Var mean(Var a);  // -> {1}

  Var softmax(Var a);  // vector -> probability vector

  // Training-mode dropout: zero with probability `rate`, survivors scaled
  // by 1/(1-rate). Identity when training is false or rate == 0.
  Var dropout(Var a, double rate, bool training, Rng& rng);

  // Fused losses.
  // Weighted mean of elementwise binary cross-entropy on logits:
  //   l_i = max(x_i,0) - x_i*y_i + log(1+exp(-|x_i|)),  loss = sum(w*l)/sum(w).
  Var bce_with_logits(Var logits, const Tensor& targets, const Tensor& weights);
  Var bce_with_logits(Var logits, const Tensor& targets);
  // Euclidean distance between two equal-shape tensors -> {1}.
  Var l2_distance(Var a, Var b);

  const Tensor& value(Var v) const { return *nodes_[v.id].value; }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }

  // Seeds d(loss)/d(loss)=1 and sweeps the tape once in reverse.
  // Parameter leaves accumulate into their Parameter::grad.
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::shared_ptr<const Tensor> value;
    Tensor grad;  // allocated lazily, same shape as value
    bool needs_grad = false;
    std::function<void(Tape&, Node&)> back;  // nullptr for leaves
    Parameter* bound = nullptr;              // set for param leaves
  };

  Var push(Tensor value, bool needs_grad, std::function<void(Tape&, Node&)> back);
  Node& node(Var v) { return nodes_[v.id]; }
  Tensor& grad_buf(int id);
  void add_grad(int id, const Tensor& g);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_ids_;

  friend struct TapeOps;
};

}  // namespace rce
