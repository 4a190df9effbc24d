#include "rce/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace rce {

LstmCell LstmCell::init(int input_dim, int hidden_dim, Rng& rng) {
  LstmCell c;
  c.input_dim = input_dim;
  c.hidden_dim = hidden_dim;
  auto wx = [&] { return Parameter(xavier_init({hidden_dim, input_dim}, rng)); };
  auto wh = [&] { return Parameter(xavier_init({hidden_dim, hidden_dim}, rng)); };
  auto bias = [&] { return Parameter(Tensor::zeros({hidden_dim})); };
  c.w_xf = wx(); c.w_hf = wh(); c.b_f = bias();
  c.w_xi = wx(); c.w_hi = wh(); c.b_i = bias();
  c.w_xo = wx(); c.w_ho = wh(); c.b_o = bias();
  c.w_xc = wx(); c.w_hc = wh(); c.b_c = bias();
  return c;
}

void LstmCell::collect_params(std::vector<Parameter*>& out) {
  for (Parameter* p : {&w_xf, &w_hf, &b_f, &w_xi, &w_hi, &b_i, &w_xo, &w_ho, &b_o, &w_xc, &w_hc,
                       &b_c})
    out.push_back(p);
}

AttentionParams AttentionParams::init(int dim, Rng& rng) {
  AttentionParams a;
  // Vector-shaped scoring weights, fan pair (dim, 1).
  a.w = Parameter(uniform_init({dim}, std::sqrt(6.0 / (dim + 1)), rng));
  a.b = Parameter(Tensor::zeros({1}));
  return a;
}

void AttentionParams::collect_params(std::vector<Parameter*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

EncoderParams EncoderParams::init(int vocab_size, int hidden, Rng& rng) {
  EncoderParams e;
  e.hidden = hidden;
  e.word_embedding = Parameter(xavier_init({vocab_size, hidden}, rng));
  e.forward = LstmCell::init(hidden, hidden, rng);
  e.backward = LstmCell::init(hidden, hidden, rng);
  e.attention = AttentionParams::init(2 * hidden, rng);
  return e;
}

void EncoderParams::collect_params(std::vector<Parameter*>& out) {
  out.push_back(&word_embedding);
  forward.collect_params(out);
  backward.collect_params(out);
  attention.collect_params(out);
}

std::vector<Parameter*> EncoderParams::params() {
  std::vector<Parameter*> out;
  collect_params(out);
  return out;
}

Projection Projection::init(int out_dim, int in_dim, Rng& rng) {
  Projection p;
  p.w = Parameter(xavier_init({out_dim, in_dim}, rng));
  p.b = Parameter(Tensor::zeros({out_dim}));
  return p;
}

void Projection::collect_params(std::vector<Parameter*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

std::pair<Var, Var> lstm_step(Tape& tape, LstmCell& c, Var x, Var h_prev, Var c_prev) {
  auto gate = [&](Parameter& wx, Parameter& wh, Parameter& b) {
    return tape.add(tape.add(tape.matmul(tape.param(wx), x), tape.matmul(tape.param(wh), h_prev)),
                    tape.param(b));
  };
  Var f = tape.sigmoid(gate(c.w_xf, c.w_hf, c.b_f));
  Var i = tape.sigmoid(gate(c.w_xi, c.w_hi, c.b_i));
  Var o = tape.sigmoid(gate(c.w_xo, c.w_ho, c.b_o));
  Var g = tape.tanh(gate(c.w_xc, c.w_hc, c.b_c));
  Var c_next = tape.add(tape.mul(f, c_prev), tape.mul(i, g));
  Var h_next = tape.mul(o, tape.tanh(c_next));
  return {h_next, c_next};
}

std::vector<Var> bilstm_forward(Tape& tape, LstmCell& fwd, LstmCell& bwd,
                                const std::vector<Var>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("bilstm_forward: empty input sequence");
  std::size_t n = inputs.size();
  int hidden = fwd.hidden_dim;

  std::vector<Var> fwd_h(n), bwd_h(n);
  Var h = tape.constant(Tensor::zeros({hidden}));
  Var c = tape.constant(Tensor::zeros({hidden}));
  for (std::size_t j = 0; j < n; ++j) {
    auto [nh, nc] = lstm_step(tape, fwd, inputs[j], h, c);
    fwd_h[j] = nh;
    h = nh;
    c = nc;
  }
  h = tape.constant(Tensor::zeros({hidden}));
  c = tape.constant(Tensor::zeros({hidden}));
  for (std::size_t j = n; j-- > 0;) {
    auto [nh, nc] = lstm_step(tape, bwd, inputs[j], h, c);
    bwd_h[j] = nh;
    h = nh;
    c = nc;
  }

  std::vector<Var> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = tape.concat(fwd_h[j], bwd_h[j]);
  return out;
}

Var self_attention(Tape& tape, AttentionParams& a, const std::vector<Var>& hiddens) {
  if (hiddens.empty()) throw std::invalid_argument("self_attention: empty sequence");
  Var w = tape.param(a.w);
  Var b = tape.param(a.b);
  std::vector<Var> scores;
  scores.reserve(hiddens.size());
  for (Var h : hiddens)
    scores.push_back(tape.tanh(tape.add(tape.sum(tape.mul(w, h)), b)));
  Var alpha = tape.softmax(tape.stack_scalars(scores));
  Var stacked = tape.stack_rows(hiddens);
  return tape.matvec_t(stacked, alpha);
}

Var mean_pool(Tape& tape, const std::vector<Var>& hiddens) {
  if (hiddens.empty()) throw std::invalid_argument("mean_pool: empty sequence");
  Var stacked = tape.stack_rows(hiddens);
  int n = static_cast<int>(hiddens.size());
  Var weights = tape.constant(Tensor::full({n}, 1.0 / n));
  return tape.matvec_t(stacked, weights);
}

Var encode_question(Tape& tape, EncoderParams& e, const TokenSequence& tokens,
                    bool use_attention) {
  if (tokens.ids.empty()) throw std::invalid_argument("encode_question: empty token sequence");
  Var emb = tape.param(e.word_embedding);
  std::vector<Var> inputs;
  inputs.reserve(tokens.ids.size());
  for (int id : tokens.ids) inputs.push_back(tape.row(emb, id));
  std::vector<Var> hiddens = bilstm_forward(tape, e.forward, e.backward, inputs);
  return use_attention ? self_attention(tape, e.attention, hiddens) : mean_pool(tape, hiddens);
}

Var project_to_relation(Tape& tape, Projection& p, Var encoding) {
  return tape.add(tape.matmul(tape.param(p.w), encoding), tape.param(p.b));
}

}  // namespace rce
