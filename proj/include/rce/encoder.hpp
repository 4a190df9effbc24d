#pragma once

#include <vector>

#include "rce/tape.hpp"
#include "rce/text.hpp"

namespace rce {

// One LSTM direction: gate weights for input, forget, output and cell
// candidate, applied as sigma(Wx*x + Wh*h + b) per gate.
struct LstmCell {
  int input_dim = 0;
  int hidden_dim = 0;
  Parameter w_xf, w_hf, b_f;
  Parameter w_xi, w_hi, b_i;
  Parameter w_xo, w_ho, b_o;
  Parameter w_xc, w_hc, b_c;

  static LstmCell init(int input_dim, int hidden_dim, Rng& rng);
  void collect_params(std::vector<Parameter*>& out);
};

// Scoring head for self-attention pooling: a_j = tanh(w . h_j + b).
struct AttentionParams {
  Parameter w;  // {2*hidden}
  Parameter b;  // {1}

  static AttentionParams init(int dim, Rng& rng);
  void collect_params(std::vector<Parameter*>& out);
};

// Word embeddings + single-layer BiLSTM + attention pooling. The word
// embedding dimension matches the hidden dimension.
struct EncoderParams {
  int hidden = 256;
  Parameter word_embedding;  // {vocab, hidden}
  LstmCell forward;
  LstmCell backward;
  AttentionParams attention;

  static EncoderParams init(int vocab_size, int hidden, Rng& rng);
  void collect_params(std::vector<Parameter*>& out);
  std::vector<Parameter*> params();
};

// Linear bridge from the pooled 2*hidden encoding to the 2d-real complex
// relation slot (first d outputs real part, last d imaginary part).
struct Projection {
  Parameter w;  // {2d, 2*hidden}
  Parameter b;  // {2d}

  static Projection init(int out_dim, int in_dim, Rng& rng);
  void collect_params(std::vector<Parameter*>& out);
};

// One LSTM step; returns (h, c). Parameters are taken mutably because the
// tape binds their gradient accumulators.
std::pair<Var, Var> lstm_step(Tape& tape, LstmCell& cell, Var x, Var h_prev, Var c_prev);

// Runs both directions over the inputs (zero initial states) and returns
// per-position concatenations [h_fwd_j ; h_bwd_j], each {2*hidden}.
std::vector<Var> bilstm_forward(Tape& tape, LstmCell& fwd, LstmCell& bwd,
                                const std::vector<Var>& inputs);

// Attention pooling over hidden states: softmax(tanh(w.h_j + b)) weights.
Var self_attention(Tape& tape, AttentionParams& attn, const std::vector<Var>& hiddens);

// Uniform mean pooling, the attention-ablated variant.
Var mean_pool(Tape& tape, const std::vector<Var>& hiddens);

// embed -> bilstm -> pooled vector {2*hidden}.
Var encode_question(Tape& tape, EncoderParams& enc, const TokenSequence& tokens,
                    bool use_attention = true);

// encoding {2*hidden} -> packed complex vector {2d}.
Var project_to_relation(Tape& tape, Projection& proj, Var encoding);

}  // namespace rce
