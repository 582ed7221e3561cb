#pragma once

#include "swae/ops.hpp"
#include "swae/rng.hpp"

namespace swae {

/// Single-layer LSTM weights: one (input, recurrent, bias) triple per gate.
/// Gate order throughout: input, forget, cell candidate, output.
struct LstmParams {
  Parameter w_i, u_i, b_i;
  Parameter w_f, u_f, b_f;
  Parameter w_g, u_g, b_g;
  Parameter w_o, u_o, b_o;

  LstmParams() = default;
  LstmParams(const std::string& prefix, Index input_dim, Index hidden_dim);

  Index input_dim() const { return w_i.value.rows(); }
  Index hidden_dim() const { return w_i.value.cols(); }

  /// Uniform(-range, range) weights, zero biases, forget bias +1.
  void init(Rng& rng, double range);

  std::vector<Parameter*> parameters();
};

/// Hidden and cell activations, each batch x hidden.
struct LstmState {
  Tensor h;
  Tensor c;
};

LstmState lstm_zero_state(Tape& tape, Index batch, Index hidden_dim);

/// Standard LSTM recurrence with sigmoid gates and tanh cell activation:
///   c' = f .* c + i .* g,  h' = o .* tanh(c').
LstmState lstm_step(Binder& bind, LstmParams& p, const Tensor& x,
                    const LstmState& state);

} // namespace swae
