#include "swae/lstm.hpp"

namespace swae {

LstmParams::LstmParams(const std::string& prefix, Index input_dim, Index hidden_dim)
    : w_i(prefix + ".w_i", Matrix::Zero(input_dim, hidden_dim)),
      u_i(prefix + ".u_i", Matrix::Zero(hidden_dim, hidden_dim)),
      b_i(prefix + ".b_i", Matrix::Zero(1, hidden_dim)),
      w_f(prefix + ".w_f", Matrix::Zero(input_dim, hidden_dim)),
      u_f(prefix + ".u_f", Matrix::Zero(hidden_dim, hidden_dim)),
      b_f(prefix + ".b_f", Matrix::Zero(1, hidden_dim)),
      w_g(prefix + ".w_g", Matrix::Zero(input_dim, hidden_dim)),
      u_g(prefix + ".u_g", Matrix::Zero(hidden_dim, hidden_dim)),
      b_g(prefix + ".b_g", Matrix::Zero(1, hidden_dim)),
      w_o(prefix + ".w_o", Matrix::Zero(input_dim, hidden_dim)),
      u_o(prefix + ".u_o", Matrix::Zero(hidden_dim, hidden_dim)),
      b_o(prefix + ".b_o", Matrix::Zero(1, hidden_dim)) {}

void LstmParams::init(Rng& rng, double range) {
  for (Parameter* w : {&w_i, &u_i, &w_f, &u_f, &w_g, &u_g, &w_o, &u_o})
    w->value = rng.uniform_matrix(w->value.rows(), w->value.cols(), -range, range);
  for (Parameter* b : {&b_i, &b_g, &b_o}) b->value.setZero();
  b_f.value.setOnes(); // forget bias +1 helps small-data convergence
}

std::vector<Parameter*> LstmParams::parameters() {
  return {&w_i, &u_i, &b_i, &w_f, &u_f, &b_f, &w_g, &u_g, &b_g, &w_o, &u_o, &b_o};
}

LstmState lstm_zero_state(Tape& tape, Index batch, Index hidden_dim) {
  return LstmState{tape.constant(Matrix::Zero(batch, hidden_dim)),
                   tape.constant(Matrix::Zero(batch, hidden_dim))};
}

namespace {

Tensor gate_preact(Binder& bind, const Tensor& x, const Tensor& h, Parameter& w,
                   Parameter& u, Parameter& b) {
  return add(add(matmul(x, bind(w)), matmul(h, bind(u))), bind(b));
}

} // namespace

LstmState lstm_step(Binder& bind, LstmParams& p, const Tensor& x,
                    const LstmState& state) {
  if (x.cols() != p.input_dim())
    throw std::invalid_argument("lstm_step: input width " + std::to_string(x.cols()) +
                                " does not match weights expecting " +
                                std::to_string(p.input_dim()));
  if (state.h.cols() != p.hidden_dim() || state.c.cols() != p.hidden_dim())
    throw std::invalid_argument("lstm_step: state width does not match hidden dim " +
                                std::to_string(p.hidden_dim()));
  Tensor i = sigmoid(gate_preact(bind, x, state.h, p.w_i, p.u_i, p.b_i));
  Tensor f = sigmoid(gate_preact(bind, x, state.h, p.w_f, p.u_f, p.b_f));
  Tensor g = tanh(gate_preact(bind, x, state.h, p.w_g, p.u_g, p.b_g));
  Tensor o = sigmoid(gate_preact(bind, x, state.h, p.w_o, p.u_o, p.b_o));
  Tensor c_next = add(mul(f, state.c), mul(i, g));
  Tensor h_next = mul(o, tanh(c_next));
  return LstmState{h_next, c_next};
}

} // namespace swae
