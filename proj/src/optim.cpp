#include "swae/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace swae {

void adam_step(std::span<Parameter* const> params, AdamState& state,
               const AdamConfig& cfg) {
  if (cfg.lr <= 0.0)
    throw std::invalid_argument("adam_step: lr must be positive, got " +
                                std::to_string(cfg.lr));
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (Parameter* p : params) {
    auto& mom = state.moments[p->name];
    if (mom.m.size() == 0) {
      mom.m = Matrix::Zero(p->value.rows(), p->value.cols());
      mom.v = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    mom.m = cfg.beta1 * mom.m + (1.0 - cfg.beta1) * p->grad;
    mom.v = cfg.beta2 * mom.v.array() + (1.0 - cfg.beta2) * p->grad.array().square();
    p->value.array() -=
        cfg.lr * (mom.m.array() / bc1) / ((mom.v.array() / bc2).sqrt() + cfg.eps);
  }
}

void sgd_step(std::span<Parameter* const> params, double lr) {
  if (lr <= 0.0)
    throw std::invalid_argument("sgd_step: lr must be positive, got " +
                                std::to_string(lr));
  for (Parameter* p : params) p->value -= lr * p->grad;
}

double clip_global_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (Parameter* p : params) p->grad *= s;
  }
  return norm;
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

} // namespace swae
