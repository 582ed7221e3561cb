#pragma once

#include <span>
#include <unordered_map>

#include "swae/tape.hpp"

namespace swae {

/// Adam first/second moment buffers, keyed by parameter name, plus the
/// shared (strictly increasing) step counter.
struct AdamState {
  struct Moments {
    Matrix m;
    Matrix v;
  };
  std::unordered_map<std::string, Moments> moments;
  long step = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update over params, in place. Moment buffers are
/// created on first use. Rejects non-positive learning rates.
void adam_step(std::span<Parameter* const> params, AdamState& state,
               const AdamConfig& cfg);

/// Plain SGD: p <- p - lr * grad.
void sgd_step(std::span<Parameter* const> params, double lr);

/// Scales all gradients so their global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
double clip_global_norm(std::span<Parameter* const> params, double max_norm);

void zero_grads(std::span<Parameter* const> params);

} // namespace swae
