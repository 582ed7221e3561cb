#pragma once

#include "swae/seqmodel.hpp"

namespace swae {

/// Sigmoid weight schedule with "peaking" stop: lambda grows as
/// lambda_max * sigmoid(slope * (step - midpoint)) until the per-epoch
/// weighted KL first drops below its running maximum, after which lambda is
/// held at the value it had when frozen.
struct AnnealSchedule {
  double lambda_max = 1.0;
  double slope = 0.0;    // per step
  double midpoint = 0.0; // step index of the half-way point
  bool frozen = false;
  double frozen_value = 0.0;
  double running_max = 0.0;
  bool seen_any = false;

  /// Constant-lambda schedule (annealing disabled).
  static AnnealSchedule constant(double lambda);

  /// Slope/midpoint chosen so lambda traverses 10% -> 90% of lambda_max over
  /// span_epochs, centered at midpoint_epochs.
  static AnnealSchedule sigmoid(double lambda_max, double midpoint_epochs,
                                double span_epochs, long steps_per_epoch);

  double lambda_at(long step) const;

  /// Peaking monitor; call once per epoch with that epoch's mean weighted KL
  /// (lambda * KL per example). Ties do not freeze.
  void observe_epoch(double epoch_weighted_kl, long step);
};

/// Epoch-indexed word-dropout ramp: 0.05 per epoch, capped at 0.5.
double word_dropout_rate(long epoch);

/// Additive decomposition of one training objective evaluation. Sums are
/// over the batch (not token averages); terms a mode does not use are
/// exactly zero, and total always reassembles from the parts.
struct LossBreakdown {
  double reconstruction = 0.0;
  double kl = 0.0;
  double mmd = 0.0;
  double aux_kl = 0.0;
  double total = 0.0;
  double lambda_vae = 0.0;
  double lambda_wae = 0.0;
  double lambda_kl = 0.0;
};

struct LossGraph {
  Tensor total; // scalar node, ready for backward()
  LossBreakdown parts;
};

/// Deterministic autoencoder: plain sequence cross entropy, no regularizer.
LossGraph dae_loss(Binder& bind, SeqModel& model, const Batch& inputs,
                   const Batch& targets, double word_dropout = 0.0,
                   Rng* rng = nullptr);

/// Cross entropy with z ~ q(z|x) plus lambda(step) * KL(q || N(0, I)).
LossGraph vae_loss(Binder& bind, SeqModel& model, const Batch& inputs,
                   const Batch& targets, const AnnealSchedule& schedule,
                   long step, double word_dropout, Rng& rng);

/// WAE with deterministic encoder: z = mu(x), MMD against prior samples.
LossGraph wae_d_loss(Binder& bind, SeqModel& model, const Batch& inputs,
                     const Batch& targets, double lambda_wae,
                     const KernelConfig& kernel, int cross_factor, Rng& rng);

/// WAE with stochastic encoder: z ~ q(z|x), MMD against prior samples, plus
/// lambda_kl * KL(q || N(mu, I)) encouraging encoder stochasticity.
LossGraph wae_s_loss(Binder& bind, SeqModel& model, const Batch& inputs,
                     const Batch& targets, double lambda_wae, double lambda_kl,
                     const KernelConfig& kernel, int cross_factor, Rng& rng);

} // namespace swae
