#include "swae/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace swae {

AnnealSchedule AnnealSchedule::constant(double lambda) {
  AnnealSchedule s;
  s.lambda_max = lambda;
  s.frozen = true;
  s.frozen_value = lambda;
  return s;
}

AnnealSchedule AnnealSchedule::sigmoid(double lambda_max, double midpoint_epochs,
                                       double span_epochs, long steps_per_epoch) {
  if (steps_per_epoch < 1)
    throw std::invalid_argument("AnnealSchedule: steps_per_epoch must be >= 1");
  AnnealSchedule s;
  s.lambda_max = lambda_max;
  s.midpoint = midpoint_epochs * static_cast<double>(steps_per_epoch);
  // logit(0.9) - logit(0.1) = 2 log 9 spread over the span
  const double span_steps = std::max(1.0, span_epochs * static_cast<double>(steps_per_epoch));
  s.slope = 2.0 * std::log(9.0) / span_steps;
  return s;
}

double AnnealSchedule::lambda_at(long step) const {
  if (frozen) return frozen_value;
  const double x = slope * (static_cast<double>(step) - midpoint);
  return lambda_max / (1.0 + std::exp(-x));
}

void AnnealSchedule::observe_epoch(double epoch_weighted_kl, long step) {
  if (frozen) return;
  if (seen_any && epoch_weighted_kl < running_max) {
    frozen = true;
    frozen_value = lambda_at(step);
    return;
  }
  running_max = std::max(running_max, epoch_weighted_kl);
  seen_any = true;
}

double word_dropout_rate(long epoch) {
  if (epoch < 0) throw std::invalid_argument("word_dropout_rate: negative epoch");
  return std::min(0.05 * static_cast<double>(epoch), 0.5);
}

namespace {

Tensor reconstruction(Binder& bind, SeqModel& model, const Tensor& z,
                      const Batch& targets, double word_dropout, Rng* rng) {
  return sequence_cross_entropy(
      decode_teacher_forced(bind, model, z, targets, word_dropout, rng), targets);
}

} // namespace

LossGraph dae_loss(Binder& bind, SeqModel& model, const Batch& inputs,
                   const Batch& targets, double word_dropout, Rng* rng) {
  Tensor h = encode_hidden(bind, model, inputs);
  Tensor z = posterior_nodes(bind, model.heads, h).mu;
  Tensor rec = reconstruction(bind, model, z, targets, word_dropout, rng);
  LossGraph out{rec, {}};
  out.parts.reconstruction = rec.value()(0, 0);
  out.parts.total = out.parts.reconstruction;
  return out;
}

LossGraph vae_loss(Binder& bind, SeqModel& model, const Batch& inputs,
                   const Batch& targets, const AnnealSchedule& schedule, long step,
                   double word_dropout, Rng& rng) {
  const double lambda = schedule.lambda_at(step);
  Tensor h = encode_hidden(bind, model, inputs);
  PosteriorNodes post = posterior_nodes(bind, model.heads, h);
  Matrix eps = rng.normal_matrix(inputs.size(), model.dims().latent);
  Tensor z = reparameterize_nodes(post, eps);
  Tensor rec = reconstruction(bind, model, z, targets, word_dropout, &rng);
  Tensor kl = kl_to_standard_normal_sum(post);
  Tensor total = add(rec, scale(kl, lambda));

  LossGraph out{total, {}};
  out.parts.reconstruction = rec.value()(0, 0);
  out.parts.kl = kl.value()(0, 0);
  out.parts.lambda_vae = lambda;
  out.parts.total = out.parts.reconstruction + lambda * out.parts.kl;
  return out;
}

LossGraph wae_d_loss(Binder& bind, SeqModel& model, const Batch& inputs,
                     const Batch& targets, double lambda_wae,
                     const KernelConfig& kernel, int cross_factor, Rng& rng) {
  if (inputs.size() < 2)
    throw std::invalid_argument("wae_d_loss: the MMD estimator needs a batch of >= 2");
  Tensor h = encode_hidden(bind, model, inputs);
  Tensor z = posterior_nodes(bind, model.heads, h).mu;
  Matrix z_prior = rng.normal_matrix(inputs.size(), model.dims().latent);
  Tensor rec = reconstruction(bind, model, z, targets, 0.0, nullptr);
  Tensor mmd = mmd_penalty(z, z_prior, kernel, cross_factor);
  Tensor total = add(rec, scale(mmd, lambda_wae));

  LossGraph out{total, {}};
  out.parts.reconstruction = rec.value()(0, 0);
  out.parts.mmd = mmd.value()(0, 0);
  out.parts.lambda_wae = lambda_wae;
  out.parts.total = out.parts.reconstruction + lambda_wae * out.parts.mmd;
  return out;
}

LossGraph wae_s_loss(Binder& bind, SeqModel& model, const Batch& inputs,
                     const Batch& targets, double lambda_wae, double lambda_kl,
                     const KernelConfig& kernel, int cross_factor, Rng& rng) {
  if (inputs.size() < 2)
    throw std::invalid_argument("wae_s_loss: the MMD estimator needs a batch of >= 2");
  Tensor h = encode_hidden(bind, model, inputs);
  PosteriorNodes post = posterior_nodes(bind, model.heads, h);
  // Prior samples are drawn before the posterior noise so the deterministic
  // and stochastic variants see identical priors from the same rng state.
  Matrix z_prior = rng.normal_matrix(inputs.size(), model.dims().latent);
  Matrix eps = rng.normal_matrix(inputs.size(), model.dims().latent);
  Tensor z = reparameterize_nodes(post, eps);
  Tensor rec = reconstruction(bind, model, z, targets, 0.0, nullptr);
  Tensor mmd = mmd_penalty(z, z_prior, kernel, cross_factor);
  Tensor aux = aux_kl_sum(post.log_sigma);
  Tensor total = add(add(rec, scale(mmd, lambda_wae)), scale(aux, lambda_kl));

  LossGraph out{total, {}};
  out.parts.reconstruction = rec.value()(0, 0);
  out.parts.mmd = mmd.value()(0, 0);
  out.parts.aux_kl = aux.value()(0, 0);
  out.parts.lambda_wae = lambda_wae;
  out.parts.lambda_kl = lambda_kl;
  out.parts.total = (out.parts.reconstruction + lambda_wae * out.parts.mmd) +
                    lambda_kl * out.parts.aux_kl;
  return out;
}

} // namespace swae
