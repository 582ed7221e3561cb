#pragma once

#include <array>
#include <vector>

#include "swae/ops.hpp"
#include "swae/rng.hpp"

namespace swae {

/// Per-example diagonal Gaussian over the latent space.
struct GaussianPosterior {
  Vector mu;
  Vector sigma; // strictly positive
};

/// Inverse multiquadratic kernel constant: k(x, y) = c / (c + ||x-y||^2).
struct KernelConfig {
  double c = 1.0;

  /// Default c = 2Z, the expected squared distance between two independent
  /// N(0, I_Z) draws.
  static KernelConfig for_latent_dim(Index z) {
    return KernelConfig{2.0 * static_cast<double>(z)};
  }
};

/// Affine map h -> h W + b.
struct LinearHead {
  Parameter weight; // in x out
  Parameter bias;   // 1 x out

  LinearHead() = default;
  LinearHead(const std::string& prefix, Index in, Index out)
      : weight(prefix + ".weight", Matrix::Zero(in, out)),
        bias(prefix + ".bias", Matrix::Zero(1, out)) {}

  void init(Rng& rng, double range) {
    weight.value = rng.uniform_matrix(weight.value.rows(), weight.value.cols(),
                                      -range, range);
    bias.value.setZero();
  }
};

/// Encoder output heads: mu = h W + b, sigma = exp(h W' + b'), so positivity
/// of sigma is structural.
struct GaussianHeads {
  LinearHead mu;
  LinearHead log_sigma;

  GaussianHeads() = default;
  GaussianHeads(const std::string& prefix, Index in, Index out)
      : mu(prefix + ".mu", in, out), log_sigma(prefix + ".log_sigma", in, out) {}

  std::vector<Parameter*> parameters() {
    return {&mu.weight, &mu.bias, &log_sigma.weight, &log_sigma.bias};
  }
};

// ---- plain math (no tape) ----

GaussianPosterior posterior_from_hidden(const GaussianHeads& heads, const Vector& h);

/// z = mu + sigma .* eps with eps ~ N(0, I).
Vector reparameterize(const GaussianPosterior& post, Rng& rng);

/// Closed-form KL(N(mu1, sigma1^2) || N(mu2, sigma2^2)) for scalars.
double kl_gaussians_univariate(double mu1, double sigma1, double mu2, double sigma2);

/// Sum over dimensions of the KL to N(0, I).
double kl_to_standard_normal(const GaussianPosterior& post);

/// KL(N(mu, diag sigma^2) || N(mu, I)) = sum_i (-log sigma_i + sigma_i^2/2 - 1/2).
/// Independent of mu; zero exactly at sigma = 1.
double aux_kl_identity_cov(const GaussianPosterior& post);

double imq_kernel(const Vector& x, const Vector& y, const KernelConfig& cfg);

/// Empirical MMD between equal-size sample batches (rows are samples):
///   1/(N(N-1)) sum_{n!=m} k(z_n, z_m) + 1/(N(N-1)) sum_{n!=m} k(zt_n, zt_m)
///   - cross_factor/N^2 sum_{n,m} k(z_n, zt_m)
/// cross_factor 2 is the unbiased MMD^2 estimator; 1 is the printed literal
/// variant. N >= 2 and cross_factor in {1, 2} are required.
double mmd_estimate(const Matrix& z_post, const Matrix& z_prior,
                    const KernelConfig& cfg, int cross_factor);

/// d(mmd_estimate)/d(z_post), same shape as z_post.
Matrix mmd_gradient(const Matrix& z_post, const Matrix& z_prior,
                    const KernelConfig& cfg, int cross_factor);

/// Counts of sigma components over 200 equal buckets spanning (0, 1);
/// components >= 1 land in the overflow bucket.
struct SigmaHistogram {
  static constexpr int kBuckets = 200;
  std::array<long, kBuckets> counts{};
  long overflow = 0;

  long total() const;
  double fraction_below(double threshold) const;
  double median() const;
};

SigmaHistogram sigma_histogram(const std::vector<GaussianPosterior>& posteriors);

/// One-dimensional SGD simulation of a stochastic Gaussian encoder on the
/// quadratic loss J(z) = k/2 (z - z*)^2 with z drawn by reparameterization,
/// plus lambda_kl times the identity-covariance KL gradient (sigma - 1/sigma).
/// Returns sigma after each step. With lambda_kl = 0 the expected update is
/// sigma <- (1 - lr k) sigma, the collapse to a Dirac delta.
std::vector<double> collapse_harness(double curvature, double sigma0, double lr,
                                     int steps, double lambda_kl, Rng& rng);

// ---- tape graph pieces ----

struct PosteriorNodes {
  Tensor mu;        // N x Z
  Tensor log_sigma; // N x Z
};

PosteriorNodes posterior_nodes(Binder& bind, GaussianHeads& heads, const Tensor& h);

/// z = mu + exp(log_sigma) .* eps for a fixed noise draw; gradients flow to
/// mu and log_sigma only.
Tensor reparameterize_nodes(const PosteriorNodes& post, const Matrix& eps);

/// Batch sum of KL(q(z|x) || N(0, I)).
Tensor kl_to_standard_normal_sum(const PosteriorNodes& post);

/// Batch sum of the identity-covariance auxiliary KL.
Tensor aux_kl_sum(const Tensor& log_sigma);

/// Differentiable MMD penalty between posterior samples (a tape tensor) and
/// fixed prior samples.
Tensor mmd_penalty(const Tensor& z_post, const Matrix& z_prior,
                   const KernelConfig& cfg, int cross_factor);

} // namespace swae
