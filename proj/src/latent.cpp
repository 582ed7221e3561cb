#include "swae/latent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swae {

namespace {

void require_positive_sigma(double sigma, const char* where) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument(std::string(where) + ": sigma must be positive and finite, got " +
                                std::to_string(sigma));
}

void require_valid(const GaussianPosterior& post, const char* where) {
  if (post.mu.size() != post.sigma.size())
    throw std::invalid_argument(std::string(where) + ": mu and sigma dims differ");
  for (Index i = 0; i < post.sigma.size(); ++i) require_positive_sigma(post.sigma[i], where);
}

} // namespace

GaussianPosterior posterior_from_hidden(const GaussianHeads& heads, const Vector& h) {
  if (h.size() != heads.mu.weight.value.rows())
    throw std::invalid_argument("posterior_from_hidden: hidden size " +
                                std::to_string(h.size()) + " does not match head input " +
                                std::to_string(heads.mu.weight.value.rows()));
  GaussianPosterior post;
  post.mu = (h.transpose() * heads.mu.weight.value + heads.mu.bias.value).transpose();
  post.sigma = (h.transpose() * heads.log_sigma.weight.value + heads.log_sigma.bias.value)
                   .array()
                   .exp()
                   .transpose();
  return post;
}

Vector reparameterize(const GaussianPosterior& post, Rng& rng) {
  require_valid(post, "reparameterize");
  Vector z(post.mu.size());
  for (Index i = 0; i < z.size(); ++i) z[i] = post.mu[i] + post.sigma[i] * rng.normal();
  return z;
}

double kl_gaussians_univariate(double mu1, double sigma1, double mu2, double sigma2) {
  require_positive_sigma(sigma1, "kl_gaussians_univariate");
  require_positive_sigma(sigma2, "kl_gaussians_univariate");
  const double dm = mu1 - mu2;
  return std::log(sigma2 / sigma1) +
         (sigma1 * sigma1 + dm * dm) / (2.0 * sigma2 * sigma2) - 0.5;
}

double kl_to_standard_normal(const GaussianPosterior& post) {
  require_valid(post, "kl_to_standard_normal");
  double total = 0.0;
  for (Index i = 0; i < post.mu.size(); ++i)
    total += kl_gaussians_univariate(post.mu[i], post.sigma[i], 0.0, 1.0);
  return total;
}

double aux_kl_identity_cov(const GaussianPosterior& post) {
  require_valid(post, "aux_kl_identity_cov");
  double total = 0.0;
  for (Index i = 0; i < post.sigma.size(); ++i) {
    const double s = post.sigma[i];
    total += -std::log(s) + 0.5 * s * s - 0.5;
  }
  return total;
}

double imq_kernel(const Vector& x, const Vector& y, const KernelConfig& cfg) {
  if (x.size() != y.size())
    throw std::invalid_argument("imq_kernel: dims " + std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()));
  if (!(cfg.c > 0.0)) throw std::invalid_argument("imq_kernel: C must be positive");
  return cfg.c / (cfg.c + (x - y).squaredNorm());
}

namespace {

void check_mmd_args(const Matrix& z_post, const Matrix& z_prior,
                    const KernelConfig& cfg, int cross_factor) {
  if (z_post.rows() < 2)
    throw std::invalid_argument("mmd_estimate: needs at least 2 samples, got " +
                                std::to_string(z_post.rows()));
  if (z_post.rows() != z_prior.rows() || z_post.cols() != z_prior.cols())
    throw std::invalid_argument("mmd_estimate: batch shapes differ: " +
                                Tape::shape_str(z_post) + " vs " + Tape::shape_str(z_prior));
  if (cross_factor != 1 && cross_factor != 2)
    throw std::invalid_argument("mmd_estimate: cross_factor must be 1 or 2, got " +
                                std::to_string(cross_factor));
  if (!(cfg.c > 0.0)) throw std::invalid_argument("mmd_estimate: C must be positive");
}

/// Shared forward/backward core. grad, when non-null, receives
/// d(estimate)/d(z_post).
double mmd_core(const Matrix& z_post, const Matrix& z_prior, const KernelConfig& cfg,
                int cross_factor, Matrix* grad) {
  check_mmd_args(z_post, z_prior, cfg, cross_factor);
  const Index n = z_post.rows();
  const double c = cfg.c;
  const double pair_w = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
  const double cross_w =
      static_cast<double>(cross_factor) / (static_cast<double>(n) * static_cast<double>(n));

  if (grad) grad->setZero(z_post.rows(), z_post.cols());

  double within_post = 0.0, within_prior = 0.0, cross = 0.0;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (a != b) {
        const double d2p = (z_post.row(a) - z_post.row(b)).squaredNorm();
        within_post += c / (c + d2p);
        const double d2q = (z_prior.row(a) - z_prior.row(b)).squaredNorm();
        within_prior += c / (c + d2q);
        if (grad) {
          // z_a appears in the ordered pairs (a,b) and (b,a) with equal
          // derivative, so the dk/dx factor -2 doubles to -4.
          const double kk = c / (c + d2p);
          grad->row(a) += pair_w * (-4.0 * kk * kk / c) * (z_post.row(a) - z_post.row(b));
        }
      }
      const double d2x = (z_post.row(a) - z_prior.row(b)).squaredNorm();
      const double kx = c / (c + d2x);
      cross += kx;
      if (grad)
        grad->row(a) -= cross_w * (-2.0 * kx * kx / c) * (z_post.row(a) - z_prior.row(b));
    }
  }
  return pair_w * within_post + pair_w * within_prior - cross_w * cross;
}

} // namespace

double mmd_estimate(const Matrix& z_post, const Matrix& z_prior,
                    const KernelConfig& cfg, int cross_factor) {
  return mmd_core(z_post, z_prior, cfg, cross_factor, nullptr);
}

Matrix mmd_gradient(const Matrix& z_post, const Matrix& z_prior,
                    const KernelConfig& cfg, int cross_factor) {
  Matrix grad;
  mmd_core(z_post, z_prior, cfg, cross_factor, &grad);
  return grad;
}

long SigmaHistogram::total() const {
  long t = overflow;
  for (long c : counts) t += c;
  return t;
}

double SigmaHistogram::fraction_below(double threshold) const {
  const long all = total();
  if (all == 0) return 0.0;
  long below = 0;
  for (int i = 0; i < kBuckets; ++i) {
    const double upper = static_cast<double>(i + 1) / kBuckets;
    if (upper <= threshold) below += counts[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(below) / static_cast<double>(all);
}

double SigmaHistogram::median() const {
  const long all = total();
  if (all == 0) return 0.0;
  const long target = (all + 1) / 2;
  long seen = 0;
  for (int i = 0; i < kBuckets; ++i) {
    seen += counts[static_cast<std::size_t>(i)];
    if (seen >= target) return (static_cast<double>(i) + 0.5) / kBuckets;
  }
  return 1.0; // median sits in the overflow bucket
}

SigmaHistogram sigma_histogram(const std::vector<GaussianPosterior>& posteriors) {
  if (posteriors.empty())
    throw std::invalid_argument("sigma_histogram: empty posterior list");
  SigmaHistogram h;
  for (const auto& post : posteriors) {
    require_valid(post, "sigma_histogram");
    for (Index i = 0; i < post.sigma.size(); ++i) {
      const double s = post.sigma[i];
      if (s >= 1.0) {
        h.overflow += 1;
      } else {
        const int bucket = std::min(SigmaHistogram::kBuckets - 1,
                                    static_cast<int>(s * SigmaHistogram::kBuckets));
        h.counts[static_cast<std::size_t>(bucket)] += 1;
      }
    }
  }
  return h;
}

std::vector<double> collapse_harness(double curvature, double sigma0, double lr,
                                     int steps, double lambda_kl, Rng& rng) {
  if (curvature < 0.0)
    throw std::invalid_argument("collapse_harness: curvature must be >= 0");
  require_positive_sigma(sigma0, "collapse_harness");
  if (lr * curvature >= 1.0)
    throw std::invalid_argument("collapse_harness: unstable step size, need lr*k < 1 but lr*k = " +
                                std::to_string(lr * curvature));
  double mu = 0.0; // target z* = 0; mu and sigma both follow the sample gradient
  double sigma = sigma0;
  std::vector<double> trajectory;
  trajectory.reserve(static_cast<std::size_t>(steps));
  // the same clip-at-5 guard the training loop applies; the -1/sigma term is
  // unbounded below sigma ~ lr, and one clipped tail draw must not blow up
  // the discretized dynamics
  const auto clip = [](double g) { return std::clamp(g, -5.0, 5.0); };
  for (int t = 0; t < steps; ++t) {
    const double eps = rng.normal();
    const double z = mu + sigma * eps;
    const double dj_dz = curvature * z;
    double g_sigma = dj_dz * eps;
    if (lambda_kl != 0.0) g_sigma += lambda_kl * (sigma - 1.0 / sigma);
    mu -= lr * clip(dj_dz);
    sigma -= lr * clip(g_sigma);
    sigma = std::max(sigma, 1e-12);
    trajectory.push_back(sigma);
  }
  return trajectory;
}

PosteriorNodes posterior_nodes(Binder& bind, GaussianHeads& heads, const Tensor& h) {
  Tensor mu = add(matmul(h, bind(heads.mu.weight)), bind(heads.mu.bias));
  Tensor ls = add(matmul(h, bind(heads.log_sigma.weight)), bind(heads.log_sigma.bias));
  return PosteriorNodes{mu, ls};
}

Tensor reparameterize_nodes(const PosteriorNodes& post, const Matrix& eps) {
  Tensor noise = post.mu.tape()->constant(eps);
  return add(post.mu, mul(exp(post.log_sigma), noise));
}

Tensor kl_to_standard_normal_sum(const PosteriorNodes& post) {
  // per element: -log sigma + (sigma^2 + mu^2)/2 - 1/2, with sigma = e^ls
  Tensor sig2 = exp(affine(post.log_sigma, 2.0, 0.0));
  Tensor quad = add(affine(sig2, 0.5, -0.5), affine(mul(post.mu, post.mu), 0.5, 0.0));
  return sum(add(quad, affine(post.log_sigma, -1.0, 0.0)));
}

Tensor aux_kl_sum(const Tensor& log_sigma) {
  Tensor sig2 = exp(affine(log_sigma, 2.0, 0.0));
  return sum(add(affine(sig2, 0.5, -0.5), affine(log_sigma, -1.0, 0.0)));
}

Tensor mmd_penalty(const Tensor& z_post, const Matrix& z_prior,
                   const KernelConfig& cfg, int cross_factor) {
  Matrix grad;
  Matrix out(1, 1);
  out(0, 0) = mmd_core(z_post.value(), z_prior, cfg, cross_factor, &grad);
  return z_post.tape()->make(std::move(out),
                             [z_post, grad](Tape& tp, const Matrix& g) {
                               tp.grad_ref(z_post) += g(0, 0) * grad;
                             });
}

} // namespace swae
