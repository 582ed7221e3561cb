#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "swae/gradcheck.hpp"
#include "swae/latent.hpp"
#include "swae/optim.hpp"

using namespace swae;

TEST_SUITE_BEGIN("latent");

TEST_CASE("zero heads give the standard-normal posterior") {
  GaussianHeads heads("h", 6, 3);
  Rng rng(2);
  const Vector h = rng.normal_matrix(6, 1);
  const GaussianPosterior post = posterior_from_hidden(heads, h);
  CHECK(post.mu.norm() == 0.0);
  for (Index i = 0; i < 3; ++i) CHECK(post.sigma[i] == 1.0);
}

TEST_CASE("sigma is positive for any hidden state") {
  Rng rng(7);
  GaussianHeads heads("h", 5, 4);
  heads.mu.init(rng, 2.0);
  heads.log_sigma.init(rng, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector h = 5.0 * rng.normal_matrix(5, 1);
    const GaussianPosterior post = posterior_from_hidden(heads, h);
    CHECK(post.sigma.minCoeff() > 0.0);
  }
}

TEST_CASE("posterior head gradients pass the finite-difference oracle") {
  Rng rng(13);
  GaussianHeads heads("h", 5, 3);
  heads.mu.init(rng, 0.5);
  heads.log_sigma.init(rng, 0.5);
  const Matrix hidden = rng.uniform_matrix(4, 5, -2, 2);
  const Matrix w_mu = rng.uniform_matrix(4, 3, -1, 1);
  const Matrix w_ls = rng.uniform_matrix(4, 3, -1, 1);

  auto params = heads.parameters();
  auto loss_value = [&]() {
    Tape tape;
    Binder bind(tape);
    Tensor h = tape.constant(hidden);
    PosteriorNodes post = posterior_nodes(bind, heads, h);
    Tensor score = add(sum(mul(post.mu, tape.constant(w_mu))),
                       sum(mul(exp(post.log_sigma), tape.constant(w_ls))));
    return score.value()(0, 0);
  };
  {
    Tape tape;
    Binder bind(tape);
    Tensor h = tape.constant(hidden);
    PosteriorNodes post = posterior_nodes(bind, heads, h);
    Tensor score = add(sum(mul(post.mu, tape.constant(w_mu))),
                       sum(mul(exp(post.log_sigma), tape.constant(w_ls))));
    zero_grads(params);
    tape.backward(score);
  }
  CHECK(finite_difference_check(loss_value, params, 1e-5) < 1e-4);
}

TEST_CASE("reparameterize degenerates to the mean as sigma -> 0") {
  Rng rng(3);
  GaussianPosterior post{Vector::Constant(4, 1.5), Vector::Constant(4, 1e-12)};
  const Vector z = reparameterize(post, rng);
  CHECK((z - post.mu).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reparameterized draws have the requested moments") {
  Rng rng(17);
  GaussianPosterior post{Vector::Zero(4), Vector::Ones(4)};
  post.mu << -1.0, 0.0, 0.5, 2.0;
  const int n = 10000;
  Matrix draws(n, 4);
  for (int i = 0; i < n; ++i) draws.row(i) = reparameterize(post, rng).transpose();
  for (Index d = 0; d < 4; ++d) {
    const double mean = draws.col(d).mean();
    CHECK(std::abs(mean - post.mu[d]) < 0.05); // CLT: 4 sigma / sqrt(n) = 0.04
    const double var = (draws.col(d).array() - mean).square().sum() / (n - 1);
    CHECK(std::abs(var - 1.0) < 0.06);
  }
}

TEST_CASE("univariate gaussian KL closed form") {
  CHECK(kl_gaussians_univariate(0, 1, 0, 1) == 0.0);
  CHECK(kl_gaussians_univariate(0, 1, 1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(kl_gaussians_univariate(0, 0.5, 0, 1) ==
        doctest::Approx(std::log(2.0) + 0.125 - 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(kl_gaussians_univariate(0, 0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(kl_gaussians_univariate(0, 1, 0, -1), std::invalid_argument);
}

TEST_CASE("closed-form KLs match numerical integration") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const double mu1 = rng.uniform(-3, 3), mu2 = rng.uniform(-3, 3);
    const double s1 = rng.uniform(0.1, 3), s2 = rng.uniform(0.1, 3);
    const double closed = kl_gaussians_univariate(mu1, s1, mu2, s2);
    const double numeric = oracles::kl_by_quadrature(mu1, s1, mu2, s2);
    CHECK(closed >= 0.0);
    CHECK(std::abs(closed - numeric) < 1e-6);
  }
}

TEST_CASE("KL is zero only at identical parameters") {
  CHECK(kl_gaussians_univariate(0.3, 0.8, 0.3, 0.8) == 0.0);
  CHECK(kl_gaussians_univariate(0.3, 0.8, 0.31, 0.8) > 0.0);
  CHECK(kl_gaussians_univariate(0.3, 0.8, 0.3, 0.81) > 0.0);
}

TEST_CASE("KL to standard normal sums per-dimension terms") {
  GaussianPosterior standard{Vector::Zero(3), Vector::Ones(3)};
  CHECK(kl_to_standard_normal(standard) == 0.0);

  GaussianPosterior two{Vector::Zero(2), Vector::Ones(2)};
  two.mu << 1.0, 0.0;
  CHECK(kl_to_standard_normal(two) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(kl_to_standard_normal(two) ==
        doctest::Approx(oracles::kl_by_quadrature(1, 1, 0, 1) +
                        oracles::kl_by_quadrature(0, 1, 0, 1))
            .epsilon(1e-6));

  GaussianPosterior d1a{Vector::Constant(1, 0.7), Vector::Constant(1, 0.4)};
  GaussianPosterior d1b{Vector::Constant(1, -0.2), Vector::Constant(1, 1.9)};
  GaussianPosterior both{Vector::Zero(2), Vector::Zero(2)};
  both.mu << 0.7, -0.2;
  both.sigma << 0.4, 1.9;
  CHECK(kl_to_standard_normal(both) ==
        doctest::Approx(kl_to_standard_normal(d1a) + kl_to_standard_normal(d1b))
            .epsilon(1e-12));
}

TEST_CASE("auxiliary KL against the identity covariance") {
  GaussianPosterior ones{Vector::Constant(3, -4.2), Vector::Ones(3)};
  CHECK(aux_kl_identity_cov(ones) == 0.0);

  GaussianPosterior half{Vector::Zero(1), Vector::Constant(1, 0.5)};
  CHECK(aux_kl_identity_cov(half) ==
        doctest::Approx(std::log(2.0) + 0.125 - 0.5).epsilon(1e-12));
  // same value as the full KL with matching means
  CHECK(aux_kl_identity_cov(half) ==
        doctest::Approx(kl_gaussians_univariate(0.9, 0.5, 0.9, 1.0)).epsilon(1e-12));

  GaussianPosterior moved = half;
  moved.mu[0] = 123.0;
  CHECK(aux_kl_identity_cov(moved) == aux_kl_identity_cov(half)); // bit-identical
}

TEST_CASE("auxiliary KL is convex in log sigma with minimum at sigma = 1") {
  const double delta = 0.1;
  GaussianPosterior up{Vector::Zero(1), Vector::Constant(1, std::exp(delta))};
  GaussianPosterior down{Vector::Zero(1), Vector::Constant(1, std::exp(-delta))};
  const double vu = aux_kl_identity_cov(up);
  const double vd = aux_kl_identity_cov(down);
  CHECK(vu > 0.0);
  CHECK(vd > 0.0);
  CHECK(std::abs(vu - vd) < 2.0 * delta * delta * delta); // symmetric to O(d^3)
}

TEST_CASE("imq kernel basics") {
  KernelConfig cfg{4.0};
  Rng rng(9);
  const Vector x = rng.normal_matrix(3, 1);
  CHECK(imq_kernel(x, x, cfg) == 1.0);

  Vector y = x;
  y[0] += 2.0; // squared distance exactly C = 4
  CHECK(imq_kernel(x, y, cfg) == doctest::Approx(0.5).epsilon(1e-12));

  for (int t = 0; t < 20; ++t) {
    const Vector a = rng.normal_matrix(5, 1), b = rng.normal_matrix(5, 1);
    KernelConfig c2{rng.uniform(0.5, 8.0)};
    const double k = imq_kernel(a, b, c2);
    CHECK(k == imq_kernel(b, a, c2));
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
  }
  CHECK_THROWS_AS(imq_kernel(x, rng.normal_matrix(4, 1), cfg), std::invalid_argument);
}

TEST_CASE("mmd estimator is unbiased at matched distributions") {
  const KernelConfig cfg = KernelConfig::for_latent_dim(2);
  double acc = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(1000 + trial);
    const Matrix a = rng.normal_matrix(64, 2);
    const Matrix b = rng.normal_matrix(64, 2);
    acc += mmd_estimate(a, b, cfg, 2);
  }
  CHECK(std::abs(acc / 200.0) < 0.01);
}

TEST_CASE("mmd estimator separates mean-shifted batches") {
  const KernelConfig cfg = KernelConfig::for_latent_dim(2);
  double acc = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(5000 + trial);
    Matrix a = rng.normal_matrix(64, 2);
    a.col(0).array() += 3.0;
    const Matrix b = rng.normal_matrix(64, 2);
    acc += mmd_estimate(a, b, cfg, 2);
  }
  CHECK(acc / 200.0 > 0.05);
}

TEST_CASE("mmd is symmetric in its two batches") {
  Rng rng(41);
  const KernelConfig cfg{3.0};
  const Matrix a = rng.normal_matrix(10, 3);
  const Matrix b = rng.normal_matrix(10, 3);
  CHECK(mmd_estimate(a, b, cfg, 2) == doctest::Approx(mmd_estimate(b, a, cfg, 2)).epsilon(1e-14));
}

TEST_CASE("the paper-literal cross factor differs by exactly the cross sum") {
  Rng rng(43);
  const KernelConfig cfg{4.0};
  const Index n = 8;
  const Matrix a = rng.normal_matrix(n, 2);
  const Matrix b = rng.normal_matrix(n, 2);
  double cross = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      cross += imq_kernel(a.row(i).transpose(), b.row(j).transpose(), cfg);
  cross /= static_cast<double>(n * n);
  CHECK(mmd_estimate(a, b, cfg, 1) ==
        doctest::Approx(mmd_estimate(a, b, cfg, 2) + cross).epsilon(1e-12));
}

TEST_CASE("mmd argument validation") {
  Rng rng(44);
  const KernelConfig cfg{4.0};
  CHECK_THROWS_AS(mmd_estimate(rng.normal_matrix(1, 2), rng.normal_matrix(1, 2), cfg, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(mmd_estimate(rng.normal_matrix(4, 2), rng.normal_matrix(4, 2), cfg, 3),
                  std::invalid_argument);
}

TEST_CASE("mmd gradient matches finite differences") {
  Rng rng(45);
  const KernelConfig cfg{4.0};
  Matrix a = rng.normal_matrix(6, 3);
  const Matrix b = rng.normal_matrix(6, 3);
  for (int cf : {1, 2}) {
    const Matrix grad = mmd_gradient(a, b, cfg, cf);
    double worst = 0.0;
    const double eps = 1e-5;
    for (Index i = 0; i < a.size(); ++i) {
      const double saved = a.data()[i];
      a.data()[i] = saved + eps;
      const double up = mmd_estimate(a, b, cfg, cf);
      a.data()[i] = saved - eps;
      const double down = mmd_estimate(a, b, cfg, cf);
      a.data()[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      worst = std::max(worst,
                       std::abs(grad.data()[i] - numeric) / (std::abs(numeric) + 1e-8));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("mmd tape node backpropagates the analytic gradient") {
  Rng rng(46);
  const KernelConfig cfg{4.0};
  Parameter z("z", rng.normal_matrix(5, 2));
  const Matrix prior = rng.normal_matrix(5, 2);
  Tape tape;
  Tensor zt = tape.param(z);
  Tensor m = mmd_penalty(zt, prior, cfg, 2);
  z.zero_grad();
  tape.backward(scale(m, 2.5));
  const Matrix expected = 2.5 * mmd_gradient(z.value, prior, cfg, 2);
  CHECK((z.grad - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sigma histogram buckets and conservation") {
  std::vector<GaussianPosterior> posts;
  posts.push_back({Vector::Zero(3), Vector::Constant(3, 0.5)});
  SigmaHistogram h = sigma_histogram(posts);
  CHECK(h.counts[100] == 3); // 0.5 * 200
  CHECK(h.overflow == 0);
  CHECK(h.total() == 3);

  posts.clear();
  posts.push_back({Vector::Zero(2), Vector::Ones(2)});
  h = sigma_histogram(posts);
  CHECK(h.overflow == 2);

  Rng rng(47);
  posts.clear();
  for (int i = 0; i < 10; ++i) {
    Vector sigma(4);
    for (int d = 0; d < 4; ++d) sigma[d] = rng.uniform(0.01, 2.0);
    posts.push_back({Vector::Zero(4), sigma});
  }
  h = sigma_histogram(posts);
  CHECK(h.total() == 40);
}

TEST_CASE("collapse harness reproduces the sigma -> 0 dynamics") {
  const int steps = 2000, seeds = 20;
  const double lr = 0.05, k = 1.0, sigma0 = 0.5;

  Vector mean_traj = Vector::Zero(steps);
  for (int s = 0; s < seeds; ++s) {
    Rng rng(900 + s);
    const auto traj = collapse_harness(k, sigma0, lr, steps, 0.0, rng);
    for (int t = 0; t < steps; ++t) mean_traj[t] += traj[static_cast<std::size_t>(t)];
  }
  mean_traj /= static_cast<double>(seeds);

  CHECK(mean_traj[steps - 1] < 0.05); // Dirac-delta collapse

  // decay rate over the early window, against (1 - lr k)
  const int window = 150;
  const double rate = std::pow(mean_traj[window - 1] / sigma0, 1.0 / window);
  CHECK(std::abs(rate - (1.0 - lr * k)) < 0.1 * lr * k);

  // monotone in expectation over coarse strides
  for (int t = 50; t <= 400; t += 50) CHECK(mean_traj[t] < mean_traj[t - 50]);
}

TEST_CASE("collapse harness fixed points under the auxiliary KL") {
  const int steps = 2000, seeds = 20;
  double final_acc = 0.0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(700 + s);
    final_acc += collapse_harness(1.0, 0.5, 0.05, steps, 1.0, rng).back();
  }
  // stationarity of k sigma + lambda (sigma - 1/sigma): sigma* = 1/sqrt(2)
  CHECK(std::abs(final_acc / seeds - 1.0 / std::sqrt(2.0)) < 0.1);

  Rng rng(701);
  const auto flat = collapse_harness(0.0, 0.5, 0.05, steps, 1.0, rng);
  CHECK(std::abs(flat.back() - 1.0) < 0.05); // aux-KL alone pulls sigma to 1
}

TEST_CASE("collapse harness rejects unstable step sizes") {
  Rng rng(1);
  CHECK_THROWS_WITH_AS(collapse_harness(2.0, 0.5, 0.6, 10, 0.0, rng),
                       doctest::Contains("lr*k"), std::invalid_argument);
}

TEST_SUITE_END();
