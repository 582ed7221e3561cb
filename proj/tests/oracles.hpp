#pragma once

// Independent reference implementations used only by tests. These must stay
// decoupled from the library code paths they audit.

#include <cmath>

#include "swae/types.hpp"

namespace swae::oracles {

/// log N(x; mu, sigma^2)
inline double log_normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * M_PI);
}

/// KL(N(mu1, sigma1^2) || N(mu2, sigma2^2)) by composite Simpson quadrature
/// of p log(p/q) over mu1 +- 15 sigma1 (the tail contribution is far below
/// the 1e-6 comparison tolerance).
inline double kl_by_quadrature(double mu1, double sigma1, double mu2, double sigma2,
                               int intervals = 20000) {
  const double lo = mu1 - 15.0 * sigma1;
  const double hi = mu1 + 15.0 * sigma1;
  const double h = (hi - lo) / intervals;
  auto f = [&](double x) {
    const double lp = log_normal_pdf(x, mu1, sigma1);
    const double lq = log_normal_pdf(x, mu2, sigma2);
    return std::exp(lp) * (lp - lq);
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i)
    acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// Straight-line scalar-loop LSTM step, written independently of the tape
/// ops. Gate order: input, forget, cell, output.
inline void lstm_step_reference(const Matrix& w_i, const Matrix& u_i, const Matrix& b_i,
                                const Matrix& w_f, const Matrix& u_f, const Matrix& b_f,
                                const Matrix& w_g, const Matrix& u_g, const Matrix& b_g,
                                const Matrix& w_o, const Matrix& u_o, const Matrix& b_o,
                                const Vector& x, const Vector& h, const Vector& c,
                                Vector* h_out, Vector* c_out) {
  const Eigen::Index hidden = w_i.cols();
  h_out->resize(hidden);
  c_out->resize(hidden);
  for (Eigen::Index j = 0; j < hidden; ++j) {
    double pre_i = b_i(0, j), pre_f = b_f(0, j), pre_g = b_g(0, j), pre_o = b_o(0, j);
    for (Eigen::Index d = 0; d < x.size(); ++d) {
      pre_i += x[d] * w_i(d, j);
      pre_f += x[d] * w_f(d, j);
      pre_g += x[d] * w_g(d, j);
      pre_o += x[d] * w_o(d, j);
    }
    for (Eigen::Index k = 0; k < hidden; ++k) {
      pre_i += h[k] * u_i(k, j);
      pre_f += h[k] * u_f(k, j);
      pre_g += h[k] * u_g(k, j);
      pre_o += h[k] * u_o(k, j);
    }
    const double gi = 1.0 / (1.0 + std::exp(-pre_i));
    const double gf = 1.0 / (1.0 + std::exp(-pre_f));
    const double gg = std::tanh(pre_g);
    const double go = 1.0 / (1.0 + std::exp(-pre_o));
    (*c_out)[j] = gf * c[j] + gi * gg;
    (*h_out)[j] = go * std::tanh((*c_out)[j]);
  }
}

} // namespace swae::oracles
