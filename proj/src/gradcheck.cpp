#include "swae/gradcheck.hpp"

#include <cmath>

namespace swae {

double finite_difference_check(const std::function<double()>& loss,
                               std::span<Parameter* const> params, double eps,
                               double abs_floor) {
  double worst = 0.0;
  for (Parameter* p : params) {
    for (Index i = 0; i < p->value.size(); ++i) {
      double& x = p->value.data()[i];
      const double saved = x;
      x = saved + eps;
      const double up = loss();
      x = saved - eps;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad.data()[i];
      const double diff = std::abs(analytic - numeric);
      if (diff < abs_floor) continue;
      const double rel = diff / (std::abs(numeric) + 1e-8);
      if (rel > worst) worst = rel;
    }
  }
  return worst;
}

} // namespace swae
