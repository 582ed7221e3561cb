#pragma once

#include <functional>
#include <span>

#include "swae/tape.hpp"

namespace swae {

/// Central finite-difference audit of analytic gradients.
///
/// `loss` must re-evaluate the full pipeline from scratch (re-seeding any
/// RNG it consumes, so every call sees identical draws) and must not touch
/// the stored gradients. Each Parameter::grad must already hold the
/// analytic gradient from one backward() pass.
///
/// Returns max over all coordinates of
///   |analytic - central_difference| / (|central_difference| + 1e-8),
/// except that coordinates whose absolute difference is under abs_floor
/// count as exact: the difference quotient carries rounding noise of order
/// |loss| * 2^-52 / eps, which swamps the relative form wherever the true
/// gradient is itself that small.
double finite_difference_check(const std::function<double()>& loss,
                               std::span<Parameter* const> params, double eps,
                               double abs_floor = 1e-7);

} // namespace swae
