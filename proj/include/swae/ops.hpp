#pragma once

#include <vector>

#include "swae/tape.hpp"

namespace swae {

// Differentiable matrix operations. Every function records its backward
// rule on the operands' tape; gradients accumulate additively, so reusing
// a tensor in several places is safe.

/// a + b. Shapes must match, or b may be a 1xC row broadcast over a's rows.
Tensor add(const Tensor& a, const Tensor& b);

/// a - b, same shapes only.
Tensor sub(const Tensor& a, const Tensor& b);

/// Elementwise product, same shapes.
Tensor mul(const Tensor& a, const Tensor& b);

/// alpha * a + beta, elementwise.
Tensor affine(const Tensor& a, double alpha, double beta);

inline Tensor scale(const Tensor& a, double alpha) { return affine(a, alpha, 0.0); }
inline Tensor neg(const Tensor& a) { return affine(a, -1.0, 0.0); }

/// Matrix product a(n,k) * b(k,m).
Tensor matmul(const Tensor& a, const Tensor& b);

/// Horizontal concatenation [a | b]; rows must match.
Tensor concat_cols(const Tensor& a, const Tensor& b);

/// Columns [begin, begin+len) of a.
Tensor slice_cols(const Tensor& a, Index begin, Index len);

/// Row gather: out.row(i) = m.row(ids[i]). The embedding lookup; backward
/// scatter-adds into the gathered rows.
Tensor gather_rows(const Tensor& m, const std::vector<int>& ids);

/// out.row(i) = factors(i) * a.row(i), with constant (non-differentiated)
/// factors. Used for masked selection across time steps.
Tensor scale_rows(const Tensor& a, const Vector& factors);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);

/// Natural log; rejects non-positive entries.
Tensor log(const Tensor& a);

/// Row-wise softmax (max-shifted).
Tensor softmax(const Tensor& a);

/// Sum of all entries, as a 1x1 tensor.
Tensor sum(const Tensor& a);

/// Mean of all entries, as a 1x1 tensor.
Tensor mean(const Tensor& a);

/// ||a - b||^2 summed over all entries, as a 1x1 tensor.
Tensor squared_distance(const Tensor& a, const Tensor& b);

/// Sequence-aggregated cross entropy: sum over rows r of
/// weights[r] * (logsumexp(logits.row(r)) - logits(r, targets[r])).
/// Weights are 0/1 masks for padded positions.
Tensor cross_entropy_sum(const Tensor& logits, const std::vector<int>& targets,
                         const std::vector<double>& weights);

} // namespace swae
