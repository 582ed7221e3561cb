#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "swae/types.hpp"

namespace swae {

/// Deterministic random stream used for every stochastic choice in the
/// framework (init, sampling, dropout, batching). Normal draws use a
/// cache-free Box-Muller so the full state is the engine state, which
/// round-trips through state()/set_state() for exact training resume.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw.
  double normal() {
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(uniform() * n); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn from an (unnormalized-tolerant) probability vector.
  int categorical(std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) total += p;
    const double u = uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  /// Matrix of iid standard normals, filled row-major.
  Matrix normal_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  Matrix uniform_matrix(Index rows, Index cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  /// Textual engine state (the standard mersenne-twister stream format).
  std::string state() const;
  void set_state(const std::string& s);

  /// Derives an independent seed for a named substream, e.g. the per-epoch
  /// batch shuffle, without advancing this stream.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

private:
  std::mt19937_64 engine_;
};

} // namespace swae
