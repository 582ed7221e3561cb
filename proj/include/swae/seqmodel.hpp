#pragma once

#include "swae/data.hpp"
#include "swae/latent.hpp"
#include "swae/lstm.hpp"

namespace swae {

struct SeqModelDims {
  int vocab = 0;
  Index embedding = 32;
  Index hidden = 64;
  Index latent = 16;
};

/// LSTM autoencoder: embedding, encoder LSTM, Gaussian latent heads, decoder
/// LSTM fed [embedding | z] at every step, and a softmax output projection.
class SeqModel {
public:
  SeqModel() = default;
  explicit SeqModel(const SeqModelDims& dims);

  const SeqModelDims& dims() const { return dims_; }

  /// Uniform(-0.08, 0.08) weights, zero biases, forget bias +1.
  void init(Rng& rng);

  std::vector<Parameter*> parameters();

  Parameter embedding; // V x E
  LstmParams encoder;  // input E
  LstmParams decoder;  // input E + Z
  GaussianHeads heads; // H -> Z (mu and log-sigma)
  LinearHead output;   // H -> V

private:
  SeqModelDims dims_;
};

// ---- graph building (training / gradient checks) ----

/// Final hidden state per row after consuming the real tokens left to right
/// (BOS/EOS/PAD excluded); rows select their own last step by mask.
Tensor encode_hidden(Binder& bind, SeqModel& model, const Batch& batch);

/// Per-step logits for teacher-forced decoding. Step t conditions on target
/// column t (BOS first) and the latent z concatenated to the embedding; with
/// word dropout, conditioning tokens other than BOS flip to UNK with the
/// given probability. rng may be null when the rate is zero.
std::vector<Tensor> decode_teacher_forced(Binder& bind, SeqModel& model,
                                          const Tensor& z, const Batch& targets,
                                          double word_dropout_rate, Rng* rng);

/// Sequence-aggregated cross entropy of teacher-forced logits against the
/// batch: sum over rows and real positions (EOS included) of -log p.
Tensor sequence_cross_entropy(const std::vector<Tensor>& step_logits,
                              const Batch& targets);

// ---- generation (forward only) ----

/// Greedy argmax decoding from BOS, one sentence per row of z; stops at EOS
/// or max_len tokens. Ties break to the lowest token id. Pure in (model, z).
std::vector<std::vector<int>> decode_greedy(SeqModel& model, const Matrix& z,
                                            int max_len);

/// Temperature sampling from softmax(logits / temperature) per step.
std::vector<std::vector<int>> decode_sample(SeqModel& model, const Matrix& z,
                                            int max_len, double temperature,
                                            Rng& rng);

// ---- single-sentence helpers ----

/// Encoder hidden state for one sentence of token ids (no BOS/EOS).
Vector encode_last_hidden(SeqModel& model, const std::vector<int>& token_ids);

/// Posterior at one sentence; mean doubles as the deterministic encoding.
GaussianPosterior encode_posterior(SeqModel& model, const std::vector<int>& token_ids);

} // namespace swae
