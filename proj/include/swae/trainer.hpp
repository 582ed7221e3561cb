#pragma once

#include <optional>
#include <string>

#include "swae/metrics.hpp"
#include "swae/objectives.hpp"
#include "swae/optim.hpp"

namespace swae {

/// Training regimes. The *-d/*-s suffix picks the deterministic or
/// stochastic encoder; ded/ved/wed-* are the encoder-decoder (dialog)
/// counterparts trained on utterance/response pairs.
enum class Mode { Dae, Vae, WaeD, WaeS, Ded, Ved, WedD, WedS };

Mode parse_mode(const std::string& name);
std::string mode_name(Mode m);
bool is_dialog(Mode m);
bool is_stochastic_encoder(Mode m);
bool uses_mmd(Mode m);
bool is_vae_family(Mode m);

/// Every hyperparameter of a run. Mode-irrelevant settings are carried
/// along (and serialized) but ignored by the objective.
struct TrainConfig {
  std::string mode = "wae-s";
  int embedding_dim = 32;
  int hidden_dim = 64;
  int latent_dim = 16;
  double lambda_wae = 10.0;
  double lambda_kl = 0.01;
  double lambda_vae_max = 1.0;
  std::string anneal = "auto";       // auto | on | off (auto: VAE modes only)
  double anneal_midpoint_epochs = 3.0;
  double anneal_span_epochs = 2.0;
  std::string word_dropout = "auto"; // auto | on | off
  double kernel_c = 0.0;             // 0 -> 2 * latent_dim
  bool mmd_paper_literal = false;    // cross term coefficient 1 instead of 2
  double lr = 1e-3;
  int batch_size = 16;
  int epochs = 30;
  int max_len = 20;
  int vocab_size = 1000;
  long seed = -1; // mandatory
  std::string corpus;
  std::string checkpoint_out = "model.swae";
  std::string log_out = "train.log";

  Mode mode_kind() const { return parse_mode(mode); }
  int cross_factor() const { return mmd_paper_literal ? 1 : 2; }
  double kernel_constant() const {
    return kernel_c > 0.0 ? kernel_c : 2.0 * static_cast<double>(latent_dim);
  }
  bool anneal_enabled() const;
  bool word_dropout_enabled() const;

  /// Throws with the offending setting spelled out.
  void validate() const;
};

/// Everything that must survive a save/load cycle for bit-exact resume.
struct TrainState {
  TrainConfig config;
  Vocab vocab;
  SeqModel model;
  AdamState adam;
  AnnealSchedule schedule;
  Rng rng{0};
  long epoch = 0;          // next epoch to run
  long batch_in_epoch = 0; // next batch within that epoch
  long global_step = 0;
  // partial peaking-monitor accumulators for mid-epoch checkpoints
  double epoch_weighted_kl_acc = 0.0;
  long epoch_step_count = 0;
};

/// Per-epoch means (per example) recorded at each epoch boundary.
struct EpochStats {
  long epoch = 0;
  double reconstruction = 0.0;
  double kl = 0.0;
  double weighted_kl = 0.0; // lambda * kl
  double aux_kl = 0.0;
  double mmd = 0.0;
  double lambda = 0.0;
};

/// Runs the configured objective over seeded epoch shuffles. The batch
/// order of epoch e comes from an rng seeded with mix(seed, e), so training
/// can resume from any step; all other randomness flows through the single
/// serialized stream in TrainState.
class Trainer {
public:
  /// Fresh run: loads the corpus, builds the vocabulary, initializes the
  /// model from the seed.
  explicit Trainer(const TrainConfig& config);

  /// Resumed run from a deserialized state.
  explicit Trainer(TrainState state);

  /// Trains until config.epochs are complete, or at most max_steps steps if
  /// non-negative. Returns the number of steps executed.
  long run(long max_steps = -1);

  TrainState& state() { return state_; }
  const TrainState& state() const { return state_; }
  SeqModel& model() { return state_.model; }
  const Vocab& vocab() const { return state_.vocab; }

  /// Tab-separated per-step log accumulated so far:
  /// step epoch rec kl mmd aux_kl lambda total
  const std::string& log() const { return log_; }
  const std::vector<EpochStats>& epoch_stats() const { return epoch_stats_; }

  long steps_per_epoch() const { return steps_per_epoch_; }

private:
  void load_corpus_and_vocab(bool build_fresh_vocab);
  void configure_schedule();
  LossBreakdown step(const Batch& inputs, const Batch& targets);
  double current_lr() const;
  double current_word_dropout() const;

  TrainState state_;
  std::vector<TokenSentence> sentences_; // autoencoder corpus
  PairedCorpus pairs_;                   // dialog corpus
  long steps_per_epoch_ = 0;
  std::string log_;
  std::vector<EpochStats> epoch_stats_;
};

} // namespace swae
