#include "swae/trainer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace swae {

Mode parse_mode(const std::string& name) {
  if (name == "dae") return Mode::Dae;
  if (name == "vae") return Mode::Vae;
  if (name == "wae-d") return Mode::WaeD;
  if (name == "wae-s") return Mode::WaeS;
  if (name == "ded") return Mode::Ded;
  if (name == "ved") return Mode::Ved;
  if (name == "wed-d") return Mode::WedD;
  if (name == "wed-s") return Mode::WedS;
  throw std::invalid_argument(
      "invalid mode '" + name +
      "' (expected dae, vae, wae-d, wae-s, ded, ved, wed-d or wed-s)");
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Dae: return "dae";
    case Mode::Vae: return "vae";
    case Mode::WaeD: return "wae-d";
    case Mode::WaeS: return "wae-s";
    case Mode::Ded: return "ded";
    case Mode::Ved: return "ved";
    case Mode::WedD: return "wed-d";
    case Mode::WedS: return "wed-s";
  }
  return "?";
}

bool is_dialog(Mode m) {
  return m == Mode::Ded || m == Mode::Ved || m == Mode::WedD || m == Mode::WedS;
}

bool is_stochastic_encoder(Mode m) {
  return m == Mode::Vae || m == Mode::WaeS || m == Mode::Ved || m == Mode::WedS;
}

bool uses_mmd(Mode m) {
  return m == Mode::WaeD || m == Mode::WaeS || m == Mode::WedD || m == Mode::WedS;
}

bool is_vae_family(Mode m) { return m == Mode::Vae || m == Mode::Ved; }

bool TrainConfig::anneal_enabled() const {
  if (anneal == "on") return true;
  if (anneal == "off") return false;
  return is_vae_family(mode_kind());
}

bool TrainConfig::word_dropout_enabled() const {
  if (word_dropout == "on") return true;
  if (word_dropout == "off") return false;
  return is_vae_family(mode_kind());
}

void TrainConfig::validate() const {
  const Mode m = mode_kind(); // throws on invalid mode
  if (corpus.empty()) throw std::invalid_argument("missing corpus path");
  if (seed < 0) throw std::invalid_argument("seed is mandatory and must be >= 0");
  if (lambda_wae < 0.0)
    throw std::invalid_argument("lambda_wae must be >= 0, got " + std::to_string(lambda_wae));
  if (lambda_kl < 0.0)
    throw std::invalid_argument("lambda_kl must be >= 0, got " + std::to_string(lambda_kl));
  if (lambda_vae_max < 0.0)
    throw std::invalid_argument("lambda_vae_max must be >= 0, got " +
                                std::to_string(lambda_vae_max));
  if (lr <= 0.0) throw std::invalid_argument("lr must be positive");
  if (batch_size < 2)
    throw std::invalid_argument("batch_size must be >= 2 (MMD estimator requirement)");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (vocab_size < 5) throw std::invalid_argument("vocab_size must be >= 5");
  if (embedding_dim < 1 || hidden_dim < 1 || latent_dim < 1)
    throw std::invalid_argument("model dims must be positive");
  if (anneal != "auto" && anneal != "on" && anneal != "off")
    throw std::invalid_argument("anneal must be auto, on or off");
  if (word_dropout != "auto" && word_dropout != "on" && word_dropout != "off")
    throw std::invalid_argument("word_dropout must be auto, on or off");
  // WAE training never anneals or drops words; only VAE (and, for ablation,
  // the plain autoencoder) may enable them.
  if (uses_mmd(m)) {
    if (anneal == "on")
      throw std::invalid_argument("anneal=on is not available in WAE modes");
    if (word_dropout == "on")
      throw std::invalid_argument("word_dropout=on is not available in WAE modes");
  }
}

Trainer::Trainer(const TrainConfig& config) {
  config.validate();
  state_.config = config;
  state_.rng = Rng(static_cast<std::uint64_t>(config.seed));
  load_corpus_and_vocab(true);
  SeqModelDims dims;
  dims.vocab = state_.vocab.size();
  dims.embedding = config.embedding_dim;
  dims.hidden = config.hidden_dim;
  dims.latent = config.latent_dim;
  state_.model = SeqModel(dims);
  state_.model.init(state_.rng);
  configure_schedule();
}

Trainer::Trainer(TrainState state) : state_(std::move(state)) {
  state_.config.validate();
  load_corpus_and_vocab(false);
  configure_schedule();
}

void Trainer::load_corpus_and_vocab(bool build_fresh_vocab) {
  const TrainConfig& cfg = state_.config;
  if (is_dialog(cfg.mode_kind())) {
    pairs_ = load_paired_corpus(cfg.corpus, cfg.max_len);
    if (build_fresh_vocab) {
      std::vector<TokenSentence> all = pairs_.sources;
      all.insert(all.end(), pairs_.targets.begin(), pairs_.targets.end());
      state_.vocab = build_vocab(all, cfg.vocab_size);
    }
    const long n = static_cast<long>(pairs_.sources.size());
    steps_per_epoch_ = n / cfg.batch_size + ((n % cfg.batch_size) >= 2 ? 1 : 0);
  } else {
    sentences_ = resolve_corpus(cfg.corpus, cfg.max_len);
    if (build_fresh_vocab) state_.vocab = build_vocab(sentences_, cfg.vocab_size);
    const long n = static_cast<long>(sentences_.size());
    steps_per_epoch_ = n / cfg.batch_size + ((n % cfg.batch_size) >= 2 ? 1 : 0);
  }
  if (steps_per_epoch_ < 1)
    throw std::runtime_error("corpus too small for batch_size " +
                             std::to_string(cfg.batch_size));
}

void Trainer::configure_schedule() {
  const TrainConfig& cfg = state_.config;
  // Structural fields are recomputed deterministically; the dynamic peaking
  // state (frozen/running max) is whatever TrainState carries.
  if (cfg.anneal_enabled()) {
    AnnealSchedule fresh = AnnealSchedule::sigmoid(
        cfg.lambda_vae_max, cfg.anneal_midpoint_epochs, cfg.anneal_span_epochs,
        steps_per_epoch_);
    state_.schedule.lambda_max = fresh.lambda_max;
    state_.schedule.slope = fresh.slope;
    state_.schedule.midpoint = fresh.midpoint;
  } else {
    const bool keep_dynamic = state_.schedule.frozen;
    AnnealSchedule fixed = AnnealSchedule::constant(cfg.lambda_vae_max);
    if (!keep_dynamic) state_.schedule = fixed;
  }
}

double Trainer::current_lr() const {
  const TrainConfig& cfg = state_.config;
  if (!is_dialog(cfg.mode_kind())) return cfg.lr;
  // dialog runs decay the rate by 0.98 per epoch down to 1e-5
  const double decayed = cfg.lr * std::pow(0.98, static_cast<double>(state_.epoch));
  return std::max(decayed, 1e-5);
}

double Trainer::current_word_dropout() const {
  if (!state_.config.word_dropout_enabled()) return 0.0;
  return word_dropout_rate(state_.epoch);
}

LossBreakdown Trainer::step(const Batch& inputs, const Batch& targets) {
  TrainConfig& cfg = state_.config;
  const Mode mode = cfg.mode_kind();
  const KernelConfig kernel{cfg.kernel_constant()};

  Tape tape;
  Binder bind(tape);
  LossGraph loss;
  switch (mode) {
    case Mode::Dae:
    case Mode::Ded:
      loss = dae_loss(bind, state_.model, inputs, targets, current_word_dropout(),
                      &state_.rng);
      break;
    case Mode::Vae:
    case Mode::Ved:
      loss = vae_loss(bind, state_.model, inputs, targets, state_.schedule,
                      state_.global_step, current_word_dropout(), state_.rng);
      break;
    case Mode::WaeD:
    case Mode::WedD:
      loss = wae_d_loss(bind, state_.model, inputs, targets, cfg.lambda_wae, kernel,
                        cfg.cross_factor(), state_.rng);
      break;
    case Mode::WaeS:
    case Mode::WedS:
      loss = wae_s_loss(bind, state_.model, inputs, targets, cfg.lambda_wae,
                        cfg.lambda_kl, kernel, cfg.cross_factor(), state_.rng);
      break;
  }

  auto params = state_.model.parameters();
  zero_grads(params);
  tape.backward(loss.total);
  clip_global_norm(params, 5.0);
  AdamConfig adam_cfg;
  adam_cfg.lr = current_lr();
  adam_step(params, state_.adam, adam_cfg);
  return loss.parts;
}

long Trainer::run(long max_steps) {
  const TrainConfig& cfg = state_.config;
  const Mode mode = cfg.mode_kind();
  long executed = 0;

  std::ostringstream log;
  log.precision(17);

  while (state_.epoch < cfg.epochs) {
    Rng shuffle(Rng::mix(static_cast<std::uint64_t>(cfg.seed),
                         static_cast<std::uint64_t>(state_.epoch)));
    std::vector<Batch> inputs, targets;
    if (is_dialog(mode)) {
      auto paired = make_paired_batches(pairs_, state_.vocab, cfg.batch_size, shuffle);
      for (auto& pb : paired) {
        inputs.push_back(std::move(pb.source));
        targets.push_back(std::move(pb.target));
      }
    } else {
      inputs = make_batches(sentences_, state_.vocab, cfg.batch_size, shuffle);
      targets = inputs;
    }

    double epoch_rec = 0, epoch_kl = 0, epoch_aux = 0, epoch_mmd = 0, epoch_lambda = 0;
    long epoch_examples = 0;

    for (std::size_t b = static_cast<std::size_t>(state_.batch_in_epoch);
         b < inputs.size(); ++b) {
      if (max_steps >= 0 && executed >= max_steps) {
        log_ += log.str();
        return executed;
      }
      const LossBreakdown parts = step(inputs[b], targets[b]);
      const double n = static_cast<double>(inputs[b].size());

      log << state_.global_step << '\t' << state_.epoch << '\t' << parts.reconstruction
          << '\t' << parts.kl << '\t' << parts.mmd << '\t' << parts.aux_kl << '\t'
          << (uses_mmd(mode) ? parts.lambda_wae : parts.lambda_vae) << '\t'
          << parts.total << '\n';

      state_.epoch_weighted_kl_acc += parts.lambda_vae * parts.kl / n;
      state_.epoch_step_count += 1;
      epoch_rec += parts.reconstruction;
      epoch_kl += parts.kl;
      epoch_aux += parts.aux_kl;
      epoch_mmd += parts.mmd;
      epoch_lambda = uses_mmd(mode) ? parts.lambda_wae : parts.lambda_vae;
      epoch_examples += inputs[b].size();

      state_.global_step += 1;
      state_.batch_in_epoch += 1;
      ++executed;
    }

    EpochStats stats;
    stats.epoch = state_.epoch;
    stats.reconstruction = epoch_rec / static_cast<double>(epoch_examples);
    stats.kl = epoch_kl / static_cast<double>(epoch_examples);
    stats.aux_kl = epoch_aux / static_cast<double>(epoch_examples);
    stats.mmd = epoch_mmd / static_cast<double>(std::max<long>(1, state_.epoch_step_count));
    stats.lambda = epoch_lambda;
    stats.weighted_kl =
        state_.epoch_weighted_kl_acc / static_cast<double>(std::max<long>(1, state_.epoch_step_count));
    epoch_stats_.push_back(stats);

    if (is_vae_family(mode) && cfg.anneal_enabled())
      state_.schedule.observe_epoch(stats.weighted_kl, state_.global_step);

    state_.epoch_weighted_kl_acc = 0.0;
    state_.epoch_step_count = 0;
    state_.batch_in_epoch = 0;
    state_.epoch += 1;
  }

  log_ += log.str();
  return executed;
}

} // namespace swae
