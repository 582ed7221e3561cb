#pragma once

#include "swae/metrics.hpp"
#include "swae/trainer.hpp"

namespace swae {

struct EvalOptions {
  int sample_count = 500;
  long seed = 1;
  int ppl_order = 3;          // trigram LM on the reference corpus
  double ppl_smoothing = 0.01;
  double unikl_smoothing = 0.01;
  double entropy_base = 2.0;
};

/// Posterior means for a corpus, one row per sentence (the deterministic
/// encoding; stochastic encoders are evaluated at their mean).
Matrix encode_means(SeqModel& model, const Vocab& vocab,
                    const std::vector<TokenSentence>& sentences);

/// Full posteriors for a corpus (sigma diagnostics).
std::vector<GaussianPosterior> encode_posteriors(
    SeqModel& model, const Vocab& vocab, const std::vector<TokenSentence>& sentences);

/// Greedy reconstruction through the posterior mean.
std::vector<TokenSentence> reconstruct_corpus(SeqModel& model, const Vocab& vocab,
                                              const std::vector<TokenSentence>& sentences,
                                              int max_len);

/// Greedy decodings of `count` draws from the N(0, I) prior.
std::vector<TokenSentence> sample_from_prior(SeqModel& model, const Vocab& vocab,
                                             int count, int max_len, Rng& rng);

/// Greedy responses to dialog sources.
std::vector<TokenSentence> respond_corpus(SeqModel& model, const Vocab& vocab,
                                          const std::vector<TokenSentence>& sources,
                                          int max_len);

/// Latent-space interpolation: decodes steps points on the straight line
/// between the posterior means of two sentences (endpoints included).
std::vector<TokenSentence> interpolate(SeqModel& model, const Vocab& vocab,
                                       const TokenSentence& a, const TokenSentence& b,
                                       int steps, int max_len);

struct AutoencoderReport {
  double bleu = 0.0; // reconstruction BLEU-4 in [0, 1]
  double ppl = 0.0;
  double unikl = 0.0;
  double entropy = 0.0;
  double sample_avg_len = 0.0;
  double corpus_entropy = 0.0;
  double corpus_avg_len = 0.0;
};

AutoencoderReport evaluate_autoencoder(SeqModel& model, const Vocab& vocab,
                                       const std::vector<TokenSentence>& reference,
                                       int max_len, const EvalOptions& opts);

struct DialogReport {
  double bleu2 = 0.0;
  double bleu4 = 0.0;
  double entropy = 0.0;
  double dist1 = 0.0;
  double dist2 = 0.0;
  double ref_entropy = 0.0;
  double ref_dist1 = 0.0;
  double ref_dist2 = 0.0;
};

DialogReport evaluate_dialog(SeqModel& model, const Vocab& vocab,
                             const PairedCorpus& test, int max_len,
                             const EvalOptions& opts);

/// Key/value report plus the tab-separated table row.
std::string format_report(const AutoencoderReport& r, const EvalOptions& opts);
std::string format_report(const DialogReport& r, const EvalOptions& opts);

/// Two-column text: bucket midpoint and count; the final row (midpoint 1)
/// is the overflow bucket for sigma >= 1.
std::string format_sigma_histogram(const SigmaHistogram& hist);

std::string sentence_to_string(const TokenSentence& s);

} // namespace swae
