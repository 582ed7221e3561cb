#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "swae/data.hpp"

namespace swae {

/// Corpus-level BLEU-max_n against one aligned reference per candidate:
/// geometric mean of modified n-gram precisions with +1 smoothing on both
/// counts for n >= 2, times the brevity penalty. Result in [0, 1].
double bleu_n(const std::vector<TokenSentence>& candidates,
              const std::vector<TokenSentence>& references, int max_n);

inline double bleu(const std::vector<TokenSentence>& candidates,
                   const std::vector<TokenSentence>& references) {
  return bleu_n(candidates, references, 4);
}

/// Add-k smoothed n-gram language model with BOS-padded contexts and EOS
/// counted as an event. The event space is the training vocabulary plus EOS
/// and UNK; unseen tokens score as UNK, so conditionals always sum to one.
class NgramLM {
public:
  static NgramLM train(const std::vector<TokenSentence>& corpus, int order,
                       double smoothing_k);

  /// LM that assigns exactly 1/event_space to everything.
  static NgramLM uniform(int event_space);

  /// p(token | preceding tokens of one sentence), with BOS padding applied.
  double conditional(const std::vector<std::string>& context,
                     const std::string& token) const;

  /// Sum of log p over the sentence tokens plus the closing EOS.
  double log_prob(const TokenSentence& sentence) const;

  int order() const { return order_; }
  int event_space() const;

private:
  NgramLM(int order, double k) : order_(order), k_(k) {}

  std::string event_token(const std::string& tok) const;
  std::string context_key(const std::vector<std::string>& context) const;

  int order_ = 1;
  double k_ = 0.0;
  int uniform_size_ = 0; // nonzero only for uniform()
  std::unordered_map<std::string, std::unordered_map<std::string, long>> counts_;
  std::unordered_map<std::string, long> context_totals_;
  std::unordered_map<std::string, bool> vocab_;
};

/// exp of the mean negative log-likelihood per token, EOS included.
double perplexity(const NgramLM& lm, const std::vector<TokenSentence>& sentences);

/// KL(P_generated || P_reference) between add-k smoothed unigram
/// distributions over the union vocabulary.
double unigram_kl(const std::vector<TokenSentence>& generated,
                  const std::vector<TokenSentence>& reference, double smoothing_k);

/// Shannon entropy of the empirical unigram distribution (default: bits).
double word_entropy(const std::vector<TokenSentence>& sentences,
                    double log_base = 2.0);

/// Mean token count per sentence.
double avg_len(const std::vector<TokenSentence>& sentences);

/// Unique n-grams over total n-grams across the corpus, n in {1, 2}.
double distinct_n(const std::vector<TokenSentence>& sentences, int n);

} // namespace swae
