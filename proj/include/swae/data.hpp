#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "swae/rng.hpp"
#include "swae/types.hpp"

namespace swae {

using TokenSentence = std::vector<std::string>;

/// Bidirectional token<->id map. Ids 0..3 are reserved and never reassigned.
class Vocab {
public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  Vocab();

  int size() const { return static_cast<int>(id_to_token_.size()); }

  /// Id for a token; unknown tokens map to kUnk.
  int encode(const std::string& token) const;
  const std::string& decode(int id) const;

  std::vector<int> encode_sentence(const TokenSentence& s) const;
  TokenSentence decode_sentence(const std::vector<int>& ids) const;

  /// Appends a token with the next free id. Rejects duplicates.
  void add(const std::string& token);

  /// Tokens in id order, reserved ids first.
  const std::vector<std::string>& tokens() const { return id_to_token_; }

private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

/// Keeps the max_size-4 most frequent tokens (ties broken by first
/// occurrence); everything else encodes to UNK. max_size < 5 is rejected.
Vocab build_vocab(const std::vector<TokenSentence>& sentences, int max_size);

/// One sentence per line, whitespace-tokenized, lowercased, truncated to
/// max_len tokens; blank lines skipped. Unreadable or all-blank files are
/// errors.
std::vector<TokenSentence> load_corpus(const std::string& path, int max_len);

struct PairedCorpus {
  std::vector<TokenSentence> sources;
  std::vector<TokenSentence> targets;
};

/// Tab-separated utterance/response pairs; exact duplicate pairs are
/// dropped. A line without a tab is an error naming the line number.
PairedCorpus load_paired_corpus(const std::string& path, int max_len);

/// Token id rows padded to a common width: BOS tokens... EOS PAD...
struct Batch {
  Eigen::MatrixXi ids;
  std::vector<int> lengths; // real token count per row, excluding BOS/EOS

  Index size() const { return ids.rows(); }
  Index time_steps() const { return ids.cols(); }
};

Batch make_batch(const std::vector<std::vector<int>>& id_sentences);

/// Seeded epoch shuffle into fixed-size batches with BOS/EOS added. A final
/// batch of fewer than two examples is dropped so the MMD estimator's N >= 2
/// precondition always holds.
std::vector<Batch> make_batches(const std::vector<TokenSentence>& sentences,
                                const Vocab& vocab, int batch_size, Rng& rng);

struct PairedBatch {
  Batch source;
  Batch target;
};

std::vector<PairedBatch> make_paired_batches(const PairedCorpus& corpus,
                                             const Vocab& vocab, int batch_size,
                                             Rng& rng);

/// Branch probabilities of the built-in subject-verb-object template
/// grammar (roughly 45 tokens, sentence lengths 5..12).
struct SynthGrammar {
  double p_subject_adj = 0.5;
  double p_object_adj = 0.5;
  double p_prep_phrase = 0.5;
  double p_prep_adj = 0.25;
  double p_adverb = 0.3;
};

std::vector<TokenSentence> synth_corpus(const SynthGrammar& grammar, int count,
                                        Rng& rng);

/// Accepts either a corpus file path or "synth:<count>", which expands to a
/// deterministic synthetic corpus (fixed internal seed, same text for the
/// same count everywhere).
std::vector<TokenSentence> resolve_corpus(const std::string& spec, int max_len);

} // namespace swae
