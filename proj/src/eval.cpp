#include "swae/eval.hpp"

#include <sstream>

namespace swae {

namespace {

constexpr std::size_t kEncodeGroup = 128;

/// Encoder hidden states for a group of sentences, one row each.
Matrix hidden_rows(SeqModel& model, const Vocab& vocab,
                   const std::vector<TokenSentence>& sentences) {
  Matrix out(static_cast<Index>(sentences.size()), model.dims().hidden);
  for (std::size_t start = 0; start < sentences.size(); start += kEncodeGroup) {
    const std::size_t end = std::min(sentences.size(), start + kEncodeGroup);
    std::vector<std::vector<int>> ids;
    ids.reserve(end - start);
    for (std::size_t i = start; i < end; ++i)
      ids.push_back(vocab.encode_sentence(sentences[i]));
    Tape tape;
    Binder bind(tape);
    Tensor h = encode_hidden(bind, model, make_batch(ids));
    out.middleRows(static_cast<Index>(start), static_cast<Index>(end - start)) =
        h.value();
  }
  return out;
}

} // namespace

Matrix encode_means(SeqModel& model, const Vocab& vocab,
                    const std::vector<TokenSentence>& sentences) {
  const Matrix h = hidden_rows(model, vocab, sentences);
  return (h * model.heads.mu.weight.value).rowwise() +
         model.heads.mu.bias.value.row(0);
}

std::vector<GaussianPosterior> encode_posteriors(
    SeqModel& model, const Vocab& vocab, const std::vector<TokenSentence>& sentences) {
  const Matrix h = hidden_rows(model, vocab, sentences);
  const Matrix mu = (h * model.heads.mu.weight.value).rowwise() +
                    model.heads.mu.bias.value.row(0);
  const Matrix sigma = ((h * model.heads.log_sigma.weight.value).rowwise() +
                        model.heads.log_sigma.bias.value.row(0))
                           .array()
                           .exp();
  std::vector<GaussianPosterior> out;
  out.reserve(sentences.size());
  for (Index r = 0; r < mu.rows(); ++r)
    out.push_back(GaussianPosterior{mu.row(r).transpose(), sigma.row(r).transpose()});
  return out;
}

namespace {

std::vector<TokenSentence> decode_rows(SeqModel& model, const Vocab& vocab,
                                       const Matrix& z, int max_len) {
  std::vector<TokenSentence> out;
  out.reserve(static_cast<std::size_t>(z.rows()));
  for (Index start = 0; start < z.rows(); start += static_cast<Index>(kEncodeGroup)) {
    const Index n = std::min<Index>(static_cast<Index>(kEncodeGroup), z.rows() - start);
    for (auto& ids : decode_greedy(model, z.middleRows(start, n), max_len))
      out.push_back(vocab.decode_sentence(ids));
  }
  return out;
}

} // namespace

std::vector<TokenSentence> reconstruct_corpus(SeqModel& model, const Vocab& vocab,
                                              const std::vector<TokenSentence>& sentences,
                                              int max_len) {
  return decode_rows(model, vocab, encode_means(model, vocab, sentences), max_len);
}

std::vector<TokenSentence> sample_from_prior(SeqModel& model, const Vocab& vocab,
                                             int count, int max_len, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_from_prior: count must be >= 1");
  const Matrix z = rng.normal_matrix(count, model.dims().latent);
  return decode_rows(model, vocab, z, max_len);
}

std::vector<TokenSentence> respond_corpus(SeqModel& model, const Vocab& vocab,
                                          const std::vector<TokenSentence>& sources,
                                          int max_len) {
  return decode_rows(model, vocab, encode_means(model, vocab, sources), max_len);
}

std::vector<TokenSentence> interpolate(SeqModel& model, const Vocab& vocab,
                                       const TokenSentence& a, const TokenSentence& b,
                                       int steps, int max_len) {
  if (steps < 2) throw std::invalid_argument("interpolate: steps must be >= 2");
  const Matrix endpoints = encode_means(model, vocab, {a, b});
  Matrix z(steps, model.dims().latent);
  for (int i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
    z.row(i) = (1.0 - t) * endpoints.row(0) + t * endpoints.row(1);
  }
  return decode_rows(model, vocab, z, max_len);
}

AutoencoderReport evaluate_autoencoder(SeqModel& model, const Vocab& vocab,
                                       const std::vector<TokenSentence>& reference,
                                       int max_len, const EvalOptions& opts) {
  AutoencoderReport r;
  const auto reconstructions = reconstruct_corpus(model, vocab, reference, max_len);
  r.bleu = bleu(reconstructions, reference);

  Rng rng(static_cast<std::uint64_t>(opts.seed));
  auto samples = sample_from_prior(model, vocab, opts.sample_count, max_len, rng);
  // degenerate decoders can emit empty sentences; metrics need tokens
  std::vector<TokenSentence> nonempty;
  for (auto& s : samples)
    if (!s.empty()) nonempty.push_back(std::move(s));
  const NgramLM lm = NgramLM::train(reference, opts.ppl_order, opts.ppl_smoothing);
  if (!nonempty.empty()) {
    r.ppl = perplexity(lm, nonempty);
    r.unikl = unigram_kl(nonempty, reference, opts.unikl_smoothing);
    r.entropy = word_entropy(nonempty, opts.entropy_base);
    r.sample_avg_len = avg_len(nonempty);
  }
  r.corpus_entropy = word_entropy(reference, opts.entropy_base);
  r.corpus_avg_len = avg_len(reference);
  return r;
}

DialogReport evaluate_dialog(SeqModel& model, const Vocab& vocab,
                             const PairedCorpus& test, int max_len,
                             const EvalOptions& opts) {
  DialogReport r;
  auto responses = respond_corpus(model, vocab, test.sources, max_len);
  r.bleu2 = bleu_n(responses, test.targets, 2);
  r.bleu4 = bleu_n(responses, test.targets, 4);
  std::vector<TokenSentence> nonempty;
  for (auto& s : responses)
    if (!s.empty()) nonempty.push_back(std::move(s));
  if (!nonempty.empty()) {
    r.entropy = word_entropy(nonempty, opts.entropy_base);
    r.dist1 = distinct_n(nonempty, 1);
    r.dist2 = distinct_n(nonempty, 2);
  }
  r.ref_entropy = word_entropy(test.targets, opts.entropy_base);
  r.ref_dist1 = distinct_n(test.targets, 1);
  r.ref_dist2 = distinct_n(test.targets, 2);
  return r;
}

namespace {

void put(std::ostringstream& os, const char* key, double v) {
  os << key << ": " << v << "\n";
}

} // namespace

std::string format_report(const AutoencoderReport& r, const EvalOptions& opts) {
  std::ostringstream os;
  os.precision(6);
  os << "# reconstruction: greedy decode of the posterior mean\n";
  os << "# sampling: " << opts.sample_count
     << " prior draws, greedy-decoded; ppl from an order-" << opts.ppl_order
     << " add-" << opts.ppl_smoothing << " lm on the reference corpus\n";
  put(os, "bleu", r.bleu);
  put(os, "bleu_x100", 100.0 * r.bleu);
  put(os, "ppl", r.ppl);
  put(os, "unikl", r.unikl);
  put(os, "entropy", r.entropy);
  put(os, "avg_len", r.sample_avg_len);
  put(os, "corpus_entropy", r.corpus_entropy);
  put(os, "corpus_avg_len", r.corpus_avg_len);
  os << "BLEU\tPPL\tUniKL\tEntropy\tAvgLen\n";
  os << r.bleu << '\t' << r.ppl << '\t' << r.unikl << '\t' << r.entropy << '\t'
     << r.sample_avg_len << '\n';
  return os.str();
}

std::string format_report(const DialogReport& r, const EvalOptions& opts) {
  std::ostringstream os;
  os.precision(6);
  os << "# dialog generation: greedy responses to test sources\n";
  put(os, "bleu2", r.bleu2);
  put(os, "bleu2_x100", 100.0 * r.bleu2);
  put(os, "bleu4", r.bleu4);
  put(os, "bleu4_x100", 100.0 * r.bleu4);
  put(os, "entropy", r.entropy);
  put(os, "dist1", r.dist1);
  put(os, "dist2", r.dist2);
  put(os, "test_entropy", r.ref_entropy);
  put(os, "test_dist1", r.ref_dist1);
  put(os, "test_dist2", r.ref_dist2);
  os << "BLEU-2\tBLEU-4\tEntropy\tDist-1\tDist-2\n";
  os << r.bleu2 << '\t' << r.bleu4 << '\t' << r.entropy << '\t' << r.dist1 << '\t'
     << r.dist2 << '\n';
  return os.str();
}

std::string format_sigma_histogram(const SigmaHistogram& hist) {
  std::ostringstream os;
  os.precision(10);
  os << "# sigma histogram: 200 buckets over (0,1); last row (midpoint 1) is "
        "the overflow bucket for sigma >= 1\n";
  for (int i = 0; i < SigmaHistogram::kBuckets; ++i) {
    const double mid = (static_cast<double>(i) + 0.5) / SigmaHistogram::kBuckets;
    os << mid << '\t' << hist.counts[static_cast<std::size_t>(i)] << '\n';
  }
  os << 1.0 << '\t' << hist.overflow << '\n';
  return os.str();
}

std::string sentence_to_string(const TokenSentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) out += ' ';
    out += s[i];
  }
  return out;
}

} // namespace swae
