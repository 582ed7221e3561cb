#include "swae/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace swae {

namespace {

constexpr char kSep = '\x1f'; // joins tokens into n-gram / context keys
const char* kEosMark = "<eos>";
const char* kBosMark = "<bos>";
const char* kUnkMark = "<unk>";

std::string join(const std::vector<std::string>& toks, std::size_t begin,
                 std::size_t end) {
  std::string key;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) key += kSep;
    key += toks[i];
  }
  return key;
}

std::unordered_map<std::string, long> ngram_counts(const TokenSentence& s, int n) {
  std::unordered_map<std::string, long> counts;
  if (static_cast<int>(s.size()) >= n)
    for (std::size_t i = 0; i + n <= s.size(); ++i)
      counts[join(s, i, i + n)] += 1;
  return counts;
}

} // namespace

double bleu_n(const std::vector<TokenSentence>& candidates,
              const std::vector<TokenSentence>& references, int max_n) {
  if (candidates.empty())
    throw std::invalid_argument("bleu: empty corpus");
  if (candidates.size() != references.size())
    throw std::invalid_argument("bleu: " + std::to_string(candidates.size()) +
                                " candidates vs " + std::to_string(references.size()) +
                                " references");
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");

  std::vector<long> matched(static_cast<std::size_t>(max_n), 0);
  std::vector<long> total(static_cast<std::size_t>(max_n), 0);
  long cand_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_len += static_cast<long>(candidates[i].size());
    ref_len += static_cast<long>(references[i].size());
    for (int n = 1; n <= max_n; ++n) {
      auto cand = ngram_counts(candidates[i], n);
      auto ref = ngram_counts(references[i], n);
      for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end())
          matched[static_cast<std::size_t>(n - 1)] += std::min(count, it->second);
        total[static_cast<std::size_t>(n - 1)] += count;
      }
    }
  }
  if (cand_len == 0) return 0.0;

  double log_precision = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const std::size_t k = static_cast<std::size_t>(n - 1);
    double m = static_cast<double>(matched[k]);
    double t = static_cast<double>(total[k]);
    if (n >= 2) { // +1 smoothing keeps short-sentence scores finite
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0) return 0.0;
    log_precision += std::log(m / t) / max_n;
  }
  const double bp =
      cand_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_precision);
}

NgramLM NgramLM::train(const std::vector<TokenSentence>& corpus, int order,
                       double smoothing_k) {
  if (corpus.empty()) throw std::invalid_argument("NgramLM: empty corpus");
  if (order < 1) throw std::invalid_argument("NgramLM: order must be >= 1");
  if (smoothing_k < 0.0) throw std::invalid_argument("NgramLM: negative smoothing");
  NgramLM lm(order, smoothing_k);
  for (const auto& sentence : corpus) {
    std::vector<std::string> padded(static_cast<std::size_t>(order - 1), kBosMark);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.push_back(kEosMark);
    for (const auto& tok : sentence) lm.vocab_[tok] = true;
    for (std::size_t i = static_cast<std::size_t>(order - 1); i < padded.size(); ++i) {
      const std::string ctx = join(padded, i - (order - 1), i);
      lm.counts_[ctx][padded[i]] += 1;
      lm.context_totals_[ctx] += 1;
    }
  }
  lm.vocab_.erase(kEosMark); // EOS is accounted for separately
  return lm;
}

NgramLM NgramLM::uniform(int event_space) {
  if (event_space < 1) throw std::invalid_argument("NgramLM: event space must be >= 1");
  NgramLM lm(1, 0.0);
  lm.uniform_size_ = event_space;
  return lm;
}

int NgramLM::event_space() const {
  if (uniform_size_ > 0) return uniform_size_;
  return static_cast<int>(vocab_.size()) + 2; // + EOS + UNK
}

std::string NgramLM::event_token(const std::string& tok) const {
  if (tok == kEosMark || tok == kBosMark) return tok;
  return vocab_.count(tok) ? tok : kUnkMark;
}

std::string NgramLM::context_key(const std::vector<std::string>& context) const {
  std::vector<std::string> window(static_cast<std::size_t>(order_ - 1), kBosMark);
  for (const auto& tok : context) {
    window.erase(window.begin());
    window.push_back(event_token(tok));
  }
  return join(window, 0, window.size());
}

double NgramLM::conditional(const std::vector<std::string>& context,
                            const std::string& token) const {
  if (uniform_size_ > 0) return 1.0 / static_cast<double>(uniform_size_);
  const std::string ctx = context_key(context);
  const std::string ev = event_token(token);
  long count = 0;
  long total = 0;
  if (auto it = context_totals_.find(ctx); it != context_totals_.end()) {
    total = it->second;
    const auto& row = counts_.at(ctx);
    if (auto jt = row.find(ev); jt != row.end()) count = jt->second;
  }
  const double denom = static_cast<double>(total) + k_ * event_space();
  if (denom == 0.0) return 0.0; // k = 0 and unseen context
  return (static_cast<double>(count) + k_) / denom;
}

double NgramLM::log_prob(const TokenSentence& sentence) const {
  std::vector<std::string> context;
  double lp = 0.0;
  for (const auto& tok : sentence) {
    lp += std::log(conditional(context, tok));
    context.push_back(tok);
  }
  lp += std::log(conditional(context, kEosMark));
  return lp;
}

double perplexity(const NgramLM& lm, const std::vector<TokenSentence>& sentences) {
  if (sentences.empty()) throw std::invalid_argument("perplexity: empty corpus");
  double lp = 0.0;
  long tokens = 0;
  for (const auto& s : sentences) {
    lp += lm.log_prob(s);
    tokens += static_cast<long>(s.size()) + 1; // + EOS
  }
  return std::exp(-lp / static_cast<double>(tokens));
}

namespace {

std::unordered_map<std::string, long> unigram_table(
    const std::vector<TokenSentence>& corpus, long* total) {
  std::unordered_map<std::string, long> counts;
  *total = 0;
  for (const auto& s : corpus)
    for (const auto& tok : s) {
      counts[tok] += 1;
      ++*total;
    }
  return counts;
}

} // namespace

double unigram_kl(const std::vector<TokenSentence>& generated,
                  const std::vector<TokenSentence>& reference, double smoothing_k) {
  if (generated.empty() || reference.empty())
    throw std::invalid_argument("unigram_kl: empty corpus");
  long n_gen = 0, n_ref = 0;
  auto gen = unigram_table(generated, &n_gen);
  auto ref = unigram_table(reference, &n_ref);

  std::unordered_map<std::string, bool> support;
  for (const auto& [tok, _] : gen) support[tok] = true;
  for (const auto& [tok, _] : ref) support[tok] = true;
  const double v = static_cast<double>(support.size());

  double kl = 0.0;
  for (const auto& [tok, _] : support) {
    const auto g = gen.find(tok);
    const auto r = ref.find(tok);
    const double p = ((g != gen.end() ? g->second : 0) + smoothing_k) /
                     (static_cast<double>(n_gen) + smoothing_k * v);
    const double q = ((r != ref.end() ? r->second : 0) + smoothing_k) /
                     (static_cast<double>(n_ref) + smoothing_k * v);
    if (p > 0.0) kl += p * (std::log(p) - std::log(q));
  }
  return kl;
}

double word_entropy(const std::vector<TokenSentence>& sentences, double log_base) {
  if (sentences.empty()) throw std::invalid_argument("word_entropy: empty corpus");
  if (!(log_base > 1.0)) throw std::invalid_argument("word_entropy: log base must be > 1");
  long total = 0;
  auto counts = unigram_table(sentences, &total);
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h / std::log(log_base);
}

double avg_len(const std::vector<TokenSentence>& sentences) {
  if (sentences.empty()) throw std::invalid_argument("avg_len: empty corpus");
  long total = 0;
  for (const auto& s : sentences) total += static_cast<long>(s.size());
  return static_cast<double>(total) / static_cast<double>(sentences.size());
}

double distinct_n(const std::vector<TokenSentence>& sentences, int n) {
  if (sentences.empty()) throw std::invalid_argument("distinct_n: empty corpus");
  if (n != 1 && n != 2)
    throw std::invalid_argument("distinct_n: n must be 1 or 2, got " + std::to_string(n));
  std::unordered_map<std::string, bool> unique;
  long total = 0;
  for (const auto& s : sentences) {
    for (const auto& [gram, count] : ngram_counts(s, n)) {
      unique[gram] = true;
      total += count;
    }
  }
  if (total == 0)
    throw std::invalid_argument("distinct_n: no n-grams of order " + std::to_string(n) +
                                " in corpus");
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

} // namespace swae
