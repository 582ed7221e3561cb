#include "swae/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace swae {

namespace {

std::string lowercased(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

TokenSentence tokenize(const std::string& line, int max_len) {
  TokenSentence out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok && static_cast<int>(out.size()) < max_len)
    out.push_back(lowercased(tok));
  return out;
}

} // namespace

Vocab::Vocab() {
  for (const char* t : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(t);
}

int Vocab::encode(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocab::decode(int id) const {
  if (id < 0 || id >= size())
    throw std::out_of_range("Vocab::decode: id " + std::to_string(id) +
                            " outside vocabulary of size " + std::to_string(size()));
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode_sentence(const TokenSentence& s) const {
  std::vector<int> ids;
  ids.reserve(s.size());
  for (const auto& tok : s) ids.push_back(encode(tok));
  return ids;
}

TokenSentence Vocab::decode_sentence(const std::vector<int>& ids) const {
  TokenSentence out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(decode(id));
  return out;
}

void Vocab::add(const std::string& token) {
  if (token_to_id_.count(token))
    throw std::invalid_argument("Vocab::add: duplicate token '" + token + "'");
  token_to_id_.emplace(token, size());
  id_to_token_.push_back(token);
}

Vocab build_vocab(const std::vector<TokenSentence>& sentences, int max_size) {
  if (sentences.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  if (max_size < 5)
    throw std::invalid_argument("build_vocab: max_size must be >= 5 (4 reserved ids), got " +
                                std::to_string(max_size));
  std::unordered_map<std::string, long> freq;
  std::vector<std::string> order; // first-occurrence order for tie breaks
  for (const auto& s : sentences) {
    for (const auto& tok : s) {
      auto [it, fresh] = freq.try_emplace(tok, 0);
      if (fresh) order.push_back(tok);
      it->second += 1;
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) {
                     return freq[a] > freq[b];
                   });
  Vocab v;
  const std::size_t keep = static_cast<std::size_t>(max_size - 4);
  for (std::size_t i = 0; i < order.size() && i < keep; ++i) v.add(order[i]);
  return v;
}

std::vector<TokenSentence> load_corpus(const std::string& path, int max_len) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_corpus: cannot open '" + path + "'");
  std::vector<TokenSentence> out;
  std::string line;
  while (std::getline(in, line)) {
    TokenSentence s = tokenize(line, max_len);
    if (!s.empty()) out.push_back(std::move(s));
  }
  if (out.empty())
    throw std::runtime_error("load_corpus: no usable lines in '" + path + "'");
  return out;
}

PairedCorpus load_paired_corpus(const std::string& path, int max_len) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_paired_corpus: cannot open '" + path + "'");
  PairedCorpus out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("load_paired_corpus: line " + std::to_string(line_no) +
                               " has no tab separator in '" + path + "'");
    const std::string src = line.substr(0, tab);
    const std::string tgt = line.substr(tab + 1);
    TokenSentence s = tokenize(src, max_len);
    TokenSentence t = tokenize(tgt, max_len);
    if (s.empty() || t.empty()) continue;
    if (!seen.emplace(src, tgt).second) continue; // exact duplicate pair
    out.sources.push_back(std::move(s));
    out.targets.push_back(std::move(t));
  }
  if (out.sources.empty())
    throw std::runtime_error("load_paired_corpus: no usable pairs in '" + path + "'");
  return out;
}

Batch make_batch(const std::vector<std::vector<int>>& id_sentences) {
  if (id_sentences.empty()) throw std::invalid_argument("make_batch: empty batch");
  std::size_t max_len = 0;
  for (const auto& s : id_sentences) {
    if (s.empty()) throw std::invalid_argument("make_batch: empty sentence");
    max_len = std::max(max_len, s.size());
  }
  Batch b;
  b.ids = Eigen::MatrixXi::Constant(static_cast<Index>(id_sentences.size()),
                                    static_cast<Index>(max_len + 2), Vocab::kPad);
  for (std::size_t i = 0; i < id_sentences.size(); ++i) {
    const auto& s = id_sentences[i];
    const Index r = static_cast<Index>(i);
    b.ids(r, 0) = Vocab::kBos;
    for (std::size_t j = 0; j < s.size(); ++j)
      b.ids(r, static_cast<Index>(j + 1)) = s[j];
    b.ids(r, static_cast<Index>(s.size() + 1)) = Vocab::kEos;
    b.lengths.push_back(static_cast<int>(s.size()));
  }
  return b;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

} // namespace

std::vector<Batch> make_batches(const std::vector<TokenSentence>& sentences,
                                const Vocab& vocab, int batch_size, Rng& rng) {
  if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");
  const auto idx = shuffled_indices(sentences.size(), rng);
  std::vector<Batch> out;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    if (end - start < 2) break; // short tail would break the MMD estimator
    std::vector<std::vector<int>> group;
    for (std::size_t i = start; i < end; ++i)
      group.push_back(vocab.encode_sentence(sentences[idx[i]]));
    out.push_back(make_batch(group));
  }
  return out;
}

std::vector<PairedBatch> make_paired_batches(const PairedCorpus& corpus,
                                             const Vocab& vocab, int batch_size,
                                             Rng& rng) {
  if (batch_size < 1)
    throw std::invalid_argument("make_paired_batches: batch_size must be >= 1");
  const auto idx = shuffled_indices(corpus.sources.size(), rng);
  std::vector<PairedBatch> out;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    if (end - start < 2) break;
    std::vector<std::vector<int>> src, tgt;
    for (std::size_t i = start; i < end; ++i) {
      src.push_back(vocab.encode_sentence(corpus.sources[idx[i]]));
      tgt.push_back(vocab.encode_sentence(corpus.targets[idx[i]]));
    }
    out.push_back(PairedBatch{make_batch(src), make_batch(tgt)});
  }
  return out;
}

namespace {

const std::vector<std::string>& dets() {
  static const std::vector<std::string> v = {"the", "a"};
  return v;
}
const std::vector<std::string>& adjs() {
  static const std::vector<std::string> v = {"red",   "big",   "small", "old",
                                             "young", "happy", "quiet", "bright",
                                             "tall",  "strange"};
  return v;
}
const std::vector<std::string>& nouns() {
  static const std::vector<std::string> v = {"dog",     "cat",    "bird",   "man",
                                             "woman",   "child",  "robot",  "teacher",
                                             "sailor",  "farmer", "singer", "artist"};
  return v;
}
const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {"sees",    "likes",  "follows", "helps",
                                             "finds",   "watches", "greets", "avoids",
                                             "carries", "draws"};
  return v;
}
const std::vector<std::string>& adverbs() {
  static const std::vector<std::string> v = {"quickly", "slowly", "quietly", "happily",
                                             "carefully"};
  return v;
}
const std::vector<std::string>& preps() {
  static const std::vector<std::string> v = {"near", "behind", "beside", "above",
                                             "under"};
  return v;
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))];
}

void emit_noun_phrase(TokenSentence& s, double p_adj, Rng& rng) {
  s.push_back(pick(dets(), rng));
  if (rng.bernoulli(p_adj)) s.push_back(pick(adjs(), rng));
  s.push_back(pick(nouns(), rng));
}

} // namespace

std::vector<TokenSentence> synth_corpus(const SynthGrammar& grammar, int count,
                                        Rng& rng) {
  if (count < 1) throw std::invalid_argument("synth_corpus: count must be >= 1");
  std::vector<TokenSentence> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    TokenSentence s;
    emit_noun_phrase(s, grammar.p_subject_adj, rng);
    s.push_back(pick(verbs(), rng));
    emit_noun_phrase(s, grammar.p_object_adj, rng);
    if (rng.bernoulli(grammar.p_prep_phrase)) {
      s.push_back(pick(preps(), rng));
      emit_noun_phrase(s, grammar.p_prep_adj, rng);
    }
    if (rng.bernoulli(grammar.p_adverb)) s.push_back(pick(adverbs(), rng));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TokenSentence> resolve_corpus(const std::string& spec, int max_len) {
  if (spec.rfind("synth:", 0) == 0) {
    const int count = std::stoi(spec.substr(6));
    Rng rng(0xC0FFEEull); // fixed: "synth:N" is the same corpus everywhere
    auto sentences = synth_corpus(SynthGrammar{}, count, rng);
    for (auto& s : sentences)
      if (static_cast<int>(s.size()) > max_len) s.resize(static_cast<std::size_t>(max_len));
    return sentences;
  }
  return load_corpus(spec, max_len);
}

} // namespace swae
