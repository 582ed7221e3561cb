#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "swae/metrics.hpp"

using namespace swae;

namespace {

std::vector<TokenSentence> corpus(std::initializer_list<const char*> lines) {
  std::vector<TokenSentence> out;
  for (const char* line : lines) {
    TokenSentence s;
    std::string tok;
    for (const char* p = line;; ++p) {
      if (*p == ' ' || *p == '\0') {
        if (!tok.empty()) s.push_back(tok);
        tok.clear();
        if (*p == '\0') break;
      } else {
        tok += *p;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

} // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("bleu of a corpus against itself is 1") {
  auto x = corpus({"a b c", "the quick brown fox", "d"});
  CHECK(bleu(x, x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bleu with zero unigram overlap is 0") {
  CHECK(bleu(corpus({"a b"}), corpus({"c d"})) == 0.0);
}

TEST_CASE("bleu brevity penalty hand case") {
  // all precisions 1, candidate 4 tokens vs reference 5: BP = exp(1 - 5/4)
  const double score = bleu(corpus({"a b c d"}), corpus({"a b c d e"}));
  CHECK(score == doctest::Approx(std::exp(1.0 - 5.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("bleu stays within [0, 1] and ignores sentence order") {
  auto cand = corpus({"a b c", "x y", "a a a a"});
  auto ref = corpus({"a b d", "x y z", "a b a b"});
  const double s = bleu(cand, ref);
  CHECK(s >= 0.0);
  CHECK(s <= 1.0);
  auto cand2 = cand, ref2 = ref;
  std::swap(cand2[0], cand2[2]);
  std::swap(ref2[0], ref2[2]);
  CHECK(bleu(cand2, ref2) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("bleu rejects malformed corpora") {
  CHECK_THROWS_AS(bleu({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(bleu(corpus({"a"}), corpus({"a", "b"})), std::invalid_argument);
}

TEST_CASE("ngram lm conditionals are a distribution") {
  auto c = corpus({"a b", "a c"});
  const NgramLM lm = NgramLM::train(c, 2, 0.1);
  // event space: {a, b, c} + EOS + UNK = 5 (matches the hand count below)
  CHECK(lm.event_space() == 5);
  CHECK(lm.conditional({"a"}, "b") == doctest::Approx((1.0 + 0.1) / (2.0 + 0.1 * 5)));
  CHECK(lm.conditional({"a"}, "c") == doctest::Approx((1.0 + 0.1) / (2.0 + 0.1 * 5)));

  const std::vector<std::string> events = {"a", "b", "c", "<eos>", "never-seen"};
  for (const auto& ctx : {std::vector<std::string>{"a"}, std::vector<std::string>{"b"},
                          std::vector<std::string>{}}) {
    double total = 0.0;
    for (const auto& ev : events) total += lm.conditional(ctx, ev);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("degenerate repeated-sentence lm reaches perplexity 1 at k = 0") {
  // every context continues one way, so the MLE puts mass 1 on each event
  auto c = corpus({"a b c d", "a b c d", "a b c d"});
  const NgramLM lm = NgramLM::train(c, 2, 0.0);
  CHECK(perplexity(lm, c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform lm perplexity equals the vocabulary size") {
  const NgramLM lm = NgramLM::uniform(17);
  CHECK(perplexity(lm, corpus({"a b c", "d"})) == doctest::Approx(17.0).epsilon(1e-12));
}

TEST_CASE("trained lm beats random token strings on its own corpus") {
  Rng rng(19);
  SynthGrammar g;
  auto train = synth_corpus(g, 300, rng);
  const NgramLM lm = NgramLM::train(train, 3, 0.01);

  // random strings over the same tokens
  std::vector<std::string> pool;
  for (const auto& s : train)
    for (const auto& tok : s) pool.push_back(tok);
  std::vector<TokenSentence> noise;
  for (int i = 0; i < 100; ++i) {
    TokenSentence s;
    for (int j = 0; j < 8; ++j)
      s.push_back(pool[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))]);
    noise.push_back(std::move(s));
  }
  CHECK(perplexity(lm, train) <= perplexity(lm, noise));
}

TEST_CASE("unigram KL basics") {
  auto x = corpus({"a b c", "c b a"});
  CHECK(unigram_kl(x, x, 0.01) < 1e-12);

  std::vector<TokenSentence> gen(100, TokenSentence{"a"});
  std::vector<TokenSentence> ref;
  for (int i = 0; i < 50; ++i) ref.push_back({"a"});
  for (int i = 0; i < 50; ++i) ref.push_back({"b"});
  CHECK(unigram_kl(gen, ref, 1e-12) == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  Rng rng(23);
  SynthGrammar g;
  auto a = synth_corpus(g, 50, rng);
  auto b = synth_corpus(g, 50, rng);
  CHECK(unigram_kl(a, b, 0.01) >= 0.0);
}

TEST_CASE("word entropy hand cases") {
  CHECK(word_entropy(corpus({"a b c d"})) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(word_entropy(corpus({"a a a", "a a"})) == 0.0);
  CHECK(word_entropy(corpus({"a a b c"})) == doctest::Approx(1.5).epsilon(1e-12));
  // natural-log variant
  CHECK(word_entropy(corpus({"a b c d"}), std::exp(1.0)) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("average length") {
  CHECK(avg_len(corpus({"a b", "a b c d"})) == doctest::Approx(3.0));
  CHECK(avg_len(corpus({"x y z"})) == doctest::Approx(3.0));
  auto c = corpus({"a", "b c", "d e f"});
  auto shuffled = c;
  std::swap(shuffled[0], shuffled[2]);
  CHECK(avg_len(c) == avg_len(shuffled));
  CHECK_THROWS_AS(avg_len({}), std::invalid_argument);
}

TEST_CASE("distinct-n ratios") {
  CHECK(distinct_n(corpus({"a b c"}), 1) == doctest::Approx(1.0));
  CHECK(distinct_n(corpus({"a a a"}), 1) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(distinct_n(corpus({"a b", "a b"}), 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(distinct_n(corpus({"a", "b"}), 2), std::invalid_argument);
  CHECK_THROWS_AS(distinct_n(corpus({"a b"}), 3), std::invalid_argument);
}

TEST_CASE("metrics are invariant to corpus order") {
  Rng rng(29);
  SynthGrammar g;
  auto ref = synth_corpus(g, 60, rng);
  auto gen = synth_corpus(g, 40, rng);
  auto gen2 = gen;
  std::reverse(gen2.begin(), gen2.end());

  CHECK(word_entropy(gen, 2.0) == doctest::Approx(word_entropy(gen2, 2.0)).epsilon(1e-12));
  CHECK(unigram_kl(gen, ref, 0.01) == doctest::Approx(unigram_kl(gen2, ref, 0.01)).epsilon(1e-12));
  CHECK(distinct_n(gen, 2) == distinct_n(gen2, 2));
  const NgramLM lm = NgramLM::train(ref, 3, 0.01);
  CHECK(perplexity(lm, gen) == doctest::Approx(perplexity(lm, gen2)).epsilon(1e-12));
}

TEST_SUITE_END();
