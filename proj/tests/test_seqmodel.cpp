#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "swae/gradcheck.hpp"
#include "swae/objectives.hpp"
#include "swae/optim.hpp"
#include "swae/seqmodel.hpp"

using namespace swae;

namespace {

SeqModel small_model(int vocab = 12, Index e = 6, Index h = 8, Index z = 4,
                     std::uint64_t seed = 17) {
  SeqModelDims dims;
  dims.vocab = vocab;
  dims.embedding = e;
  dims.hidden = h;
  dims.latent = z;
  SeqModel m(dims);
  Rng rng(seed);
  m.init(rng);
  return m;
}

Batch batch_of(const std::vector<std::vector<int>>& ids) { return make_batch(ids); }

Matrix logits_values(SeqModel& model, const Batch& b, const Matrix& z, double rate,
                     Rng* rng) {
  Tape tape;
  Binder bind(tape);
  Tensor zt = tape.constant(z);
  auto steps = decode_teacher_forced(bind, model, zt, b, rate, rng);
  Matrix out(static_cast<Index>(steps.size()) * b.size(), model.dims().vocab);
  for (std::size_t t = 0; t < steps.size(); ++t)
    out.middleRows(static_cast<Index>(t) * b.size(), b.size()) = steps[t].value();
  return out;
}

} // namespace

TEST_SUITE_BEGIN("seqmodel");

TEST_CASE("lstm step with zero weights and inputs is zero") {
  LstmParams p("p", 3, 4); // zero-constructed
  Tape tape;
  Binder bind(tape);
  Tensor x = tape.constant(Matrix::Zero(1, 3));
  LstmState s = lstm_zero_state(tape, 1, 4);
  LstmState next = lstm_step(bind, p, x, s);
  CHECK(next.h.value().cwiseAbs().maxCoeff() == 0.0);
  CHECK(next.c.value().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("saturated gates reduce to the identity on the cell") {
  LstmParams p("p", 3, 4);
  p.b_f.value.setConstant(50.0);  // forget -> 1
  p.b_i.value.setConstant(-50.0); // input -> 0
  Rng rng(3);
  Tape tape;
  Binder bind(tape);
  Tensor x = tape.constant(rng.normal_matrix(1, 3));
  Matrix c0 = rng.normal_matrix(1, 4);
  LstmState s{tape.constant(Matrix::Zero(1, 4)), tape.constant(c0)};
  LstmState next = lstm_step(bind, p, x, s);
  CHECK((next.c.value() - c0).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("lstm step matches an independent straight-line evaluation") {
  Rng rng(29);
  LstmParams p("p", 5, 7);
  p.init(rng, 0.6);
  const Matrix xv = rng.normal_matrix(1, 5);
  const Matrix hv = rng.normal_matrix(1, 7);
  const Matrix cv = rng.normal_matrix(1, 7);

  Tape tape;
  Binder bind(tape);
  LstmState s{tape.constant(hv), tape.constant(cv)};
  LstmState next = lstm_step(bind, p, tape.constant(xv), s);

  Vector h_ref, c_ref;
  oracles::lstm_step_reference(p.w_i.value, p.u_i.value, p.b_i.value, p.w_f.value,
                               p.u_f.value, p.b_f.value, p.w_g.value, p.u_g.value,
                               p.b_g.value, p.w_o.value, p.u_o.value, p.b_o.value,
                               xv.row(0).transpose(), hv.row(0).transpose(),
                               cv.row(0).transpose(), &h_ref, &c_ref);
  CHECK((next.h.value().row(0).transpose() - h_ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((next.c.value().row(0).transpose() - c_ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lstm step rejects mismatched dimensions") {
  LstmParams p("p", 3, 4);
  Tape tape;
  Binder bind(tape);
  Tensor bad = tape.constant(Matrix::Zero(1, 5));
  LstmState s = lstm_zero_state(tape, 1, 4);
  CHECK_THROWS_AS(lstm_step(bind, p, bad, s), std::invalid_argument);
}

TEST_CASE("encoding a single token equals one lstm step from zero") {
  SeqModel m = small_model();
  Tape tape;
  Binder bind(tape);
  Batch b = batch_of({{5}});
  Tensor h = encode_hidden(bind, m, b);

  Tape tape2;
  Binder bind2(tape2);
  Tensor x = gather_rows(bind2(m.embedding), {5});
  LstmState s = lstm_zero_state(tape2, 1, m.dims().hidden);
  LstmState next = lstm_step(bind2, m.encoder, x, s);
  CHECK((h.value() - next.h.value()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encoding is deterministic and order sensitive") {
  SeqModel m = small_model();
  const Vector a = encode_last_hidden(m, {4, 7, 9});
  const Vector b = encode_last_hidden(m, {4, 7, 9});
  CHECK((a - b).norm() == 0.0);
  const Vector swapped = encode_last_hidden(m, {7, 4, 9});
  CHECK((a - swapped).norm() > 1e-8);
}

TEST_CASE("encode rejects empty and out-of-range inputs") {
  SeqModel m = small_model();
  CHECK_THROWS_AS(encode_last_hidden(m, {}), std::invalid_argument);
  CHECK_THROWS_AS(encode_last_hidden(m, {99}), std::invalid_argument);
}

TEST_CASE("mixed-length batch encoding matches per-sentence encoding") {
  SeqModel m = small_model();
  Batch b = batch_of({{4, 5, 6, 7, 8}, {9, 10}, {11, 4, 5}});
  Tape tape;
  Binder bind(tape);
  const Matrix h = encode_hidden(bind, m, b).value();
  CHECK((h.row(0).transpose() - encode_last_hidden(m, {4, 5, 6, 7, 8})).norm() < 1e-12);
  CHECK((h.row(1).transpose() - encode_last_hidden(m, {9, 10})).norm() < 1e-12);
  CHECK((h.row(2).transpose() - encode_last_hidden(m, {11, 4, 5})).norm() < 1e-12);
}

TEST_CASE("teacher forcing without dropout is deterministic") {
  SeqModel m = small_model();
  Batch b = batch_of({{4, 5, 6}, {7, 8}});
  Rng rng(1);
  const Matrix z = rng.normal_matrix(2, m.dims().latent);
  CHECK(logits_values(m, b, z, 0.0, nullptr) == logits_values(m, b, z, 0.0, nullptr));
}

TEST_CASE("dropout rate 1 conditions every non-BOS token on UNK") {
  SeqModel m = small_model();
  Batch b = batch_of({{4, 5, 6, 7}});
  Rng rng(2);
  const Matrix z = rng.normal_matrix(1, m.dims().latent);
  Rng droprng(9);
  const Matrix dropped = logits_values(m, b, z, 1.0, &droprng);

  Batch manual = b;
  for (Index t = 1; t < manual.time_steps(); ++t) {
    int& id = manual.ids(0, t);
    if (id != Vocab::kPad && id != Vocab::kEos && id != Vocab::kBos) id = Vocab::kUnk;
  }
  const Matrix expected = logits_values(m, manual, z, 0.0, nullptr);
  CHECK((dropped - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dropout masks are reproducible under a fixed seed") {
  SeqModel m = small_model();
  Batch b = batch_of({{4, 5, 6, 7, 8, 9}, {10, 11, 4, 5, 6, 7}});
  Rng zr(3);
  const Matrix z = zr.normal_matrix(2, m.dims().latent);
  Rng r1(42), r2(42), r3(43);
  const Matrix a = logits_values(m, b, z, 0.5, &r1);
  const Matrix same = logits_values(m, b, z, 0.5, &r2);
  const Matrix other = logits_values(m, b, z, 0.5, &r3);
  CHECK((a - same).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - other).cwiseAbs().maxCoeff() > 0.0); // different mask almost surely
}

TEST_CASE("dropout rate outside [0,1] is rejected") {
  SeqModel m = small_model();
  Batch b = batch_of({{4}});
  Tape tape;
  Binder bind(tape);
  Tensor z = tape.constant(Matrix::Zero(1, m.dims().latent));
  Rng rng(1);
  CHECK_THROWS_AS(decode_teacher_forced(bind, m, z, b, -0.1, &rng), std::invalid_argument);
  CHECK_THROWS_AS(decode_teacher_forced(bind, m, z, b, 1.5, &rng), std::invalid_argument);
}

TEST_CASE("uniform logits cost log V per predicted position") {
  SeqModel m = small_model(12);
  m.output.weight.value.setZero();
  m.output.bias.value.setZero();
  const int len = 5;
  Batch b = batch_of({{4, 5, 6, 7, 8}});
  Tape tape;
  Binder bind(tape);
  Tensor z = tape.constant(Matrix::Zero(1, m.dims().latent));
  Tensor ce = sequence_cross_entropy(decode_teacher_forced(bind, m, z, b, 0.0, nullptr), b);
  // len real tokens plus EOS are predicted
  CHECK(ce.value()(0, 0) ==
        doctest::Approx((len + 1) * std::log(12.0)).epsilon(1e-9));
}

TEST_CASE("greedy decoding respects max_len and is pure") {
  SeqModel m = small_model();
  Rng rng(7);
  const Matrix z = rng.normal_matrix(3, m.dims().latent);
  auto out = decode_greedy(m, z, 6);
  REQUIRE(out.size() == 3);
  for (const auto& s : out) CHECK(s.size() <= 6);
  CHECK(decode_greedy(m, z, 6) == out);
}

TEST_CASE("a model overfitted to one sentence reproduces it greedily") {
  SeqModel m = small_model(12, 8, 16, 4, 5);
  const std::vector<int> sentence = {4, 7, 5, 9, 6};
  Batch b = batch_of({sentence, sentence});
  AdamState adam;
  auto params = m.parameters();
  for (int step = 0; step < 200; ++step) {
    Tape tape;
    Binder bind(tape);
    LossGraph loss = dae_loss(bind, m, b, b);
    zero_grads(params);
    tape.backward(loss.total);
    clip_global_norm(params, 5.0);
    adam_step(params, adam, AdamConfig{.lr = 5e-3});
  }
  const GaussianPosterior post = encode_posterior(m, sentence);
  auto decoded = decode_greedy(m, post.mu.transpose(), 10);
  REQUIRE(decoded.size() == 1);
  CHECK(decoded[0] == sentence);
}

TEST_CASE("sampling at vanishing temperature matches greedy decoding") {
  SeqModel m = small_model();
  Rng zr(11);
  const Matrix z = zr.normal_matrix(2, m.dims().latent);
  Rng sr(13);
  CHECK(decode_sample(m, z, 8, 1e-9, sr) == decode_greedy(m, z, 8));
}

TEST_CASE("sampling is reproducible and validates temperature") {
  SeqModel m = small_model();
  Rng zr(19);
  const Matrix z = zr.normal_matrix(2, m.dims().latent);
  Rng r1(5), r2(5);
  CHECK(decode_sample(m, z, 8, 1.0, r1) == decode_sample(m, z, 8, 1.0, r2));
  Rng r3(5);
  CHECK_THROWS_AS(decode_sample(m, z, 8, 0.0, r3), std::invalid_argument);
}

TEST_CASE("categorical sampling follows a hand-set two-way softmax") {
  Rng rng(23);
  const double probs[2] = {0.75, 0.25};
  int hits = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i)
    if (rng.categorical(std::span<const double>(probs, 2)) == 0) ++hits;
  // binomial: sd = sqrt(.75*.25/1000) ~ 0.0137, 0.04 is ~3 sigma
  CHECK(std::abs(static_cast<double>(hits) / n - 0.75) < 0.04);
}

TEST_CASE("encode-decode pipeline gradients pass the finite-difference oracle") {
  SeqModel m = small_model(10, 4, 5, 3, 31);
  Batch b = batch_of({{4, 5, 6}, {7, 8}});
  auto params = m.parameters();
  auto loss_value = [&]() {
    Tape tape;
    Binder bind(tape);
    return dae_loss(bind, m, b, b).total.value()(0, 0);
  };
  {
    Tape tape;
    Binder bind(tape);
    LossGraph loss = dae_loss(bind, m, b, b);
    zero_grads(params);
    tape.backward(loss.total);
  }
  CHECK(finite_difference_check(loss_value, params, 1e-5) < 1e-4);
}

TEST_SUITE_END();
