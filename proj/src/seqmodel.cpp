#include "swae/seqmodel.hpp"

#include <stdexcept>

namespace swae {

SeqModel::SeqModel(const SeqModelDims& dims)
    : embedding("embedding", Matrix::Zero(dims.vocab, dims.embedding)),
      encoder("encoder", dims.embedding, dims.hidden),
      decoder("decoder", dims.embedding + dims.latent, dims.hidden),
      heads("heads", dims.hidden, dims.latent),
      output("output", dims.hidden, dims.vocab),
      dims_(dims) {
  if (dims.vocab < 5)
    throw std::invalid_argument("SeqModel: vocab must cover the 4 reserved ids, got " +
                                std::to_string(dims.vocab));
  if (dims.embedding < 1 || dims.hidden < 1 || dims.latent < 1)
    throw std::invalid_argument("SeqModel: dims must be positive");
}

void SeqModel::init(Rng& rng) {
  constexpr double kRange = 0.08;
  embedding.value = rng.uniform_matrix(embedding.value.rows(), embedding.value.cols(),
                                       -kRange, kRange);
  encoder.init(rng, kRange);
  decoder.init(rng, kRange);
  heads.mu.init(rng, kRange);
  heads.log_sigma.init(rng, kRange);
  output.init(rng, kRange);
}

std::vector<Parameter*> SeqModel::parameters() {
  std::vector<Parameter*> out{&embedding};
  for (Parameter* p : encoder.parameters()) out.push_back(p);
  for (Parameter* p : decoder.parameters()) out.push_back(p);
  for (Parameter* p : heads.parameters()) out.push_back(p);
  out.push_back(&output.weight);
  out.push_back(&output.bias);
  return out;
}

namespace {

std::vector<int> column_ids(const Batch& batch, Index col) {
  std::vector<int> ids(static_cast<std::size_t>(batch.size()));
  for (Index r = 0; r < batch.size(); ++r)
    ids[static_cast<std::size_t>(r)] = batch.ids(r, col);
  return ids;
}

void check_batch(const SeqModel& model, const Batch& batch, const char* where) {
  if (batch.size() == 0) throw std::invalid_argument(std::string(where) + ": empty batch");
  for (int len : batch.lengths)
    if (len < 1) throw std::invalid_argument(std::string(where) + ": empty sentence in batch");
  if (batch.ids.maxCoeff() >= model.dims().vocab || batch.ids.minCoeff() < 0)
    throw std::invalid_argument(std::string(where) + ": token id out of range for vocab " +
                                std::to_string(model.dims().vocab));
}

} // namespace

Tensor encode_hidden(Binder& bind, SeqModel& model, const Batch& batch) {
  check_batch(model, batch, "encode_hidden");
  Tape& tape = bind.tape();
  const Index n = batch.size();
  Tensor emb = bind(model.embedding);
  LstmState state = lstm_zero_state(tape, n, model.dims().hidden);

  int max_len = 0;
  for (int len : batch.lengths) max_len = std::max(max_len, len);

  Tensor final_hidden = tape.constant(Matrix::Zero(n, model.dims().hidden));
  for (int t = 1; t <= max_len; ++t) {
    Tensor x = gather_rows(emb, column_ids(batch, t));
    state = lstm_step(bind, model.encoder, x, state);
    Vector mask = Vector::Zero(n);
    bool any = false;
    for (Index r = 0; r < n; ++r) {
      if (batch.lengths[static_cast<std::size_t>(r)] == t) {
        mask[r] = 1.0;
        any = true;
      }
    }
    if (any) final_hidden = add(final_hidden, scale_rows(state.h, mask));
  }
  return final_hidden;
}

std::vector<Tensor> decode_teacher_forced(Binder& bind, SeqModel& model,
                                          const Tensor& z, const Batch& targets,
                                          double word_dropout_rate, Rng* rng) {
  check_batch(model, targets, "decode_teacher_forced");
  if (word_dropout_rate < 0.0 || word_dropout_rate > 1.0)
    throw std::invalid_argument("decode_teacher_forced: dropout rate " +
                                std::to_string(word_dropout_rate) + " outside [0, 1]");
  if (word_dropout_rate > 0.0 && rng == nullptr)
    throw std::invalid_argument("decode_teacher_forced: dropout needs an rng");
  if (z.rows() != targets.size() || z.cols() != model.dims().latent)
    throw std::invalid_argument("decode_teacher_forced: z shape " +
                                Tape::shape_str(z.value()) + " does not match batch");

  Tape& tape = bind.tape();
  Tensor emb = bind(model.embedding);
  LstmState state = lstm_zero_state(tape, targets.size(), model.dims().hidden);
  std::vector<Tensor> logits;
  logits.reserve(static_cast<std::size_t>(targets.time_steps() - 1));
  for (Index t = 0; t + 1 < targets.time_steps(); ++t) {
    std::vector<int> prev = column_ids(targets, t);
    if (word_dropout_rate > 0.0 && t >= 1) {
      for (int& id : prev) {
        const bool droppable = id != Vocab::kPad && id != Vocab::kBos && id != Vocab::kEos;
        if (droppable && rng->bernoulli(word_dropout_rate)) id = Vocab::kUnk;
      }
    }
    Tensor x = concat_cols(gather_rows(emb, prev), z);
    state = lstm_step(bind, model.decoder, x, state);
    logits.push_back(add(matmul(state.h, bind(model.output.weight)),
                         bind(model.output.bias)));
  }
  return logits;
}

Tensor sequence_cross_entropy(const std::vector<Tensor>& step_logits,
                              const Batch& targets) {
  if (step_logits.empty())
    throw std::invalid_argument("sequence_cross_entropy: no steps");
  Tensor total;
  for (std::size_t t = 0; t < step_logits.size(); ++t) {
    const Index col = static_cast<Index>(t) + 1;
    std::vector<int> tgt = column_ids(targets, col);
    std::vector<double> weight(tgt.size());
    for (std::size_t r = 0; r < tgt.size(); ++r) {
      // real positions are columns 1..len+1 (tokens then EOS)
      weight[r] = col <= targets.lengths[r] + 1 ? 1.0 : 0.0;
    }
    Tensor step = cross_entropy_sum(step_logits[t], tgt, weight);
    total = t == 0 ? step : add(total, step);
  }
  return total;
}

namespace {

/// One decoder step outside training: embeds prev ids, appends z, returns
/// raw logit values.
Matrix generation_step(Binder& bind, SeqModel& model, const std::vector<int>& prev,
                       const Tensor& z, LstmState& state) {
  Tensor x = concat_cols(gather_rows(bind(model.embedding), prev), z);
  state = lstm_step(bind, model.decoder, x, state);
  Tensor logits =
      add(matmul(state.h, bind(model.output.weight)), bind(model.output.bias));
  return logits.value();
}

int argmax_lowest(const Eigen::RowVectorXd& row) {
  int best = 0;
  for (int j = 1; j < row.size(); ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

std::vector<std::vector<int>> run_decoder(
    SeqModel& model, const Matrix& z, int max_len,
    const std::function<int(const Eigen::RowVectorXd&, Index)>& choose) {
  if (max_len < 1) throw std::invalid_argument("decode: max_len must be >= 1");
  if (z.cols() != model.dims().latent)
    throw std::invalid_argument("decode: z width " + std::to_string(z.cols()) +
                                " does not match latent dim " +
                                std::to_string(model.dims().latent));
  const Index n = z.rows();
  Tape tape;
  Binder bind(tape);
  Tensor z_const = tape.constant(z);
  LstmState state = lstm_zero_state(tape, n, model.dims().hidden);
  std::vector<int> prev(static_cast<std::size_t>(n), Vocab::kBos);
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (int t = 0; t < max_len; ++t) {
    const Matrix logits = generation_step(bind, model, prev, z_const, state);
    bool all_done = true;
    for (Index r = 0; r < n; ++r) {
      const auto ri = static_cast<std::size_t>(r);
      if (done[ri]) continue;
      const int pick = choose(logits.row(r), r);
      if (pick == Vocab::kEos) {
        done[ri] = true;
      } else {
        out[ri].push_back(pick);
        prev[ri] = pick;
        all_done = false;
      }
    }
    if (all_done) break;
  }
  return out;
}

} // namespace

std::vector<std::vector<int>> decode_greedy(SeqModel& model, const Matrix& z,
                                            int max_len) {
  return run_decoder(model, z, max_len,
                     [](const Eigen::RowVectorXd& row, Index) {
                       return argmax_lowest(row);
                     });
}

std::vector<std::vector<int>> decode_sample(SeqModel& model, const Matrix& z,
                                            int max_len, double temperature,
                                            Rng& rng) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("decode_sample: temperature must be positive, got " +
                                std::to_string(temperature));
  return run_decoder(model, z, max_len,
                     [&rng, temperature](const Eigen::RowVectorXd& row, Index) {
                       Eigen::ArrayXd scaled = row.array() / temperature;
                       Eigen::ArrayXd p = (scaled - scaled.maxCoeff()).exp();
                       p /= p.sum();
                       return rng.categorical(std::span<const double>(p.data(),
                                                                      static_cast<std::size_t>(p.size())));
                     });
}

Vector encode_last_hidden(SeqModel& model, const std::vector<int>& token_ids) {
  if (token_ids.empty())
    throw std::invalid_argument("encode_last_hidden: empty input");
  Tape tape;
  Binder bind(tape);
  Batch b = make_batch({token_ids});
  Tensor h = encode_hidden(bind, model, b);
  return h.value().row(0).transpose();
}

GaussianPosterior encode_posterior(SeqModel& model, const std::vector<int>& token_ids) {
  return posterior_from_hidden(model.heads, encode_last_hidden(model, token_ids));
}

} // namespace swae
