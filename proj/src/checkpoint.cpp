#include "swae/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace swae {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'S', 'W', 'A', 'E'};
constexpr unsigned char kVersion = 1;

std::uint64_t fnv1a(const unsigned char* data, std::size_t len) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f64_le(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64_le(out, bits);
}

double get_f64_le(const unsigned char* p) {
  const std::uint64_t bits = get_u64_le(p);
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

json config_to_json(const TrainConfig& c) {
  return json{{"mode", c.mode},
              {"embedding_dim", c.embedding_dim},
              {"hidden_dim", c.hidden_dim},
              {"latent_dim", c.latent_dim},
              {"lambda_wae", c.lambda_wae},
              {"lambda_kl", c.lambda_kl},
              {"lambda_vae_max", c.lambda_vae_max},
              {"anneal", c.anneal},
              {"anneal_midpoint_epochs", c.anneal_midpoint_epochs},
              {"anneal_span_epochs", c.anneal_span_epochs},
              {"word_dropout", c.word_dropout},
              {"kernel_c", c.kernel_c},
              {"mmd_paper_literal", c.mmd_paper_literal},
              {"lr", c.lr},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"max_len", c.max_len},
              {"vocab_size", c.vocab_size},
              {"seed", c.seed},
              {"corpus", c.corpus},
              {"checkpoint_out", c.checkpoint_out},
              {"log_out", c.log_out}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.mode = j.at("mode").get<std::string>();
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.lambda_wae = j.at("lambda_wae").get<double>();
  c.lambda_kl = j.at("lambda_kl").get<double>();
  c.lambda_vae_max = j.at("lambda_vae_max").get<double>();
  c.anneal = j.at("anneal").get<std::string>();
  c.anneal_midpoint_epochs = j.at("anneal_midpoint_epochs").get<double>();
  c.anneal_span_epochs = j.at("anneal_span_epochs").get<double>();
  c.word_dropout = j.at("word_dropout").get<std::string>();
  c.kernel_c = j.at("kernel_c").get<double>();
  c.mmd_paper_literal = j.at("mmd_paper_literal").get<bool>();
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.seed = j.at("seed").get<long>();
  c.corpus = j.at("corpus").get<std::string>();
  c.checkpoint_out = j.at("checkpoint_out").get<std::string>();
  c.log_out = j.at("log_out").get<std::string>();
  return c;
}

struct ArrayRef {
  std::string name;
  const Matrix* matrix;
};

std::vector<ArrayRef> array_table(const TrainState& state) {
  std::vector<ArrayRef> refs;
  auto& model = const_cast<SeqModel&>(state.model);
  for (Parameter* p : model.parameters()) refs.push_back({p->name, &p->value});
  for (Parameter* p : model.parameters()) {
    auto it = state.adam.moments.find(p->name);
    if (it != state.adam.moments.end()) {
      refs.push_back({"adam.m:" + p->name, &it->second.m});
      refs.push_back({"adam.v:" + p->name, &it->second.v});
    }
  }
  return refs;
}

} // namespace

void save_checkpoint(const std::string& path, const TrainState& state) {
  json manifest;
  manifest["format"] = kVersion;
  manifest["config"] = config_to_json(state.config);

  std::vector<std::string> tokens(state.vocab.tokens().begin() + 4,
                                  state.vocab.tokens().end());
  manifest["vocab"] = tokens;

  manifest["counters"] = json{{"epoch", state.epoch},
                              {"batch_in_epoch", state.batch_in_epoch},
                              {"global_step", state.global_step},
                              {"adam_step", state.adam.step},
                              {"epoch_weighted_kl_acc", state.epoch_weighted_kl_acc},
                              {"epoch_step_count", state.epoch_step_count}};
  manifest["schedule"] = json{{"frozen", state.schedule.frozen},
                              {"frozen_value", state.schedule.frozen_value},
                              {"running_max", state.schedule.running_max},
                              {"seen_any", state.schedule.seen_any}};
  manifest["rng"] = state.rng.state();

  const auto refs = array_table(state);
  json arrays = json::array();
  std::uint64_t offset = 0;
  for (const auto& ref : refs) {
    arrays.push_back(json{{"name", ref.name},
                          {"rows", ref.matrix->rows()},
                          {"cols", ref.matrix->cols()},
                          {"offset", offset}});
    offset += static_cast<std::uint64_t>(ref.matrix->size()) * 8;
  }
  manifest["arrays"] = arrays;

  const std::string manifest_bytes = manifest.dump();

  std::string payload;
  payload.reserve(offset);
  for (const auto& ref : refs) {
    const Matrix& m = *ref.matrix;
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) put_f64_le(payload, m(r, c));
  }

  std::string blob;
  blob.append(kMagic, 4);
  blob.push_back(static_cast<char>(kVersion));
  put_u64_le(blob, manifest_bytes.size());
  put_u64_le(blob, fnv1a(reinterpret_cast<const unsigned char*>(manifest_bytes.data()),
                         manifest_bytes.size()));
  blob += manifest_bytes;
  put_u64_le(blob, payload.size());
  put_u64_le(blob, fnv1a(reinterpret_cast<const unsigned char*>(payload.data()),
                         payload.size()));
  blob += payload;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open '" + path + "' for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("save_checkpoint: write failed for '" + path + "'");
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());

  if (blob.size() < 21 || std::memcmp(blob.data(), kMagic, 4) != 0)
    throw std::runtime_error("load_checkpoint: '" + path + "' is not a SWAE checkpoint");
  if (bytes[4] != kVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version " +
                             std::to_string(static_cast<int>(bytes[4])));

  const std::uint64_t manifest_len = get_u64_le(bytes + 5);
  const std::uint64_t manifest_hash = get_u64_le(bytes + 13);
  if (blob.size() < 21 + manifest_len + 16)
    throw std::runtime_error("load_checkpoint: truncated file '" + path + "'");
  if (fnv1a(bytes + 21, manifest_len) != manifest_hash)
    throw std::runtime_error("load_checkpoint: manifest integrity check failed for '" +
                             path + "'");
  json manifest;
  try {
    manifest = json::parse(blob.substr(21, manifest_len));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("load_checkpoint: manifest parse error: ") +
                             e.what());
  }

  const std::size_t payload_at = 21 + manifest_len;
  const std::uint64_t payload_len = get_u64_le(bytes + payload_at);
  const std::uint64_t payload_hash = get_u64_le(bytes + payload_at + 8);
  if (blob.size() < payload_at + 16 + payload_len)
    throw std::runtime_error("load_checkpoint: truncated payload in '" + path + "'");
  const unsigned char* payload = bytes + payload_at + 16;
  if (fnv1a(payload, payload_len) != payload_hash)
    throw std::runtime_error("load_checkpoint: payload integrity check failed for '" +
                             path + "'");

  TrainState state;
  state.config = config_from_json(manifest.at("config"));

  for (const auto& tok : manifest.at("vocab").get<std::vector<std::string>>())
    state.vocab.add(tok);

  SeqModelDims dims;
  dims.vocab = state.vocab.size();
  dims.embedding = state.config.embedding_dim;
  dims.hidden = state.config.hidden_dim;
  dims.latent = state.config.latent_dim;
  state.model = SeqModel(dims);

  const auto& counters = manifest.at("counters");
  state.epoch = counters.at("epoch").get<long>();
  state.batch_in_epoch = counters.at("batch_in_epoch").get<long>();
  state.global_step = counters.at("global_step").get<long>();
  state.adam.step = counters.at("adam_step").get<long>();
  state.epoch_weighted_kl_acc = counters.at("epoch_weighted_kl_acc").get<double>();
  state.epoch_step_count = counters.at("epoch_step_count").get<long>();

  const auto& sched = manifest.at("schedule");
  state.schedule.frozen = sched.at("frozen").get<bool>();
  state.schedule.frozen_value = sched.at("frozen_value").get<double>();
  state.schedule.running_max = sched.at("running_max").get<double>();
  state.schedule.seen_any = sched.at("seen_any").get<bool>();

  state.rng.set_state(manifest.at("rng").get<std::string>());

  std::unordered_map<std::string, Parameter*> by_name;
  for (Parameter* p : state.model.parameters()) by_name[p->name] = p;

  for (const auto& entry : manifest.at("arrays")) {
    const std::string name = entry.at("name").get<std::string>();
    const Index rows = entry.at("rows").get<Index>();
    const Index cols = entry.at("cols").get<Index>();
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    const std::uint64_t bytes_needed = static_cast<std::uint64_t>(rows) * cols * 8;
    if (offset + bytes_needed > payload_len)
      throw std::runtime_error("load_checkpoint: array '" + name +
                               "' extends past payload end");
    Matrix m(rows, cols);
    const unsigned char* src = payload + offset;
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) {
        m(r, c) = get_f64_le(src);
        src += 8;
      }

    if (name.rfind("adam.m:", 0) == 0) {
      state.adam.moments[name.substr(7)].m = std::move(m);
    } else if (name.rfind("adam.v:", 0) == 0) {
      state.adam.moments[name.substr(7)].v = std::move(m);
    } else {
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw std::runtime_error("load_checkpoint: unknown parameter '" + name + "'");
      if (it->second->value.rows() != rows || it->second->value.cols() != cols)
        throw std::runtime_error("load_checkpoint: shape mismatch for '" + name + "'");
      it->second->value = std::move(m);
    }
  }
  return state;
}

} // namespace swae
