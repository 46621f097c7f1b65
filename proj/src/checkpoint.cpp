#include "ctcsum/checkpoint.hpp"

#include <boost/crc.hpp>
#include <nlohmann/json.hpp>

#include "detail/binary_io.hpp"

namespace ctcsum {

namespace {

constexpr std::string_view kMagic = "CTCH";
constexpr std::size_t kHeaderBytes = 16;

nlohmann::json metadata(const Checkpoint& ckpt) {
  const TrainConfig& c = ckpt.config;
  const ModelDims& d = ckpt.params.dims;
  nlohmann::json meta;
  meta["config"] = {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
                    {"epochs", c.epochs},               {"clip_norm", c.clip_norm},
                    {"seed", c.seed},                   {"optimizer", to_string(c.optimizer)},
                    {"d_emb", c.d_emb},                 {"d_hidden", c.d_hidden},
                    {"layers", c.layers},               {"threads", c.threads}};
  meta["dims"] = {{"input_vocab", d.input_vocab}, {"output_labels", d.output_labels},
                  {"d_emb", d.d_emb},             {"d_hidden", d.d_hidden},
                  {"layers", d.layers}};
  meta["preprocess"] = {{"mode", to_string(ckpt.preprocess.mode)},
                        {"k", ckpt.preprocess.k},
                        {"truncate", ckpt.preprocess.truncate}};
  meta["input_vocab"] = ckpt.input_vocab.tokens();
  meta["output_vocab"] = ckpt.output_vocab.tokens();
  meta["step"] = ckpt.step;
  meta["seed"] = c.seed;
  auto& names = meta["tensors"] = nlohmann::json::array();
  for (const auto& t : ckpt.params.tensors()) names.push_back(t.name);
  return meta;
}

}  // namespace

std::uint64_t crc64(std::string_view bytes) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.input_vocab.size() != ckpt.params.dims.input_vocab ||
      ckpt.output_vocab.size() != ckpt.params.dims.output_labels)
    throw CheckpointError("vocabulary sizes do not match the model dimensions");
  const std::string meta = metadata(ckpt).dump();
  std::string payload;
  detail::put_u32(payload, static_cast<std::uint32_t>(meta.size()));
  payload += meta;
  for (const auto& t : ckpt.params.tensors()) {
    const Matrix& m = *t.value;
    if (t.vector) {
      detail::put_u32(payload, 1);
      detail::put_u32(payload, static_cast<std::uint32_t>(m.size()));
    } else {
      detail::put_u32(payload, 2);
      detail::put_u32(payload, static_cast<std::uint32_t>(m.rows()));
      detail::put_u32(payload, static_cast<std::uint32_t>(m.cols()));
    }
    for (double v : m.values()) detail::put_f32(payload, static_cast<float>(v));
  }

  std::string out(kMagic);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u64(out, crc64(payload));
  out += payload;
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes) throw CheckpointError("checkpoint truncated: header incomplete");
  detail::ByteReader header(bytes.substr(0, kHeaderBytes));
  if (header.take(4) != kMagic) throw CheckpointError("not a checkpoint: bad magic");
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion)
    throw UnsupportedVersionError("unsupported checkpoint version " + std::to_string(version) +
                                  " (expected " + std::to_string(kCheckpointVersion) + ")");
  const std::uint64_t expected = header.u64();
  const std::string_view payload = bytes.substr(kHeaderBytes);
  if (crc64(payload) != expected) throw ChecksumError("checkpoint checksum mismatch");

  detail::ByteReader in(payload);
  try {
    const auto meta = nlohmann::json::parse(in.take(in.u32()));
    Checkpoint ckpt;
    const auto& c = meta.at("config");
    ckpt.config.learning_rate = c.at("learning_rate").get<double>();
    ckpt.config.batch_size = c.at("batch_size").get<std::size_t>();
    ckpt.config.epochs = c.at("epochs").get<std::size_t>();
    ckpt.config.clip_norm = c.at("clip_norm").get<double>();
    ckpt.config.seed = c.at("seed").get<std::uint64_t>();
    ckpt.config.optimizer = parse_optimizer(c.at("optimizer").get<std::string>());
    ckpt.config.d_emb = c.at("d_emb").get<std::size_t>();
    ckpt.config.d_hidden = c.at("d_hidden").get<std::size_t>();
    ckpt.config.layers = c.at("layers").get<std::size_t>();
    ckpt.config.threads = c.at("threads").get<std::size_t>();
    const auto& d = meta.at("dims");
    ModelDims dims{d.at("input_vocab").get<std::size_t>(), d.at("output_labels").get<std::size_t>(),
                   d.at("d_emb").get<std::size_t>(), d.at("d_hidden").get<std::size_t>(),
                   d.at("layers").get<std::size_t>()};
    const auto& p = meta.at("preprocess");
    ckpt.preprocess.mode = parse_token_mode(p.at("mode").get<std::string>());
    ckpt.preprocess.k = p.at("k").get<std::size_t>();
    ckpt.preprocess.truncate = p.at("truncate").get<std::size_t>();
    ckpt.input_vocab = Vocabulary::from_tokens(meta.at("input_vocab").get<std::vector<std::string>>());
    ckpt.output_vocab = Vocabulary::from_tokens(meta.at("output_vocab").get<std::vector<std::string>>());
    ckpt.step = meta.at("step").get<std::uint64_t>();

    ckpt.params = ModelParams::zeros(dims);
    for (auto& t : ckpt.params.tensors()) {
      Matrix& m = *t.value;
      const std::uint32_t rank = in.u32();
      std::vector<std::uint32_t> shape(rank);
      for (auto& s : shape) s = in.u32();
      const bool ok = t.vector ? (rank == 1 && shape[0] == m.size())
                               : (rank == 2 && shape[0] == m.rows() && shape[1] == m.cols());
      if (!ok) throw CheckpointError("tensor " + t.name + " has an unexpected shape");
      for (double& v : m.values()) v = static_cast<double>(in.f32());
    }
    if (in.remaining() != 0) throw CheckpointError("trailing bytes after the last tensor");
    return ckpt;
  } catch (const detail::TruncatedInput& e) {
    throw CheckpointError(std::string("checkpoint truncated: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("bad checkpoint metadata: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  detail::write_file_bytes(path.string(), serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = detail::read_file_bytes(path.string());
  } catch (const std::runtime_error& e) {
    throw CheckpointError(e.what());
  }
  return parse_checkpoint(bytes);
}

ModelParams round_to_storage(const ModelParams& params) {
  ModelParams out = params;
  for (auto& t : out.tensors())
    for (double& v : t.value->values()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace ctcsum
