#include "seqqa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "seqqa/errors.hpp"

namespace seqqa {

namespace {

using json = nlohmann::json;

constexpr std::size_t kPreambleSize = 4 + 4 + 8;

template <typename U>
void put_le(std::vector<char>& out, U value) {
  for (std::size_t k = 0; k < sizeof(U); ++k) out.push_back(static_cast<char>((value >> (8 * k)) & 0xff));
}

template <typename U>
U get_le(const char* p) {
  U v = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) v |= static_cast<U>(static_cast<unsigned char>(p[k])) << (8 * k);
  return v;
}

}  // namespace

std::vector<char> serialize_checkpoint(const ModelParams<float>& params, const Vocabulary& vocab) {
  if (vocab.size() != params.hyper.vocab_size) {
    throw ContractError("vocabulary has " + std::to_string(vocab.size()) + " tokens, model expects " +
                        std::to_string(params.hyper.vocab_size));
  }
  json header;
  header["hyper"] = {{"V", params.hyper.vocab_size},
                     {"E", params.hyper.embed_size},
                     {"H", params.hyper.hidden_size},
                     {"num_layers", params.hyper.num_layers}};
  header["vocab"] = vocab.tokens();
  json manifest = json::array();
  std::uint64_t offset = 0;
  const auto tensors = params.named_tensors();
  for (const auto& [name, t] : tensors) {
    const std::uint64_t length = t->size() * sizeof(float);
    manifest.push_back({{"name", name}, {"shape", t->shape()}, {"offset", offset}, {"length", length}});
    offset += length;
  }
  header["tensors"] = std::move(manifest);
  const std::string text = header.dump();

  std::vector<char> out;
  out.reserve(kPreambleSize + text.size() + offset);
  out.insert(out.end(), std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, t] : tensors) {
    for (float v : t->data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::vector<char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("not a checkpoint");
  }
  if (bytes.size() < kPreambleSize) throw CheckpointError("corrupt checkpoint: truncated preamble");
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kCheckpointVersion) throw CheckpointError("unsupported version " + std::to_string(version));
  const auto header_len = get_le<std::uint64_t>(bytes.data() + 8);
  if (header_len > bytes.size() - kPreambleSize) throw CheckpointError("corrupt checkpoint: truncated header");

  json header;
  try {
    header = json::parse(bytes.begin() + kPreambleSize,
                         bytes.begin() + static_cast<std::ptrdiff_t>(kPreambleSize + header_len));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint: bad header: ") + e.what());
  }

  try {
    Hyper hyper;
    hyper.vocab_size = header.at("hyper").at("V").get<std::size_t>();
    hyper.embed_size = header.at("hyper").at("E").get<std::size_t>();
    hyper.hidden_size = header.at("hyper").at("H").get<std::size_t>();
    hyper.num_layers = header.at("hyper").at("num_layers").get<std::size_t>();
    Vocabulary vocab(header.at("vocab").get<std::vector<std::string>>());
    if (vocab.size() != hyper.vocab_size) throw CheckpointError("corrupt checkpoint: vocabulary size mismatch");

    Checkpoint ck{ModelParams<float>::zeros(hyper), std::move(vocab)};
    const char* payload = bytes.data() + kPreambleSize + header_len;
    const std::uint64_t payload_size = bytes.size() - kPreambleSize - header_len;
    const auto& manifest = header.at("tensors");
    auto tensors = ck.params.named_tensors();
    if (manifest.size() != tensors.size()) throw CheckpointError("corrupt checkpoint: tensor count mismatch");

    std::uint64_t expected_total = 0;
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      const auto& entry = manifest[k];
      auto& [name, tensor] = tensors[k];
      if (entry.at("name").get<std::string>() != name) {
        throw CheckpointError("corrupt checkpoint: expected tensor " + name + " at position " + std::to_string(k));
      }
      if (entry.at("shape").get<Shape>() != tensor->shape()) {
        throw CheckpointError("corrupt checkpoint: shape mismatch for " + name);
      }
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto length = entry.at("length").get<std::uint64_t>();
      if (length != tensor->size() * sizeof(float)) throw CheckpointError("corrupt checkpoint: bad length for " + name);
      if (offset > payload_size || length > payload_size - offset) {
        throw CheckpointError("corrupt checkpoint: payload too short for " + name);
      }
      auto data = tensor->data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<float>(get_le<std::uint32_t>(payload + offset + i * sizeof(float)));
      }
      expected_total += length;
    }
    if (expected_total != payload_size) {
      throw CheckpointError("corrupt checkpoint: manifest describes " + std::to_string(expected_total) +
                            " payload bytes, file has " + std::to_string(payload_size));
    }
    return ck;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint: malformed manifest: ") + e.what());
  } catch (const FormatError& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  } catch (const ContractError& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params, const Vocabulary& vocab) {
  const auto bytes = serialize_checkpoint(params, vocab);
  // Atomic replace via rename.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace seqqa
