#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seqqa/corpus.hpp"
#include "seqqa/seq2seq.hpp"

namespace seqqa {

// Layout:
//   "SQAC" | u32 LE version | u64 LE header length | UTF-8 JSON header | payload
// The header holds {hyper: {V, E, H, num_layers}, vocab: [...],
// tensors: [{name, shape, offset, length}]}; offsets are relative to the
// payload start, which is raw little-endian float32 in manifest order.
inline constexpr char kCheckpointMagic[4] = {'S', 'Q', 'A', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams<float> params;
  Vocabulary vocab;
  Hyper hyper() const { return params.hyper; }
};

std::vector<char> serialize_checkpoint(const ModelParams<float>& params, const Vocabulary& vocab);
Checkpoint deserialize_checkpoint(const std::vector<char>& bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params, const Vocabulary& vocab);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace seqqa
