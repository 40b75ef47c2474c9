#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "advpad/bytes.hpp"
#include "advpad/nn/tape.hpp"

namespace advpad::nn {

// Binary layout: "ADVPADCK" | u32 format version | u32 header length |
// JSON header | tensor data as little-endian float64, in header order.
// The JSON header is {"format_version":1,"meta":{...},"sections":[{"name":
// ...,"tensors":[{"name","rows","cols"}]}]}.
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct CheckpointSection {
  std::string name;
  ParameterStore params;
};

struct Checkpoint {
  std::string meta_json;  // model-specific metadata object, serialized
  std::vector<CheckpointSection> sections;

  const ParameterStore& section(const std::string& name) const;  // throws Config
};

Bytes encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(ByteView blob);  // throws Config

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copy tensors from `source` into `target`, requiring identical names and
// shapes.
void load_parameters(ParameterStore& target, const ParameterStore& source);

// SHA-1 over "blob <size>\0" + contents, hex encoded (git object id).
std::string git_blob_hash(ByteView contents);

}  // namespace advpad::nn
