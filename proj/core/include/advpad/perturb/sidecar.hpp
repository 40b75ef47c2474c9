#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "advpad/perturb/perturb.hpp"

namespace advpad::perturb {

// One JSON object per line:
// {"index":N,"scheme":"prepad","header_bytes_used":H,"payload_insert_len":L,
//  "original_fields_hex":"<24 hex chars>"}
struct SidecarEntry {
  std::size_t index = 0;
  PerturbationRecord record;

  bool operator==(const SidecarEntry&) const = default;
};

std::string encode_sidecar_line(const SidecarEntry& entry);
SidecarEntry decode_sidecar_line(std::string_view line);  // throws ProtocolError

void write_sidecar(const std::filesystem::path& path, const std::vector<SidecarEntry>& entries);
std::vector<SidecarEntry> read_sidecar(const std::filesystem::path& path);

}  // namespace advpad::perturb
