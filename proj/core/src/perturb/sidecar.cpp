#include "advpad/perturb/sidecar.hpp"

#include <fstream>

#include "advpad/error.hpp"
#include "json.hpp"

namespace advpad::perturb {

using nlohmann::json;

std::string encode_sidecar_line(const SidecarEntry& entry) {
  json j;
  j["index"] = entry.index;
  j["scheme"] = std::string(scheme_name(entry.record.scheme));
  j["header_bytes_used"] = entry.record.header_bytes_used;
  j["payload_insert_len"] = entry.record.payload_insert_len;
  j["original_fields_hex"] = to_hex(entry.record.original_fields);
  return j.dump();
}

SidecarEntry decode_sidecar_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    SidecarEntry entry;
    entry.index = j.at("index").get<std::size_t>();
    entry.record.scheme = parse_scheme(j.at("scheme").get<std::string>());
    const auto header_used = j.at("header_bytes_used").get<unsigned>();
    if (header_used > kHeaderFieldBytes) fail(ErrorCode::ProtocolError, "header_bytes_used > 12");
    entry.record.header_bytes_used = static_cast<std::uint8_t>(header_used);
    entry.record.payload_insert_len = j.at("payload_insert_len").get<std::size_t>();
    const Bytes fields = from_hex(j.at("original_fields_hex").get<std::string>());
    if (fields.size() != kHeaderFieldBytes) {
      fail(ErrorCode::ProtocolError, "original_fields_hex must encode 12 bytes");
    }
    std::copy(fields.begin(), fields.end(), entry.record.original_fields.begin());
    return entry;
  } catch (const json::exception& e) {
    fail(ErrorCode::ProtocolError, std::string("bad sidecar line: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) fail(ErrorCode::ProtocolError, e.what());
    throw;
  }
}

void write_sidecar(const std::filesystem::path& path, const std::vector<SidecarEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  for (const SidecarEntry& entry : entries) out << encode_sidecar_line(entry) << '\n';
}

std::vector<SidecarEntry> read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<SidecarEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    entries.push_back(decode_sidecar_line(line));
  }
  return entries;
}

}  // namespace advpad::perturb
