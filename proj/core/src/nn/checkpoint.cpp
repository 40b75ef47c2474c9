#include "advpad/nn/checkpoint.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <memory>

#include "advpad/error.hpp"
#include "advpad/net/pcap.hpp"
#include "json.hpp"

namespace advpad::nn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'A', 'D', 'V', 'P', 'A', 'D', 'C', 'K'};

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(ByteView in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

void put_f64(Bytes& out, double d) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double get_f64(ByteView in, std::size_t at) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
  double d = 0.0;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

}  // namespace

const ParameterStore& Checkpoint::section(const std::string& name) const {
  for (const auto& s : sections) {
    if (s.name == name) return s.params;
  }
  fail(ErrorCode::Config, "checkpoint has no section '" + name + "'");
}

Bytes encode_checkpoint(const Checkpoint& ckpt) {
  json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["meta"] = ckpt.meta_json.empty() ? json::object() : json::parse(ckpt.meta_json);
  header["sections"] = json::array();
  for (const auto& section : ckpt.sections) {
    json s;
    s["name"] = section.name;
    s["tensors"] = json::array();
    for (std::size_t i = 0; i < section.params.tensor_count(); ++i) {
      s["tensors"].push_back({{"name", section.params.name(i)},
                              {"rows", section.params.at(i).rows()},
                              {"cols", section.params.at(i).cols()}});
    }
    header["sections"].push_back(std::move(s));
  }
  const std::string text = header.dump();
  Bytes out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& section : ckpt.sections) {
    for (std::size_t i = 0; i < section.params.tensor_count(); ++i) {
      const Matrix& m = section.params.at(i);
      for (Eigen::Index k = 0; k < m.size(); ++k) put_f64(out, m.data()[k]);
    }
  }
  return out;
}

Checkpoint decode_checkpoint(ByteView blob) {
  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0) {
    fail(ErrorCode::Config, "not an advpad checkpoint");
  }
  const std::uint32_t version = get_u32(blob, 8);
  if (version != kCheckpointFormatVersion) {
    fail(ErrorCode::Config, "unsupported checkpoint format version " + std::to_string(version));
  }
  const std::uint32_t header_len = get_u32(blob, 12);
  if (blob.size() < 16 + std::size_t{header_len}) fail(ErrorCode::Config, "checkpoint header cut short");
  Checkpoint ckpt;
  std::size_t at = 16 + header_len;
  try {
    const json header = json::parse(blob.begin() + 16, blob.begin() + 16 + header_len);
    ckpt.meta_json = header.at("meta").dump();
    for (const auto& s : header.at("sections")) {
      CheckpointSection section;
      section.name = s.at("name").get<std::string>();
      for (const auto& t : s.at("tensors")) {
        const int rows = t.at("rows").get<int>();
        const int cols = t.at("cols").get<int>();
        const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
        if (blob.size() < at + count * 8) fail(ErrorCode::Config, "checkpoint tensor data cut short");
        Matrix m(rows, cols);
        for (std::size_t k = 0; k < count; ++k) m.data()[k] = get_f64(blob, at + 8 * k);
        at += count * 8;
        section.params.add(t.at("name").get<std::string>(), std::move(m));
      }
      ckpt.sections.push_back(std::move(section));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("bad checkpoint header: ") + e.what());
  }
  if (at != blob.size()) fail(ErrorCode::Config, "trailing bytes after checkpoint tensors");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  net::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::Config, "checkpoint not found: " + path.string());
  return decode_checkpoint(net::read_file(path));
}

void load_parameters(ParameterStore& target, const ParameterStore& source) {
  if (target.tensor_count() != source.tensor_count()) {
    fail(ErrorCode::Config, "checkpoint tensor count does not match the model");
  }
  for (std::size_t i = 0; i < target.tensor_count(); ++i) {
    if (target.name(i) != source.name(i) || target.at(i).rows() != source.at(i).rows() ||
        target.at(i).cols() != source.at(i).cols()) {
      fail(ErrorCode::Config, "checkpoint tensor '" + source.name(i) + "' does not match the model");
    }
    target.at(i) = source.at(i);
  }
}

std::string git_blob_hash(ByteView contents) {
  const std::string prefix = "blob " + std::to_string(contents.size()) + std::string(1, '\0');
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), prefix.data(), prefix.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), contents.data(), contents.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    fail(ErrorCode::Io, "SHA-1 computation failed");
  }
  return to_hex(ByteView(digest, len));
}

}  // namespace advpad::nn
