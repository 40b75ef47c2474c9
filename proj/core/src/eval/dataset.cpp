#include "advpad/eval/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "advpad/error.hpp"
#include "advpad/net/pcap.hpp"
#include "json.hpp"

namespace advpad::eval {

using nlohmann::json;

std::vector<classifier::Example> LabeledDataset::examples(std::span<const std::size_t> indices) const {
  std::vector<classifier::Example> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back({samples[i].view, samples[i].label});
  return out;
}

std::vector<net::ParsedPacket> LabeledDataset::packets(std::span<const std::size_t> indices) const {
  std::vector<net::ParsedPacket> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(samples[i].packet);
  return out;
}

Splits split_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  Splits s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<long>(n_train));
  s.val.assign(idx.begin() + static_cast<long>(n_train), idx.begin() + static_cast<long>(n_train + n_val));
  s.test.assign(idx.begin() + static_cast<long>(n_train + n_val), idx.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

namespace {

std::pair<std::uint16_t, std::uint16_t> ports(const net::ParsedPacket& p) {
  if (p.is_tcp()) return {p.tcp().src_port, p.tcp().dst_port};
  return {p.udp().src_port, p.udp().dst_port};
}

}  // namespace

LabeledDataset preprocess(std::span<const RawFrame> frames, std::vector<std::string> class_names,
                          std::uint64_t seed, PreprocessStats* stats) {
  PreprocessStats st;
  st.input = frames.size();
  LabeledDataset ds;
  using FlowKey = std::tuple<std::uint32_t, std::uint16_t, std::uint32_t, std::uint16_t, std::uint8_t>;
  std::map<FlowKey, std::int64_t> flows;
  int max_label = -1;

  for (const RawFrame& frame : frames) {
    const auto link = net::split_link_frame(frame.linktype, frame.bytes);
    if (!link) {
      ++st.non_ipv4;
      continue;
    }
    net::ParsedPacket pkt;
    try {
      pkt = net::parse_packet(link->ip_bytes);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnsupportedProtocol && link->ip_bytes.size() >= 1 && (link->ip_bytes[0] >> 4) == 4) {
        ++st.other_protocol;
      } else {
        ++st.non_ipv4;
      }
      continue;
    }
    pkt.link_padding.clear();
    const auto [sport, dport] = ports(pkt);
    if (pkt.is_udp() && (sport == 67 || sport == 68 || dport == 67 || dport == 68)) {
      ++st.dhcp;
      continue;
    }
    if (pkt.payload.empty()) {
      ++st.no_payload;
      continue;
    }
    Bytes view = net::transport_view(pkt);
    if (view.size() < kMinViewLength) {
      ++st.too_short;
      continue;
    }

    PacketSample s;
    s.label = frame.label;
    s.flow_id = frame.flow_id;
    s.direction = frame.direction;
    if (s.flow_id < 0 || s.direction < 0) {
      const FlowKey fwd{pkt.ip.src_addr, sport, pkt.ip.dst_addr, dport, pkt.ip.protocol};
      const FlowKey rev{pkt.ip.dst_addr, dport, pkt.ip.src_addr, sport, pkt.ip.protocol};
      const bool forward = fwd <= rev;
      const FlowKey& key = forward ? fwd : rev;
      const auto [it, inserted] = flows.try_emplace(key, static_cast<std::int64_t>(flows.size()));
      if (s.flow_id < 0) s.flow_id = it->second;
      if (s.direction < 0) s.direction = forward ? 0 : 1;
    }
    s.view = std::move(view);
    s.packet = std::move(pkt);
    max_label = std::max(max_label, s.label);
    ds.samples.push_back(std::move(s));
  }
  st.kept = ds.samples.size();
  if (stats) *stats = st;
  if (ds.samples.empty()) fail(ErrorCode::EmptyAfterFiltering, "no packets survived preprocessing");

  if (class_names.empty()) {
    for (int c = 0; c <= max_label; ++c) class_names.push_back("class" + std::to_string(c));
  }
  if (max_label >= static_cast<int>(class_names.size())) {
    fail(ErrorCode::Config, "label " + std::to_string(max_label) + " has no class name");
  }
  ds.class_names = std::move(class_names);
  ds.splits = split_indices(ds.samples.size(), seed);
  return ds;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\"");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\"");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<RawFrame> read_pcap_directory(const std::filesystem::path& dir, const std::filesystem::path& labels_csv,
                                          std::vector<std::string>& class_names) {
  std::ifstream in(labels_csv);
  if (!in) fail(ErrorCode::Io, "cannot open " + labels_csv.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::Config, "labels.csv line lacks a comma: " + line);
    const std::string file = trim(line.substr(0, comma));
    const std::string label = trim(line.substr(comma + 1));
    if (rows.empty() && file == "filename" && label == "label") continue;
    rows.emplace_back(file, label);
  }
  std::vector<std::string> names;
  for (const auto& [file, label] : rows) names.push_back(label);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  class_names = names;

  std::vector<RawFrame> frames;
  for (const auto& [file, label] : rows) {
    const int id = static_cast<int>(std::lower_bound(names.begin(), names.end(), label) - names.begin());
    const net::PcapFile pcap = net::read_pcap(dir / file);
    for (const auto& rec : pcap.records) frames.push_back({rec.data, pcap.linktype, id, -1, -1});
  }
  return frames;
}

std::vector<RawFrame> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<RawFrame> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      RawFrame f;
      f.bytes = from_hex(j.at("bytes_hex").get<std::string>());
      f.linktype = net::kLinktypeRaw;
      f.label = j.at("label").get<int>();
      f.flow_id = j.value("flow_id", std::int64_t{-1});
      f.direction = j.value("direction", -1);
      frames.push_back(std::move(f));
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return frames;
}

void write_jsonl(const std::filesystem::path& path, std::span<const RawFrame> frames) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  for (const RawFrame& f : frames) {
    out << json{{"bytes_hex", to_hex(f.bytes)}, {"label", f.label}, {"flow_id", f.flow_id},
                {"direction", f.direction}}
               .dump()
        << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  std::vector<char> split(ds.samples.size(), 'x');
  for (std::size_t i : ds.splits.train) split[i] = 't';
  for (std::size_t i : ds.splits.val) split[i] = 'v';
  for (std::size_t i : ds.splits.test) split[i] = 'e';
  out << json{{"classes", ds.class_names}}.dump() << '\n';
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const PacketSample& s = ds.samples[i];
    const char* name = split[i] == 't' ? "train" : split[i] == 'v' ? "val" : split[i] == 'e' ? "test" : "none";
    out << json{{"bytes_hex", to_hex(net::serialize(s.packet))}, {"label", s.label}, {"flow_id", s.flow_id},
                {"direction", s.direction}, {"split", name}}
               .dump()
        << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  LabeledDataset ds;
  std::string line;
  std::size_t lineno = 0;
  try {
    if (!std::getline(in, line)) fail(ErrorCode::Config, path.string() + " is empty");
    ++lineno;
    ds.class_names = json::parse(line).at("classes").get<std::vector<std::string>>();
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const json j = json::parse(line);
      PacketSample s;
      s.packet = net::parse_packet(from_hex(j.at("bytes_hex").get<std::string>()));
      s.view = net::transport_view(s.packet);
      s.label = j.at("label").get<int>();
      if (s.label < 0 || s.label >= ds.num_classes()) fail(ErrorCode::Config, "label out of range");
      s.flow_id = j.at("flow_id").get<std::int64_t>();
      s.direction = j.at("direction").get<int>();
      const std::string split = j.at("split").get<std::string>();
      const std::size_t idx = ds.samples.size();
      if (split == "train") ds.splits.train.push_back(idx);
      else if (split == "val") ds.splits.val.push_back(idx);
      else if (split == "test") ds.splits.test.push_back(idx);
      ds.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
  if (ds.samples.empty()) fail(ErrorCode::EmptyAfterFiltering, path.string() + " holds no samples");
  return ds;
}

}  // namespace advpad::eval
