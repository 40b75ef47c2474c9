#include "advpad/classifier/remote.hpp"

#include <atomic>
#include <cmath>

#include "advpad/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace advpad::classifier {

using nlohmann::json;

namespace {

json prediction_to_json(const Prediction& p) {
  json j;
  j["label"] = p.label;
  if (p.distribution) j["distribution"] = *p.distribution;
  if (p.embedding) j["embedding"] = *p.embedding;
  return j;
}

std::vector<double> number_array(const json& j, const char* field) {
  if (!j.is_array()) fail(ErrorCode::ProtocolError, std::string(field) + " is not an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorCode::ProtocolError, std::string(field) + " holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

Prediction prediction_from_json(const json& j, Want want) {
  if (!j.is_object()) fail(ErrorCode::ProtocolError, "prediction is not a JSON object");
  const auto label = j.find("label");
  if (label == j.end() || !label->is_number_integer()) {
    fail(ErrorCode::ProtocolError, "prediction lacks an integer label");
  }
  Prediction p;
  p.label = label->get<int>();
  if (const auto d = j.find("distribution"); d != j.end() && !d->is_null()) {
    p.distribution = number_array(*d, "distribution");
  }
  if (const auto e = j.find("embedding"); e != j.end() && !e->is_null()) {
    p.embedding = number_array(*e, "embedding");
  }
  if (want.distribution && !p.distribution) {
    fail(ErrorCode::CapabilityUnsupported, "server omitted the requested distribution");
  }
  if (want.embedding && !p.embedding) {
    fail(ErrorCode::CapabilityUnsupported, "server omitted the requested embedding");
  }
  if (p.distribution && !is_valid_prediction(p)) {
    fail(ErrorCode::ProtocolError, "distribution is not a probability vector consistent with the label");
  }
  return p;
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorCode::ProtocolError, std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

std::string encode_predict_request(ByteView bytes, Want want) {
  json j;
  j["bytes_hex"] = to_hex(bytes);
  j["want_distribution"] = want.distribution;
  j["want_embedding"] = want.embedding;
  return j.dump();
}

std::string encode_batch_request(std::span<const Bytes> inputs, Want want) {
  json j;
  j["bytes_hex"] = json::array();
  for (const Bytes& in : inputs) j["bytes_hex"].push_back(to_hex(in));
  j["want_distribution"] = want.distribution;
  j["want_embedding"] = want.embedding;
  return j.dump();
}

std::string encode_prediction(const Prediction& p) { return prediction_to_json(p).dump(); }

Prediction decode_prediction(const std::string& body, Want want) {
  return prediction_from_json(parse_body(body), want);
}

RemoteOracle::RemoteOracle(std::string endpoint, OracleCapabilities caps, std::size_t input_length,
                           double timeout_seconds)
    : endpoint_(std::move(endpoint)),
      caps_(caps),
      input_length_(input_length),
      timeout_seconds_(timeout_seconds) {
  const auto scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::Config, "oracle endpoint must look like http://host:port");
  }
  const auto path_start = endpoint_.find('/', scheme_end + 3);
  host_ = endpoint_.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? "" : endpoint_.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

std::string RemoteOracle::post(const std::string& path, const std::string& body) const {
  httplib::Client client(host_);
  const auto secs = static_cast<time_t>(timeout_seconds_);
  const auto usecs = static_cast<time_t>((timeout_seconds_ - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  auto res = client.Post(prefix_ + path, body, "application/json");
  if (!res) {
    fail(ErrorCode::OracleUnavailable,
         "cannot reach oracle at " + endpoint_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 200) return res->body;
  std::string message = res->body;
  try {
    message = json::parse(res->body).at("error").get<std::string>();
  } catch (const json::exception&) {
  }
  if (res->status == 501) fail(ErrorCode::CapabilityUnsupported, message);
  if (res->status == 503) fail(ErrorCode::OracleUnavailable, message);
  fail(ErrorCode::ProtocolError, "HTTP " + std::to_string(res->status) + ": " + message);
}

Prediction RemoteOracle::predict(ByteView bytes, Want want) const {
  if (bytes.empty()) fail(ErrorCode::EmptyInput, "cannot classify an empty byte sequence");
  require_capabilities(caps_, want);
  return decode_prediction(post("/v1/predict", encode_predict_request(bytes, want)), want);
}

std::vector<Prediction> RemoteOracle::predict_batch(std::span<const Bytes> inputs, Want want) const {
  for (const Bytes& in : inputs) {
    if (in.empty()) fail(ErrorCode::EmptyInput, "cannot classify an empty byte sequence");
  }
  require_capabilities(caps_, want);
  if (inputs.empty()) return {};
  const json body = parse_body(post("/v1/predict_batch", encode_batch_request(inputs, want)));
  const auto preds = body.find("predictions");
  if (preds == body.end() || !preds->is_array() || preds->size() != inputs.size()) {
    fail(ErrorCode::ProtocolError, "batch response must hold one prediction per input");
  }
  std::vector<Prediction> out;
  out.reserve(inputs.size());
  for (const auto& p : *preds) out.push_back(prediction_from_json(p, want));
  return out;
}

Prediction remote_predict(const std::string& endpoint, ByteView bytes, Want want) {
  RemoteOracle oracle(endpoint, {true, want.distribution, want.embedding});
  return oracle.predict(bytes, want);
}

Prediction ReferenceOracle::predict(ByteView bytes, Want want) const {
  if (bytes.empty()) fail(ErrorCode::EmptyInput, "cannot classify an empty byte sequence");
  require_capabilities(caps_, want);
  std::vector<double> counts(4, 1.0);
  unsigned sum = 0;
  for (std::uint8_t b : bytes) {
    counts[b % 4] += 1.0;
    sum += b;
  }
  const double total = static_cast<double>(bytes.size()) + 4.0;
  for (double& c : counts) c /= total;
  Prediction p;
  p.label = argmax(counts);
  if (want.distribution) p.distribution = std::move(counts);
  if (want.embedding) {
    p.embedding = std::vector<double>{static_cast<double>(bytes.size()),
                                      static_cast<double>(bytes.front()),
                                      static_cast<double>(bytes.back()),
                                      static_cast<double>(sum % 256)};
  }
  return p;
}

std::pair<int, std::string> handle_oracle_request(const Oracle& oracle, const std::string& path,
                                                  const std::string& body, bool ready) {
  const auto error = [](int status, const std::string& message) {
    return std::pair<int, std::string>{status, json{{"error", message}}.dump()};
  };
  const bool single = path == "/v1/predict";
  const bool batch = path == "/v1/predict_batch";
  if (!single && !batch) return error(404, "unknown endpoint " + path);
  if (!ready) return error(503, "model not ready");

  json request;
  try {
    request = json::parse(body);
  } catch (const json::exception&) {
    return error(400, "malformed JSON body");
  }
  if (!request.is_object()) return error(400, "request must be a JSON object");
  Want want;
  for (const auto& [key, target] : {std::pair{"want_distribution", &want.distribution},
                                    std::pair{"want_embedding", &want.embedding}}) {
    const auto it = request.find(key);
    if (it == request.end()) continue;
    if (!it->is_boolean()) return error(400, std::string(key) + " must be a boolean");
    *target = it->get<bool>();
  }
  const auto hex = request.find("bytes_hex");
  if (hex == request.end()) return error(400, "missing bytes_hex");

  try {
    require_capabilities(oracle.capabilities(), want);
    if (single) {
      if (!hex->is_string()) return error(400, "bytes_hex must be a string");
      const Bytes bytes = from_hex(hex->get<std::string>());
      if (bytes.empty()) return error(400, "bytes_hex is empty");
      return {200, encode_prediction(oracle.predict(bytes, want))};
    }
    if (!hex->is_array()) return error(400, "bytes_hex must be an array of strings");
    std::vector<Bytes> inputs;
    for (const auto& item : *hex) {
      if (!item.is_string()) return error(400, "bytes_hex must be an array of strings");
      inputs.push_back(from_hex(item.get<std::string>()));
      if (inputs.back().empty()) return error(400, "bytes_hex entry is empty");
    }
    json out;
    out["predictions"] = json::array();
    for (const Prediction& p : oracle.predict_batch(inputs, want)) {
      out["predictions"].push_back(prediction_to_json(p));
    }
    return {200, out.dump()};
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::CapabilityUnsupported: return error(501, e.what());
      case ErrorCode::ProtocolError:
      case ErrorCode::EmptyInput: return error(400, e.what());
      case ErrorCode::OracleUnavailable: return error(503, e.what());
      default: return error(500, e.what());
    }
  }
}

struct OracleServer::Impl {
  httplib::Server server;
  std::atomic<bool> ready{true};
};

OracleServer::OracleServer(const Oracle& oracle, std::string host, int port)
    : impl_(std::make_unique<Impl>()), host_(std::move(host)) {
  const auto handler = [this, &oracle](const httplib::Request& req, httplib::Response& res) {
    const auto [status, body] = handle_oracle_request(oracle, req.path, req.body, impl_->ready.load());
    res.status = status;
    res.set_content(body, "application/json");
  };
  impl_->server.Post("/v1/predict", handler);
  impl_->server.Post("/v1/predict_batch", handler);
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host_);
  } else if (impl_->server.bind_to_port(host_, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ < 0) fail(ErrorCode::Io, "cannot bind oracle server to " + host_ + ":" + std::to_string(port));
}

OracleServer::~OracleServer() { stop(); }

std::string OracleServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

void OracleServer::set_ready(bool ready) { impl_->ready = ready; }

void OracleServer::start() {
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void OracleServer::serve_forever() { impl_->server.listen_after_bind(); }

void OracleServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace advpad::classifier
