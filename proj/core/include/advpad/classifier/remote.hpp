#pragma once

#include <memory>
#include <string>
#include <thread>

#include "advpad/classifier/oracle.hpp"

namespace advpad::classifier {

// Wire protocol shared with external oracle services.
//
//   POST /v1/predict
//     {"bytes_hex": str, "want_distribution": bool, "want_embedding": bool}
//     -> {"label": int, "distribution": [float]?, "embedding": [float]?}
//   POST /v1/predict_batch
//     {"bytes_hex": [str], "want_distribution": bool, "want_embedding": bool}
//     -> {"predictions": [<predict response>, ...]}
//
// Errors are HTTP 4xx/5xx with {"error": str}: 400 malformed body, 501
// capability unsupported, 503 model not ready.
std::string encode_predict_request(ByteView bytes, Want want);
std::string encode_batch_request(std::span<const Bytes> inputs, Want want);
std::string encode_prediction(const Prediction& p);
// Throws ProtocolError on malformed bodies and CapabilityUnsupported when a
// requested field is missing.
Prediction decode_prediction(const std::string& body, Want want);

// Client for a remote oracle at `endpoint` ("http://host:port[/prefix]").
// The advertised capabilities are whatever the caller declares; requests
// beyond them fail locally with CapabilityUnsupported.
class RemoteOracle final : public Oracle {
 public:
  RemoteOracle(std::string endpoint, OracleCapabilities caps, std::size_t input_length = 0,
               double timeout_seconds = 10.0);

  OracleCapabilities capabilities() const override { return caps_; }
  Prediction predict(ByteView bytes, Want want) const override;
  std::vector<Prediction> predict_batch(std::span<const Bytes> inputs, Want want) const override;
  std::size_t input_length() const override { return input_length_; }

  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string post(const std::string& path, const std::string& body) const;

  std::string endpoint_;
  std::string host_;
  std::string prefix_;
  OracleCapabilities caps_;
  std::size_t input_length_;
  double timeout_seconds_;
};

Prediction remote_predict(const std::string& endpoint, ByteView bytes, Want want);

// Deterministic four-class model used for protocol conformance: with
// count_c = |{b : b mod 4 == c}|, distribution_c = (1 + count_c) / (n + 4),
// label = argmax (lowest index on ties), embedding = [n, first byte,
// last byte, sum of bytes mod 256].
class ReferenceOracle final : public Oracle {
 public:
  explicit ReferenceOracle(OracleCapabilities caps = {true, true, true}) : caps_(caps) {}
  OracleCapabilities capabilities() const override { return caps_; }
  Prediction predict(ByteView bytes, Want want) const override;

 private:
  OracleCapabilities caps_;
};

// Serves any Oracle behind the wire protocol. The constructor binds the
// socket (port 0 picks a free port); start() serves on a background thread,
// serve_forever() on the calling one.
class OracleServer {
 public:
  OracleServer(const Oracle& oracle, std::string host = "127.0.0.1", int port = 0);
  ~OracleServer();
  OracleServer(const OracleServer&) = delete;
  OracleServer& operator=(const OracleServer&) = delete;

  int port() const noexcept { return port_; }
  std::string url() const;
  // While not ready every request is answered with 503.
  void set_ready(bool ready);
  void start();
  void serve_forever();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
  std::thread thread_;
};

// Handle one request body the way the server does; returns (status, body).
std::pair<int, std::string> handle_oracle_request(const Oracle& oracle, const std::string& path,
                                                  const std::string& body, bool ready = true);

}  // namespace advpad::classifier
