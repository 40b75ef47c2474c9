#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "advpad/classifier/remote.hpp"
#include "advpad/error.hpp"
#include "fixtures.hpp"
#include "json.hpp"

using namespace advpad;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Config;
}

// Returns a canned distribution regardless of input.
class FixedOracle final : public classifier::Oracle {
 public:
  classifier::OracleCapabilities capabilities() const override { return {true, true, false}; }
  classifier::Prediction predict(ByteView, classifier::Want want) const override {
    classifier::require_capabilities(capabilities(), want);
    classifier::Prediction p;
    p.label = 2;
    if (want.distribution) p.distribution = std::vector<double>{0.1, 0.2, 0.7};
    return p;
  }
};

void expect_same_values(const json& got, const json& want, const std::string& where) {
  ASSERT_EQ(got.type(), want.type()) << where;
  if (want.is_object()) {
    ASSERT_EQ(got.size(), want.size()) << where;
    for (const auto& [k, v] : want.items()) {
      ASSERT_TRUE(got.contains(k)) << where << "." << k;
      expect_same_values(got.at(k), v, where + "." + k);
    }
  } else if (want.is_array()) {
    ASSERT_EQ(got.size(), want.size()) << where;
    for (std::size_t i = 0; i < want.size(); ++i) expect_same_values(got[i], want[i], where);
  } else if (want.is_number_float()) {
    EXPECT_EQ(got.get<double>(), want.get<double>()) << where;
  } else {
    EXPECT_EQ(got, want) << where;
  }
}

}  // namespace

TEST(Remote, StubServerRoundTripsExactly) {
  FixedOracle oracle;
  classifier::OracleServer server(oracle);
  server.start();
  classifier::RemoteOracle remote(server.url(), {true, true, false});
  const Bytes in = {1, 2, 3};
  const auto p = remote.predict(in, {true, false});
  EXPECT_EQ(p, oracle.predict(in, {true, false}));
  const std::vector<Bytes> batch = {{1}, {2, 3}};
  const auto ps = remote.predict_batch(batch, {true, false});
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[1], p);
  server.stop();
}

TEST(Remote, MissingFieldIsCapabilityUnsupported) {
  FixedOracle oracle;
  classifier::OracleServer server(oracle);
  server.start();
  // The client claims embedding support the server lacks.
  classifier::RemoteOracle remote(server.url(), {true, true, true});
  EXPECT_EQ(code_of([&] { remote.predict(Bytes{1}, {false, true}); }), ErrorCode::CapabilityUnsupported);
  // Asking beyond the declared capabilities fails locally.
  classifier::RemoteOracle labels_only(server.url(), {true, false, false});
  EXPECT_EQ(code_of([&] { labels_only.predict(Bytes{1}, {true, false}); }), ErrorCode::CapabilityUnsupported);
  server.stop();
}

TEST(Remote, DecodeErrors) {
  EXPECT_EQ(code_of([] { classifier::decode_prediction("{oops", {}); }), ErrorCode::ProtocolError);
  EXPECT_EQ(code_of([] { classifier::decode_prediction(R"({"distribution":[1.0]})", {}); }), ErrorCode::ProtocolError);
  EXPECT_EQ(code_of([] { classifier::decode_prediction(R"({"label":0})", {true, false}); }),
            ErrorCode::CapabilityUnsupported);
  const auto p = classifier::decode_prediction(R"({"label":1,"distribution":[0.25,0.75]})", {true, false});
  EXPECT_EQ(p.label, 1);
  EXPECT_EQ(*p.distribution, (std::vector<double>{0.25, 0.75}));
}

TEST(Remote, UnreachableAndNotReady) {
  classifier::RemoteOracle nowhere("http://127.0.0.1:1", {true, false, false}, 0, 1.0);
  EXPECT_EQ(code_of([&] { nowhere.predict(Bytes{1}, {}); }), ErrorCode::OracleUnavailable);

  classifier::ReferenceOracle oracle;
  classifier::OracleServer server(oracle);
  server.set_ready(false);
  server.start();
  classifier::RemoteOracle remote(server.url(), {true, true, true});
  EXPECT_EQ(code_of([&] { remote.predict(Bytes{1}, {}); }), ErrorCode::OracleUnavailable);
  server.set_ready(true);
  EXPECT_EQ(remote.predict(Bytes{5}, {}).label, 1);
  server.stop();
}

TEST(Remote, RequestEncoding) {
  const json single = json::parse(classifier::encode_predict_request(Bytes{0xAB, 0x01}, {true, false}));
  EXPECT_EQ(single.at("bytes_hex"), "ab01");
  EXPECT_EQ(single.at("want_distribution"), true);
  EXPECT_EQ(single.at("want_embedding"), false);
  const std::vector<Bytes> inputs = {{1}, {2}};
  const json batch = json::parse(classifier::encode_batch_request(inputs, {}));
  EXPECT_EQ(batch.at("bytes_hex"), json::array({"01", "02"}));
}

TEST(Contract, GoldenPairs) {
  std::ifstream in(std::string(ADVPAD_TEST_DATA_DIR) + "/contract_golden.json");
  const json golden = json::parse(in);
  const auto& pairs = golden.at("pairs");
  ASSERT_EQ(pairs.size(), 20u);
  for (const auto& pair : pairs) {
    const std::string name = pair.at("name");
    classifier::OracleCapabilities caps{true, true, true};
    if (pair.contains("oracle_caps")) {
      caps = {pair["oracle_caps"].at("has_labels"), pair["oracle_caps"].at("has_distribution"),
              pair["oracle_caps"].at("has_embedding")};
    }
    const classifier::ReferenceOracle oracle(caps);
    const std::string body = pair.at("request").is_string() ? pair.at("request").get<std::string>()
                                                             : pair.at("request").dump();
    const auto [status, response] = classifier::handle_oracle_request(oracle, pair.at("path"), body);
    EXPECT_EQ(status, pair.at("status").get<int>()) << name;
    const json got = json::parse(response);
    if (status == 200) {
      expect_same_values(got, pair.at("response"), name);
    } else {
      EXPECT_TRUE(got.contains("error") && got.at("error").is_string()) << name;
    }
  }
}

TEST(Contract, GoldenPairsOverHttp) {
  std::ifstream in(std::string(ADVPAD_TEST_DATA_DIR) + "/contract_golden.json");
  const json golden = json::parse(in);
  classifier::ReferenceOracle oracle;
  classifier::OracleServer server(oracle);
  server.start();
  classifier::RemoteOracle remote(server.url(), {true, true, true});
  for (const auto& pair : golden.at("pairs")) {
    if (pair.at("status") != 200 || pair.at("path") != "/v1/predict") continue;
    const auto& req = pair.at("request");
    const classifier::Want want{req.value("want_distribution", false), req.value("want_embedding", false)};
    const auto p = remote.predict(from_hex(req.at("bytes_hex").get<std::string>()), want);
    expect_same_values(json::parse(classifier::encode_prediction(p)), pair.at("response"), pair.at("name"));
  }
  server.stop();
}
