#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "advpad/error.hpp"
#include "advpad/nn/checkpoint.hpp"
#include "advpad/nn/tape.hpp"
#include "gradcheck.hpp"

using namespace advpad;
using nn::Matrix;

namespace {

struct TinyNet {
  nn::ParameterStore params;
  nn::ParamId table, w1, b1, g, be, qkv_w, qkv_b, w2, b2;
  Matrix readout;

  explicit TinyNet(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    table = params.add("table", nn::random_normal(5, 6, 0.7, rng));
    w1 = params.add("w1", nn::random_normal(6, 6, 0.5, rng));
    b1 = params.add("b1", nn::random_normal(1, 6, 0.1, rng));
    g = params.add("g", nn::random_normal(1, 6, 0.3, rng).array() + 1.0);
    be = params.add("be", nn::random_normal(1, 6, 0.1, rng));
    qkv_w = params.add("qkv_w", nn::random_normal(6, 18, 0.5, rng));
    qkv_b = params.add("qkv_b", nn::random_normal(1, 18, 0.1, rng));
    w2 = params.add("w2", nn::random_normal(6, 3, 0.5, rng));
    b2 = params.add("b2", nn::random_normal(1, 3, 0.1, rng));
    readout = nn::random_normal(1, 3, 1.0, rng);
  }

  // Scalar function touching every tape operation.
  double run(const nn::ParameterStore& p, nn::Gradients* grads) const {
    nn::Tape tape(p, grads);
    const int ids[] = {0, 3, 3, 1};
    auto x = tape.embed(table, ids);
    x = tape.add(x, tape.gelu(tape.linear(x, w1, b1)));
    const auto h = tape.layer_norm(x, g, be);
    const auto a = tape.attention(tape.linear(h, qkv_w, qkv_b), 2);
    const auto top = tape.constant(Matrix::Constant(1, 6, 0.25));
    const auto cat = tape.concat_rows(top, tape.add(a, x));
    const auto pooled = tape.add(tape.mean_rows(cat), tape.row(cat, 2));
    const auto out = tape.linear(pooled, w2, b2);
    const double value = (tape.value(out).array() * readout.array()).sum();
    if (grads) tape.backward(out, readout);
    return value;
  }
};

}  // namespace

TEST(Tape, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TinyNet net(seed);
    nn::Gradients grads(net.params);
    net.run(net.params, &grads);
    const auto numeric = fixture::numeric_gradient(
        [&](std::span<const double> x) {
          nn::ParameterStore p = net.params;
          p.assign(x);
          return net.run(p, nullptr);
        },
        net.params.flatten());
    EXPECT_LT(fixture::gradient_relative_error(grads.flatten(), numeric), 1e-6) << "seed " << seed;
  }
}

TEST(Tape, EvaluationWithoutRecordingMatches) {
  TinyNet net(9);
  nn::Gradients grads(net.params);
  EXPECT_DOUBLE_EQ(net.run(net.params, nullptr), net.run(net.params, &grads));
}

TEST(Tape, ClipGlobalNorm) {
  nn::ParameterStore p;
  p.add("a", Matrix::Zero(1, 2));
  nn::Gradients g(p);
  g.at(0) << 3.0, 4.0;
  EXPECT_DOUBLE_EQ(nn::clip_global_norm(g, 1.0), 5.0);
  EXPECT_NEAR(std::sqrt(g.squared_norm()), 1.0, 1e-12);
  g.at(0) << 0.3, 0.4;
  nn::clip_global_norm(g, 1.0);
  EXPECT_DOUBLE_EQ(g.at(0)(0, 0), 0.3);
}

TEST(Tape, AdamFirstStepMovesByLearningRate) {
  nn::ParameterStore p;
  const auto id = p.add("w", Matrix::Constant(1, 3, 1.0));
  nn::AdamW opt(p, {0.1, 0.9, 0.999, 1e-8, 0.0});
  nn::Gradients g(p);
  g[id] << 2.0, -0.5, 0.0;
  opt.step(p, g);
  EXPECT_NEAR(p.value(id)(0, 0), 0.9, 1e-6);
  EXPECT_NEAR(p.value(id)(0, 1), 1.1, 1e-6);
  EXPECT_NEAR(p.value(id)(0, 2), 1.0, 1e-12);
  EXPECT_EQ(opt.steps_taken(), 1);
}

TEST(Checkpoint, GitBlobHashOfKnownContent) {
  const std::string hello = "hello\n";
  const Bytes b(hello.begin(), hello.end());
  EXPECT_EQ(nn::git_blob_hash(b), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(nn::git_blob_hash({}), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Checkpoint, RoundTripAndErrors) {
  TinyNet net(3);
  nn::Checkpoint ck;
  ck.meta_json = R"({"model":"tiny"})";
  ck.sections.push_back({"net", net.params});
  const Bytes blob = nn::encode_checkpoint(ck);
  const nn::Checkpoint back = nn::decode_checkpoint(blob);
  EXPECT_EQ(back.meta_json, ck.meta_json);
  EXPECT_EQ(back.section("net"), net.params);
  EXPECT_THROW(back.section("missing"), Error);

  const auto path = std::filesystem::temp_directory_path() / "advpad_test.ckpt";
  nn::save_checkpoint(path, ck);
  EXPECT_EQ(nn::load_checkpoint(path).section("net"), net.params);
  std::filesystem::remove(path);

  Bytes bad = blob;
  bad[0] = 'X';
  EXPECT_THROW(nn::decode_checkpoint(bad), Error);
  EXPECT_THROW(nn::decode_checkpoint(ByteView(blob).first(blob.size() - 1)), Error);

  nn::ParameterStore other;
  other.add("table", Matrix::Zero(2, 2));
  EXPECT_THROW(nn::load_parameters(other, net.params), Error);
}
