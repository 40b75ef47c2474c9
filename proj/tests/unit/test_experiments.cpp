#include <gtest/gtest.h>

#include "advpad/classifier/remote.hpp"
#include "advpad/error.hpp"
#include "advpad/eval/experiments.hpp"
#include "advpad/eval/report.hpp"
#include "advpad/eval/synthetic.hpp"
#include "json.hpp"

using namespace advpad;

namespace {

const eval::LabeledDataset& dataset() {
  static const eval::LabeledDataset ds = [] {
    eval::SyntheticConfig c;
    c.classes = 4;
    c.packets_per_class = 50;
    c.flow_length = 5;
    const auto s = eval::synthesize(c);
    return eval::preprocess(s.frames, s.class_names, 2);
  }();
  return ds;
}

std::vector<std::size_t> all_indices() {
  std::vector<std::size_t> idx(dataset().samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

rl::PolicyModel small_policy() {
  rl::HeadedModelConfig c;
  c.encoder.model_dim = 8;
  c.encoder.heads = 2;
  c.encoder.layers = 1;
  c.encoder.ff_dim = 8;
  c.encoder.max_input = 16;
  c.encoder.max_steps = 4;
  c.head_hidden = 0;
  return rl::PolicyModel(c);
}

}  // namespace

TEST(EvalPacket, NoDefenseMatchesCleanAccuracy) {
  const classifier::ReferenceOracle oracle;
  const auto idx = all_indices();
  const eval::Defense defenses[] = {eval::no_defense(), eval::rand_post_pad(8, 1), eval::random_pre_pad(8, 1),
                                    eval::fixed_pad_defense()};
  const auto r = eval::eval_packet_defense(oracle, dataset(), idx, defenses, 8, 2);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.rows[0].acc, 1.0);
  EXPECT_EQ(r.rows[0].label_accuracy, r.clean_accuracy);
  EXPECT_EQ(r.rows[0].mean_added_bytes, 0.0);
  // TCP pre-padding adds the 15-byte trailer minus the header bytes it reuses.
  EXPECT_GT(r.row("PrePad-random")->mean_added_bytes, 0.0);
  EXPECT_DOUBLE_EQ(r.row("RandPostPad")->mean_added_bytes, 8.0);
  EXPECT_NEAR(r.row("RandPostPad")->bandwidth_overhead,
              100.0 * 8.0 / eval::mean_packet_length(dataset(), idx), 1e-9);
  EXPECT_EQ(r.samples, idx.size());

  const auto j = nlohmann::json::parse(eval::report_json(r));
  EXPECT_EQ(j.at("rows").size(), 4u);
  EXPECT_NE(eval::report_text(r).find("FixedPad(1500)"), std::string::npos);
}

TEST(EvalPacket, NonCompliantDefenseIsRejected) {
  const classifier::ReferenceOracle oracle;
  const auto idx = all_indices();
  eval::Defense broken{"broken", [](const net::ParsedPacket& p, std::size_t) {
                         net::ParsedPacket q = p;
                         q.ip.header_checksum ^= 1;
                         return q;
                       }};
  const eval::Defense defenses[] = {broken};
  try {
    eval::eval_packet_defense(oracle, dataset(), idx, defenses, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedHeader);
  }
}

TEST(EvalPacket, DefensesAreDeterministic) {
  const classifier::ReferenceOracle oracle;
  const auto idx = all_indices();
  const rl::PolicyModel policy = small_policy();
  const eval::Defense defenses[] = {eval::random_pre_pad(16, 3), eval::policy_defense("PrePad-policy", policy, 16,
                                                                                     perturb::Scheme::PrePad, 3)};
  const auto a = eval::eval_packet_defense(oracle, dataset(), idx, defenses, 16, 1);
  const auto b = eval::eval_packet_defense(oracle, dataset(), idx, defenses, 16, 3);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].acc, b.rows[i].acc);
    EXPECT_EQ(a.rows[i].mean_added_bytes, b.rows[i].mean_added_bytes);
  }
}

TEST(EvalBurst, SinglePacketBurstsReduceToPacketEvaluation) {
  const classifier::ReferenceOracle oracle;
  const auto idx = all_indices();
  std::vector<eval::Burst> singles;
  for (std::size_t i : idx) {
    const auto& s = dataset().samples[i];
    singles.push_back({{i}, s.label, s.flow_id, s.direction});
  }
  const eval::Defense defenses[] = {eval::no_defense(), eval::random_pre_pad(4, 9)};
  const auto p = eval::eval_packet_defense(oracle, dataset(), idx, defenses, 4);
  const auto b = eval::eval_burst_defense(oracle, dataset(), singles, defenses, 4);
  EXPECT_EQ(b.kind, "burst");
  EXPECT_EQ(p.clean_accuracy, b.clean_accuracy);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(p.rows[i].acc, b.rows[i].acc);
    EXPECT_EQ(p.rows[i].label_accuracy, b.rows[i].label_accuracy);
  }
}

TEST(EvalBurst, BurstsFollowFlowAndDirection) {
  const auto idx = all_indices();
  const auto bursts = eval::make_bursts(dataset(), idx);
  std::size_t members = 0;
  for (const auto& b : bursts) {
    members += b.members.size();
    for (std::size_t m : b.members) {
      EXPECT_EQ(dataset().samples[m].flow_id, b.flow_id);
      EXPECT_EQ(dataset().samples[m].direction, b.direction);
    }
  }
  EXPECT_EQ(members, idx.size());
  EXPECT_LT(bursts.size(), idx.size());

  const std::vector<Bytes> views = {{1, 2}, {3, 4, 5}, {6}};
  EXPECT_EQ(eval::burst_input(views, 0), (Bytes{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(eval::burst_input(views, 4), (Bytes{1, 2, 3, 4}));
}

TEST(Sweeps, ShapesAndControls) {
  const classifier::ReferenceOracle oracle;
  const auto idx = all_indices();
  const std::size_t lengths[] = {0, 4, 8};
  const auto pts = eval::sweep_padding_length(oracle, dataset(), idx, lengths,
                                              [](std::size_t n) { return eval::random_pre_pad(n, 1); });
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].acc, 1.0);
  EXPECT_EQ(pts[1].x, 4.0);

  const rl::PolicyModel policy = small_policy();
  const double taus[] = {1.0, 4.0, 10.0};
  const auto tp = eval::sweep_temperature(oracle, dataset(), idx, policy, taus, 4, 1);
  ASSERT_EQ(tp.size(), 3u);
  EXPECT_LE(tp[0].mean_entropy, tp[1].mean_entropy);
  EXPECT_LE(tp[1].mean_entropy, tp[2].mean_entropy);

  const std::string csv = eval::sweep_csv("tau", tp);
  EXPECT_EQ(csv.rfind("tau,acc,label_accuracy,mean_entropy\n", 0), 0u);
  EXPECT_EQ(nlohmann::json::parse(eval::sweep_json("tau", tp)).size() > 0, true);
}

TEST(Sweeps, AlphaRetrainsPerValue) {
  const classifier::ReferenceOracle oracle;
  const auto& ds = dataset();
  rl::TrainConfig c;
  c.budget = 4;
  c.encoder.model_dim = 8;
  c.encoder.heads = 2;
  c.encoder.layers = 1;
  c.encoder.ff_dim = 8;
  c.encoder.max_input = 16;
  c.encoder.max_steps = 4;
  c.head_hidden = 0;
  c.max_episodes = 10;
  const double alphas[] = {0.1, 1.0};
  const std::vector<std::size_t> train(ds.splits.train.begin(), ds.splits.train.begin() + 10);
  const auto pts = eval::sweep_entropy_alpha(oracle, ds, train, ds.splits.test, c, alphas);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1].x, 1.0);
}
