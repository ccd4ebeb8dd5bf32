// Copyright 2026 The gomoku-zero Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gomoku/network.hpp"

#include <cstring>
#include <fstream>

#include "gomoku/checkpoint.hpp"
#include "grad_check.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace gomoku {
namespace {

PolicyValueNet<float> fresh_net(const BoardConfig& cfg, std::uint64_t seed) {
  PolicyValueNet<float> net(NetworkArch::for_board(cfg));
  Rng rng(seed);
  net.initialize(rng);
  return net;
}

double entropy(const std::vector<float>& p) {
  double h = 0;
  for (float x : p) {
    if (x > 0) h -= x * std::log(static_cast<double>(x));
  }
  return h;
}

TEST(NetworkTest, FreshInitIsNearUniform) {
  const double max_entropy = std::log(36.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto net = fresh_net(kBoard6x6, seed);
    const auto out = net.forward({encode(GameState(kBoard6x6))});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_GT(entropy(out[0].policy), 0.9 * max_entropy) << "seed " << seed;
    EXPECT_LT(std::abs(out[0].value), 0.5f) << "seed " << seed;
  }
}

TEST(NetworkTest, MaskingZeroesOccupiedCells) {
  const auto net = fresh_net(kBoard6x6, 4);
  GameState s(kBoard6x6);
  s = s.apply_move({0, 0}).apply_move({2, 3}).apply_move({5, 5});
  const auto out = forward_masked(net, {s});
  double total = 0;
  for (int i = 0; i < 36; ++i) {
    if (s.at(i) != Cell::Empty) {
      EXPECT_EQ(out[0].policy[static_cast<std::size_t>(i)], 0.0f);
    }
    total += out[0].policy[static_cast<std::size_t>(i)];
  }
  EXPECT_NEAR(total, 1.0, 1e-5);
}

TEST(NetworkTest, BatchPositionsAreIndependent) {
  const auto net = fresh_net(kBoard6x6, 5);
  const auto e = encode(GameState(kBoard6x6).apply_move({3, 3}));
  const auto out = net.forward({e, e});
  EXPECT_EQ(out[0].policy, out[1].policy);
  EXPECT_EQ(out[0].value, out[1].value);
  const auto single = net.forward({e});
  for (std::size_t i = 0; i < 36; ++i) EXPECT_NEAR(single[0].policy[i], out[0].policy[i], 1e-6);
}

TEST(NetworkTest, OutputInvariantsOnRandomStates) {
  std::mt19937_64 rng(17);
  for (const BoardConfig cfg : {kBoard6x6, kBoard8x8}) {
    const auto net = fresh_net(cfg, rng());
    for (int k = 0; k < 1000; ++k) {
      const GameState s = testing::random_state(cfg, rng, cfg.cells() - 2);
      const auto out = forward_masked(net, {s})[0];
      double total = 0;
      for (float p : out.policy) {
        ASSERT_GE(p, 0.0f);
        total += p;
      }
      ASSERT_NEAR(total, 1.0, 1e-5);
      ASSERT_GE(out.value, -1.0f);
      ASSERT_LE(out.value, 1.0f);
    }
  }
}

TEST(NetworkTest, ShapeMismatchIsDimensionError) {
  const auto net = fresh_net(kBoard6x6, 1);
  EXPECT_THROW(net.forward({encode(GameState(kBoard8x8))}), DimensionError);
}

// Zero weights make every hidden activation zero, so biases alone set the
// outputs and the loss can be computed by hand.
PolicyValueNet<double> bias_only_net(int target_cell, double policy_bias, double value_bias) {
  PolicyValueNet<double> net(NetworkArch::for_board(kBoard6x6));
  for (const auto& t : net.layout()) {
    if (t.name == "policy.fc.bias") net.params()[t.offset + static_cast<std::size_t>(target_cell)] = policy_bias;
    if (t.name == "value.fc2.bias") net.params()[t.offset] = value_bias;
  }
  return net;
}

TEST(LossTest, PerfectPredictionIsZero) {
  const auto net = bias_only_net(7, 200.0, 40.0);  // tanh(40) == 1 in double
  TrainingSample smp{encode(GameState(kBoard6x6)), std::vector<float>(36, 0.0f), 1.0f};
  smp.pi[7] = 1.0f;
  const auto lb = net.loss(std::span<const TrainingSample>(&smp, 1), 0.0);
  EXPECT_EQ(lb.value_term, 0.0);
  EXPECT_EQ(lb.policy_term, 0.0);
  EXPECT_EQ(lb.regularization, 0.0);
}

TEST(LossTest, ValueErrorArithmetic) {
  const auto net = bias_only_net(0, 0.0, 0.0);  // v = 0, uniform policy
  TrainingSample smp{encode(GameState(kBoard6x6)), std::vector<float>(36, 0.0f), 1.0f};
  smp.pi[3] = 1.0f;
  const auto lb = net.loss(std::span<const TrainingSample>(&smp, 1), 1e-4);
  EXPECT_DOUBLE_EQ(lb.value_term, 1.0);
  EXPECT_NEAR(lb.policy_term, std::log(36.0), 1e-12);
  EXPECT_NEAR(lb.total, lb.value_term + lb.policy_term + lb.regularization, 1e-6);
}

TEST(LossTest, BreakdownSumsAndRegularizationIsNonNegative) {
  PolicyValueNet<double> net(gradcheck::tiny_arch());
  Rng rng(2);
  net.initialize(rng);
  const auto batch = gradcheck::random_batch({4, 4, 3}, 6, 9);
  const auto lb = net.loss(batch, 1e-4);
  EXPECT_GE(lb.value_term, 0.0);
  EXPECT_GE(lb.policy_term, 0.0);
  EXPECT_GT(lb.regularization, 0.0);
  EXPECT_NEAR(lb.total, lb.value_term + lb.policy_term + lb.regularization, 1e-6);
}

TEST(LossTest, GradientMatchesFiniteDifferences) {
  PolicyValueNet<double> net(gradcheck::tiny_arch());
  Rng rng(31);
  net.initialize(rng);
  gradcheck::randomize_biases(net, 32);
  const auto batch = gradcheck::random_batch({4, 4, 3}, 5, 77);
  const auto report = gradcheck::check(net, batch, 1e-4, 1e-3);
  EXPECT_EQ(report.checked, net.num_params());
  EXPECT_EQ(report.failures, 0u) << "worst " << report.worst_relative << " in " << report.worst_tensor;
}

std::vector<TrainingSample> overfit_batch() {
  std::mt19937_64 rng(123);
  std::vector<TrainingSample> batch;
  for (int k = 0; k < 8; ++k) {
    const GameState s = testing::random_state(kBoard6x6, rng, 12);
    const auto legal = s.legal_indices();
    TrainingSample smp{encode(s), std::vector<float>(36, 0.0f), k % 2 == 0 ? 1.0f : -1.0f};
    smp.pi[static_cast<std::size_t>(legal[rng() % legal.size()])] = 1.0f;
    batch.push_back(std::move(smp));
  }
  return batch;
}

TEST(TrainStepTest, OverfitsOneBatch) {
  auto net = fresh_net(kBoard6x6, 8);
  const auto batch = overfit_batch();
  AdamState<float> opt;
  LossBreakdown first;
  LossBreakdown at50;
  for (int step = 1; step <= 200; ++step) {
    const auto lb = train_step<float>(net, batch, opt, 2e-3, 1e-4);
    if (step == 1) first = lb;
    if (step == 50) at50 = lb;
  }
  EXPECT_LT(at50.total, first.total);
  const auto final_loss = net.loss(batch, 1e-4);
  EXPECT_LT(final_loss.policy_term, 0.1);
  EXPECT_LT(final_loss.value_term, 0.05);
}

TEST(TrainStepTest, ZeroLearningRateLeavesParamsUnchanged) {
  auto net = fresh_net(kBoard6x6, 9);
  const std::vector<float> before(net.params().begin(), net.params().end());
  AdamState<float> opt;
  const auto batch = overfit_batch();
  for (int i = 0; i < 3; ++i) train_step<float>(net, batch, opt, 0.0, 1e-4);
  ASSERT_EQ(std::memcmp(before.data(), net.params().data(), before.size() * sizeof(float)), 0);
}

TEST(TrainStepTest, NonFiniteLossIsDivergence) {
  auto net = fresh_net(kBoard6x6, 10);
  net.params()[net.layout().back().offset] = std::numeric_limits<float>::quiet_NaN();
  const std::vector<float> before(net.params().begin(), net.params().end());
  AdamState<float> opt;
  EXPECT_THROW(train_step<float>(net, overfit_batch(), opt, 1e-3, 1e-4), TrainingDivergence);
  EXPECT_EQ(opt.step, 0);
  EXPECT_EQ(std::memcmp(before.data(), net.params().data(), before.size() * sizeof(float)), 0);
}

// ---------------------------------------------------------------------------
// Checkpoints.

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = testing::scratch_dir("ckpt"); }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path dir_;
};

TEST_F(CheckpointTest, RoundTripGivesIdenticalOutputs) {
  const auto net = fresh_net(kBoard6x6, 12);
  AdamState<float> opt;
  auto trained = net;
  train_step<float>(trained, overfit_batch(), opt, 1e-3, 1e-4);
  save_checkpoint(dir_ / "a.ckpt", kBoard6x6, trained, &opt, {{"iteration", 3}});
  const Checkpoint ck = load_checkpoint(dir_ / "a.ckpt", kBoard6x6);
  EXPECT_EQ(ck.board, kBoard6x6);
  EXPECT_EQ(ck.net.arch(), trained.arch());
  EXPECT_EQ(ck.extra.at("iteration"), 3);
  ASSERT_TRUE(ck.optimizer.has_value());
  EXPECT_EQ(ck.optimizer->step, 1);
  EXPECT_EQ(ck.optimizer->m, opt.m);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const auto s = testing::random_state(kBoard6x6, rng, 20);
    const auto a = trained.forward({encode(s)})[0];
    const auto b = ck.net.forward({encode(s)})[0];
    ASSERT_EQ(a.policy, b.policy);
    ASSERT_EQ(a.value, b.value);
  }
}

TEST_F(CheckpointTest, BoardMismatchIsArchitectureError) {
  save_checkpoint(dir_ / "six.ckpt", kBoard6x6, fresh_net(kBoard6x6, 1));
  try {
    load_checkpoint(dir_ / "six.ckpt", kBoard8x8);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::ArchitectureMismatch);
  }
}

TEST_F(CheckpointTest, DamagedFilesAreReportedDistinctly) {
  const auto path = dir_ / "n.ckpt";
  save_checkpoint(path, kBoard6x6, fresh_net(kBoard6x6, 2));
  std::vector<char> bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const auto write = [&](const std::filesystem::path& p, const std::vector<char>& b) {
    std::ofstream out(p, std::ios::binary);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  const auto kind_of = [&](const std::filesystem::path& p) {
    try {
      load_checkpoint(p);
    } catch (const CheckpointError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };

  write(dir_ / "truncated.ckpt", std::vector<char>(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(bytes.size() / 2)));
  EXPECT_EQ(kind_of(dir_ / "truncated.ckpt"), static_cast<int>(CheckpointError::Kind::Corrupt));

  write(dir_ / "tiny.ckpt", std::vector<char>(bytes.begin(), bytes.begin() + 5));
  EXPECT_EQ(kind_of(dir_ / "tiny.ckpt"), static_cast<int>(CheckpointError::Kind::Corrupt));

  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x40;
  write(dir_ / "flipped.ckpt", flipped);
  EXPECT_EQ(kind_of(dir_ / "flipped.ckpt"), static_cast<int>(CheckpointError::Kind::Corrupt));

  auto versioned = bytes;
  versioned[8] = 9;
  write(dir_ / "v9.ckpt", versioned);
  EXPECT_EQ(kind_of(dir_ / "v9.ckpt"), static_cast<int>(CheckpointError::Kind::VersionMismatch));

  EXPECT_EQ(kind_of(dir_ / "missing.ckpt"), static_cast<int>(CheckpointError::Kind::NotFound));
}

}  // namespace
}  // namespace gomoku
