// Copyright (c) 2026 shrinklab contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shrinklab/env.hpp"

#include "gtest/gtest.h"
#include "shrinklab/rng.hpp"

namespace shrinklab {
namespace {

class EnvTest : public ::testing::Test {
 protected:
  EnvTest()
      : encoder_(Vocabulary::standard(), EncoderConfig{}),
        words_(Vocabulary::standard().all_tokens(), 32, 11) {}

  // One-target scene with the given ground-truth box, plus a query naming it.
  ShrinkEnv make_env(const Box& gt, EnvConfig cfg = EnvConfig{},
                     std::vector<SceneObject> extra = {}) {
    Scene scene;
    scene.frame = ImageFrame{100, 100};
    scene.seed = 1;
    SceneObject target;
    target.id = 0;
    target.category = "cat";
    target.attributes = {"red"};
    target.box = gt;
    scene.objects.push_back(target);
    for (auto& obj : extra) scene.objects.push_back(obj);
    GroundedQuery query;
    query.text = {"cat"};
    query.target_id = 0;
    query.gold_triads = {Triad{"cat", "cat", kSelfUnit}};
    return ShrinkEnv(scene, query,
                     embed(query.gold_triads, words_, 2), &encoder_, cfg);
  }

  SceneEncoder encoder_;
  EmbeddingTable words_;
};

TEST_F(EnvTest, RewardRuleMatchesDecisionTable) {
  const double ious[] = {0.0, 0.29, 0.3, 0.49, 0.5, 1.0};
  const double deltas[] = {-0.1, 0.0, 0.1};
  // Expected rewards, rows over IoU values, columns over deltas.
  const double expected[6][3] = {
      {0, 0, 0}, {0, 0, 0}, {0, 0, 1}, {0, 0, 1}, {0, 0, 10}, {0, 0, 10},
  };
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(shrink_reward(ious[i], deltas[j]), expected[i][j])
          << "iou=" << ious[i] << " delta=" << deltas[j];
    }
  }
}

TEST_F(EnvTest, StepRewardTenOnLargeIouGain) {
  // Ground truth equals the patch after one top shrink: IoU 0.8 -> 1.0.
  ShrinkEnv env = make_env(Box{0, 20, 100, 100});
  EXPECT_DOUBLE_EQ(env.current_iou(), 0.8);
  const StepOutcome out = env.step(Action::kShrinkTop);
  EXPECT_DOUBLE_EQ(out.iou_after, 1.0);
  EXPECT_NEAR(out.delta_iou, 0.2, 1e-12);
  EXPECT_EQ(out.reward, 10.0);
}

TEST_F(EnvTest, StepRewardOneOnMidIouGain) {
  // IoU 0.3 -> 0.375 after one top shrink.
  ShrinkEnv env = make_env(Box{0, 70, 100, 100});
  const StepOutcome out = env.step(Action::kShrinkTop);
  EXPECT_NEAR(out.iou_after, 0.375, 1e-12);
  EXPECT_GT(out.delta_iou, 0.0);
  EXPECT_EQ(out.reward, 1.0);
}

TEST_F(EnvTest, StepRewardZeroOnIouDrop) {
  ShrinkEnv env = make_env(Box{0, 20, 100, 100});
  env.step(Action::kShrinkTop);  // reaches IoU 1.0
  const StepOutcome out = env.step(Action::kShrinkTop);
  EXPECT_NEAR(out.iou_after, 0.8, 1e-12);
  EXPECT_LT(out.delta_iou, 0.0);
  EXPECT_EQ(out.reward, 0.0);
}

TEST_F(EnvTest, StepRewardZeroBelowIouFloorDespiteGain) {
  // Tiny target: IoU stays far below 0.3 even though it improves.
  ShrinkEnv env = make_env(Box{0, 90, 10, 100});
  const StepOutcome out = env.step(Action::kShrinkTop);
  EXPECT_GT(out.delta_iou, 0.0);
  EXPECT_LT(out.iou_after, 0.3);
  EXPECT_EQ(out.reward, 0.0);
}

TEST_F(EnvTest, StopRewardIsZeroUnderLiteralRule) {
  ShrinkEnv env = make_env(Box{0, 20, 100, 100});
  env.step(Action::kShrinkTop);  // IoU 1.0
  const StepOutcome out = env.step(Action::kStop);
  EXPECT_TRUE(out.done);
  EXPECT_DOUBLE_EQ(out.delta_iou, 0.0);
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_EQ(out.next_state.patch, (Box{0, 20, 100, 100}));
}

TEST_F(EnvTest, StopWithTerminalBonus) {
  EnvConfig cfg;
  cfg.terminal_bonus = true;
  {
    ShrinkEnv env = make_env(Box{0, 20, 100, 100}, cfg);
    env.step(Action::kShrinkTop);
    EXPECT_EQ(env.step(Action::kStop).reward, 10.0);
  }
  {
    ShrinkEnv env = make_env(Box{0, 90, 10, 100}, cfg);  // IoU far below 0.5
    EXPECT_EQ(env.step(Action::kStop).reward, 0.0);
  }
}

TEST_F(EnvTest, ResetStateShape) {
  ShrinkEnv env = make_env(Box{10, 10, 40, 40});
  const AgentState& s = env.state();
  EXPECT_EQ(s.patch, (Box{0, 0, 100, 100}));
  EXPECT_EQ(s.step_index, 0);
  ASSERT_EQ(s.sub_states.size(), 3u);
  // M=2, D_w=32, D_v=64: 192 + 64 + 5 per sub-state.
  for (const auto& sub : s.sub_states) {
    ASSERT_EQ(sub.size(), 261u);
    EXPECT_DOUBLE_EQ(sub[256], 0.0);
    EXPECT_DOUBLE_EQ(sub[257], 0.0);
    EXPECT_DOUBLE_EQ(sub[258], 1.0);
    EXPECT_DOUBLE_EQ(sub[259], 1.0);
    EXPECT_DOUBLE_EQ(sub[260], 1.0);
  }
  // Linguistic and spatial segments agree across scales.
  for (std::size_t i = 0; i < 192; ++i) {
    EXPECT_EQ(s.sub_states[0][i], s.sub_states[1][i]);
    EXPECT_EQ(s.sub_states[0][i], s.sub_states[2][i]);
  }
}

TEST_F(EnvTest, DeterministicStateAssembly) {
  ShrinkEnv a = make_env(Box{10, 10, 40, 40});
  ShrinkEnv b = make_env(Box{10, 10, 40, 40});
  EXPECT_EQ(a.state().sub_states, b.state().sub_states);
  const auto oa = a.step(Action::kShrinkLeft);
  const auto ob = b.step(Action::kShrinkLeft);
  EXPECT_EQ(oa.next_state.sub_states, ob.next_state.sub_states);
  EXPECT_EQ(oa.reward, ob.reward);
}

TEST_F(EnvTest, AblationFlagsChangeStateShape) {
  EnvConfig cfg;
  cfg.no_multiscale = true;
  ShrinkEnv env = make_env(Box{10, 10, 40, 40}, cfg);
  EXPECT_EQ(env.state().sub_states.size(), 1u);

  EnvConfig cfg2;
  cfg2.no_spatial = true;
  ShrinkEnv env2 = make_env(Box{10, 10, 40, 40}, cfg2);
  for (const auto& sub : env2.state().sub_states) {
    ASSERT_EQ(sub.size(), 261u);
    for (std::size_t i = 256; i < 261; ++i) EXPECT_EQ(sub[i], 0.0);
  }
}

TEST_F(EnvTest, ForcedDoneAtStepBudget) {
  ShrinkEnv env = make_env(Box{10, 10, 60, 60});
  int steps = 0;
  bool done = false;
  while (!done) {
    // Cycle directions so no axis hits the minimum-side guard.
    const auto action = static_cast<Action>(steps % 4);
    done = env.step(action).done;
    ++steps;
  }
  EXPECT_EQ(steps, 20);
  EXPECT_THROW(env.step(Action::kStop), std::logic_error);
}

TEST_F(EnvTest, MinSideGuardRefusesAndTerminates) {
  EnvConfig cfg;
  cfg.max_steps = 100;
  ShrinkEnv env = make_env(Box{10, 10, 60, 60}, cfg);
  Box before = env.state().patch;
  int steps = 0;
  StepOutcome out;
  do {
    before = env.state().patch;
    out = env.step(Action::kShrinkTop);
    ++steps;
  } while (!out.done);
  // The final action was refused: patch unchanged, height still above the
  // 2-unit minimum, and the episode ended early.
  EXPECT_EQ(out.next_state.patch, before);
  EXPECT_GE(out.next_state.patch.height(), 2.0);
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_EQ(steps, 18);  // 100 * 0.8^17 = 2.25; one more would cross 2.0
}

TEST_F(EnvTest, FixedStrideUsesFrameExtent) {
  EnvConfig cfg;
  cfg.fixed_stride = true;
  ShrinkEnv env = make_env(Box{10, 10, 60, 60}, cfg);
  const auto o1 = env.step(Action::kShrinkTop);
  EXPECT_EQ(o1.next_state.patch, (Box{0, 20, 100, 100}));
  const auto o2 = env.step(Action::kShrinkTop);
  EXPECT_EQ(o2.next_state.patch, (Box{0, 40, 100, 100}));
  // Two more leave 20 units of height; a fifth would cross the minimum and
  // must be refused, terminating the episode.
  env.step(Action::kShrinkTop);
  const auto o4 = env.step(Action::kShrinkTop);
  EXPECT_FALSE(o4.done);
  const auto o5 = env.step(Action::kShrinkTop);
  EXPECT_TRUE(o5.done);
  EXPECT_EQ(o5.next_state.patch, o4.next_state.patch);
}

TEST_F(EnvTest, PatchNestingOverRandomEpisodes) {
  Rng rng(314);
  for (int episode = 0; episode < 50; ++episode) {
    ShrinkEnv env = make_env(Box{20, 30, 55, 70});
    Box prev = env.state().patch;
    bool done = false;
    while (!done) {
      const auto action = static_cast<Action>(rng.index(kActionCount));
      const StepOutcome out = env.step(action);
      EXPECT_TRUE(contains(prev, out.next_state.patch));
      if (action != Action::kStop && out.next_state.patch != prev) {
        EXPECT_LT(out.next_state.patch.area(), prev.area());
      }
      prev = out.next_state.patch;
      done = out.done;
    }
  }
}

TEST_F(EnvTest, TraceFlagsGrayOutWhenSupportLeavesPatch) {
  Scene scene;
  scene.frame = ImageFrame{100, 100};
  scene.seed = 9;
  SceneObject cat;
  cat.id = 0;
  cat.category = "cat";
  cat.attributes = {"red"};
  cat.box = Box{10, 10, 30, 30};
  SceneObject shelf;
  shelf.id = 1;
  shelf.category = "shelf";
  shelf.attributes = {"blue"};
  shelf.box = Box{10, 70, 30, 90};
  scene.objects = {cat, shelf};
  GroundedQuery query;
  query.text = {"cat", "above", "a", "shelf"};
  query.target_id = 0;
  query.gold_triads = {Triad{"cat", "shelf", "above"}};
  ShrinkEnv env(scene, query, embed(query.gold_triads, words_, 2), &encoder_,
                EnvConfig{});

  ASSERT_EQ(env.trace().initial_triad_active, std::vector<bool>{true});
  // First bottom shrink keeps the shelf in the patch (y_br 100 -> 80).
  env.step(Action::kShrinkBottom);
  EXPECT_EQ(env.trace().steps.back().triad_active, std::vector<bool>{true});
  // Second bottom shrink crosses the shelf top (y_br 80 -> 64 < 70).
  env.step(Action::kShrinkBottom);
  EXPECT_EQ(env.trace().steps.back().triad_active, std::vector<bool>{false});
  // Flags never come back, even if the patch still overlaps nothing new.
  env.step(Action::kShrinkLeft);
  EXPECT_EQ(env.trace().steps.back().triad_active, std::vector<bool>{false});
}

TEST_F(EnvTest, TraceFlagsUnchangedWithoutCrossings) {
  SceneObject other;
  other.id = 1;
  other.category = "cat";
  other.attributes = {"blue"};
  other.box = Box{60, 60, 90, 90};
  ShrinkEnv env = make_env(Box{5, 5, 30, 30}, EnvConfig{}, {other});
  ASSERT_EQ(env.trace().initial_triad_active, std::vector<bool>{true});
  env.step(Action::kShrinkRight);  // patch x_br 100 -> 80, still overlaps
  EXPECT_EQ(env.trace().steps.back().triad_active, std::vector<bool>{true});
}

TEST_F(EnvTest, UnknownReferenceTriadNeverDeactivates) {
  const Scene scene = [] {
    Scene s;
    s.frame = ImageFrame{100, 100};
    SceneObject obj;
    obj.id = 0;
    obj.category = "cat";
    obj.box = Box{10, 10, 30, 30};
    s.objects = {obj};
    return s;
  }();
  const std::vector<Triad> triads{Triad{kUnknownUnit, kUnknownUnit, "left"}};
  const auto flags = update_trace_flags({true}, scene, 0, Box{50, 50, 60, 60},
                                        triads);
  EXPECT_EQ(flags, std::vector<bool>{true});
}

}  // namespace
}  // namespace shrinklab
