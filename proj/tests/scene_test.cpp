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

#include "shrinklab/scene.hpp"

#include "gtest/gtest.h"
#include "shrinklab/query.hpp"

namespace shrinklab {
namespace {

SceneObject make_object(int id, const std::string& category, Box box,
                        std::vector<std::string> attrs = {}) {
  SceneObject obj;
  obj.id = id;
  obj.category = category;
  std::sort(attrs.begin(), attrs.end());
  obj.attributes = std::move(attrs);
  obj.box = box;
  return obj;
}

TEST(RelationTest, LeftByCenters) {
  const GenConfig cfg;
  const auto a = make_object(0, "cat", Box{5, 45, 15, 55});    // center (10,50)
  const auto b = make_object(1, "shelf", Box{75, 45, 85, 55});  // center (80,50)
  EXPECT_TRUE(relation_holds(a, b, "left", cfg));
  EXPECT_FALSE(relation_holds(b, a, "left", cfg));
  EXPECT_TRUE(relation_holds(b, a, "right", cfg));
}

TEST(RelationTest, EqualCentersExcludedByMargin) {
  const GenConfig cfg;
  const auto a = make_object(0, "cat", Box{10, 10, 20, 20});
  const auto b = make_object(1, "dog", Box{5, 40, 25, 60});  // same center x
  EXPECT_FALSE(relation_holds(a, b, "left", cfg));
  EXPECT_FALSE(relation_holds(a, b, "right", cfg));
}

TEST(RelationTest, InsideIsContainment) {
  const GenConfig cfg;
  const auto a = make_object(0, "cup", Box{2, 2, 4, 4});
  const auto b = make_object(1, "box", Box{0, 0, 10, 10});
  EXPECT_TRUE(relation_holds(a, b, "inside", cfg));
  EXPECT_FALSE(relation_holds(b, a, "inside", cfg));
}

TEST(RelationTest, AboveBelowByCenters) {
  const GenConfig cfg;
  const auto a = make_object(0, "cat", Box{10, 0, 20, 10});
  const auto b = make_object(1, "shelf", Box{10, 50, 20, 60});
  EXPECT_TRUE(relation_holds(a, b, "above", cfg));
  EXPECT_TRUE(relation_holds(b, a, "below", cfg));
  EXPECT_FALSE(relation_holds(a, b, "below", cfg));
}

TEST(RelationTest, BiggerSmallerByAreaRatio) {
  const GenConfig cfg;  // size_ratio 1.3
  const auto a = make_object(0, "box", Box{0, 0, 20, 20});   // 400
  const auto b = make_object(1, "cup", Box{0, 0, 10, 10});   // 100
  const auto c = make_object(2, "cup", Box{0, 0, 18, 20});   // 360
  EXPECT_TRUE(relation_holds(a, b, "bigger", cfg));
  EXPECT_TRUE(relation_holds(b, a, "smaller", cfg));
  EXPECT_FALSE(relation_holds(a, c, "bigger", cfg));  // ratio below 1.3
  EXPECT_FALSE(relation_holds(a, a, "bigger", cfg));
}

TEST(RelationTest, AttributePredicateTestsMembership) {
  const GenConfig cfg;
  const auto a = make_object(0, "cat", Box{0, 0, 10, 10}, {"red", "small"});
  const auto b = make_object(1, "dog", Box{20, 20, 30, 30});
  EXPECT_TRUE(relation_holds(a, b, "red", cfg));
  EXPECT_FALSE(relation_holds(a, b, "blue", cfg));
}

TEST(RelationTest, UnknownRelationThrows) {
  const GenConfig cfg;
  const auto a = make_object(0, "cat", Box{0, 0, 10, 10});
  EXPECT_THROW(relation_holds(a, a, "zorps", cfg), std::invalid_argument);
}

TEST(LocationTest, FrameHalvesWithMargin) {
  const ImageFrame frame{100, 100};
  const auto far_left = make_object(0, "cat", Box{0, 40, 10, 60});
  const auto centered = make_object(1, "cat", Box{45, 40, 55, 60});
  EXPECT_TRUE(location_holds(far_left, "left", frame, 1.0));
  EXPECT_FALSE(location_holds(far_left, "right", frame, 1.0));
  EXPECT_FALSE(location_holds(centered, "left", frame, 1.0));
  EXPECT_FALSE(location_holds(centered, "right", frame, 1.0));
  EXPECT_THROW(location_holds(centered, "center", frame, 1.0),
               std::invalid_argument);
}

TEST(GenerateTest, DeterministicForSeedAndConfig) {
  const GenConfig cfg;
  const auto [scene_a, query_a] = generate_scene(12345, cfg);
  const auto [scene_b, query_b] = generate_scene(12345, cfg);
  EXPECT_EQ(scene_a, scene_b);
  EXPECT_EQ(query_a, query_b);
  const auto [scene_c, query_c] = generate_scene(12346, cfg);
  EXPECT_NE(scene_a, scene_c);
}

TEST(GenerateTest, CatAboveShelfFixture) {
  GenConfig cfg;
  cfg.vocab.categories = {"cat", "shelf"};
  cfg.templates = {"relation"};
  cfg.relation_pool = {"above"};
  cfg.article_prob = 0.0;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    std::pair<Scene, GroundedQuery> out{Scene{}, GroundedQuery{}};
    try {
      out = generate_scene(seed, cfg);
    } catch (const GenerationError&) {
      continue;
    }
    const auto& [scene, query] = out;
    if (query.text_str() != "cat above a shelf") continue;
    found = true;
    ASSERT_EQ(query.gold_triads.size(), 1u);
    EXPECT_EQ(query.gold_triads.front(), (Triad{"cat", "shelf", "above"}));
    EXPECT_EQ(scene.object_by_id(query.target_id).category, "cat");
  }
  EXPECT_TRUE(found);
}

TEST(GenerateTest, ExactlyOneObjectSatisfiesEveryQuery) {
  const GenConfig cfg;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto [scene, query] = generate_scene(seed, cfg);
    const auto sat = query_satisfiers(scene, query.gold_triads, cfg);
    ASSERT_EQ(sat.size(), 1u) << "seed " << seed;
    EXPECT_EQ(sat.front(), query.target_id);
  }
}

TEST(GenerateTest, ParserRoundTripsGeneratedQueries) {
  const GenConfig cfg;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto [scene, query] = generate_scene(seed, cfg);
    EXPECT_EQ(parse(query.text, cfg.vocab), query.gold_triads)
        << "seed " << seed << " text '" << query.text_str() << "'";
  }
}

TEST(GenerateTest, RespectsLayoutInvariants) {
  GenConfig cfg;
  cfg.min_objects = 3;
  cfg.max_objects = 6;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto [scene, query] = generate_scene(seed, cfg);
    ASSERT_GE(scene.objects.size(), 3u);
    ASSERT_LE(scene.objects.size(), 6u);
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      const auto& a = scene.objects[i];
      EXPECT_TRUE(contains(scene.frame.box(), a.box));
      EXPECT_TRUE(cfg.vocab.is_category(a.category));
      for (const auto& attr : a.attributes) {
        EXPECT_TRUE(cfg.vocab.is_attribute(attr));
      }
      for (std::size_t j = i + 1; j < scene.objects.size(); ++j) {
        EXPECT_NE(a.id, scene.objects[j].id);
        EXPECT_LE(iou(a.box, scene.objects[j].box), cfg.overlap_cap);
      }
    }
  }
}

TEST(GenerateTest, ConjunctionTemplateYieldsAtLeastTwoTriads) {
  GenConfig cfg;
  cfg.templates = {"conjunction"};
  int produced = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    try {
      const auto [scene, query] = generate_scene(seed, cfg);
      EXPECT_GE(query.gold_triads.size(), 2u);
      EXPECT_EQ(parse(query.text, cfg.vocab), query.gold_triads);
      ++produced;
    } catch (const GenerationError&) {
    }
  }
  EXPECT_GT(produced, 250);
}

TEST(GenerateTest, ReportsSeedWhenUniquenessUnsatisfiable) {
  GenConfig cfg;
  // A single bare-noun template over one category and identical layouts of
  // two objects cannot be unique.
  cfg.vocab.categories = {"cat"};
  cfg.min_objects = 2;
  cfg.max_objects = 2;
  cfg.templates = {"bare"};
  cfg.scene_attempts = 4;
  try {
    generate_scene(77, cfg);
    FAIL() << "expected GenerationError";
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.seed(), 77u);
  }
}

}  // namespace
}  // namespace shrinklab
