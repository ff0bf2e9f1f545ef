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

#ifndef SHRINKLAB_SCENE_HPP_
#define SHRINKLAB_SCENE_HPP_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shrinklab/geometry.hpp"
#include "shrinklab/query.hpp"
#include "shrinklab/rng.hpp"

namespace shrinklab {

struct SceneObject {
  int id = 0;
  std::string category;
  std::vector<std::string> attributes;  // kept sorted, acts as a set
  Box box;

  bool has_attribute(const std::string& token) const {
    return std::binary_search(attributes.begin(), attributes.end(), token);
  }

  bool operator==(const SceneObject& other) const = default;
};

struct Scene {
  ImageFrame frame;
  std::vector<SceneObject> objects;
  std::uint64_t seed = 0;

  const SceneObject& object_by_id(int id) const {
    for (const auto& obj : objects) {
      if (obj.id == id) return obj;
    }
    throw std::out_of_range("scene: no object with id " + std::to_string(id));
  }

  bool operator==(const Scene& other) const = default;
};

struct GroundedQuery {
  std::vector<std::string> text;
  int target_id = -1;
  std::vector<Triad> gold_triads;

  std::string text_str() const { return join_tokens(text); }

  bool operator==(const GroundedQuery& other) const = default;
};

// Everything the generator and the relation semantics depend on. The margin
// keeps spatial predicates tie-free; the size ratio does the same for
// bigger/smaller.
struct GenConfig {
  ImageFrame frame{100.0, 100.0};
  int min_objects = 2;
  int max_objects = 6;
  double min_side = 12.0;
  double max_side = 40.0;
  double overlap_cap = 0.3;  // pairwise IoU between placed objects
  bool allow_heavy_overlap = false;
  double relation_margin = 1.0;
  double size_ratio = 1.3;
  double small_area = 500.0;   // below: attribute "small"
  double big_area = 1000.0;    // above: attribute "big"
  double article_prob = 0.3;   // leading "the"
  int scene_attempts = 64;
  int query_attempts = 32;
  int placement_attempts = 40;
  Vocabulary vocab = Vocabulary::standard();
  // Relations the generator may use; must have relation_holds semantics.
  std::vector<std::string> relation_pool = {"above", "below", "left", "right"};
  // Query templates drawn uniformly. Known: bare, attribute, location,
  // relation, conjunction (which itself spans attr+rel, rel+rel, loc+attr).
  std::vector<std::string> templates = {"bare", "attribute", "location",
                                        "relation", "conjunction"};
};

// Binary relation semantics over scene objects. Spatial relations compare
// box centers with a margin; inside is box containment; bigger/smaller
// compare areas with a ratio; attribute tokens test membership on `a`.
inline bool relation_holds(const SceneObject& a, const SceneObject& b,
                           const std::string& rel, const GenConfig& cfg) {
  const double m = cfg.relation_margin;
  if (rel == "left") return a.box.center_x() < b.box.center_x() - m;
  if (rel == "right") return a.box.center_x() > b.box.center_x() + m;
  if (rel == "above") return a.box.center_y() < b.box.center_y() - m;
  if (rel == "below") return a.box.center_y() > b.box.center_y() + m;
  if (rel == "inside") return contains(b.box, a.box);
  if (rel == "bigger") return a.box.area() > cfg.size_ratio * b.box.area();
  if (rel == "smaller") return cfg.size_ratio * a.box.area() < b.box.area();
  if (cfg.vocab.is_attribute(rel)) return a.has_attribute(rel);
  throw std::invalid_argument("relation_holds: unknown relation '" + rel +
                              "'");
}

// Unary location predicates, relative to the frame halves with the margin.
inline bool location_holds(const SceneObject& obj, const std::string& loc,
                           const ImageFrame& frame, double margin) {
  if (loc == "left") return obj.box.center_x() < 0.5 * frame.width - margin;
  if (loc == "right") return obj.box.center_x() > 0.5 * frame.width + margin;
  if (loc == "top") return obj.box.center_y() < 0.5 * frame.height - margin;
  if (loc == "bottom") return obj.box.center_y() > 0.5 * frame.height + margin;
  throw std::invalid_argument("location_holds: unknown location '" + loc +
                              "'");
}

// Whether `obj` satisfies one triad, with relation triads read
// existentially: some other object of the reference category must stand in
// the stated relation.
inline bool triad_holds(const Scene& scene, const SceneObject& obj,
                        const Triad& triad, const GenConfig& cfg) {
  const bool category_ok =
      triad.target_unit == kUnknownUnit || obj.category == triad.target_unit;
  if (!category_ok) return false;
  const std::string& d = triad.discriminative_unit;
  if (d == kSelfUnit) return true;
  if (cfg.vocab.is_attribute(d)) return obj.has_attribute(d);
  // Location word when the triad carries no distinct reference.
  if (cfg.vocab.is_location(d) && triad.reference_unit == triad.target_unit) {
    return location_holds(obj, d, scene.frame, cfg.relation_margin);
  }
  if (triad.target_unit == kUnknownUnit) {
    return location_holds(obj, d, scene.frame, cfg.relation_margin);
  }
  for (const auto& other : scene.objects) {
    if (other.id == obj.id) continue;
    if (other.category != triad.reference_unit) continue;
    if (relation_holds(obj, other, d, cfg)) return true;
  }
  return false;
}

// Brute-force referent check: ids of all objects satisfying every triad.
inline std::vector<int> query_satisfiers(const Scene& scene,
                                         const std::vector<Triad>& triads,
                                         const GenConfig& cfg) {
  std::vector<int> out;
  for (const auto& obj : scene.objects) {
    bool all = true;
    for (const auto& t : triads) {
      if (!triad_holds(scene, obj, t, cfg)) {
        all = false;
        break;
      }
    }
    if (all) out.push_back(obj.id);
  }
  return out;
}

class GenerationError : public std::runtime_error {
 public:
  GenerationError(std::uint64_t seed, const std::string& message)
      : std::runtime_error("generation failed for seed " +
                           std::to_string(seed) + ": " + message),
        seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

namespace detail {

inline std::optional<Scene> sample_layout(Rng& rng, std::uint64_t seed,
                                          const GenConfig& cfg) {
  Scene scene;
  scene.frame = cfg.frame;
  scene.seed = seed;
  const int count =
      static_cast<int>(rng.uniform_int(cfg.min_objects, cfg.max_objects));
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < cfg.placement_attempts && !placed;
         ++attempt) {
      const double w = rng.uniform(cfg.min_side, cfg.max_side);
      const double h = rng.uniform(cfg.min_side, cfg.max_side);
      const double x = rng.uniform(0.0, cfg.frame.width - w);
      const double y = rng.uniform(0.0, cfg.frame.height - h);
      const Box box{x, y, x + w, y + h};
      bool ok = true;
      if (!cfg.allow_heavy_overlap) {
        for (const auto& other : scene.objects) {
          if (iou(box, other.box) > cfg.overlap_cap) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;
      SceneObject obj;
      obj.id = i;
      obj.category = cfg.vocab.categories[rng.index(cfg.vocab.categories.size())];
      obj.attributes.push_back(
          cfg.vocab.colors[rng.index(cfg.vocab.colors.size())]);
      const double area = box.area();
      if (area <= cfg.small_area) obj.attributes.push_back("small");
      if (area >= cfg.big_area) obj.attributes.push_back("big");
      std::sort(obj.attributes.begin(), obj.attributes.end());
      obj.box = box;
      scene.objects.push_back(std::move(obj));
      placed = true;
    }
    if (!placed) return std::nullopt;
  }
  return scene;
}

struct QueryDraft {
  std::vector<std::string> text;
  std::vector<Triad> triads;
};

// Renders one clause "rel [of|than] a <ref>" and returns its triad.
inline Triad render_relation(std::vector<std::string>& text,
                             const std::string& target,
                             const std::string& rel, const std::string& ref) {
  text.push_back(rel);
  if (rel == "left" || rel == "right") text.push_back("of");
  if (rel == "bigger" || rel == "smaller") text.push_back("than");
  text.push_back("a");
  text.push_back(ref);
  return Triad{target, ref, rel};
}

// Picks a relation from the pool plus a reference object of a different
// category such that the relation holds for `target`.
inline std::optional<std::pair<std::string, std::string>> pick_relation(
    Rng& rng, const Scene& scene, const SceneObject& target,
    const GenConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> options;
  for (const auto& rel : cfg.relation_pool) {
    for (const auto& other : scene.objects) {
      if (other.id == target.id || other.category == target.category) continue;
      if (relation_holds(target, other, rel, cfg)) {
        options.emplace_back(rel, other.category);
      }
    }
  }
  if (options.empty()) return std::nullopt;
  return options[rng.index(options.size())];
}

inline std::optional<QueryDraft> instantiate_template(
    Rng& rng, const Scene& scene, const std::string& tmpl,
    const GenConfig& cfg) {
  const SceneObject& target = scene.objects[rng.index(scene.objects.size())];
  QueryDraft draft;
  if (rng.uniform() < cfg.article_prob) draft.text.push_back("the");

  auto pick_attr = [&]() -> std::string {
    return target.attributes[rng.index(target.attributes.size())];
  };
  auto pick_location = [&]() -> std::optional<std::string> {
    std::vector<std::string> holds;
    for (const auto& loc : cfg.vocab.locations) {
      if (location_holds(target, loc, scene.frame, cfg.relation_margin)) {
        holds.push_back(loc);
      }
    }
    if (holds.empty()) return std::nullopt;
    return holds[rng.index(holds.size())];
  };

  if (tmpl == "bare") {
    draft.text.push_back(target.category);
    draft.triads.push_back(Triad{target.category, target.category, kSelfUnit});
    return draft;
  }
  if (tmpl == "attribute") {
    const std::string attr = pick_attr();
    draft.text.push_back(attr);
    draft.text.push_back(target.category);
    draft.triads.push_back(Triad{target.category, target.category, attr});
    return draft;
  }
  if (tmpl == "location") {
    const auto loc = pick_location();
    if (!loc) return std::nullopt;
    draft.text.push_back(*loc);
    draft.text.push_back(target.category);
    draft.triads.push_back(Triad{target.category, target.category, *loc});
    return draft;
  }
  if (tmpl == "relation") {
    const auto rel = pick_relation(rng, scene, target, cfg);
    if (!rel) return std::nullopt;
    draft.text.push_back(target.category);
    draft.triads.push_back(
        render_relation(draft.text, target.category, rel->first, rel->second));
    return draft;
  }
  if (tmpl == "conjunction") {
    // Three shapes, all yielding at least two triads. Gold triads are laid
    // out in the parser's class order: locations, attributes, relations.
    const auto kind = rng.index(3);
    if (kind == 0) {
      // attribute + relation: "red cat above a shelf"
      const auto rel = pick_relation(rng, scene, target, cfg);
      if (!rel) return std::nullopt;
      const std::string attr = pick_attr();
      draft.text.push_back(attr);
      draft.text.push_back(target.category);
      draft.triads.push_back(Triad{target.category, target.category, attr});
      draft.triads.push_back(render_relation(draft.text, target.category,
                                             rel->first, rel->second));
      return draft;
    }
    if (kind == 1) {
      // relation + relation: "cat above a shelf and left of a table"
      const auto rel1 = pick_relation(rng, scene, target, cfg);
      if (!rel1) return std::nullopt;
      draft.text.push_back(target.category);
      const Triad first = render_relation(draft.text, target.category,
                                          rel1->first, rel1->second);
      Triad second;
      bool found = false;
      for (int attempt = 0; attempt < 8 && !found; ++attempt) {
        const auto rel2 = pick_relation(rng, scene, target, cfg);
        if (rel2 && (rel2->first != rel1->first ||
                     rel2->second != rel1->second)) {
          draft.text.push_back("and");
          second = render_relation(draft.text, target.category, rel2->first,
                                   rel2->second);
          found = true;
        }
      }
      if (!found) return std::nullopt;
      draft.triads.push_back(first);
      draft.triads.push_back(second);
      return draft;
    }
    // location + attribute: "left red cat"
    const auto loc = pick_location();
    if (!loc) return std::nullopt;
    const std::string attr = pick_attr();
    draft.text.push_back(*loc);
    draft.text.push_back(attr);
    draft.text.push_back(target.category);
    draft.triads.push_back(Triad{target.category, target.category, *loc});
    draft.triads.push_back(Triad{target.category, target.category, attr});
    return draft;
  }
  throw std::invalid_argument("unknown query template '" + tmpl + "'");
}

}  // namespace detail

// Draws a scene and a query that exactly one object satisfies (checked by
// brute force over all objects). Fully deterministic in (seed, config).
inline std::pair<Scene, GroundedQuery> generate_scene(std::uint64_t seed,
                                                      const GenConfig& cfg) {
  if (cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects) {
    throw std::invalid_argument("generate_scene: bad object count range");
  }
  Rng rng(derive_seed(seed, 0x5ce9e));
  for (int attempt = 0; attempt < cfg.scene_attempts; ++attempt) {
    const auto scene = detail::sample_layout(rng, seed, cfg);
    if (!scene) continue;
    for (int qa = 0; qa < cfg.query_attempts; ++qa) {
      const std::string& tmpl = cfg.templates[rng.index(cfg.templates.size())];
      const auto draft = detail::instantiate_template(rng, *scene, tmpl, cfg);
      if (!draft) continue;
      const std::vector<int> sat = query_satisfiers(*scene, draft->triads, cfg);
      if (sat.size() != 1) continue;
      GroundedQuery query;
      query.text = draft->text;
      query.target_id = sat.front();
      query.gold_triads = draft->triads;
      return {*scene, std::move(query)};
    }
  }
  throw GenerationError(seed, "no unique query after bounded retries");
}

}  // namespace shrinklab

#endif  // SHRINKLAB_SCENE_HPP_
