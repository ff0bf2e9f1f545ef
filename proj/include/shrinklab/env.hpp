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

#ifndef SHRINKLAB_ENV_HPP_
#define SHRINKLAB_ENV_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "shrinklab/encoder.hpp"
#include "shrinklab/geometry.hpp"
#include "shrinklab/nets.hpp"
#include "shrinklab/query.hpp"
#include "shrinklab/scene.hpp"

namespace shrinklab {

// Order is load-bearing: it defines the actor's output indexing.
enum class Action {
  kShrinkTop = 0,
  kShrinkBottom = 1,
  kShrinkLeft = 2,
  kShrinkRight = 3,
  kStop = 4,
};

inline constexpr int kActionCount = 5;

inline const char* to_string(Action a) {
  switch (a) {
    case Action::kShrinkTop:
      return "ShrinkTop";
    case Action::kShrinkBottom:
      return "ShrinkBottom";
    case Action::kShrinkLeft:
      return "ShrinkLeft";
    case Action::kShrinkRight:
      return "ShrinkRight";
    case Action::kStop:
      return "Stop";
  }
  return "?";
}

inline Action action_from_string(const std::string& name) {
  for (int i = 0; i < kActionCount; ++i) {
    if (name == to_string(static_cast<Action>(i))) return static_cast<Action>(i);
  }
  throw std::invalid_argument("unknown action '" + name + "'");
}

struct EnvConfig {
  double alpha = 0.2;              // shrinking stride fraction
  int max_steps = 20;              // forced-termination step budget
  double min_side_fraction = 0.02; // of the frame extent, per axis
  bool terminal_bonus = false;     // reward 10 at Stop when IoU >= 0.5
  bool fixed_stride = false;       // stride alpha*W / alpha*H of the frame
  bool no_multiscale = false;      // only the scale-1 sub-state
  bool no_spatial = false;         // zero out the 5-D spatial segment
};

// The shrinking reward rule:
//   0   if IoU < 0.3 or dIoU <= 0
//   1   if 0.3 <= IoU < 0.5 and dIoU > 0
//   10  if 0.5 <= IoU and dIoU > 0
inline double shrink_reward(double iou_after, double delta_iou) {
  if (iou_after < 0.3 || delta_iou <= 0.0) return 0.0;
  if (iou_after < 0.5) return 1.0;
  return 10.0;
}

// What the agent sees: one vector per scale level, each the concatenation
// linguistic | visual(scale) | spatial. The linguistic and spatial segments
// are identical across scales.
struct AgentState {
  std::vector<Vector> sub_states;
  Box patch;
  int step_index = 0;
};

struct StepOutcome {
  AgentState next_state;
  double reward = 0.0;
  bool done = false;
  double iou_after = 0.0;
  double delta_iou = 0.0;
};

struct TraceStep {
  Box patch;  // after the action
  Action action = Action::kStop;
  double reward = 0.0;
  std::vector<bool> triad_active;
};

struct EpisodeTrace {
  std::string query_text;
  std::uint64_t scene_seed = 0;
  std::vector<Triad> triads;
  std::vector<bool> initial_triad_active;
  std::vector<TraceStep> steps;
  Box final_box;
};

// A triad stays "active" while some non-target object matching its
// reference unit still overlaps the patch; once its support is shrunk away
// the flag goes out and never comes back.
inline std::vector<bool> update_trace_flags(const std::vector<bool>& flags,
                                            const Scene& scene, int target_id,
                                            const Box& patch,
                                            const std::vector<Triad>& triads) {
  std::vector<bool> out(triads.size());
  for (std::size_t k = 0; k < triads.size(); ++k) {
    const bool previously = k < flags.size() ? flags[k] : true;
    if (!previously) {
      out[k] = false;
      continue;
    }
    const std::string& ref = triads[k].reference_unit;
    if (ref == kUnknownUnit) {
      out[k] = true;  // no object evidence to remove
      continue;
    }
    bool supported = false;
    for (const auto& obj : scene.objects) {
      if (obj.id == target_id || obj.category != ref) continue;
      if (intersection_area(obj.box, patch) > 0.0) {
        supported = true;
        break;
      }
    }
    out[k] = supported;
  }
  return out;
}

// One grounding episode: the patch starts as the full frame and shrinks
// under the agent's actions until Stop or forced termination. Stateful and
// single-threaded per instance; scene and features are immutable inputs.
class ShrinkEnv {
 public:
  ShrinkEnv(Scene scene, GroundedQuery query, LinguisticFeature linguistic,
            const SceneEncoder* encoder, const EnvConfig& cfg)
      : scene_(std::move(scene)),
        query_(std::move(query)),
        linguistic_(std::move(linguistic)),
        encoder_(encoder),
        cfg_(cfg),
        gt_box_(scene_.object_by_id(query_.target_id).box) {
    if (!encoder_) throw std::invalid_argument("env: encoder required");
    reset();
  }

  const Scene& scene() const { return scene_; }
  const GroundedQuery& query() const { return query_; }
  const Box& gt_box() const { return gt_box_; }
  const EnvConfig& config() const { return cfg_; }
  const AgentState& state() const { return state_; }
  const EpisodeTrace& trace() const { return trace_; }
  bool done() const { return done_; }
  double current_iou() const { return prev_iou_; }

  int sub_state_count() const { return cfg_.no_multiscale ? 1 : 3; }

  int sub_state_dim() const {
    return static_cast<int>(linguistic_.size()) +
           encoder_->config().output_dim + 5;
  }

  AgentState reset() {
    done_ = false;
    state_ = assemble(scene_.frame.box(), 0);
    prev_iou_ = iou(state_.patch, gt_box_);
    trace_ = EpisodeTrace{};
    trace_.query_text = query_.text_str();
    trace_.scene_seed = scene_.seed;
    trace_.triads = query_.gold_triads;
    trace_.initial_triad_active =
        update_trace_flags(std::vector<bool>(query_.gold_triads.size(), true),
                           scene_, query_.target_id, state_.patch,
                           query_.gold_triads);
    trace_.final_box = state_.patch;
    return state_;
  }

  StepOutcome step(Action action) {
    if (done_) throw std::logic_error("env: step on a terminal state");
    Box patch = state_.patch;
    bool refused = false;
    if (action != Action::kStop) {
      const auto dir = static_cast<ShrinkDirection>(action);
      const Box next = cfg_.fixed_stride ? fixed_stride_shrink(patch, dir)
                                         : shrink(patch, dir, cfg_.alpha);
      if (violates_min_side(next)) {
        refused = true;  // degenerate guard: refuse and terminate
      } else {
        patch = next;
      }
    }

    const double iou_after = iou(patch, gt_box_);
    const double delta = iou_after - prev_iou_;
    double reward = shrink_reward(iou_after, delta);
    if (action == Action::kStop && cfg_.terminal_bonus) {
      reward = iou_after >= 0.5 ? 10.0 : 0.0;
    }

    const int next_step = state_.step_index + 1;
    done_ = action == Action::kStop || refused || next_step >= cfg_.max_steps;
    state_ = assemble(patch, next_step);
    prev_iou_ = iou_after;

    TraceStep ts;
    ts.patch = patch;
    ts.action = action;
    ts.reward = reward;
    const auto& prev_flags = trace_.steps.empty()
                                 ? trace_.initial_triad_active
                                 : trace_.steps.back().triad_active;
    ts.triad_active = update_trace_flags(prev_flags, scene_, query_.target_id,
                                         patch, query_.gold_triads);
    trace_.steps.push_back(std::move(ts));
    trace_.final_box = patch;

    StepOutcome out;
    out.next_state = state_;
    out.reward = reward;
    out.done = done_;
    out.iou_after = iou_after;
    out.delta_iou = delta;
    return out;
  }

 private:
  Box fixed_stride_shrink(const Box& p, ShrinkDirection dir) const {
    const double stride_x = cfg_.alpha * scene_.frame.width;
    const double stride_y = cfg_.alpha * scene_.frame.height;
    Box out = p;
    switch (dir) {
      case ShrinkDirection::kTop:
        out.y_tl = p.y_tl + stride_y;
        break;
      case ShrinkDirection::kBottom:
        out.y_br = p.y_br - stride_y;
        break;
      case ShrinkDirection::kLeft:
        out.x_tl = p.x_tl + stride_x;
        break;
      case ShrinkDirection::kRight:
        out.x_br = p.x_br - stride_x;
        break;
    }
    return out;  // may be degenerate; the min-side guard rejects it
  }

  bool violates_min_side(const Box& b) const {
    const double min_w = cfg_.min_side_fraction * scene_.frame.width;
    const double min_h = cfg_.min_side_fraction * scene_.frame.height;
    return b.width() < min_w || b.height() < min_h;
  }

  AgentState assemble(const Box& patch, int step_index) const {
    AgentState s;
    s.patch = patch;
    s.step_index = step_index;
    SpatialFeature spatial = spatial_feature(patch, scene_.frame);
    if (cfg_.no_spatial) spatial.fill(0.0);
    const int scales = sub_state_count();
    s.sub_states.reserve(static_cast<std::size_t>(scales));
    for (int c = 1; c <= scales; ++c) {
      Vector sub;
      sub.reserve(linguistic_.size() +
                  static_cast<std::size_t>(encoder_->config().output_dim) + 5);
      sub.insert(sub.end(), linguistic_.begin(), linguistic_.end());
      const Vector visual = encoder_->encode(scene_, patch, c);
      sub.insert(sub.end(), visual.begin(), visual.end());
      sub.insert(sub.end(), spatial.begin(), spatial.end());
      s.sub_states.push_back(std::move(sub));
    }
    return s;
  }

  Scene scene_;
  GroundedQuery query_;
  LinguisticFeature linguistic_;
  const SceneEncoder* encoder_;
  EnvConfig cfg_;
  Box gt_box_;
  AgentState state_;
  EpisodeTrace trace_;
  double prev_iou_ = 0.0;
  bool done_ = false;
};

}  // namespace shrinklab

#endif  // SHRINKLAB_ENV_HPP_
