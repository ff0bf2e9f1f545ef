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

#ifndef SHRINKLAB_GEOMETRY_HPP_
#define SHRINKLAB_GEOMETRY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shrinklab {

// Axis-aligned rectangle in continuous image coordinates. Origin is the
// top-left corner of the image; y grows downward. Coordinates stay
// continuous on purpose: the shrinking transform below produces
// non-integer positions and rounding would break its geometric decay.
struct Box {
  double x_tl = 0.0;
  double y_tl = 0.0;
  double x_br = 0.0;
  double y_br = 0.0;

  double width() const { return x_br - x_tl; }
  double height() const { return y_br - y_tl; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_tl + x_br); }
  double center_y() const { return 0.5 * (y_tl + y_br); }

  bool valid() const {
    return std::isfinite(x_tl) && std::isfinite(y_tl) && std::isfinite(x_br) &&
           std::isfinite(y_br) && x_tl < x_br && y_tl < y_br;
  }

  bool operator==(const Box& other) const = default;
};

struct ImageFrame {
  double width = 0.0;
  double height = 0.0;

  bool valid() const {
    return std::isfinite(width) && std::isfinite(height) && width > 0.0 &&
           height > 0.0;
  }

  Box box() const { return Box{0.0, 0.0, width, height}; }

  bool operator==(const ImageFrame& other) const = default;
};

enum class ShrinkDirection { kTop = 0, kBottom = 1, kLeft = 2, kRight = 3 };

// [x_tl/W, y_tl/H, x_br/W, y_br/H, (w*h)/(W*H)], every component in [0,1].
using SpatialFeature = std::array<double, 5>;

inline void ensure_valid(const Box& b, const char* what) {
  if (!b.valid()) {
    throw std::invalid_argument(std::string(what) + ": invalid box");
  }
}

inline void ensure_valid(const ImageFrame& f, const char* what) {
  if (!f.valid()) {
    throw std::invalid_argument(std::string(what) + ": invalid frame");
  }
}

// True when `inner` lies fully inside `outer` (shared edges count as inside).
inline bool contains(const Box& outer, const Box& inner) {
  return inner.x_tl >= outer.x_tl && inner.y_tl >= outer.y_tl &&
         inner.x_br <= outer.x_br && inner.y_br <= outer.y_br;
}

inline double intersection_area(const Box& a, const Box& b) {
  const double w =
      std::min(a.x_br, b.x_br) - std::max(a.x_tl, b.x_tl);
  const double h =
      std::min(a.y_br, b.y_br) - std::max(a.y_tl, b.y_tl);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

// Intersection over union. Touching-but-not-overlapping boxes give exactly 0.
inline double iou(const Box& a, const Box& b) {
  ensure_valid(a, "iou");
  ensure_valid(b, "iou");
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

// Moves one side of `p` inward by `alpha` times the current extent along
// that axis:
//   top:    y_tl' = y_tl + alpha * (y_br - y_tl)
//   bottom: y_br' = y_br - alpha * (y_br - y_tl)
//   left:   x_tl' = x_tl + alpha * (x_br - x_tl)
//   right:  x_br' = x_br - alpha * (x_br - x_tl)
// The other three sides are untouched, so the stride decays geometrically
// over repeated same-direction applications.
inline Box shrink(const Box& p, ShrinkDirection dir, double alpha) {
  ensure_valid(p, "shrink");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("shrink: alpha must lie in (0,1)");
  }
  Box out = p;
  switch (dir) {
    case ShrinkDirection::kTop:
      out.y_tl = p.y_tl + alpha * p.height();
      break;
    case ShrinkDirection::kBottom:
      out.y_br = p.y_br - alpha * p.height();
      break;
    case ShrinkDirection::kLeft:
      out.x_tl = p.x_tl + alpha * p.width();
      break;
    case ShrinkDirection::kRight:
      out.x_br = p.x_br - alpha * p.width();
      break;
  }
  ensure_valid(out, "shrink result");
  return out;
}

// 5-D normalized position of `p` within the frame.
inline SpatialFeature spatial_feature(const Box& p, const ImageFrame& frame) {
  ensure_valid(p, "spatial_feature");
  ensure_valid(frame, "spatial_feature");
  if (!contains(frame.box(), p)) {
    throw std::invalid_argument("spatial_feature: box outside frame");
  }
  return SpatialFeature{p.x_tl / frame.width, p.y_tl / frame.height,
                        p.x_br / frame.width, p.y_br / frame.height,
                        (p.width() * p.height()) /
                            (frame.width * frame.height)};
}

inline Box clamp_to_frame(const Box& b, const ImageFrame& frame) {
  Box out = b;
  out.x_tl = std::clamp(out.x_tl, 0.0, frame.width);
  out.x_br = std::clamp(out.x_br, 0.0, frame.width);
  out.y_tl = std::clamp(out.y_tl, 0.0, frame.height);
  out.y_br = std::clamp(out.y_br, 0.0, frame.height);
  return out;
}

}  // namespace shrinklab

#endif  // SHRINKLAB_GEOMETRY_HPP_
