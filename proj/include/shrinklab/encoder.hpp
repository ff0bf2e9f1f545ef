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

#ifndef SHRINKLAB_ENCODER_HPP_
#define SHRINKLAB_ENCODER_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shrinklab/geometry.hpp"
#include "shrinklab/query.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/scene.hpp"

namespace shrinklab {

struct EncoderConfig {
  int descriptor_dim = 16;              // per-cell object descriptor width
  int output_dim = 64;                  // encoding width per scale
  std::array<int, 3> grid_sizes{8, 4, 2};
  std::uint64_t embedding_seed = 1;
  std::uint64_t projection_seed = 2;
};

// Multi-scale patch encoder. A patch is partitioned into G_c x G_c cells;
// each cell accumulates the embeddings of overlapping objects weighted by
// (object-cell overlap area) / (cell area); the flattened grid then goes
// through a fixed seeded linear projection per scale. The whole map is
// linear in the scene's objects and fully determined by the seeds.
class SceneEncoder {
 public:
  SceneEncoder(const Vocabulary& vocab, const EncoderConfig& cfg)
      : cfg_(cfg), object_table_(object_tokens(vocab), cfg.descriptor_dim,
                                 cfg.embedding_seed) {
    for (int scale = 1; scale <= 3; ++scale) {
      const int grid = cfg_.grid_sizes[static_cast<std::size_t>(scale - 1)];
      const std::size_t in_dim = static_cast<std::size_t>(grid) * grid *
                                 static_cast<std::size_t>(cfg_.descriptor_dim);
      auto& proj = projections_[static_cast<std::size_t>(scale - 1)];
      proj.resize(in_dim * static_cast<std::size_t>(cfg_.output_dim));
      Rng rng(derive_seed(cfg_.projection_seed, static_cast<std::uint64_t>(scale)));
      const double scale_factor = 1.0 / std::sqrt(static_cast<double>(in_dim));
      for (auto& v : proj) v = rng.uniform(-1.0, 1.0) * scale_factor;
    }
  }

  const EncoderConfig& config() const { return cfg_; }

  int grid_size(int scale) const {
    if (scale < 1 || scale > 3) {
      throw std::invalid_argument("encoder: scale must be 1, 2 or 3");
    }
    return cfg_.grid_sizes[static_cast<std::size_t>(scale - 1)];
  }

  // Per-object descriptor: embedding of the category plus embeddings of all
  // attributes. Fixed per object, which is what keeps the encoder linear.
  std::vector<double> object_descriptor(const SceneObject& obj) const {
    std::vector<double> out = object_table_.lookup(obj.category);
    for (const auto& attr : obj.attributes) {
      const auto& vec = object_table_.lookup(attr);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += vec[i];
    }
    return out;
  }

  // The raw G x G x descriptor_dim grid for one scale, flattened row-major
  // by cell then descriptor component.
  std::vector<double> raw_grid(const Scene& scene, const Box& patch,
                               int scale) const {
    ensure_valid(patch, "encode");
    if (!contains(scene.frame.box(), patch)) {
      throw std::invalid_argument("encode: patch outside frame");
    }
    const int grid = grid_size(scale);
    const int d = cfg_.descriptor_dim;
    std::vector<double> cells(
        static_cast<std::size_t>(grid) * grid * static_cast<std::size_t>(d),
        0.0);
    const double cell_w = patch.width() / grid;
    const double cell_h = patch.height() / grid;
    const double cell_area = cell_w * cell_h;
    for (const auto& obj : scene.objects) {
      if (intersection_area(obj.box, patch) <= 0.0) continue;
      const std::vector<double> desc = object_descriptor(obj);
      // Cell index ranges the object can touch.
      const int c0 = std::max(
          0, static_cast<int>((obj.box.x_tl - patch.x_tl) / cell_w));
      const int c1 = std::min(
          grid - 1, static_cast<int>((obj.box.x_br - patch.x_tl) / cell_w));
      const int r0 = std::max(
          0, static_cast<int>((obj.box.y_tl - patch.y_tl) / cell_h));
      const int r1 = std::min(
          grid - 1, static_cast<int>((obj.box.y_br - patch.y_tl) / cell_h));
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          const Box cell{patch.x_tl + c * cell_w, patch.y_tl + r * cell_h,
                         patch.x_tl + (c + 1) * cell_w,
                         patch.y_tl + (r + 1) * cell_h};
          const double overlap = intersection_area(obj.box, cell);
          if (overlap <= 0.0) continue;
          const double weight = overlap / cell_area;
          double* slot = cells.data() +
                         (static_cast<std::size_t>(r) * grid + c) *
                             static_cast<std::size_t>(d);
          for (int k = 0; k < d; ++k) slot[k] += weight * desc[k];
        }
      }
    }
    return cells;
  }

  // Projected encoding of dimension output_dim for scale c in {1,2,3}.
  std::vector<double> encode(const Scene& scene, const Box& patch,
                             int scale) const {
    const std::vector<double> grid = raw_grid(scene, patch, scale);
    const auto& proj = projections_[static_cast<std::size_t>(scale - 1)];
    const int out_dim = cfg_.output_dim;
    std::vector<double> out(static_cast<std::size_t>(out_dim), 0.0);
    // Projection rows are stored input-major so the sparse grid walks
    // contiguous memory.
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double g = grid[i];
      if (g == 0.0) continue;
      const double* row = proj.data() + i * static_cast<std::size_t>(out_dim);
      for (int j = 0; j < out_dim; ++j) out[static_cast<std::size_t>(j)] += g * row[j];
    }
    return out;
  }

  // Upper bound on |encode(...)| entries: objects * max|descriptor entry|
  // * max projection column L1 norm. Used by the boundedness check.
  double output_bound(const Scene& scene, int scale) const {
    double max_desc = 0.0;
    for (const auto& obj : scene.objects) {
      for (double v : object_descriptor(obj)) {
        max_desc = std::max(max_desc, std::abs(v));
      }
    }
    const auto& proj = projections_[static_cast<std::size_t>(scale - 1)];
    const std::size_t out_dim = static_cast<std::size_t>(cfg_.output_dim);
    const std::size_t in_dim = proj.size() / out_dim;
    double max_col = 0.0;
    for (std::size_t j = 0; j < out_dim; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) col += std::abs(proj[i * out_dim + j]);
      max_col = std::max(max_col, col);
    }
    return static_cast<double>(scene.objects.size()) * max_desc * max_col;
  }

 private:
  static std::vector<std::string> object_tokens(const Vocabulary& vocab) {
    std::vector<std::string> out = vocab.categories;
    out.insert(out.end(), vocab.colors.begin(), vocab.colors.end());
    out.insert(out.end(), vocab.size_classes.begin(), vocab.size_classes.end());
    return out;
  }

  EncoderConfig cfg_;
  EmbeddingTable object_table_;
  std::array<std::vector<double>, 3> projections_;
};

}  // namespace shrinklab

#endif  // SHRINKLAB_ENCODER_HPP_
