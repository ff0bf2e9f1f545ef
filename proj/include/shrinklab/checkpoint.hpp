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

#ifndef SHRINKLAB_CHECKPOINT_HPP_
#define SHRINKLAB_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace shrinklab {

// Binary checkpoint envelope shared by networks and embedding tables:
//   8-byte magic | u32 header length | header JSON | flat little-endian f64s.
// Round-trips must be bit-exact, so doubles are moved via their bit pattern.
inline constexpr char kCheckpointMagic[8] = {'S', 'L', 'C', 'K',
                                             'P', 'T', '0', '1'};

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f64_le(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline std::string encode_checkpoint(const nlohmann::json& header,
                                     const std::vector<double>& params) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::string hdr = header.dump();
  detail::put_u32_le(out, static_cast<std::uint32_t>(hdr.size()));
  out += hdr;
  out.reserve(out.size() + params.size() * 8);
  for (double v : params) detail::put_f64_le(out, v);
  return out;
}

struct DecodedCheckpoint {
  nlohmann::json header;
  std::vector<double> params;
};

inline DecodedCheckpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 4 ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t hdr_len = detail::get_u32_le(p + 8);
  const std::size_t body_off = 12 + hdr_len;
  if (bytes.size() < body_off || (bytes.size() - body_off) % 8 != 0) {
    throw std::runtime_error("checkpoint: truncated");
  }
  DecodedCheckpoint out;
  out.header = nlohmann::json::parse(bytes.substr(12, hdr_len));
  const std::size_t n = (bytes.size() - body_off) / 8;
  out.params.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.params[i] = detail::get_f64_le(p + body_off + 8 * i);
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace shrinklab

#endif  // SHRINKLAB_CHECKPOINT_HPP_
