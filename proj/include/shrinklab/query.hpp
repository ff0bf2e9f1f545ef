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

#ifndef SHRINKLAB_QUERY_HPP_
#define SHRINKLAB_QUERY_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shrinklab/checkpoint.hpp"
#include "shrinklab/rng.hpp"

namespace shrinklab {

inline constexpr const char* kUnknownUnit = "UKN";
inline constexpr const char* kSelfUnit = "SELF";

// (target unit, reference unit, discriminative unit). The atom a query is
// decomposed into: what to find, what it is discriminated against, and the
// property or relation that discriminates it.
struct Triad {
  std::string target_unit;
  std::string reference_unit;
  std::string discriminative_unit;

  bool operator==(const Triad& other) const = default;

  std::string str() const {
    return "(" + target_unit + "," + reference_unit + "," +
           discriminative_unit + ")";
  }
};

// The closed grammar's token classes. Queries are built from and parsed
// against these lists; everything is configurable so vocabulary and scene
// generation stay in lockstep.
struct Vocabulary {
  std::vector<std::string> categories;
  std::vector<std::string> colors;
  std::vector<std::string> size_classes;
  std::vector<std::string> locations;       // unary, relative to the frame
  std::vector<std::string> prep_relations;  // binary, incl. parser-only ones
  std::vector<std::string> size_relations;  // followed by "than"
  std::vector<std::string> verb_relations;
  std::vector<std::string> filler_verbs;  // skipped before a preposition
  std::vector<std::string> articles;

  static Vocabulary standard() {
    Vocabulary v;
    v.categories = {"cat",  "dog",  "lady", "man",   "ball", "box",
                    "cup",  "book", "lamp", "shelf", "table", "chair"};
    v.colors = {"red",   "green", "blue",   "orange",
                "white", "black", "yellow", "purple"};
    v.size_classes = {"big", "small"};
    v.locations = {"left", "right", "top", "bottom"};
    v.prep_relations = {"above", "below", "left", "right", "inside", "on", "in"};
    v.size_relations = {"bigger", "smaller"};
    v.verb_relations = {"holding"};
    v.filler_verbs = {"standing", "sitting"};
    v.articles = {"the", "a", "an"};
    return v;
  }

  static bool in(const std::vector<std::string>& list, const std::string& t) {
    return std::find(list.begin(), list.end(), t) != list.end();
  }

  bool is_category(const std::string& t) const { return in(categories, t); }
  bool is_attribute(const std::string& t) const {
    return in(colors, t) || in(size_classes, t);
  }
  bool is_location(const std::string& t) const { return in(locations, t); }
  bool is_prep_relation(const std::string& t) const {
    return in(prep_relations, t);
  }
  bool is_size_relation(const std::string& t) const {
    return in(size_relations, t);
  }
  bool is_verb_relation(const std::string& t) const {
    return in(verb_relations, t);
  }
  bool is_filler_verb(const std::string& t) const {
    return in(filler_verbs, t);
  }
  bool is_article(const std::string& t) const { return in(articles, t); }

  // Every token the grammar can emit, plus the structural words and the
  // UKN/SELF markers. This is the embedding-table domain.
  std::vector<std::string> all_tokens() const {
    std::vector<std::string> out;
    auto add = [&out](const std::vector<std::string>& list) {
      for (const auto& t : list) {
        if (!in(out, t)) out.push_back(t);
      }
    };
    add(categories);
    add(colors);
    add(size_classes);
    add(locations);
    add(prep_relations);
    add(size_relations);
    add(verb_relations);
    add(filler_verbs);
    add(articles);
    add({"and", "of", "than", kUnknownUnit, kSelfUnit});
    return out;
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : std::runtime_error("parse error at token " + std::to_string(position) +
                           ": " + message),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// Parses a token sequence from the closed grammar into discriminative
// triads. Step 1 fixes the head noun of the leading noun phrase as the
// shared target unit. Step 2 collects one triad per pattern; the emission
// order is fixed by pattern class:
//   1. location words of the target        (lady, lady, left)
//   2. attributes of the target            (lady, lady, white)
//   3. preposition relations               (lady, table, on)
//   4. verb relations                      (lady, cat, holding)
//   5. attributes of reference nouns       (cat, cat, orange)
// and textual order within each class. A bare noun yields (T, T, SELF);
// a bare location word yields (UKN, UKN, loc).
inline std::vector<Triad> parse(const std::vector<std::string>& tokens,
                                const Vocabulary& vocab) {
  if (tokens.empty()) throw ParseError(0, "empty query");

  if (tokens.size() == 1 && vocab.is_location(tokens[0])) {
    return {Triad{kUnknownUnit, kUnknownUnit, tokens[0]}};
  }

  std::size_t pos = 0;
  auto peek = [&]() -> const std::string& { return tokens[pos]; };
  auto at_end = [&]() { return pos >= tokens.size(); };

  std::vector<Triad> location_triads;
  std::vector<Triad> attribute_triads;
  std::vector<Triad> prep_triads;
  std::vector<Triad> verb_triads;
  std::vector<Triad> ref_attribute_triads;

  if (!at_end() && vocab.is_article(peek())) ++pos;

  // Leading noun phrase: (location | attribute)* noun.
  std::vector<std::string> leading_locations;
  std::vector<std::string> leading_attributes;
  while (!at_end() &&
         (vocab.is_location(peek()) || vocab.is_attribute(peek()))) {
    if (vocab.is_location(peek())) {
      leading_locations.push_back(peek());
    } else {
      leading_attributes.push_back(peek());
    }
    ++pos;
  }
  if (at_end() || !vocab.is_category(peek())) {
    throw ParseError(pos, at_end() ? "expected a noun"
                                   : "expected a noun, got '" + peek() + "'");
  }
  const std::string target = peek();
  ++pos;

  for (const auto& loc : leading_locations) {
    location_triads.push_back(Triad{target, target, loc});
  }
  for (const auto& attr : leading_attributes) {
    attribute_triads.push_back(Triad{target, target, attr});
  }

  // Reads `rel article attr* noun` after the relation token was consumed.
  auto parse_reference = [&](const std::string& rel, bool is_verb) {
    if (!at_end() && (peek() == "of" || peek() == "than")) ++pos;
    if (!at_end() && vocab.is_article(peek())) ++pos;
    std::vector<std::string> ref_attrs;
    while (!at_end() && vocab.is_attribute(peek())) {
      ref_attrs.push_back(peek());
      ++pos;
    }
    if (at_end() || !vocab.is_category(peek())) {
      throw ParseError(pos, "expected a reference noun after '" + rel + "'");
    }
    const std::string reference = peek();
    ++pos;
    (is_verb ? verb_triads : prep_triads)
        .push_back(Triad{target, reference, rel});
    for (const auto& attr : ref_attrs) {
      ref_attribute_triads.push_back(Triad{reference, reference, attr});
    }
  };

  while (!at_end()) {
    const std::string tok = peek();
    if (tok == "and") {
      ++pos;
      continue;
    }
    if (tok == "in" && pos + 1 < tokens.size() &&
        vocab.is_attribute(tokens[pos + 1])) {
      // "in white" style attribute of the target.
      attribute_triads.push_back(Triad{target, target, tokens[pos + 1]});
      pos += 2;
      continue;
    }
    if (vocab.is_filler_verb(tok)) {
      ++pos;
      if (at_end() || !vocab.is_prep_relation(peek())) {
        throw ParseError(pos, "expected a preposition after '" + tok + "'");
      }
      const std::string rel = peek();
      ++pos;
      parse_reference(rel, /*is_verb=*/false);
      continue;
    }
    if (vocab.is_verb_relation(tok)) {
      ++pos;
      parse_reference(tok, /*is_verb=*/true);
      continue;
    }
    if (vocab.is_prep_relation(tok) || vocab.is_size_relation(tok)) {
      ++pos;
      parse_reference(tok, /*is_verb=*/false);
      continue;
    }
    throw ParseError(pos, "unexpected token '" + tok + "'");
  }

  std::vector<Triad> triads;
  auto append = [&triads](const std::vector<Triad>& part) {
    triads.insert(triads.end(), part.begin(), part.end());
  };
  append(location_triads);
  append(attribute_triads);
  append(prep_triads);
  append(verb_triads);
  append(ref_attribute_triads);

  if (triads.empty()) triads.push_back(Triad{target, target, kSelfUnit});
  return triads;
}

inline std::vector<Triad> parse(const std::string& text,
                                const Vocabulary& vocab) {
  return parse(tokenize(text), vocab);
}

// Token -> fixed seeded vector. Vectors are content-addressed (derived from
// the token text and the table seed), so the table is independent of token
// enumeration order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  EmbeddingTable(const std::vector<std::string>& tokens, int dim,
                 std::uint64_t seed)
      : dim_(dim), seed_(seed) {
    for (const auto& tok : tokens) insert(tok);
  }

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return table_.size(); }

  const std::vector<double>& lookup(const std::string& token) const {
    auto it = table_.find(token);
    if (it == table_.end()) {
      throw std::out_of_range("embedding table: unknown token '" + token +
                              "' (vocabulary mismatch)");
    }
    return it->second;
  }

  bool contains(const std::string& token) const {
    return table_.count(token) != 0;
  }

  std::string save() const {
    nlohmann::json header;
    header["type"] = "embedding_table";
    header["dim"] = dim_;
    header["seed"] = seed_;
    std::vector<std::string> tokens;
    tokens.reserve(table_.size());
    for (const auto& [tok, _] : table_) tokens.push_back(tok);
    header["tokens"] = tokens;
    std::vector<double> flat;
    flat.reserve(table_.size() * dim_);
    for (const auto& tok : tokens) {
      const auto& vec = table_.at(tok);
      flat.insert(flat.end(), vec.begin(), vec.end());
    }
    return encode_checkpoint(header, flat);
  }

  static EmbeddingTable load(const std::string& bytes) {
    const DecodedCheckpoint ckpt = decode_checkpoint(bytes);
    if (ckpt.header.at("type") != "embedding_table") {
      throw std::runtime_error("embedding table: wrong checkpoint type");
    }
    EmbeddingTable out;
    out.dim_ = ckpt.header.at("dim").get<int>();
    out.seed_ = ckpt.header.at("seed").get<std::uint64_t>();
    const auto tokens =
        ckpt.header.at("tokens").get<std::vector<std::string>>();
    if (ckpt.params.size() != tokens.size() * out.dim_) {
      throw std::runtime_error("embedding table: parameter count mismatch");
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      out.table_[tokens[i]] = std::vector<double>(
          ckpt.params.begin() + static_cast<std::ptrdiff_t>(i * out.dim_),
          ckpt.params.begin() + static_cast<std::ptrdiff_t>((i + 1) * out.dim_));
    }
    return out;
  }

 private:
  void insert(const std::string& token) {
    if (table_.count(token)) return;
    Rng rng(derive_seed(seed_, fnv1a64(token)));
    std::vector<double> vec(static_cast<std::size_t>(dim_));
    for (auto& v : vec) v = rng.uniform(-1.0, 1.0);
    table_.emplace(token, std::move(vec));
  }

  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::map<std::string, std::vector<double>> table_;
};

// Concatenation of per-triad blocks, each block being the concatenated
// embeddings of the triad's three units. Fewer than `max_triads` triads pad
// with copies of the first block; extra triads are dropped, keeping the
// first `max_triads` in parse order. Output dimension: max_triads * 3 * dim.
using LinguisticFeature = std::vector<double>;

inline LinguisticFeature embed(const std::vector<Triad>& triads,
                               const EmbeddingTable& table, int max_triads) {
  if (triads.empty()) {
    throw std::invalid_argument("embed: need at least one triad");
  }
  if (max_triads < 1) {
    throw std::invalid_argument("embed: max_triads must be >= 1");
  }
  LinguisticFeature out;
  out.reserve(static_cast<std::size_t>(max_triads) * 3 * table.dim());
  auto append_block = [&](const Triad& t) {
    for (const std::string* unit :
         {&t.target_unit, &t.reference_unit, &t.discriminative_unit}) {
      const auto& vec = table.lookup(*unit);
      out.insert(out.end(), vec.begin(), vec.end());
    }
  };
  const int given = static_cast<int>(triads.size());
  for (int k = 0; k < std::min(given, max_triads); ++k) {
    append_block(triads[static_cast<std::size_t>(k)]);
  }
  for (int k = given; k < max_triads; ++k) append_block(triads.front());
  return out;
}

// Mean of the raw token embeddings, dimension `table.dim()`. The triad-free
// stand-in for the linguistic feature.
inline std::vector<double> mean_token_embedding(
    const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  if (tokens.empty()) {
    throw std::invalid_argument("mean_token_embedding: empty token list");
  }
  std::vector<double> out(static_cast<std::size_t>(table.dim()), 0.0);
  for (const auto& tok : tokens) {
    const auto& vec = table.lookup(tok);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += vec[i];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (auto& v : out) v *= inv;
  return out;
}

}  // namespace shrinklab

#endif  // SHRINKLAB_QUERY_HPP_
