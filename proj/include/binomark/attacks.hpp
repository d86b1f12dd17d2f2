// Copyright 2026 The binomark Authors.
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

// Token-level edits applied to completions. The prompt is never touched.

#ifndef BINOMARK_ATTACKS_HPP_
#define BINOMARK_ATTACKS_HPP_

#include "binomark/core.hpp"
#include "binomark/lm_sim.hpp"

#include <cstdint>
#include <string>

namespace binomark {

enum class AttackKind { kDelete, kSubstitute };

const char* to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& s);

struct AttackConfig {
  AttackKind kind = AttackKind::kDelete;
  double fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Both attacks pick floor(fraction * n) positions as a prefix of one seeded
// permutation, so larger fractions under the same seed edit a superset.

/// Removes the chosen positions; order of the survivors is kept.
TokenSequence delete_tokens(const TokenSequence& seq, double fraction, std::uint64_t seed);

/// Replaces the chosen positions with a uniformly drawn different token.
TokenSequence substitute_tokens(const TokenSequence& seq, double fraction, const Vocabulary& vocab,
                                std::uint64_t seed);

TokenSequence apply_attack(const TokenSequence& seq, const AttackConfig& cfg, const Vocabulary& vocab);

/// Attacked copy of a record carrying an annotation of the edit.
GenerationRecord apply_attack(const GenerationRecord& record, const AttackConfig& cfg);

}  // namespace binomark

#endif  // BINOMARK_ATTACKS_HPP_
