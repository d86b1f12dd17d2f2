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

// JSON forms of the domain types. Readers reject unknown fields.

#ifndef BINOMARK_SERIALIZE_HPP_
#define BINOMARK_SERIALIZE_HPP_

#include "binomark/attacks.hpp"
#include "binomark/core.hpp"
#include "binomark/encoder.hpp"
#include "binomark/lm_sim.hpp"
#include "binomark/schemes.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>

namespace binomark {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Throws a Config error naming the first field of `j` not in `allowed`.
void require_known_fields(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

Json to_json(const Message& message);
Message message_from_json(const Json& j);

Json to_json(const Distribution& p);
Distribution distribution_from_json(const Json& j);

Json to_json(const SchemeConfig& cfg);
SchemeConfig scheme_from_json(const Json& j);

Json to_json(const EncoderConfig& cfg);
EncoderConfig encoder_from_json(const Json& j);

Json to_json(const SamplerConfig& cfg);
SamplerConfig sampler_from_json(const Json& j);

Json to_json(const LmSpec& spec);
LmSpec lm_from_json(const Json& j);

Json to_json(const AttackConfig& cfg);
AttackConfig attack_from_json(const Json& j);

Json to_json(const GenerationRecord& record);
GenerationRecord record_from_json(const Json& j);

Json to_json(const DetectionReport& report);
DetectionReport report_from_json(const Json& j);

/// First line of every JSONL output.
Json header_line(std::string_view content);
bool is_header_line(const Json& j);

}  // namespace binomark

#endif  // BINOMARK_SERIALIZE_HPP_
