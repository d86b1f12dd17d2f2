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

// Subcommands of the binomark tool, callable in-process.

#ifndef BINOMARK_TOOLS_COMMANDS_HPP_
#define BINOMARK_TOOLS_COMMANDS_HPP_

#include "binomark/core.hpp"
#include "binomark/encoder.hpp"
#include "binomark/lm_sim.hpp"
#include "binomark/schemes.hpp"
#include "binomark/serialize.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace binomark::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2 };

// Raised for anything the user has to fix in flags or config files.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<WatermarkKey> key;
  std::size_t m = 16;
  std::optional<std::string> message_hex;  // fixed payload; random per record otherwise
  std::size_t context_window = 3;
  SchemeConfig scheme;
  EncoderConfig encoder;
  SamplerConfig sampler;
  LmSpec lm;
  std::uint64_t seed = 0;
  std::size_t tokens = 0;  // 0 draws lengths from the sampler range
  std::size_t mc_samples = 20000;
  std::uint64_t mc_seed = 0;
  std::uint64_t tie_seed = 0;
};

/// Strict parse; relative key paths resolve against `base_dir`.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir = {});

/// Accepts 64 hex characters or a path to a file holding them.
WatermarkKey resolve_key(const std::string& value, std::size_t context_window,
                         const std::filesystem::path& base_dir = {});

/// Entry point. `in` backs the "-" input path.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace binomark::cli

#endif  // BINOMARK_TOOLS_COMMANDS_HPP_
