// Copyright 2026 The inline-tomo Authors
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace inline_tomo::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kInputError = 2,
  kNumericalError = 3,
  kIllConditioned = 4,
};

// Built-in defaults for every configuration key.
nlohmann::json default_config();

// Overlays `user` on the defaults, applies derived values and validates the
// result. Throws InvalidArgument on unknown keys or wrong types.
nlohmann::json resolve_config(const nlohmann::json& user);

// Entry point of the command-line tool; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace inline_tomo::cli
