// Copyright 2026 The stchunk Authors
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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "stchunk/artifacts.hpp"

namespace stchunk {

/// A failed stage; what() starts with the stage name.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Each stage reads the artifacts of earlier stages from `dir` and writes its
// own there. Progress and tables go to `log`.
void cmd_gen(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);
void cmd_partition(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);
void cmd_assign(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);
void cmd_fuse(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);
void cmd_simulate(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);
/// Full pipeline for all four methods; generates graph.dg when absent.
void cmd_compare(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);
void cmd_train_predictor(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);
/// Prints the table stored in report.json.
void cmd_report(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log);

/// Parses argv, runs one command and returns the exit status. Errors go to
/// `err` as "<command>: <message>".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stchunk
