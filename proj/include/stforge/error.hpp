/*
 * Copyright 2026 The stforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace stforge {

// Every failure carries a stable kind name (e.g. "MalformedTaxonomy") that
// the CLI prints and the wire service forwards in JSON-RPC error data.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& detail);

  const std::string& kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string kind_;
  std::string detail_;
};

// File-system failures; the CLI maps these to exit code 2.
class IoError : public Error {
 public:
  explicit IoError(const std::string& detail) : Error("IoError", detail) {}
};

[[noreturn]] void fail(std::string kind, const std::string& detail);

}  // namespace stforge
