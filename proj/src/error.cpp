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
#include "stforge/error.hpp"

namespace stforge {

Error::Error(std::string kind, const std::string& detail)
    : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)), detail_(detail) {}

void fail(std::string kind, const std::string& detail) {
  throw Error(std::move(kind), detail);
}

}  // namespace stforge
