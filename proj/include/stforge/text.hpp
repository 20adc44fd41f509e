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

#include <string>
#include <string_view>
#include <vector>

namespace stforge::text {

/// Unicode NFC. Throws Error("InvalidUtf8") on malformed input.
std::string nfc(std::string_view utf8);

/// Trims outer whitespace and collapses inner whitespace runs (Unicode
/// White_Space) to a single ASCII space.
std::string collapse_whitespace(std::string_view utf8);

std::string ascii_lower(std::string_view s);

/// nfc -> collapse_whitespace -> ascii_lower.
std::string normalize(std::string_view utf8);

/// Splits valid UTF-8 into one view per Unicode scalar value.
std::vector<std::string_view> scalars(std::string_view utf8);

std::string_view trim_ascii(std::string_view s);

}  // namespace stforge::text
