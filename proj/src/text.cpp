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
#include "stforge/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "stforge/error.hpp"

namespace stforge::text {

namespace {

// Walks code points; returns false on malformed UTF-8.
template <typename F>
bool for_each_scalar(std::string_view s, F&& f) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  const auto n = static_cast<std::int32_t>(s.size());
  std::int32_t i = 0;
  while (i < n) {
    const std::int32_t start = i;
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c < 0) return false;
    f(c, s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
  }
  return true;
}

}  // namespace

std::string nfc(std::string_view utf8) {
  bool ascii = true;
  for (unsigned char c : utf8) {
    if (c >= 0x80) {
      ascii = false;
      break;
    }
  }
  if (ascii) return std::string(utf8);

  if (!for_each_scalar(utf8, [](UChar32, std::string_view) {})) {
    fail("InvalidUtf8", "input is not valid UTF-8");
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail("InvalidUtf8", "ICU NFC instance unavailable");
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<std::int32_t>(utf8.size())));
  const icu::UnicodeString out = norm->normalize(src, status);
  if (U_FAILURE(status)) fail("InvalidUtf8", "NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::string collapse_whitespace(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  const bool ok = for_each_scalar(utf8, [&](UChar32 c, std::string_view bytes) {
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      return;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(bytes);
  });
  if (!ok) fail("InvalidUtf8", "input is not valid UTF-8");
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string normalize(std::string_view utf8) {
  return ascii_lower(collapse_whitespace(nfc(utf8)));
}

std::vector<std::string_view> scalars(std::string_view utf8) {
  std::vector<std::string_view> out;
  out.reserve(utf8.size());
  if (!for_each_scalar(utf8, [&](UChar32, std::string_view b) { out.push_back(b); })) {
    fail("InvalidUtf8", "input is not valid UTF-8");
  }
  return out;
}

std::string_view trim_ascii(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace stforge::text
