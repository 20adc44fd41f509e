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
#include "stforge/sandbox/normalize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "stforge/error.hpp"
#include "stforge/text.hpp"

namespace stforge::sandbox {

namespace {

std::string where(const ToolSchema& s, const ParamSpec& p) { return s.name + "." + p.name; }

std::string canonical_string(const nlohmann::json& v, const ToolSchema& s, const ParamSpec& p) {
  if (!v.is_string()) fail("TypeMismatch", where(s, p) + " expects a string");
  std::string out = text::collapse_whitespace(text::nfc(v.get_ref<const std::string&>()));
  if (p.case_insensitive) out = text::ascii_lower(out);
  return out;
}

void check_range(double x, const ToolSchema& s, const ParamSpec& p) {
  if ((p.min && x < *p.min) || (p.max && x > *p.max)) {
    fail("ValueOutOfRange", where(s, p) + " = " + render_number(x) + " outside [" +
                                (p.min ? render_number(*p.min) : "-inf") + ", " +
                                (p.max ? render_number(*p.max) : "inf") + "]");
  }
}

nlohmann::json canonical_scalar(ParamKind kind, const nlohmann::json& v, const ToolSchema& s, const ParamSpec& p) {
  switch (kind) {
    case ParamKind::String:
      return canonical_string(v, s, p);
    case ParamKind::Enum: {
      const std::string x = canonical_string(v, s, p);
      const auto& vals = p.enum_values;
      if (std::find(vals.begin(), vals.end(), x) == vals.end()) {
        fail("EnumViolation", where(s, p) + " does not accept '" + x + "'");
      }
      return x;
    }
    case ParamKind::Number: {
      if (!v.is_number()) fail("TypeMismatch", where(s, p) + " expects a number");
      const double x = v.get<double>();
      if (!std::isfinite(x)) fail("TypeMismatch", where(s, p) + " must be finite");
      check_range(x, s, p);
      return x == 0.0 ? 0.0 : x;
    }
    case ParamKind::Integer: {
      if (!v.is_number()) fail("TypeMismatch", where(s, p) + " expects an integer");
      std::int64_t i = 0;
      if (v.is_number_integer()) {
        if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
          fail("ValueOutOfRange", where(s, p) + " is too large");
        }
        i = v.get<std::int64_t>();
      } else {
        const double x = v.get<double>();
        if (!std::isfinite(x) || std::trunc(x) != x || std::abs(x) > 9007199254740992.0) {
          fail("TypeMismatch", where(s, p) + " expects an integer");
        }
        i = static_cast<std::int64_t>(x);
      }
      check_range(static_cast<double>(i), s, p);
      return i;
    }
    case ParamKind::Boolean:
      if (!v.is_boolean()) fail("TypeMismatch", where(s, p) + " expects a boolean");
      return v.get<bool>();
    case ParamKind::List:
      break;
  }
  fail("InvalidSchema", where(s, p) + " has nested lists");
}

nlohmann::json canonical_value(const nlohmann::json& v, const ToolSchema& s, const ParamSpec& p) {
  if (p.kind != ParamKind::List) return canonical_scalar(p.kind, v, s, p);
  if (!v.is_array()) fail("TypeMismatch", where(s, p) + " expects a list");
  if ((p.min_items && v.size() < *p.min_items) || (p.max_items && v.size() > *p.max_items)) {
    fail("ValueOutOfRange", where(s, p) + " has " + std::to_string(v.size()) + " items");
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& item : v) out.push_back(canonical_scalar(p.item_kind, item, s, p));
  return out;
}

void append_string(std::string& out, const std::string& s) {
  static constexpr char kHex[] = "0123456789abcdef";
  out += '"';
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (u < 0x20) {
      out += "\\u00";
      out += kHex[u >> 4];
      out += kHex[u & 0xf];
    } else {
      out += c;
    }
  }
  out += '"';
}

void append_canonical(std::string& out, const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::null: out += "null"; return;
    case nlohmann::json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; return;
    case nlohmann::json::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); return;
    case nlohmann::json::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); return;
    case nlohmann::json::value_t::number_float: out += render_number(v.get<double>()); return;
    case nlohmann::json::value_t::string: append_string(out, v.get_ref<const std::string&>()); return;
    case nlohmann::json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& x : v) {
        if (!first) out += ',';
        first = false;
        append_canonical(out, x);
      }
      out += ']';
      return;
    }
    case nlohmann::json::value_t::object: {
      // std::string ordering is bytewise, so this is UTF-8 byte order.
      std::map<std::string, const nlohmann::json*> sorted;
      for (const auto& [k, x] : v.items()) sorted.emplace(k, &x);
      out += '{';
      bool first = true;
      for (const auto& [k, x] : sorted) {
        if (!first) out += ',';
        first = false;
        append_string(out, k);
        out += ':';
        append_canonical(out, *x);
      }
      out += '}';
      return;
    }
    default:
      fail("TypeMismatch", "binary values have no canonical form");
  }
}

}  // namespace

std::string render_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string canonical_json(const nlohmann::json& v) {
  std::string out;
  append_canonical(out, v);
  return out;
}

NormalizedParams normalize_params(const ToolSchema& schema, const nlohmann::json& raw) {
  if (!raw.is_null() && !raw.is_object()) fail("TypeMismatch", schema.name + " arguments must be an object");
  NormalizedParams out;
  out.values = nlohmann::json::object();
  for (const auto& p : schema.params) {
    const nlohmann::json* given = nullptr;
    if (raw.is_object()) {
      const auto it = raw.find(p.name);
      if (it != raw.end() && !it->is_null()) given = &*it;
    }
    if (given) {
      auto v = canonical_value(*given, schema, p);
      if (p.required && v.is_string() && v.get_ref<const std::string&>().empty()) {
        fail("MissingRequiredParam", where(schema, p) + " is empty");
      }
      out.values[p.name] = std::move(v);
    } else if (p.required) {
      fail("MissingRequiredParam", where(schema, p) + " is required");
    } else if (p.default_value) {
      out.values[p.name] = canonical_value(*p.default_value, schema, p);
    }
  }
  out.canonical = canonical_json(out.values);
  return out;
}

}  // namespace stforge::sandbox
