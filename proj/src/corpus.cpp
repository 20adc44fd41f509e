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
#include "stforge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "stforge/error.hpp"
#include "stforge/text.hpp"

namespace stforge {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void malformed_taxonomy(const std::string& detail) {
  fail("MalformedTaxonomy", detail);
}

[[noreturn]] void malformed_record(const std::string& detail) {
  fail("MalformedRecord", detail);
}

std::string child_id_expected(const std::string& parent, const std::string& id) {
  if (parent.empty()) return id;
  return id.substr(parent.size() + 1);
}

TaxonomyNode parse_node(const ojson& j, const std::string& parent_id, int level,
                        std::set<std::string>& seen) {
  if (!j.is_object()) malformed_taxonomy("node is not an object");
  if (level > 3) malformed_taxonomy("depth exceeds 3 levels below the root");
  TaxonomyNode node;
  node.level = level;
  if (!j.contains("id") || !j["id"].is_string()) malformed_taxonomy("node without string id");
  node.id = j["id"].get<std::string>();
  if (j.contains("label")) {
    if (!j["label"].is_string()) malformed_taxonomy("label of '" + node.id + "' is not a string");
    node.label = j["label"].get<std::string>();
  }
  if (j.contains("is_other")) {
    if (!j["is_other"].is_boolean()) malformed_taxonomy("is_other of '" + node.id + "' is not boolean");
    node.is_other = j["is_other"].get<bool>();
  }
  if (j.contains("placeholder")) {
    if (!j["placeholder"].is_boolean()) malformed_taxonomy("placeholder of '" + node.id + "' is not boolean");
    node.placeholder = j["placeholder"].get<bool>();
  }

  if (level == 0) {
    if (!node.id.empty()) malformed_taxonomy("root id must be empty");
  } else {
    const bool prefix_ok = parent_id.empty() ||
                           (node.id.size() > parent_id.size() + 1 &&
                            node.id.compare(0, parent_id.size(), parent_id) == 0 &&
                            node.id[parent_id.size()] == '.');
    if (!prefix_ok) malformed_taxonomy("'" + node.id + "' does not extend parent '" + parent_id + "'");
    const std::string seg = child_id_expected(parent_id, node.id);
    if (seg.empty() || seg.find('.') != std::string::npos) {
      malformed_taxonomy("'" + node.id + "' must extend its parent by exactly one segment");
    }
    if (!seen.insert(node.id).second) malformed_taxonomy("duplicate id '" + node.id + "'");
  }

  if (j.contains("children")) {
    const auto& ch = j["children"];
    if (!ch.is_array()) malformed_taxonomy("children of '" + node.id + "' is not an array");
    for (const auto& c : ch) node.children.push_back(parse_node(c, node.id, level + 1, seen));
  }

  if (node.is_other && !node.children.empty()) {
    malformed_taxonomy("Other node '" + node.id + "' has children");
  }
  if (level == 0 && node.children.empty()) {
    malformed_taxonomy("root has no children (an Other child is required)");
  }
  if (!node.children.empty()) {
    const auto others = std::count_if(node.children.begin(), node.children.end(),
                                      [](const TaxonomyNode& c) { return c.is_other; });
    if (others != 1) {
      malformed_taxonomy("node '" + node.id + "' must have exactly one Other child, has " +
                         std::to_string(others));
    }
  }
  return node;
}

ojson node_to_json(const TaxonomyNode& n) {
  ojson j;
  j["id"] = n.id;
  j["label"] = n.label;
  if (n.is_other) j["is_other"] = true;
  if (n.placeholder) j["placeholder"] = true;
  j["children"] = ojson::array();
  for (const auto& c : n.children) j["children"].push_back(node_to_json(c));
  return j;
}

ojson parse_json_line(std::string_view line) {
  try {
    return ojson::parse(line);
  } catch (const nlohmann::json::exception& e) {
    malformed_record(std::string("invalid JSON: ") + e.what());
  }
}

std::string require_string(const ojson& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    malformed_record(std::string("field '") + key + "' missing or not a string");
  }
  return j[key].get<std::string>();
}

std::vector<std::string> string_list(const ojson& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) malformed_record(std::string("field '") + key + "' is not an array");
  for (const auto& v : j[key]) {
    if (!v.is_string()) malformed_record(std::string("field '") + key + "' has a non-string entry");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string dump(const ojson& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

}  // namespace

Taxonomy Taxonomy::from_json(const ojson& doc) {
  std::set<std::string> seen;
  Taxonomy t;
  t.root_ = std::make_shared<const TaxonomyNode>(parse_node(doc, "", 0, seen));
  std::function<void(const TaxonomyNode&)> index = [&](const TaxonomyNode& n) {
    t.by_id_[n.id] = &n;
    for (const auto& c : n.children) {
      t.parent_[c.id] = n.id;
      index(c);
    }
  };
  index(*t.root_);
  return t;
}

const TaxonomyNode* Taxonomy::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : it->second;
}

std::optional<std::string> Taxonomy::parent_of(std::string_view id) const {
  const auto it = parent_.find(std::string(id));
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

bool Taxonomy::is_leaf(std::string_view id) const {
  const TaxonomyNode* n = find(id);
  return n != nullptr && n->level > 0 && n->is_leaf();
}

std::size_t Taxonomy::count_level(int level) const {
  std::size_t n = 0;
  for (const auto& [id, node] : by_id_) {
    if (node->level == level && !node->is_other) ++n;
  }
  return n;
}

std::size_t Taxonomy::count_leaves() const {
  return leaf_ids(false).size();
}

std::vector<std::string> Taxonomy::leaf_ids(bool include_other) const {
  std::vector<std::string> out;
  for (const auto& [id, node] : by_id_) {
    if (node->level > 0 && node->is_leaf() && (include_other || !node->is_other)) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Taxonomy::internal_ids() const {
  std::vector<std::string> out;
  std::function<void(const TaxonomyNode&)> walk = [&](const TaxonomyNode& n) {
    if (n.is_leaf()) return;
    out.push_back(n.id);
    for (const auto& c : n.children) walk(c);
  };
  walk(*root_);
  return out;
}

ojson Taxonomy::to_json() const { return node_to_json(*root_); }

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open taxonomy file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ojson doc;
  try {
    doc = ojson::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    malformed_taxonomy(std::string("invalid JSON: ") + e.what());
  }
  return Taxonomy::from_json(doc);
}

std::string serialize_taxonomy(const Taxonomy& tax) {
  return tax.to_json().dump(2, ' ', false, nlohmann::json::error_handler_t::strict) + "\n";
}

const AnnotationVector& validate_annotation(const AnnotationVector& av, const Taxonomy& tax) {
  const auto resolves = [&](const std::string& id) {
    return id == kOtherOrUnclear || tax.is_leaf(id);
  };
  if (!resolves(av.primary_intent)) {
    fail("UnknownIntentId", "primary intent '" + av.primary_intent + "' is not a taxonomy leaf");
  }
  if (av.secondary_intents.size() > kMaxSecondaryIntents) {
    fail("TooManySecondary", std::to_string(av.secondary_intents.size()) +
                                 " secondary intents (max " +
                                 std::to_string(kMaxSecondaryIntents) + ")");
  }
  std::set<std::string> seen{av.primary_intent};
  for (const auto& s : av.secondary_intents) {
    if (!resolves(s)) fail("UnknownIntentId", "secondary intent '" + s + "' is not a taxonomy leaf");
    if (!seen.insert(s).second) fail("DuplicateIntent", "intent '" + s + "' repeated");
  }
  return av;
}

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::AssistantText: return "assistant_text";
    case StepKind::ToolCall: return "tool_call";
    case StepKind::ToolObservation: return "tool_observation";
  }
  return "assistant_text";
}

AnnotationVector annotation_from_json(const ojson& j) {
  if (!j.is_object()) malformed_record("annotation is not an object");
  AnnotationVector av;
  av.primary_intent = require_string(j, "primary_intent");
  av.secondary_intents = string_list(j, "secondary_intents");
  av.constraints = string_list(j, "constraints");
  if (j.contains("temporal_details")) {
    const auto& td = j["temporal_details"];
    if (!td.is_object()) malformed_record("temporal_details is not an object");
    TemporalDetails t;
    if (td.contains("departure")) t.departure = require_string(td, "departure");
    if (td.contains("arrival")) t.arrival = require_string(td, "arrival");
    av.temporal_details = t;
  }
  return av;
}

ojson annotation_to_json(const AnnotationVector& av) {
  ojson j;
  j["primary_intent"] = av.primary_intent;
  j["secondary_intents"] = av.secondary_intents;
  j["constraints"] = av.constraints;
  if (av.temporal_details) {
    ojson td = ojson::object();
    if (av.temporal_details->departure) td["departure"] = *av.temporal_details->departure;
    if (av.temporal_details->arrival) td["arrival"] = *av.temporal_details->arrival;
    j["temporal_details"] = td;
  }
  return j;
}

Query parse_query(std::string_view line) {
  const ojson j = parse_json_line(line);
  if (!j.is_object()) malformed_record("query line is not an object");
  Query q;
  q.id = require_string(j, "id");
  if (q.id.empty()) malformed_record("empty query id");
  q.text = require_string(j, "text");
  if (text::collapse_whitespace(q.text).empty()) malformed_record("query '" + q.id + "' has empty text");
  if (j.contains("annotation")) q.annotation = annotation_from_json(j["annotation"]);
  if (j.contains("difficulty")) {
    const auto& d = j["difficulty"];
    if (!d.is_number_integer()) malformed_record("difficulty of '" + q.id + "' is not an integer");
    const auto v = d.get<std::int64_t>();
    if (v < kMinDifficulty || v > kMaxDifficulty) {
      fail("InvalidDifficulty", "difficulty " + std::to_string(v) + " of '" + q.id + "' outside -1..5");
    }
    q.difficulty = static_cast<int>(v);
  }
  if (j.contains("user_profile")) {
    if (!j["user_profile"].is_object()) malformed_record("user_profile of '" + q.id + "' is not an object");
    q.user_profile = j["user_profile"];
  }
  return q;
}

std::string serialize_query(const Query& q) {
  ojson j;
  j["id"] = q.id;
  j["text"] = q.text;
  if (q.annotation) j["annotation"] = annotation_to_json(*q.annotation);
  if (q.difficulty) j["difficulty"] = *q.difficulty;
  if (q.user_profile) j["user_profile"] = *q.user_profile;
  return dump(j);
}

Trajectory parse_trajectory(std::string_view line) {
  const ojson j = parse_json_line(line);
  if (!j.is_object()) malformed_record("trajectory line is not an object");
  Trajectory t;
  t.query_id = require_string(j, "query_id");
  if (!j.contains("steps") || !j["steps"].is_array()) malformed_record("steps missing or not an array");
  std::size_t pending_calls = 0;
  std::int64_t total = 0;
  for (const auto& sj : j["steps"]) {
    if (!sj.is_object()) malformed_record("step is not an object");
    Step s;
    const std::string kind = require_string(sj, "kind");
    if (kind == "assistant_text") {
      s.kind = StepKind::AssistantText;
    } else if (kind == "tool_call") {
      s.kind = StepKind::ToolCall;
      ++pending_calls;
    } else if (kind == "tool_observation") {
      s.kind = StepKind::ToolObservation;
      if (pending_calls == 0) malformed_record("tool_observation without a preceding tool_call");
      --pending_calls;
    } else {
      malformed_record("unknown step kind '" + kind + "'");
    }
    s.text = require_string(sj, "text");
    if (!sj.contains("masked") || !sj["masked"].is_boolean()) malformed_record("step.masked missing");
    s.masked = sj["masked"].get<bool>();
    if (s.masked != (s.kind == StepKind::ToolObservation)) {
      malformed_record("mask law violated: masked must equal (kind == tool_observation)");
    }
    if (sj.contains("tokens")) {
      if (!sj["tokens"].is_array()) malformed_record("tokens is not an array");
      std::vector<TokenRecord> toks;
      toks.reserve(sj["tokens"].size());
      for (const auto& tj : sj["tokens"]) {
        if (!tj.is_object() || !tj.contains("logp_policy") || !tj["logp_policy"].is_number()) {
          malformed_record("token without numeric logp_policy");
        }
        TokenRecord r;
        r.logp_policy = tj["logp_policy"].get<double>();
        for (const char* key : {"logp_old", "logp_ref"}) {
          if (!tj.contains(key)) continue;
          if (!tj[key].is_number()) malformed_record(std::string(key) + " is not a number");
          (std::string_view(key) == "logp_old" ? r.logp_old : r.logp_ref) = tj[key].get<double>();
        }
        toks.push_back(r);
      }
      s.tokens = std::move(toks);
    }
    total += static_cast<std::int64_t>(s.token_count());
    t.steps.push_back(std::move(s));
  }
  if (!j.contains("token_count") || !j["token_count"].is_number_integer()) {
    malformed_record("token_count missing or not an integer");
  }
  t.token_count = j["token_count"].get<std::int64_t>();
  if (t.token_count != total) {
    malformed_record("token_count " + std::to_string(t.token_count) + " != sum of step tokens " +
                     std::to_string(total));
  }
  return t;
}

std::string serialize_trajectory(const Trajectory& t) {
  ojson j;
  j["query_id"] = t.query_id;
  j["token_count"] = t.token_count;
  j["steps"] = ojson::array();
  for (const auto& s : t.steps) {
    ojson sj;
    sj["kind"] = std::string(to_string(s.kind));
    sj["text"] = s.text;
    sj["masked"] = s.masked;
    if (s.tokens) {
      sj["tokens"] = ojson::array();
      for (const auto& r : *s.tokens) {
        ojson tj;
        tj["logp_policy"] = r.logp_policy;
        if (r.logp_old) tj["logp_old"] = *r.logp_old;
        if (r.logp_ref) tj["logp_ref"] = *r.logp_ref;
        sj["tokens"].push_back(std::move(tj));
      }
    }
    j["steps"].push_back(std::move(sj));
  }
  return dump(j);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::trim_ascii(line).empty()) lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  return lines;
}

void write_text(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write error on " + path.string());
}

std::vector<Query> read_corpus(const std::filesystem::path& path) {
  std::vector<Query> out;
  for (const auto& line : read_lines(path)) out.push_back(parse_query(line));
  return out;
}

void write_corpus(const std::filesystem::path& path, std::span<const Query> queries) {
  std::string buf;
  for (const auto& q : queries) {
    buf += serialize_query(q);
    buf += '\n';
  }
  write_text(path, buf);
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
  std::vector<Trajectory> out;
  for (const auto& line : read_lines(path)) out.push_back(parse_trajectory(line));
  return out;
}

void write_trajectories(const std::filesystem::path& path, std::span<const Trajectory> ts) {
  std::string buf;
  for (const auto& t : ts) {
    buf += serialize_trajectory(t);
    buf += '\n';
  }
  write_text(path, buf);
}

OtherBucketReport other_bucket_report(std::span<const Query> corpus, const Taxonomy& tax,
                                      std::size_t max_samples) {
  OtherBucketReport report;
  for (const auto& id : tax.internal_ids()) report.buckets[id];
  for (const auto& q : corpus) {
    if (!q.annotation) {
      ++report.unannotated;
      continue;
    }
    const TaxonomyNode* node = tax.find(q.annotation->primary_intent);
    if (node == nullptr || !node->is_other) continue;
    const auto parent = tax.parent_of(node->id);
    if (!parent) continue;
    auto& bucket = report.buckets[*parent];
    ++bucket.count;
    if (bucket.sample_ids.size() < max_samples) bucket.sample_ids.push_back(q.id);
    ++report.other_total;
  }
  return report;
}

}  // namespace stforge
