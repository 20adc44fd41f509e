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
// Writes the bundled end-to-end fixture set:
//   make_fixtures <taxonomy.json> <out_dir>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <nlohmann/json.hpp>

#include "stforge/corpus.hpp"
#include "stforge/embedding_io.hpp"
#include "stforge/error.hpp"
#include "stforge/funnel.hpp"
#include "stforge/rng.hpp"
#include "stforge/synth.hpp"

namespace fs = std::filesystem;
using namespace stforge;

namespace {

constexpr std::uint64_t kSeed = 20260101;
constexpr std::size_t kCuratedTarget = 800;
constexpr std::size_t kProbeK = 8;
constexpr std::size_t kRlQueries = 12;
constexpr std::size_t kGroupSize = 4;

enum : std::uint64_t { kProbe = 11, kRatings, kTraj };

// Graded probe rewards: a latent solve rate, then K draws on a 0.25 grid.
std::vector<double> probe_rewards(SplitMix64& rng) {
  const auto bucket = rng.below(10);
  double p = rng.uniform();
  if (bucket < 3) p = 1.0;        // solved every time
  else if (bucket < 5) p = 0.0;   // never solved
  std::vector<double> out;
  for (std::size_t k = 0; k < kProbeK; ++k) {
    const double u = rng.uniform();
    out.push_back(u < p ? (rng.below(4) == 0 ? 0.75 : 1.0) : (rng.below(4) == 0 ? 0.25 : 0.0));
  }
  if (p == 1.0 || p == 0.0) {
    for (auto& r : out) r = p;
  }
  return out;
}

double logp(SplitMix64& rng) { return -0.01 - 2.99 * rng.uniform(); }

Step make_step(SplitMix64& rng, StepKind kind, const std::string& text, std::size_t tokens) {
  Step s;
  s.kind = kind;
  s.text = text;
  s.masked = kind == StepKind::ToolObservation;
  std::vector<TokenRecord> toks;
  for (std::size_t i = 0; i < tokens; ++i) {
    TokenRecord r;
    r.logp_policy = logp(rng);
    r.logp_old = std::min(0.0, r.logp_policy + rng.uniform(-0.3, 0.3));
    r.logp_ref = std::min(0.0, r.logp_policy + rng.uniform(-0.5, 0.5));
    toks.push_back(r);
  }
  s.tokens = std::move(toks);
  return s;
}

std::string report_xml(double wr, double wi, double wp, double sr, double si, double sp, bool h) {
  const double final = h ? 0.0 : wr * sr + wi * si + wp * sp;
  char buf[2048];
  std::snprintf(buf, sizeof buf,
                "Evaluation follows.\n"
                "<evaluation_report>\n"
                "    <hallucination_analysis>\n"
                "        <has_hallucination>%s</has_hallucination>\n"
                "        <details>%s</details>\n"
                "    </hallucination_analysis>\n"
                "    <weight_analysis>\n"
                "        <rationale>Weights follow the request type.</rationale>\n"
                "        <weights>\n"
                "            <w_reasoning>%.2f</w_reasoning>\n"
                "            <w_integration>%.2f</w_integration>\n"
                "            <w_presentation>%.2f</w_presentation>\n"
                "        </weights>\n"
                "    </weight_analysis>\n"
                "    <dimension_reasoning>\n"
                "        <rationale>Tool arguments were precise.</rationale>\n"
                "        <rating>%.2f</rating>\n"
                "    </dimension_reasoning>\n"
                "    <dimension_integration>\n"
                "        <rationale>Facts match the tool responses.</rationale>\n"
                "        <rating>%.2f</rating>\n"
                "    </dimension_integration>\n"
                "    <dimension_presentation>\n"
                "        <rationale>Clear, structured answer.</rationale>\n"
                "        <rating>%.2f</rating>\n"
                "    </dimension_presentation>\n"
                "    <final_score>%.4f</final_score>\n"
                "</evaluation_report>\n",
                h ? "true" : "false", h ? "Quoted a price that no tool returned." : "None.", wr, wi, wp, sr, si, sp,
                final);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_fixtures <taxonomy.json> <out_dir>\n";
    return 64;
  }
  try {
    const auto tax = load_taxonomy(argv[1]);
    const fs::path out = argv[2];

    synth::CorpusSpec spec;
    spec.base_queries = 880;
    spec.lexical_clusters = 40;
    spec.lexical_copies = 2;
    spec.semantic_clusters = 40;
    spec.semantic_copies = 1;
    spec.seed = kSeed;
    const auto corpus = synth::make_corpus(tax, spec);
    write_corpus(out / "corpus.jsonl", corpus.queries);
    write_embeddings(out / "embeddings.stfe", corpus.embeddings);

    funnel::FunnelConfig cfg;
    cfg.kcenter_target = kCuratedTarget;
    const auto curated = funnel::run_funnel(corpus.queries, corpus.embeddings, cfg);

    std::string probes;
    for (std::size_t i = 0; i < curated.surviving_ids.size(); ++i) {
      SplitMix64 rng(stream_seed(kSeed, kProbe, i));
      nlohmann::ordered_json j;
      j["query_id"] = curated.surviving_ids[i];
      j["rewards"] = probe_rewards(rng);
      probes += j.dump() + "\n";
    }
    write_text(out / "probe_rewards.jsonl", probes);

    nlohmann::ordered_json schedule;
    schedule["rng_seed"] = 7;
    schedule["phases"] = {
        {{"difficulty_weights", {{"-1", 0.5}, {"0", 0.5}, {"1", 1.0}, {"2", 1.0}}}, {"batch_size", 16}, {"num_batches", 6}},
        {{"difficulty_weights", {{"3", 1.0}}}, {"batch_size", 16}, {"num_batches", 4}},
        {{"difficulty_weights", {{"4", 1.0}, {"5", 2.0}}}, {"batch_size", 16}, {"num_batches", 6}},
    };
    write_text(out / "schedule.json", schedule.dump(2) + "\n");

    // Ratings on a 0.05 grid; every fifth record is vetoed and every third
    // relies on the taxonomy fallback instead of an explicit scenario.
    std::string ratings;
    static constexpr const char* kScenarios[] = {"A", "B", "C"};
    for (std::size_t i = 0; i < 60 && i < curated.surviving_ids.size(); ++i) {
      SplitMix64 rng(stream_seed(kSeed, kRatings, i));
      nlohmann::ordered_json j;
      j["query_id"] = curated.surviving_ids[i];
      if (i % 3 != 0) j["scenario"] = kScenarios[rng.below(3)];
      j["ratings"] = {static_cast<double>(rng.below(21)) / 20.0, static_cast<double>(rng.below(21)) / 20.0,
                      static_cast<double>(rng.below(21)) / 20.0};
      j["H"] = i % 5 == 4;
      ratings += j.dump() + "\n";
    }
    write_text(out / "ratings.jsonl", ratings);

    fs::create_directories(out / "reports");
    write_text(out / "reports" / (curated.surviving_ids[0] + ".xml"), report_xml(0.6, 0.3, 0.1, 0.9, 0.8, 1.0, false));
    write_text(out / "reports" / (curated.surviving_ids[1] + ".xml"), report_xml(0.2, 0.6, 0.2, 0.5, 1.0, 0.5, false));
    write_text(out / "reports" / (curated.surviving_ids[2] + ".xml"),
               "```xml\n" + report_xml(0.3, 0.3, 0.4, 0.7, 0.6, 0.9, false) + "```\n");
    write_text(out / "reports" / (curated.surviving_ids[3] + ".xml"), report_xml(0.6, 0.3, 0.1, 1.0, 1.0, 1.0, true));

    std::vector<Trajectory> trajs;
    std::string rl_rewards;
    for (std::size_t q = 0; q < kRlQueries; ++q) {
      const auto& qid = curated.surviving_ids[q];
      nlohmann::ordered_json rj;
      rj["query_id"] = qid;
      rj["rewards"] = nlohmann::ordered_json::array();
      for (std::size_t g = 0; g < kGroupSize; ++g) {
        SplitMix64 rng(stream_seed(kSeed, kTraj, q * kGroupSize + g));
        Trajectory t;
        t.query_id = qid;
        t.steps.push_back(make_step(rng, StepKind::AssistantText, "Let me look that up.", 3 + rng.below(4)));
        t.steps.push_back(make_step(rng, StepKind::ToolCall, "{\"name\":\"map_search_places\"}", 2 + rng.below(3)));
        t.steps.push_back(make_step(rng, StepKind::ToolObservation, "Found 3 places.", 3 + rng.below(3)));
        t.steps.push_back(make_step(rng, StepKind::AssistantText, "Here are the closest options.", 2 + rng.below(4)));
        for (const auto& s : t.steps) t.token_count += static_cast<std::int64_t>(s.token_count());
        trajs.push_back(std::move(t));
        rj["rewards"].push_back(static_cast<double>(rng.below(5)) / 4.0);
      }
      rl_rewards += rj.dump() + "\n";
    }
    write_trajectories(out / "trajectories.jsonl", trajs);
    write_text(out / "rl_rewards.jsonl", rl_rewards);

    std::cout << "corpus " << corpus.queries.size() << ", curated " << curated.surviving_ids.size() << "\n";
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
  return 0;
}
