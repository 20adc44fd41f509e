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
#include "stforge/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <omp.h>

#include "stforge/corpus.hpp"
#include "stforge/curriculum.hpp"
#include "stforge/embedding_io.hpp"
#include "stforge/error.hpp"
#include "stforge/funnel.hpp"
#include "stforge/reward.hpp"
#include "stforge/rlmath.hpp"
#include "stforge/sandbox/server.hpp"

namespace stforge::cli {

namespace {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

struct FunnelArgs {
  fs::path corpus;
  fs::path embeddings;
  fs::path out;
  bool dry_run = false;
  int threads = 0;
  funnel::FunnelConfig cfg;
};

struct ProbeArgs {
  fs::path rewards;
  fs::path out;
  curriculum::RegionThresholds eps;
  int k_max = curriculum::kDefaultKMax;
};

struct ScheduleArgs {
  fs::path corpus;
  fs::path schedule;
  fs::path out;
  fs::path histogram;
  std::optional<double> tiny_fraction;
  std::size_t batch_size = 32;
  std::optional<std::uint64_t> seed;
};

struct RewardArgs {
  fs::path ratings;
  fs::path reports;
  fs::path corpus;
  fs::path out;
  std::vector<double> weights_a;
  std::vector<double> weights_b;
  std::vector<double> weights_c;
};

struct RlArgs {
  fs::path trajectories;
  fs::path rewards;
  fs::path out;
  std::string mode = "token_grpo";
  rlmath::RLConfig cfg;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
  std::size_t pois = 2000;
  std::size_t cache_capacity = sandbox::kDefaultCacheCapacity;
  std::size_t threads = 64;
  fs::path snapshot;
  bool export_only = false;
};

std::string dump_line(const OJson& j) { return j.dump() + "\n"; }

int cmd_funnel(const FunnelArgs& a, std::ostream& out) {
  if (!a.dry_run && a.out.empty()) fail("InvalidConfig", "--out is required unless --dry-run is given");
  a.cfg.validate();
  if (a.threads > 0) omp_set_num_threads(a.threads);
  const auto corpus = read_corpus(a.corpus);
  const auto emb = read_embeddings(a.embeddings);
  const auto set = funnel::run_funnel(corpus, emb, a.cfg);
  const auto& c = set.stage_counts;
  OJson summary;
  summary["input"] = c.input;
  summary["after_lexical"] = c.after_lexical;
  summary["after_semantic"] = c.after_semantic;
  summary["after_geometric"] = c.after_geometric;
  summary["config"] = {{"shingle_k", a.cfg.shingle_k},
                       {"num_hashes", a.cfg.num_hashes},
                       {"lsh_bands", a.cfg.lsh_bands},
                       {"lsh_rows", a.cfg.lsh_rows},
                       {"jaccard_threshold", a.cfg.jaccard_threshold},
                       {"semantic_distance_threshold", a.cfg.semantic_distance_threshold},
                       {"kcenter_target", a.cfg.kcenter_target},
                       {"rng_seed", a.cfg.rng_seed}};
  out << "input " << c.input << "\nafter_lexical " << c.after_lexical << "\nafter_semantic " << c.after_semantic
      << "\nafter_geometric " << c.after_geometric << "\n";
  if (a.dry_run) return kExitOk;

  std::string survivors;
  for (const auto& id : set.surviving_ids) survivors += id + "\n";
  std::vector<const Query*> kept;
  {
    std::unordered_map<std::string_view, const Query*> by_id;
    for (const auto& q : corpus) by_id.emplace(q.id, &q);
    for (const auto& id : set.surviving_ids) kept.push_back(by_id.at(id));
  }
  std::string curated;
  for (const auto* q : kept) curated += serialize_query(*q) + "\n";
  write_text(a.out / "survivors.txt", survivors);
  write_text(a.out / "curated.jsonl", curated);
  write_text(a.out / "drop_log.jsonl", funnel::drop_log_jsonl(set));
  write_text(a.out / "summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_probe_select(const ProbeArgs& a, std::ostream& out) {
  const auto lines = read_lines(a.rewards);
  const auto stats = curriculum::parse_probe_lines(lines);
  auto records = curriculum::allocate_budget(curriculum::learnability_scores(stats, a.eps), a.k_max);
  std::size_t census[3] = {0, 0, 0};
  for (const auto& r : records) ++census[static_cast<int>(r.region)];
  const auto pct = [&](std::size_t n) { return 100.0 * static_cast<double>(n) / static_cast<double>(records.size()); };
  char buf[160];
  std::snprintf(buf, sizeof buf, "trivial %zu (%.1f%%)\nnoise %zu (%.1f%%)\nlearnable %zu (%.1f%%)\n", census[0],
                pct(census[0]), census[1], pct(census[1]), census[2], pct(census[2]));
  out << buf;
  if (!a.out.empty()) write_text(a.out, curriculum::records_jsonl(records));
  return kExitOk;
}

int cmd_schedule(const ScheduleArgs& a, std::ostream& out) {
  const auto corpus = read_corpus(a.corpus);
  curriculum::CurriculumSchedule sched;
  if (!a.schedule.empty()) {
    const auto lines = read_lines(a.schedule);
    std::string doc;
    for (const auto& l : lines) doc += l + "\n";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(doc);
    } catch (const nlohmann::json::exception& e) {
      fail("InvalidSchedule", e.what());
    }
    sched = curriculum::schedule_from_json(j);
  } else if (a.tiny_fraction) {
    sched = curriculum::tiny_dataset_preset(corpus.size(), a.batch_size, a.seed.value_or(0), *a.tiny_fraction);
  } else {
    fail("InvalidConfig", "give --schedule or --tiny-fraction");
  }
  if (a.seed) sched.rng_seed = *a.seed;
  if (!a.histogram.empty()) {
    write_text(a.histogram, curriculum::histogram_csv(curriculum::difficulty_histogram(corpus)));
  }
  const auto batches = curriculum::build_schedule(corpus, sched);
  std::size_t ids = 0;
  for (const auto& b : batches) ids += b.ids.size();
  out << "phases " << sched.phases.size() << "\nbatches " << batches.size() << "\nids " << ids << "\n";
  if (!a.out.empty()) write_text(a.out, curriculum::batches_jsonl(batches));
  return kExitOk;
}

reward::Triple parse_triple(const nlohmann::json& j, const char* what) {
  reward::Triple t{};
  if (j.is_array() && j.size() == 3) {
    for (std::size_t k = 0; k < 3; ++k) {
      if (!j[k].is_number()) fail("MalformedRecord", std::string(what) + " entries must be numbers");
      t[k] = j[k].get<double>();
    }
    return t;
  }
  if (j.is_object()) {
    static constexpr const char* kRatingKeys[] = {"s_reas", "s_info", "s_pres"};
    static constexpr const char* kWeightKeys[] = {"w_reas", "w_info", "w_pres"};
    const bool ratings = j.contains("s_reas");
    for (std::size_t k = 0; k < 3; ++k) {
      const char* key = ratings ? kRatingKeys[k] : kWeightKeys[k];
      if (!j.contains(key) || !j[key].is_number()) fail("MalformedRecord", std::string(what) + " missing " + key);
      t[k] = j[key].get<double>();
    }
    return t;
  }
  fail("MalformedRecord", std::string(what) + " must be a 3-element array or object");
}

std::optional<reward::Triple> override_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return reward::Triple{v[0], v[1], v[2]};
}

int cmd_reward_score(const RewardArgs& a, std::ostream& out) {
  if (a.ratings.empty() == a.reports.empty()) fail("InvalidConfig", "give exactly one of --ratings or --reports");
  const std::array<std::optional<reward::Triple>, 3> overrides{override_of(a.weights_a), override_of(a.weights_b),
                                                               override_of(a.weights_c)};
  std::unordered_map<std::string, reward::Scenario> fallback;
  if (!a.corpus.empty()) {
    for (const auto& q : read_corpus(a.corpus)) {
      if (q.annotation) fallback.emplace(q.id, reward::classify_scenario(*q.annotation));
    }
  }
  std::vector<reward::ScoredRecord> scored;
  if (!a.ratings.empty()) {
    for (const auto& line : read_lines(a.ratings)) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        fail("MalformedRecord", std::string("invalid ratings JSON: ") + e.what());
      }
      if (!j.is_object() || !j.contains("query_id") || !j["query_id"].is_string() || !j.contains("ratings")) {
        fail("MalformedRecord", "ratings line needs query_id and ratings");
      }
      reward::ScoredRecord r;
      r.query_id = j["query_id"].get<std::string>();
      if (j.contains("scenario")) {
        if (!j["scenario"].is_string()) fail("MalformedRecord", "scenario must be a string");
        r.scenario = reward::parse_scenario(j["scenario"].get<std::string>());
      } else if (const auto it = fallback.find(r.query_id); it != fallback.end()) {
        r.scenario = it->second;
      } else {
        fail("MissingScenario", "no scenario and no annotated corpus entry for '" + r.query_id + "'");
      }
      r.weights = j.contains("weights")
                      ? reward::scenario_weights(r.scenario, parse_triple(j["weights"], "weights"))
                      : reward::scenario_weights(r.scenario, overrides[static_cast<std::size_t>(r.scenario)]);
      r.ratings = parse_triple(j["ratings"], "ratings");
      const auto& h = j.contains("H") ? j["H"] : nlohmann::json(false);
      if (h.is_boolean()) {
        r.hallucination = h.get<bool>();
      } else if (h.is_number_integer() && (h.get<int>() == 0 || h.get<int>() == 1)) {
        r.hallucination = h.get<int>() == 1;
      } else {
        fail("MalformedRecord", "H must be a boolean or 0/1");
      }
      r.R = reward::aggregate_reward(r.weights, r.ratings, r.hallucination);
      scored.push_back(std::move(r));
    }
  } else {
    if (!fs::is_directory(a.reports)) throw IoError("reports directory '" + a.reports.string() + "' not found");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.reports)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::string body;
      for (const auto& l : read_lines(f)) body += l + "\n";
      reward::RewardReport rep;
      try {
        rep = reward::parse_evaluation_report(body);
      } catch (const Error& e) {
        throw Error(e.kind(), f.filename().string() + ": " + e.detail());
      }
      scored.push_back({f.stem().string(), rep.scenario, rep.weights, rep.ratings, rep.hallucination,
                        reward::aggregate_reward(rep.weights, rep.ratings, rep.hallucination)});
    }
  }
  std::string body;
  double sum = 0.0;
  std::size_t vetoed = 0;
  for (const auto& r : scored) {
    body += dump_line(reward::to_json(r));
    sum += r.R;
    vetoed += r.hallucination ? 1 : 0;
  }
  out << "scored " << scored.size() << "\nvetoed " << vetoed << "\nmean_R "
      << (scored.empty() ? 0.0 : sum / static_cast<double>(scored.size())) << "\n";
  if (!a.out.empty()) write_text(a.out, body);
  return kExitOk;
}

int cmd_rl_eval(RlArgs a, std::ostream& out) {
  a.cfg.ratio_mode = rlmath::parse_ratio_mode(a.mode);
  a.cfg.validate();
  const auto trajectories = read_trajectories(a.trajectories);
  const auto rewards = read_lines(a.rewards);
  const auto groups = rlmath::join_groups(trajectories, rewards);
  const auto report = rlmath::evaluate_batch(groups, a.cfg);
  const auto text = rlmath::to_json(report).dump(2) + "\n";
  out << text;
  if (!a.out.empty()) write_text(a.out, text);
  return kExitOk;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  auto world = sandbox::SyntheticWorld::generate(a.seed, a.pois);
  if (!a.snapshot.empty()) write_text(a.snapshot, world.snapshot().dump(2) + "\n");
  if (a.export_only) {
    if (a.snapshot.empty()) fail("InvalidConfig", "--export-only needs --snapshot");
    out << "snapshot " << a.snapshot.string() << "\n";
    return kExitOk;
  }
  sandbox::Sandbox sb(std::move(world), sandbox::Registry::standard(), std::max<std::size_t>(1, a.cache_capacity));

  // Signals are taken synchronously by one thread; block them before any
  // server thread exists so every thread inherits the mask.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &set, &previous);

  sandbox::Server server(sb, a.threads);
  const int port = server.bind(a.host, a.port);
  out << "listening on " << a.host << ":" << port << std::endl;

  std::atomic<bool> done{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    if (!done.load()) server.stop();
  });
  server.run();
  done = true;
  pthread_kill(waiter.native_handle(), SIGTERM);  // release the waiter if it is still blocked
  waiter.join();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  out << "stopped" << std::endl;
  return kExitOk;
}

void add_funnel(CLI::App& app, FunnelArgs& a, std::function<void()>& action, std::ostream& out, int& rc) {
  auto* c = app.add_subcommand("funnel", "Lexical, semantic and geometric redundancy reduction");
  c->add_option("--corpus", a.corpus, "query corpus (JSON lines)")->required();
  c->add_option("--embeddings", a.embeddings, "embedding sidecar (STFE)")->required();
  c->add_option("--out", a.out, "output directory");
  c->add_flag("--dry-run", a.dry_run, "print stage counts, write nothing");
  c->add_option("--threads", a.threads, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  c->add_option("--shingle-k", a.cfg.shingle_k, "shingle length in code points")->capture_default_str();
  c->add_option("--num-hashes", a.cfg.num_hashes, "MinHash functions")->capture_default_str();
  c->add_option("--bands", a.cfg.lsh_bands, "LSH bands")->capture_default_str();
  c->add_option("--rows", a.cfg.lsh_rows, "rows per band")->capture_default_str();
  c->add_option("--jaccard-threshold", a.cfg.jaccard_threshold, "lexical duplicate threshold")->capture_default_str();
  c->add_option("--semantic-threshold", a.cfg.semantic_distance_threshold, "cosine distance threshold")
      ->capture_default_str();
  c->add_option("--kcenter-target", a.cfg.kcenter_target, "final set size")->capture_default_str();
  c->add_option("--seed", a.cfg.rng_seed, "hash and index seed")->capture_default_str();
  c->add_option("--exhaustive-limit", a.cfg.exhaustive_limit, "largest bucket scanned exhaustively")
      ->capture_default_str();
  c->callback([&] { action = [&] { rc = cmd_funnel(a, out); }; });
}

void add_probe(CLI::App& app, ProbeArgs& a, std::function<void()>& action, std::ostream& out, int& rc) {
  auto* c = app.add_subcommand("probe-select", "Probe statistics, region filtration and budget allocation");
  c->add_option("--rewards", a.rewards, "probe rewards (JSON lines {query_id, rewards})")->required();
  c->add_option("--out", a.out, "learnability records (JSON lines)");
  c->add_option("--eps-mu", a.eps.eps_mu, "mean threshold")->capture_default_str()->check(CLI::Range(0.0, 0.5));
  c->add_option("--eps-var", a.eps.eps_var, "variance threshold")->capture_default_str()->check(CLI::Range(0.0, 0.5));
  c->add_option("--k-max", a.k_max, "largest per-query trajectory budget")->capture_default_str()->check(CLI::PositiveNumber);
  c->callback([&] { action = [&] { rc = cmd_probe_select(a, out); }; });
}

void add_schedule(CLI::App& app, ScheduleArgs& a, std::function<void()>& action, std::ostream& out, int& rc) {
  auto* c = app.add_subcommand("schedule", "Difficulty histogram and curriculum batches");
  c->add_option("--corpus", a.corpus, "annotated, scored corpus")->required();
  auto* s = c->add_option("--schedule", a.schedule, "schedule JSON");
  auto* t = c->add_option("--tiny-fraction", a.tiny_fraction, "uniform warm-up subsample instead of a schedule")
                ->check(CLI::Range(0.0, 1.0));
  s->excludes(t);
  c->add_option("--batch-size", a.batch_size, "batch size for --tiny-fraction")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--seed", a.seed, "overrides the schedule rng_seed");
  c->add_option("--out", a.out, "batches (JSON lines)");
  c->add_option("--histogram", a.histogram, "difficulty histogram CSV");
  c->callback([&] { action = [&] { rc = cmd_schedule(a, out); }; });
}

void add_reward(CLI::App& app, RewardArgs& a, std::function<void()>& action, std::ostream& out, int& rc) {
  auto* c = app.add_subcommand("reward-score", "Rubric reward aggregation with hallucination veto");
  auto* r = c->add_option("--ratings", a.ratings, "ratings (JSON lines {query_id, scenario?, ratings, H})");
  auto* p = c->add_option("--reports", a.reports, "directory of evaluator XML reports");
  r->excludes(p);
  c->add_option("--corpus", a.corpus, "annotated corpus for the scenario fallback");
  c->add_option("--out", a.out, "scored records (JSON lines)");
  c->add_option("--weights-a", a.weights_a, "override weights for scenario A")->expected(3)->delimiter(',');
  c->add_option("--weights-b", a.weights_b, "override weights for scenario B")->expected(3)->delimiter(',');
  c->add_option("--weights-c", a.weights_c, "override weights for scenario C")->expected(3)->delimiter(',');
  c->callback([&] { action = [&] { rc = cmd_reward_score(a, out); }; });
}

void add_rl(CLI::App& app, RlArgs& a, std::function<void()>& action, std::ostream& out, int& rc) {
  auto* c = app.add_subcommand("rl-eval", "Group-relative objective, clip fraction and KL over logged rollouts");
  c->add_option("--trajectories", a.trajectories, "trajectories with token log-probabilities")->required();
  c->add_option("--rewards", a.rewards, "rewards (JSON lines {query_id, rewards})")->required();
  c->add_option("--out", a.out, "report JSON");
  c->add_option("--mode", a.mode, "ratio mode")->capture_default_str()->check(CLI::IsMember({"token_grpo", "sequence_gspo"}));
  c->add_option("--clip-eps", a.cfg.clip_eps, "clip range")->capture_default_str();
  c->add_option("--kl-beta", a.cfg.kl_beta, "KL coefficient")->capture_default_str();
  c->add_option("--adv-delta", a.cfg.adv_delta, "advantage denominator guard")->capture_default_str();
  c->add_flag("--mask-gspo", a.cfg.mask_gspo, "restrict the sequence ratio to unmasked tokens");
  c->callback([&] { action = [&] { rc = cmd_rl_eval(a, out); }; });
}

void add_serve(CLI::App& app, ServeArgs& a, std::function<void()>& action, std::ostream& out, int& rc) {
  auto* c = app.add_subcommand("serve", "Tool sandbox over JSON-RPC 2.0 (POST /rpc)");
  c->add_option("--host", a.host, "bind address")->capture_default_str();
  c->add_option("--port", a.port, "port, 0 picks a free one")->capture_default_str()->check(CLI::Range(0, 65535));
  c->add_option("--seed", a.seed, "world seed")->capture_default_str()->envname("STFORGE_SANDBOX_SEED");
  c->add_option("--pois", a.pois, "number of synthetic POIs")->capture_default_str();
  c->add_option("--cache-capacity", a.cache_capacity, "LRU entries")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--threads", a.threads, "HTTP worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--snapshot", a.snapshot, "write the world snapshot JSON here");
  c->add_flag("--export-only", a.export_only, "write the snapshot and exit");
  c->callback([&] { action = [&] { rc = cmd_serve(a, out); }; });
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"stforge: data curation, curriculum, reward and RL objective tooling with a tool sandbox"};
  app.set_config("--config", "", "INI/TOML config; command sections like [funnel]; flags override");
  app.require_subcommand(1);

  FunnelArgs funnel_args;
  ProbeArgs probe_args;
  ScheduleArgs schedule_args;
  RewardArgs reward_args;
  RlArgs rl_args;
  ServeArgs serve_args;
  std::function<void()> action;
  int rc = kExitOk;
  add_funnel(app, funnel_args, action, out, rc);
  add_probe(app, probe_args, action, out, rc);
  add_schedule(app, schedule_args, action, out, rc);
  add_reward(app, reward_args, action, out, rc);
  add_rl(app, rl_args, action, out, rc);
  add_serve(app, serve_args, action, out, rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::FileError& e) {
    err << "IoError: " << e.what() << "\n";
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (action) action();
  } catch (const IoError& e) {
    err << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "InternalError: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace stforge::cli
