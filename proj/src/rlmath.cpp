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
#include "stforge/rlmath.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "stforge/error.hpp"
#include "stforge/parallel.hpp"

namespace stforge::rlmath {

namespace {

constexpr std::size_t kPairwiseBlock = 8;

void need_old(const TokenLogProbs& t) {
  if (!t.logp_old) fail("MissingOldPolicy", "trajectory has no old-policy log-probabilities");
}

struct MemberEval {
  double surrogate = 0.0;
  double kl = 0.0;
  std::size_t evaluations = 0;
  std::size_t hits = 0;
};

MemberEval eval_member(const TokenLogProbs& t, double adv, const RLConfig& cfg, bool want_kl) {
  MemberEval m;
  if (cfg.ratio_mode == RatioMode::TokenGrpo) {
    const auto ratios = token_ratios(t);
    std::vector<double> terms(ratios.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      terms[i] = clipped_surrogate(ratios[i], adv, cfg.clip_eps);
      m.hits += clip_binds(ratios[i], adv, cfg.clip_eps) ? 1 : 0;
    }
    m.evaluations = ratios.size();
    m.surrogate = pairwise_sum(terms) / static_cast<double>(terms.size());
  } else {
    const double s = gspo_sequence_ratio(t, cfg.mask_gspo);
    m.surrogate = clipped_surrogate(s, adv, cfg.clip_eps);
    m.evaluations = 1;
    m.hits = clip_binds(s, adv, cfg.clip_eps) ? 1 : 0;
  }
  if (want_kl) m.kl = kl_term(t);
  return m;
}

}  // namespace

void TokenLogProbs::validate() const {
  const std::size_t n = logp_policy.size();
  if (n == 0) fail("EmptyTrajectory", "trajectory has no tokens");
  if (mask.size() != n || (logp_old && logp_old->size() != n) || (logp_ref && logp_ref->size() != n)) {
    fail("ChannelLengthMismatch", "log-probability channels differ in length");
  }
  const auto check = [](std::span<const double> xs) {
    for (const double x : xs) {
      if (!std::isfinite(x) || x > 0.0) fail("InvalidLogProb", "log-probabilities must be finite and <= 0");
    }
  };
  check(logp_policy);
  if (logp_old) check(*logp_old);
  if (logp_ref) check(*logp_ref);
}

TokenLogProbs from_trajectory(const Trajectory& t) {
  TokenLogProbs out;
  std::size_t with_old = 0;
  std::size_t with_ref = 0;
  std::vector<double> old;
  std::vector<double> ref;
  for (const auto& step : t.steps) {
    if (!step.tokens) continue;
    for (const auto& tok : *step.tokens) {
      out.logp_policy.push_back(tok.logp_policy);
      out.mask.push_back(step.masked ? 0 : 1);
      if (tok.logp_old) {
        ++with_old;
        old.push_back(*tok.logp_old);
      }
      if (tok.logp_ref) {
        ++with_ref;
        ref.push_back(*tok.logp_ref);
      }
    }
  }
  const std::size_t n = out.logp_policy.size();
  if ((with_old != 0 && with_old != n) || (with_ref != 0 && with_ref != n)) {
    fail("ChannelLengthMismatch", "trajectory '" + t.query_id + "' has partial logp_old/logp_ref channels");
  }
  if (with_old != 0) out.logp_old = std::move(old);
  if (with_ref != 0) out.logp_ref = std::move(ref);
  out.validate();
  return out;
}

std::string_view to_string(RatioMode m) {
  return m == RatioMode::TokenGrpo ? "token_grpo" : "sequence_gspo";
}

RatioMode parse_ratio_mode(std::string_view s) {
  if (s == "token_grpo") return RatioMode::TokenGrpo;
  if (s == "sequence_gspo") return RatioMode::SequenceGspo;
  fail("InvalidConfig", "ratio mode must be token_grpo or sequence_gspo, got '" + std::string(s) + "'");
}

void RLConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) fail("InvalidConfig", "clip_eps must lie in (0, 1)");
  if (!(adv_delta > 0.0) || !std::isfinite(adv_delta)) fail("InvalidConfig", "adv_delta must be > 0");
  if (!(kl_beta >= 0.0) || !std::isfinite(kl_beta)) fail("InvalidConfig", "kl_beta must be >= 0");
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= kPairwiseBlock) {
    double s = 0.0;
    for (const double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double sft_masked_loss(const TokenLogProbs& t) {
  std::vector<double> kept;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.mask[i]) kept.push_back(t.logp_policy[i]);
  }
  if (kept.empty()) fail("AllMasked", "every token is masked");
  return -pairwise_sum(kept) / static_cast<double>(kept.size());
}

std::vector<double> group_advantages(std::span<const double> rewards, double delta) {
  if (rewards.size() < 2) fail("GroupTooSmall", "advantages need G >= 2");
  // Identical rewards: the rounded mean can miss r by an ulp, which the
  // small delta would amplify, so return the exact zeros directly.
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; })) {
    return std::vector<double>(rewards.size(), 0.0);
  }
  const auto g = static_cast<double>(rewards.size());
  const double mean = pairwise_sum(rewards) / g;
  std::vector<double> dev(rewards.size());
  std::vector<double> sq(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    dev[i] = rewards[i] - mean;
    sq[i] = dev[i] * dev[i];
  }
  const double denom = std::sqrt(pairwise_sum(sq) / g) + delta;
  for (double& d : dev) d /= denom;
  return dev;
}

std::vector<double> token_ratios(const TokenLogProbs& t) {
  need_old(t);
  std::vector<double> r(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) r[i] = std::exp(t.logp_policy[i] - (*t.logp_old)[i]);
  return r;
}

double gspo_sequence_ratio(const TokenLogProbs& t, bool masked_only) {
  need_old(t);
  std::vector<double> gaps;
  gaps.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (masked_only && !t.mask[i]) continue;
    gaps.push_back(t.logp_policy[i] - (*t.logp_old)[i]);
  }
  if (gaps.empty()) fail("AllMasked", "no unmasked tokens for the sequence ratio");
  return std::exp(pairwise_sum(gaps) / static_cast<double>(gaps.size()));
}

double clipped_surrogate(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

bool clip_binds(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return clipped * advantage < ratio * advantage;
}

double kl_term(const TokenLogProbs& t) {
  if (!t.logp_ref) fail("MissingRefPolicy", "trajectory has no reference-policy log-probabilities");
  std::vector<double> terms;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.mask[i]) continue;
    const double x = (*t.logp_ref)[i] - t.logp_policy[i];
    // expm1(x) - x keeps precision near zero and is >= 0 for every x
    terms.push_back(std::max(0.0, std::expm1(x) - x));
  }
  if (terms.empty()) fail("AllMasked", "no unmasked tokens for the KL term");
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

ObjectiveReport grpo_objective(const GroupRollout& group, const RLConfig& cfg) {
  cfg.validate();
  std::vector<double> rewards;
  rewards.reserve(group.G());
  for (const auto& m : group.members) {
    if (!std::isfinite(m.reward)) fail("InvalidReward", "non-finite reward in group '" + group.query_id + "'");
    rewards.push_back(m.reward);
  }
  const auto adv = group_advantages(rewards, cfg.adv_delta);

  bool have_ref = true;
  for (const auto& m : group.members) have_ref = have_ref && m.trajectory.logp_ref.has_value();
  if (cfg.kl_beta > 0.0 && !have_ref) {
    fail("MissingRefPolicy", "kl_beta > 0 requires logp_ref on every trajectory of '" + group.query_id + "'");
  }

  ObjectiveReport rep;
  rep.mode = cfg.ratio_mode;
  rep.G = group.G();
  std::vector<double> per_member(group.G());
  std::vector<double> kls(group.G());
  for (std::size_t i = 0; i < group.G(); ++i) {
    const auto m = eval_member(group.members[i].trajectory, adv[i], cfg, have_ref);
    per_member[i] = m.surrogate - cfg.kl_beta * m.kl;
    kls[i] = m.kl;
    rep.clip_evaluations += m.evaluations;
    rep.clip_hits += m.hits;
  }
  const auto g = static_cast<double>(group.G());
  rep.objective = pairwise_sum(per_member) / g;
  if (have_ref) rep.mean_kl = pairwise_sum(kls) / g;
  rep.clip_fraction = rep.clip_evaluations == 0
                          ? 0.0
                          : static_cast<double>(rep.clip_hits) / static_cast<double>(rep.clip_evaluations);
  return rep;
}

ObjectiveReport evaluate_batch(std::span<const GroupRollout> groups, const RLConfig& cfg) {
  if (groups.empty()) fail("EmptyBatch", "no groups to evaluate");
  const std::size_t g = groups.front().G();
  for (const auto& grp : groups) {
    if (grp.G() != g) {
      fail("InconsistentGroupSize", "group '" + grp.query_id + "' has G=" + std::to_string(grp.G()) +
                                        ", expected " + std::to_string(g));
    }
  }
  const auto n = static_cast<std::ptrdiff_t>(groups.size());
  std::vector<ObjectiveReport> parts(groups.size());
  FirstError err;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      parts[u] = grpo_objective(groups[u], cfg);
    } catch (...) {
      err.capture(i);
    }
  }
  err.rethrow();

  ObjectiveReport rep;
  rep.mode = cfg.ratio_mode;
  rep.G = g;
  std::vector<double> objs;
  std::vector<double> kls;
  bool all_kl = true;
  for (const auto& p : parts) {
    objs.push_back(p.objective);
    if (p.mean_kl) kls.push_back(*p.mean_kl);
    all_kl = all_kl && p.mean_kl.has_value();
    rep.clip_evaluations += p.clip_evaluations;
    rep.clip_hits += p.clip_hits;
  }
  rep.objective = pairwise_sum(objs) / static_cast<double>(objs.size());
  if (all_kl) rep.mean_kl = pairwise_sum(kls) / static_cast<double>(kls.size());
  rep.clip_fraction = rep.clip_evaluations == 0
                          ? 0.0
                          : static_cast<double>(rep.clip_hits) / static_cast<double>(rep.clip_evaluations);
  return rep;
}

std::vector<GroupRollout> join_groups(std::span<const Trajectory> trajectories,
                                      std::span<const std::string> reward_lines) {
  std::map<std::string, std::vector<double>> rewards;
  for (const auto& line : reward_lines) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail("MalformedRecord", std::string("invalid rewards JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("query_id") || !j["query_id"].is_string() || !j.contains("rewards") ||
        !j["rewards"].is_array()) {
      fail("MalformedRecord", "rewards line needs string query_id and rewards array");
    }
    std::vector<double> rs;
    for (const auto& r : j["rewards"]) {
      if (!r.is_number()) fail("MalformedRecord", "non-numeric reward");
      rs.push_back(r.get<double>());
    }
    const auto id = j["query_id"].get<std::string>();
    if (!rewards.emplace(id, std::move(rs)).second) fail("MalformedRecord", "duplicate rewards for '" + id + "'");
  }

  std::vector<GroupRollout> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& t : trajectories) {
    auto [it, fresh] = index.emplace(t.query_id, groups.size());
    if (fresh) groups.push_back({t.query_id, {}});
    groups[it->second].members.push_back({from_trajectory(t), 0.0});
  }
  for (auto& g : groups) {
    const auto it = rewards.find(g.query_id);
    if (it == rewards.end()) fail("MissingRewards", "no rewards for '" + g.query_id + "'");
    if (it->second.size() != g.G()) {
      fail("ChannelLengthMismatch", "'" + g.query_id + "' has " + std::to_string(g.G()) + " trajectories but " +
                                        std::to_string(it->second.size()) + " rewards");
    }
    for (std::size_t i = 0; i < g.G(); ++i) g.members[i].reward = it->second[i];
  }
  return groups;
}

nlohmann::ordered_json to_json(const ObjectiveReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(r.mode));
  j["G"] = r.G;
  j["objective"] = r.objective;
  j["mean_kl"] = r.mean_kl ? nlohmann::ordered_json(*r.mean_kl) : nlohmann::ordered_json(nullptr);
  j["clip_fraction"] = r.clip_fraction;
  return j;
}

}  // namespace stforge::rlmath
