#pragma once

// Benchmark harness: every theorem of a suite once per method, then Pass@1 per
// method, the cumulative (union) rate, pairwise set differences, depth
// histograms, proof-size tables and how the schedule evolved over the budget.

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsprover/env.hpp"
#include "dsprover/generator.hpp"
#include "dsprover/search.hpp"

namespace dsprover {

struct BenchMethod {
  std::string name;
  ScheduleConfig schedule;
};

struct BenchOptions {
  Duration total_time = std::chrono::minutes(10);
  Duration per_tactic_timeout = kDefaultTacticTimeout;
  std::size_t oversample_factor = kDefaultOversampleFactor;
  std::optional<std::size_t> max_nodes;
  bool dedup = true;
  std::size_t jobs = 1;        // theorems searched concurrently, one env each
  std::size_t r_buckets = 10;  // resolution of the schedule-over-time table
};

struct TheoremRun {
  std::string theorem;
  SearchOutput output;
};

struct ScheduleBucket {
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t expansions = 0;
  double mean_target = 0.0;
};

struct MethodReport {
  std::string name;
  std::vector<TheoremRun> runs;
  std::set<std::string> proved;
  double pass_at_1 = 0.0;
  std::map<std::size_t, std::size_t> depth_histogram;
  std::map<std::size_t, std::size_t> proof_sizes;
  std::vector<ScheduleBucket> schedule;

  // Depth holding the most nodes across the suite (smallest on ties).
  std::optional<std::size_t> peak_depth() const {
    std::optional<std::size_t> best;
    std::size_t best_count = 0;
    for (const auto& [depth, count] : depth_histogram) {
      if (!best || count > best_count) {
        best = depth;
        best_count = count;
      }
    }
    return best;
  }
};

struct SetDifference {
  std::string a;
  std::string b;
  std::vector<std::string> a_only;
};

struct BenchReport {
  std::size_t total = 0;
  Duration total_time{};
  std::vector<MethodReport> methods;
  std::set<std::string> cumulative;
  double cumulative_pass_at_1 = 0.0;
  std::vector<SetDifference> differences;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

inline std::vector<ScheduleBucket> schedule_buckets(const std::vector<TheoremRun>& runs, std::size_t buckets) {
  buckets = std::max<std::size_t>(buckets, 1);
  std::vector<ScheduleBucket> out(buckets);
  std::vector<double> sum(buckets, 0.0);
  for (std::size_t b = 0; b < buckets; ++b) {
    out[b].r_lo = static_cast<double>(b) / static_cast<double>(buckets);
    out[b].r_hi = static_cast<double>(b + 1) / static_cast<double>(buckets);
  }
  for (const auto& run : runs) {
    for (const auto& e : run.output.stats.trace) {
      auto b = std::min(buckets - 1, static_cast<std::size_t>(e.elapsed_ratio * static_cast<double>(buckets)));
      ++out[b].expansions;
      sum[b] += static_cast<double>(e.target_count);
    }
  }
  for (std::size_t b = 0; b < buckets; ++b) {
    if (out[b].expansions > 0) out[b].mean_target = sum[b] / static_cast<double>(out[b].expansions);
  }
  return out;
}

inline BenchReport run_bench(const std::vector<TheoremSpec>& suite, const std::vector<BenchMethod>& methods,
                             const EnvFactory& make_env, const TacticGenerator& gen, const BenchOptions& options) {
  if (suite.empty()) throw Error("bench: empty theorem suite");
  if (methods.empty()) throw Error("bench: no methods");
  BenchReport report;
  report.total = suite.size();
  report.total_time = options.total_time;

  for (const auto& method : methods) {
    SearchConfig cfg;
    cfg.schedule = method.schedule;
    cfg.total_time = options.total_time;
    cfg.per_tactic_timeout = options.per_tactic_timeout;
    cfg.oversample_factor = options.oversample_factor;
    cfg.max_nodes = options.max_nodes;
    cfg.dedup = options.dedup;
    validate(cfg);

    MethodReport mr;
    mr.name = method.name;
    mr.runs.resize(suite.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      std::unique_ptr<Environment> env = make_env();
      for (std::size_t i = next++; i < suite.size(); i = next++) {
        mr.runs[i] = {suite[i].name, prove(suite[i], *env, gen, cfg)};
      }
    };
    const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, suite.size());
    {
      std::vector<std::jthread> pool;
      for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
      worker();
    }

    std::vector<SearchOutput> outputs;
    for (const auto& run : mr.runs) {
      if (std::holds_alternative<Proved>(run.output.result)) mr.proved.insert(run.theorem);
      for (const auto& [depth, count] : run.output.stats.nodes_per_depth) mr.depth_histogram[depth] += count;
      outputs.push_back(run.output);
    }
    mr.pass_at_1 = static_cast<double>(mr.proved.size()) / static_cast<double>(suite.size());
    mr.proof_sizes = proof_size_report(outputs);
    mr.schedule = schedule_buckets(mr.runs, options.r_buckets);
    report.cumulative.insert(mr.proved.begin(), mr.proved.end());
    report.methods.push_back(std::move(mr));
  }
  report.cumulative_pass_at_1 = static_cast<double>(report.cumulative.size()) / static_cast<double>(suite.size());
  for (const auto& a : report.methods) {
    for (const auto& b : report.methods) {
      if (&a == &b) continue;
      SetDifference d{a.name, b.name, {}};
      std::set_difference(a.proved.begin(), a.proved.end(), b.proved.begin(), b.proved.end(),
                          std::back_inserter(d.a_only));
      report.differences.push_back(std::move(d));
    }
  }
  return report;
}

inline nlohmann::ordered_json to_json(const std::map<std::size_t, std::size_t>& table) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : table) j[std::to_string(k)] = v;
  return j;
}

inline nlohmann::ordered_json to_json(const SearchStats& s) {
  nlohmann::ordered_json j;
  j["nodes_per_depth"] = to_json(s.nodes_per_depth);
  j["total_nodes"] = s.total_nodes();
  j["expansions"] = s.expansions;
  j["tactics_sampled"] = s.tactics_sampled;
  j["tactics_succeeded"] = s.tactics_succeeded;
  j["tactic_errors"] = s.tactic_errors;
  j["tactic_timeouts"] = s.tactic_timeouts;
  j["duplicates_discarded"] = s.duplicates_discarded;
  j["proof_size"] = s.proof_size ? nlohmann::ordered_json(*s.proof_size) : nlohmann::ordered_json(nullptr);
  if (!s.trace.empty()) {
    j["first_expansion"] = {{"r", s.trace.front().elapsed_ratio}, {"n", s.trace.front().target_count}};
    j["last_expansion"] = {{"r", s.trace.back().elapsed_ratio}, {"n", s.trace.back().target_count}};
  }
  return j;
}

inline nlohmann::ordered_json to_json(const BenchReport& report) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["total"] = report.total;
  j["total_time_s"] = std::chrono::duration<double>(report.total_time).count();
  oj methods = oj::array();
  for (const auto& m : report.methods) {
    oj jm;
    jm["name"] = m.name;
    jm["pass_at_1"] = m.pass_at_1;
    jm["proved"] = m.proved;
    jm["depth_histogram"] = to_json(m.depth_histogram);
    jm["peak_depth"] = m.peak_depth() ? oj(*m.peak_depth()) : oj(nullptr);
    jm["proof_sizes"] = to_json(m.proof_sizes);
    oj buckets = oj::array();
    for (const auto& b : m.schedule) {
      buckets.push_back({{"r_lo", b.r_lo}, {"r_hi", b.r_hi}, {"expansions", b.expansions}, {"mean_n", b.mean_target}});
    }
    jm["schedule"] = buckets;
    oj runs = oj::array();
    for (const auto& r : m.runs) {
      oj jr;
      jr["theorem"] = r.theorem;
      jr["status"] = status_name(r.output.result);
      if (const auto* p = std::get_if<Proved>(&r.output.result)) jr["proof"] = p->tactics;
      if (const auto* e = std::get_if<EnvironmentError>(&r.output.result)) jr["error"] = e->message;
      if (auto el = elapsed_of(r.output.result)) jr["elapsed_s"] = std::chrono::duration<double>(*el).count();
      jr["stats"] = to_json(r.output.stats);
      runs.push_back(std::move(jr));
    }
    jm["runs"] = runs;
    methods.push_back(std::move(jm));
  }
  j["methods"] = methods;
  j["cumulative_pass_at_1"] = report.cumulative_pass_at_1;
  j["cumulative_proved"] = report.cumulative;
  oj diffs = oj::array();
  for (const auto& d : report.differences) diffs.push_back({{"a", d.a}, {"b", d.b}, {"a_only", d.a_only}});
  j["differences"] = diffs;
  return j;
}

}  // namespace dsprover
