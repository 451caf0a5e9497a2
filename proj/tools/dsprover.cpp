// Command-line front end: prove, bench, augment, split, serve.

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dsprover/dsprover.hpp"
#include "dsprover/service.hpp"

namespace {

using namespace dsprover;

constexpr int kExitProved = 0;
constexpr int kExitError = 1;
constexpr int kExitUnproved = 2;

// "600s", "2.5s", "250ms", "10m", "1h"; a bare number is seconds.
Duration parse_duration(const std::string& s) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error("bad duration '" + s + "'");
  }
  const std::string unit = s.substr(pos);
  double seconds = 0.0;
  if (unit.empty() || unit == "s") {
    seconds = value;
  } else if (unit == "ms") {
    seconds = value / 1000.0;
  } else if (unit == "m" || unit == "min") {
    seconds = value * 60.0;
  } else if (unit == "h") {
    seconds = value * 3600.0;
  } else {
    throw Error("bad duration unit in '" + s + "'");
  }
  if (!(seconds > 0.0)) throw Error("duration must be positive: '" + s + "'");
  return std::chrono::duration_cast<Duration>(std::chrono::duration<double>(seconds));
}

struct EnvFlags {
  std::string env = "sim";
  std::string sim_latency;
};

EnvFactory make_env_factory(const EnvFlags& flags) {
  if (flags.env == "sim") {
    SimEnvOptions opts;
    if (!flags.sim_latency.empty()) opts.tactic_latency = parse_duration(flags.sim_latency);
    return [opts] { return std::make_unique<SimEnv>(opts); };
  }
  if (flags.env == "adapter" || flags.env.rfind("adapter:", 0) == 0) {
    std::string path = flags.env.size() > 8 ? flags.env.substr(8) : "";
    if (path.empty()) {
      const char* from_env = std::getenv("DSPROVER_ADAPTER_PATH");
      if (!from_env || !*from_env) throw Error("--env adapter needs a path or DSPROVER_ADAPTER_PATH");
      path = from_env;
    }
    return [path] { return std::make_unique<AdapterEnv>(path); };
  }
  throw Error("unknown --env '" + flags.env + "' (sim, adapter[:path])");
}

std::shared_ptr<const TacticGenerator> make_generator(const std::string& spec) {
  if (spec == "heuristic") return std::make_shared<HeuristicSimGenerator>();
  if (spec.rfind("scripted:", 0) == 0) {
    return std::make_shared<ScriptedGenerator>(ScriptedGenerator::load_table(spec.substr(9)));
  }
  if (spec.rfind("noisy:", 0) == 0) {
    const std::string rest = spec.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw Error("--gen noisy:<rate>:<seed>");
    try {
      return std::make_shared<NoisyGenerator>(std::make_shared<HeuristicSimGenerator>(),
                                              std::stoull(rest.substr(colon + 1)),
                                              std::stod(rest.substr(0, colon)));
    } catch (const std::logic_error&) {
      throw Error("--gen noisy:<rate>:<seed>: bad number in '" + rest + "'");
    }
  }
  throw Error("unknown --gen '" + spec + "' (heuristic, scripted:<path>, noisy:<rate>:<seed>)");
}

struct SearchFlags {
  std::string sampler = "dynamic";
  double a = 6.0;
  double b = 12.0;
  double c = 5.0;
  std::size_t n = 64;
  std::string total_time = "600s";
  std::string per_tactic_timeout;
  std::size_t oversample = kDefaultOversampleFactor;
  std::size_t max_nodes = 0;
  bool no_dedup = false;
};

void add_search_flags(CLI::App* cmd, SearchFlags& f) {
  cmd->add_option("--sampler", f.sampler, "dynamic or fixed")->check(CLI::IsMember({"dynamic", "fixed"}));
  cmd->add_option("--a", f.a, "dynamic schedule floor");
  cmd->add_option("--b", f.b, "dynamic schedule amplitude");
  cmd->add_option("--c", f.c, "dynamic schedule decay rate");
  cmd->add_option("--n", f.n, "fixed sample count");
  cmd->add_option("--total-time", f.total_time, "search budget, e.g. 600s, 2.5s, 250ms");
  cmd->add_option("--per-tactic-timeout", f.per_tactic_timeout, "default min(10s, total/2)");
  cmd->add_option("--oversample", f.oversample, "candidates requested per target success (dynamic)");
  cmd->add_option("--max-nodes", f.max_nodes, "stop after this many nodes (0: unlimited)");
  cmd->add_flag("--no-dedup", f.no_dedup, "keep duplicate states");
}

ScheduleConfig schedule_of(const SearchFlags& f, const std::string& sampler) {
  ScheduleConfig s;
  if (sampler == "fixed") {
    s = FixedScheduleConfig{f.n};
  } else {
    s = DynamicScheduleConfig{f.a, f.b, f.c};
  }
  std::visit([](const auto& cfg) { validate(cfg); }, s);
  return s;
}

SearchConfig search_config(const SearchFlags& f) {
  SearchConfig cfg;
  cfg.schedule = schedule_of(f, f.sampler);
  cfg.total_time = parse_duration(f.total_time);
  cfg.per_tactic_timeout = f.per_tactic_timeout.empty()
                               ? clamp_tactic_timeout(kDefaultTacticTimeout, cfg.total_time)
                               : parse_duration(f.per_tactic_timeout);
  cfg.oversample_factor = f.oversample;
  if (f.max_nodes > 0) cfg.max_nodes = f.max_nodes;
  cfg.dedup = !f.no_dedup;
  validate(cfg);
  return cfg;
}

TheoremSpec pick_theorem(const std::string& path, const std::string& name) {
  const std::vector<TheoremSpec> specs = read_theorems(path);
  if (specs.empty()) throw Error(path + ": no theorems");
  if (name.empty()) {
    if (specs.size() > 1) throw Error(path + " holds several theorems; choose one with --name");
    return specs.front();
  }
  for (const auto& s : specs) {
    if (s.name == name) return s;
  }
  throw Error(path + ": no theorem named '" + name + "'");
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

struct ProveArgs {
  std::string theorem;
  std::string name;
  EnvFlags env;
  std::string gen = "heuristic";
  SearchFlags search;
  std::string stats;
  std::string events;
};

int run_prove(const ProveArgs& args) {
  const TheoremSpec spec = pick_theorem(args.theorem, args.name);
  const SearchConfig cfg = search_config(args.search);
  const auto gen = make_generator(args.gen);
  const auto env = make_env_factory(args.env)();

  std::ofstream events;
  SearchHooks hooks;
  if (!args.events.empty()) {
    events.open(args.events, std::ios::trunc);
    if (!events) throw IoError("cannot write '" + args.events + "'");
    hooks.on_event = [&events](const SearchEvent& e) { events << to_json(e).dump() << '\n'; };
  }
  const SearchOutput out = prove(spec, *env, *gen, cfg, hooks);
  if (!args.stats.empty()) {
    nlohmann::ordered_json j;
    j["theorem"] = spec.name;
    j["status"] = status_name(out.result);
    if (auto el = elapsed_of(out.result)) j["elapsed_s"] = std::chrono::duration<double>(*el).count();
    j["stats"] = to_json(out.stats);
    write_json_file(args.stats, j);
  }

  if (const auto* p = std::get_if<Proved>(&out.result)) {
    for (const auto& t : p->tactics) std::cout << t << '\n';
    return kExitProved;
  }
  if (const auto* e = std::get_if<EnvironmentError>(&out.result)) {
    std::cerr << "error: " << e->message << '\n';
    return kExitError;
  }
  std::cout << status_name(out.result) << '\n';
  return kExitUnproved;
}

struct BenchArgs {
  std::string suite;
  std::vector<std::string> methods{"dynamic", "fixed"};
  EnvFlags env;
  std::string gen = "heuristic";
  SearchFlags search;
  std::size_t jobs = 1;
  std::string out;
};

int run_bench_cmd(const BenchArgs& args) {
  const std::vector<TheoremSpec> suite = read_theorems(args.suite);
  if (suite.empty()) throw Error(args.suite + ": empty theorem suite");
  const SearchConfig base = search_config(args.search);
  std::vector<BenchMethod> methods;
  for (const auto& m : args.methods) {
    if (m != "dynamic" && m != "fixed") throw Error("unknown method '" + m + "' (dynamic, fixed)");
    methods.push_back({m, schedule_of(args.search, m)});
  }
  BenchOptions opts;
  opts.total_time = base.total_time;
  opts.per_tactic_timeout = base.per_tactic_timeout;
  opts.oversample_factor = base.oversample_factor;
  opts.max_nodes = base.max_nodes;
  opts.dedup = base.dedup;
  opts.jobs = args.jobs;
  const auto gen = make_generator(args.gen);
  const BenchReport report = run_bench(suite, methods, make_env_factory(args.env), *gen, opts);
  const auto j = to_json(report);
  if (args.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(args.out, j);
    for (const auto& m : report.methods) {
      std::cout << m.name << ": pass@1 " << m.proved.size() << "/" << report.total << '\n';
    }
    std::cout << "cumulative: " << report.cumulative.size() << "/" << report.total << '\n';
  }
  return 0;
}

struct AugmentArgs {
  std::string in;
  std::string out;
  std::string env = "sim";
  bool rewrite_only = false;
};

int run_augment(const AugmentArgs& args) {
  std::unique_ptr<Environment> env;
  if (args.env != "none") env = make_env_factory(EnvFlags{args.env, ""})();
  AugmentOptions opts;
  opts.rewrite_only = args.rewrite_only;
  const AugmentStats s = augment_dataset(args.in, args.out, env.get(), opts);
  nlohmann::ordered_json j{{"originals", s.originals},
                           {"rewrite_added", s.rewrite_added},
                           {"simp_added", s.simp_added},
                           {"skipped", s.skipped}};
  std::cout << j.dump() << '\n';
  return 0;
}

struct SplitArgs {
  std::string theorems;
  std::string train;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_split(const SplitArgs& args) {
  std::vector<std::string> names;
  for (const auto& t : read_theorems(args.theorems)) names.push_back(t.name);
  SplitSpec spec;
  spec.validation = args.validation;
  spec.test = args.test;
  spec.seed = args.seed;
  if (args.train.find('.') != std::string::npos) {
    spec.train = std::stod(args.train);
  } else {
    spec.train = static_cast<std::size_t>(std::stoull(args.train));
  }
  const auto manifest = split_manifest(split_theorems(names, spec), args.seed);
  if (args.out.empty()) {
    std::cout << manifest.dump(2) << '\n';
  } else {
    write_json_file(args.out, manifest);
  }
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_jobs = 0;
  EnvFlags env;
  std::string gen = "heuristic";
  SearchFlags search;
  std::string results_log;
};

HttpService* g_service = nullptr;

int run_serve(const ServeArgs& args) {
  ServiceConfig cfg;
  cfg.make_env = make_env_factory(args.env);
  cfg.generator = make_generator(args.gen);
  cfg.search = search_config(args.search);
  cfg.max_jobs = args.max_jobs;
  if (cfg.max_jobs == 0) {
    const char* v = std::getenv("DSPROVER_MAX_JOBS");
    cfg.max_jobs = v && *v ? std::stoul(v) : 2;
  }
  if (!args.results_log.empty()) cfg.results_log = args.results_log;
  JobManager jobs(std::move(cfg));
  HttpService service(jobs);
  const int port = service.bind(args.host, args.port);
  g_service = &service;
  std::signal(SIGINT, [](int) { if (g_service) g_service->stop(); });
  std::signal(SIGTERM, [](int) { if (g_service) g_service->stop(); });
  std::cerr << "listening on " << args.host << ":" << port << " (max " << jobs.max_jobs() << " jobs)\n";
  service.serve();
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"best-first tactic search with a dynamic sampling schedule"};
  app.require_subcommand(1);

  ProveArgs prove_args;
  auto* prove_cmd = app.add_subcommand("prove", "search for a proof of one theorem");
  prove_cmd->add_option("--theorem", prove_args.theorem, "theorem JSON file")->required();
  prove_cmd->add_option("--name", prove_args.name, "theorem to pick from a suite file");
  prove_cmd->add_option("--env", prove_args.env.env, "sim or adapter[:path]");
  prove_cmd->add_option("--sim-latency", prove_args.env.sim_latency, "simulated cost per tactic");
  prove_cmd->add_option("--gen", prove_args.gen, "heuristic, scripted:<path>, noisy:<rate>:<seed>");
  add_search_flags(prove_cmd, prove_args.search);
  prove_cmd->add_option("--stats", prove_args.stats, "write search statistics JSON");
  prove_cmd->add_option("--events", prove_args.events, "write the search event log (JSONL)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "run a theorem suite under several samplers");
  bench_cmd->add_option("--suite", bench_args.suite, "theorem suite file")->required();
  bench_cmd->add_option("--method", bench_args.methods, "dynamic and/or fixed (repeatable)");
  bench_cmd->add_option("--env", bench_args.env.env, "sim or adapter[:path]");
  bench_cmd->add_option("--sim-latency", bench_args.env.sim_latency, "simulated cost per tactic");
  bench_cmd->add_option("--gen", bench_args.gen, "heuristic, scripted:<path>, noisy:<rate>:<seed>");
  add_search_flags(bench_cmd, bench_args.search);
  bench_cmd->add_option("--jobs", bench_args.jobs, "theorems searched in parallel");
  bench_cmd->add_option("--out", bench_args.out, "report path (default stdout)");

  AugmentArgs augment_args;
  auto* augment_cmd = app.add_subcommand("augment", "decompose multi-premise tactics in a pair file");
  augment_cmd->add_option("--input,--in", augment_args.in, "input pairs (JSONL)")->required();
  augment_cmd->add_option("--output,--out", augment_args.out, "output pairs (JSONL)")->required();
  augment_cmd->add_option("--env", augment_args.env, "sim, adapter[:path] or none");
  augment_cmd->add_flag("--rewrite-only", augment_args.rewrite_only, "skip simp-family validation");

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "seeded train/validation/test split by theorem");
  split_cmd->add_option("--theorems", split_args.theorems, "theorem suite file")->required();
  split_cmd->add_option("--train", split_args.train, "count, or fraction of the remainder")->required();
  split_cmd->add_option("--validation", split_args.validation);
  split_cmd->add_option("--test", split_args.test);
  split_cmd->add_option("--seed", split_args.seed);
  split_cmd->add_option("--out", split_args.out, "manifest path (default stdout)");

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP proof job service");
  serve_cmd->add_option("--host", serve_args.host);
  serve_cmd->add_option("--port", serve_args.port, "0 picks a free port");
  serve_cmd->add_option("--max-jobs", serve_args.max_jobs, "default DSPROVER_MAX_JOBS or 2");
  serve_cmd->add_option("--env", serve_args.env.env, "sim or adapter[:path]");
  serve_cmd->add_option("--sim-latency", serve_args.env.sim_latency, "simulated cost per tactic");
  serve_cmd->add_option("--gen", serve_args.gen, "heuristic, scripted:<path>, noisy:<rate>:<seed>");
  add_search_flags(serve_cmd, serve_args.search);
  serve_cmd->add_option("--results-log", serve_args.results_log, "append terminal jobs here (JSONL)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*prove_cmd) return run_prove(prove_args);
    if (*bench_cmd) return run_bench_cmd(bench_args);
    if (*augment_cmd) return run_augment(augment_args);
    if (*split_cmd) return run_split(split_args);
    if (*serve_cmd) return run_serve(serve_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
