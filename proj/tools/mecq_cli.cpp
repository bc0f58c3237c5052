#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecq/action_space.hpp"
#include "mecq/harness.hpp"
#include "mecq/validation.hpp"

using namespace mecq;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

RunConfig build_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig cfg = path.empty() ? RunConfig::desk() : load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value config file (desk-scale defaults otherwise)");
  app->add_option("--set", c.overrides, "override one config key, e.g. --set alpha=0.5");
}

int cmd_run(const Common& c, const std::string& algo, std::uint64_t seed, const std::string& scenario_path,
            const std::string& trace_path) {
  const RunConfig cfg = build_config(c.config, c.overrides);
  const Algo a = algo_from_string(algo);
  NetworkScenario s;
  if (scenario_path.empty()) {
    s = generate_scenario(cfg, seed);
  } else {
    std::ifstream in(scenario_path);
    if (!in) throw std::runtime_error("cannot open scenario file " + scenario_path);
    s = load_scenario(in);
  }
  const RunMetrics m = run_training(cfg, s, a, seed, !trace_path.empty());
  write_run_csv(std::cout, m);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw std::runtime_error("cannot write " + trace_path);
    write_trace_csv(out, m);
  }
  std::fprintf(stderr, "wall_seconds=%.3f\n", m.wall_seconds);
  return 0;
}

int cmd_sweep(const Common& c, const std::string& axis, const std::string& values, const std::string& algos,
              const std::string& out_dir) {
  const RunConfig cfg = build_config(c.config, c.overrides);
  const SweepAxis ax = axis_from_string(axis);
  std::vector<double> vs;
  for (const auto& v : split(values, ',')) vs.push_back(std::stod(v));
  if (vs.empty()) throw std::invalid_argument("--values needs at least one value");
  std::vector<Algo> as;
  for (const auto& a : split(algos, ',')) as.push_back(algo_from_string(a));
  if (as.empty()) throw std::invalid_argument("--algos needs at least one algorithm");
  const SweepTable t = sweep(cfg, ax, vs, as);
  write_sweep_csv(std::cout, t);
  if (!out_dir.empty())
    for (const auto& p : emit_report(out_dir, {t})) std::fprintf(stderr, "wrote %s\n", p.c_str());
  return 0;
}

int cmd_verify(const Common& c, int theorem, bool oracle, int count, std::uint64_t seed) {
  RunConfig table = RunConfig{};
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    table.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  std::vector<CheckRow> rows;
  const bool all = theorem == 0 && !oracle;
  if (all || theorem == 1) {
    const auto r = verify_split(table, count, seed);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (all || theorem == 2) {
    RunConfig g = table;
    g.omega_min = g.omega_max = 1500.0;
    const auto r = verify_gains(g, count, seed);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (all || theorem == 3) {
    const auto r = verify_counts(3, 3, 2);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (oracle) {
    RunConfig tiny = build_config(c.config, c.overrides);
    tiny.n_bs = 1;
    tiny.n_users = 2;
    tiny.n_ul = tiny.n_dl = 2;
    tiny.n_power_levels = 2;
    const auto r = verify_oracle(tiny, std::min(count, 50), seed);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  write_check_csv(std::cout, rows);
  return 0;
}

int cmd_count(const std::string& dims_text, bool enumerate) {
  const auto parts = split(dims_text, ',');
  if (parts.size() != 4) throw std::invalid_argument("--dims expects M,I,J,N_a");
  ActionDims dims{std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2]), std::stoi(parts[3])};
  if (dims.users < 1 || dims.n_ul < 0 || dims.n_dl < 0 || dims.levels < 1)
    throw std::invalid_argument("--dims must be positive (subcarrier counts may be 0)");
  const Count formula = theorem3_total(dims);
  Theorem3Options verbatim;
  verbatim.power = PowerCounting::PerSubcarrier;
  verbatim.include_mu_factor = true;
  verbatim.collaborative_users = dims.users;
  verbatim.all_subcarriers_allocated = true;
  const Count printed = theorem3_total(dims, verbatim);

  std::string enumerated = "";
  std::string agree = "unknown";
  if (enumerate) {
    RunConfig cfg = RunConfig::desk();
    cfg.n_bs = 1;
    cfg.n_users = dims.users;
    cfg.n_ul = dims.n_ul;
    cfg.n_dl = dims.n_dl;
    cfg.n_power_levels = dims.levels;
    try {
      const ActionCatalog cat = enumerate_actions(generate_scenario(cfg, 1), 0);
      enumerated = std::to_string(cat.size());
      agree = static_cast<Count>(cat.size()) == formula ? "true" : "false";
    } catch (const std::length_error& e) {
      std::fprintf(stderr, "enumeration skipped: %s\n", e.what());
    }
  }
  std::cout << "users,n_ul,n_dl,levels,formula,enumerated,agree,verbatim\n"
            << dims.users << ',' << dims.n_ul << ',' << dims.n_dl << ',' << dims.levels << ','
            << to_string(formula) << ',' << enumerated << ',' << agree << ',' << to_string(printed) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell MEC resource allocation simulator"};
  app.require_subcommand(1);

  Common run_c, sweep_c, verify_c;

  auto* run = app.add_subcommand("run", "train one algorithm on one seeded scenario");
  add_common(run, run_c);
  std::string algo = "multistack";
  std::uint64_t seed = 1;
  std::string scenario_path, trace_path;
  run->add_option("--algo", algo, "multistack, qlearning, random, task-only, task+subcarrier, task+power");
  run->add_option("--seed", seed, "scenario and run seed");
  run->add_option("--scenario", scenario_path, "load the scenario from a file instead of generating it");
  run->add_option("--trace", trace_path, "write the per-iteration trace CSV here");

  auto* sw = app.add_subcommand("sweep", "multi-seed sweep over one axis");
  add_common(sw, sweep_c);
  std::string axis, values, algos = "multistack,qlearning", out_dir;
  sw->add_option("--axis", axis, "alpha, gamma, subcarriers, task_bits, nu, users")->required();
  sw->add_option("--values", values, "comma separated values")->required();
  sw->add_option("--algos", algos, "comma separated algorithms");
  sw->add_option("--out", out_dir, "also write <out>/<experiment>.csv and .dat");

  auto* ver = app.add_subcommand("verify", "closed forms against direct oracles");
  add_common(ver, verify_c);
  int theorem = 0;
  bool oracle = false;
  int count = 1000;
  std::uint64_t vseed = 1;
  ver->add_option("--theorem", theorem, "1: split, 2: gains, 3: action counts")->check(CLI::Range(1, 3));
  ver->add_flag("--oracle", oracle, "compare the learner against the exhaustive optimum");
  ver->add_option("--count", count, "scenarios per check")->check(CLI::PositiveNumber);
  ver->add_option("--seed", vseed, "first scenario seed");

  auto* cnt = app.add_subcommand("count-actions", "per-BS action count");
  std::string dims;
  bool no_enum = false;
  cnt->add_option("--dims", dims, "M,I,J,N_a")->required();
  cnt->add_flag("--no-enumerate", no_enum, "skip the enumeration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_c, algo, seed, scenario_path, trace_path);
    if (*sw) return cmd_sweep(sweep_c, axis, values, algos, out_dir);
    if (*ver) return cmd_verify(verify_c, theorem, oracle, count, vseed);
    if (*cnt) return cmd_count(dims, !no_enum);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
