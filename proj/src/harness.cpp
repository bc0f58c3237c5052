#include "mecq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mecq/rng.hpp"
#include "mecq/task_model.hpp"

namespace mecq {

namespace {

enum StreamKey : std::uint64_t { kPositions = 1, kGains = 2, kTasks = 3, kOmega = 4, kRun = 5 };

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "") throw std::invalid_argument(key + ": not a number: '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "") throw std::invalid_argument(key + ": not an integer: '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "") throw std::invalid_argument(key + ": not an unsigned integer: '" + v + "'");
  return x;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a{
      {"N", "n_bs"},
      {"M", "n_users"},
      {"I", "n_ul"},
      {"J", "n_dl"},
      {"N_a", "n_power_levels"},
      {"W", "bandwidth_hz"},
      {"sigma2_dbm", "noise_dbm"},
      {"delta", "path_loss_exp"},
      {"P_U", "p_max_ul_w"},
      {"P_B", "p_max_dl_w"},
      {"F", "mec_cpu_hz"},
      {"f_m", "user_cpu_hz"},
      {"omega_m", "cycles_per_bit_user"},
      {"nu", "result_ratio"},
      {"B", "stack_depth"},
      {"G", "stacks"},
  };
  return a;
}

}  // namespace

std::string format_double(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

RunConfig RunConfig::desk() {
  RunConfig c;
  c.n_bs = 2;
  c.n_users = 4;
  c.n_ul = 3;
  c.n_dl = 3;
  c.n_power_levels = 2;
  return c;
}

std::vector<std::uint64_t> RunConfig::seed_list() const {
  std::vector<std::uint64_t> v;
  for (int i = 0; i < seeds; ++i) v.push_back(seed + static_cast<std::uint64_t>(i));
  return v;
}

void RunConfig::validate() const {
  auto req = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
  };
  req(n_bs >= 1 && n_users >= 1, "n_bs and n_users must be >= 1");
  req(n_ul >= 0 && n_dl >= 0, "subcarrier counts must be >= 0");
  req(n_power_levels >= 1, "n_power_levels must be >= 1");
  req(bandwidth_hz > 0 && path_loss_exp > 0 && p_max_ul_w > 0 && p_max_dl_w > 0, "physical constants must be positive");
  req(mec_cpu_hz > 0 && user_cpu_hz > 0 && cycles_per_bit_user > 0, "CPU constants must be positive");
  req(omega_min > 0 && omega_min <= omega_max, "need 0 < omega_min <= omega_max");
  req(lambda_min_bits > 0 && lambda_min_bits <= lambda_max_bits && lambda_scale > 0, "bad task size range");
  req(result_ratio > 0 && result_ratio <= 1, "result_ratio must lie in (0, 1]");
  req(radius_m > 0 && min_distance_m > 0, "radius and min distance must be positive");
  req(task_types.empty() || task_types.size() == static_cast<std::size_t>(n_users), "task_types needs one entry per user");
  req(seeds >= 1, "seeds must be >= 1");
  req(window >= 1 && budget >= window, "need budget >= window >= 1");
  req(tolerance > 0, "tolerance must be positive");
  req(agent.stacks >= 0 && agent.stack_depth >= 0 && agent.bins >= 1 && agent.retry_cap >= 0, "bad agent sizes");
  req(agent.alpha > 0 && agent.alpha <= 1 && agent.gamma >= 0 && agent.gamma < 1, "bad alpha/gamma");
  req(agent.epsilon >= 0 && agent.epsilon <= 1 && agent.epsilon_final >= 0 && agent.epsilon_final <= 1, "bad epsilon");
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (auto it = aliases().find(key); it != aliases().end()) key = it->second;

  auto as_int = [&] { return static_cast<int>(parse_int(key, v)); };
  auto as_real = [&] { return parse_double(key, v); };

  if (key == "n_bs") n_bs = as_int();
  else if (key == "n_users") n_users = as_int();
  else if (key == "n_ul") n_ul = as_int();
  else if (key == "n_dl") n_dl = as_int();
  else if (key == "n_subcarriers") n_ul = n_dl = as_int();
  else if (key == "n_power_levels") n_power_levels = as_int();
  else if (key == "bandwidth_hz") bandwidth_hz = as_real();
  else if (key == "noise_dbm") noise_dbm = as_real();
  else if (key == "path_loss_exp") path_loss_exp = as_real();
  else if (key == "p_max_ul_w") p_max_ul_w = as_real();
  else if (key == "p_max_dl_w") p_max_dl_w = as_real();
  else if (key == "mec_cpu_hz") mec_cpu_hz = as_real();
  else if (key == "user_cpu_hz") user_cpu_hz = as_real();
  else if (key == "cycles_per_bit_user") cycles_per_bit_user = as_real();
  else if (key == "omega_min") omega_min = as_real();
  else if (key == "omega_max") omega_max = as_real();
  else if (key == "omega") omega_min = omega_max = as_real();
  else if (key == "lambda_min_bits") lambda_min_bits = as_real();
  else if (key == "lambda_max_bits") lambda_max_bits = as_real();
  else if (key == "lambda_scale") lambda_scale = as_real();
  else if (key == "result_ratio") result_ratio = as_real();
  else if (key == "radius_m") radius_m = as_real();
  else if (key == "min_distance_m") min_distance_m = as_real();
  else if (key == "task_types") {
    task_types.clear();
    if (v != "uniform")
      for (const auto& t : split_list(v)) task_types.push_back(task_type_from_string(t));
  } else if (key == "alpha") agent.alpha = as_real();
  else if (key == "gamma") agent.gamma = as_real();
  else if (key == "epsilon") agent.epsilon = agent.epsilon_final = as_real();
  else if (key == "epsilon_final") agent.epsilon_final = as_real();
  else if (key == "epsilon_decay_steps") agent.epsilon_decay_steps = parse_int(key, v);
  else if (key == "stacks") agent.stacks = as_int();
  else if (key == "stack_depth") agent.stack_depth = as_int();
  else if (key == "bins") agent.bins = as_int();
  else if (key == "retry_cap") agent.retry_cap = as_int();
  else if (key == "r_min") agent.r_min = as_real();
  else if (key == "tie_break") {
    if (v == "lowest") agent.tie_break = TieBreak::Lowest;
    else if (v == "random") agent.tie_break = TieBreak::Random;
    else throw std::invalid_argument("tie_break must be 'lowest' or 'random'");
  }
  else if (key == "seed") seed = parse_u64(key, v);
  else if (key == "seeds") seeds = as_int();
  else if (key == "budget") budget = parse_int(key, v);
  else if (key == "window") window = as_int();
  else if (key == "tolerance") tolerance = as_real();
  else if (key == "threads") threads = as_int();
  else if (key == "experiment") experiment = v;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  auto real = [&](const char* k, double x) { os << k << " = " << format_double(x, 17) << '\n'; };
  os << "n_bs = " << n_bs << '\n'
     << "n_users = " << n_users << '\n'
     << "n_ul = " << n_ul << '\n'
     << "n_dl = " << n_dl << '\n'
     << "n_power_levels = " << n_power_levels << '\n';
  real("bandwidth_hz", bandwidth_hz);
  real("noise_dbm", noise_dbm);
  real("path_loss_exp", path_loss_exp);
  real("p_max_ul_w", p_max_ul_w);
  real("p_max_dl_w", p_max_dl_w);
  real("mec_cpu_hz", mec_cpu_hz);
  real("user_cpu_hz", user_cpu_hz);
  real("cycles_per_bit_user", cycles_per_bit_user);
  real("omega_min", omega_min);
  real("omega_max", omega_max);
  real("lambda_min_bits", lambda_min_bits);
  real("lambda_max_bits", lambda_max_bits);
  real("lambda_scale", lambda_scale);
  real("result_ratio", result_ratio);
  real("radius_m", radius_m);
  real("min_distance_m", min_distance_m);
  os << "task_types = ";
  if (task_types.empty()) os << "uniform";
  for (std::size_t i = 0; i < task_types.size(); ++i) os << (i ? "," : "") << to_string(task_types[i]);
  os << '\n';
  real("alpha", agent.alpha);
  real("gamma", agent.gamma);
  real("epsilon", agent.epsilon);
  real("epsilon_final", agent.epsilon_final);
  os << "epsilon_decay_steps = " << agent.epsilon_decay_steps << '\n'
     << "stacks = " << agent.stacks << '\n'
     << "stack_depth = " << agent.stack_depth << '\n'
     << "bins = " << agent.bins << '\n'
     << "retry_cap = " << agent.retry_cap << '\n';
  real("r_min", agent.r_min);
  os << "tie_break = " << (agent.tie_break == TieBreak::Lowest ? "lowest" : "random") << '\n';
  os << "seed = " << seed << '\n'
     << "seeds = " << seeds << '\n'
     << "budget = " << budget << '\n'
     << "window = " << window << '\n';
  real("tolerance", tolerance);
  os << "threads = " << threads << '\n' << "experiment = " << experiment << '\n';
  return os.str();
}

RunConfig parse_config(std::istream& is, RunConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      base.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

namespace {

Point disc_point(Rng& r, double radius) {
  const double rho = radius * std::sqrt(r.uniform());
  const double theta = 2.0 * std::numbers::pi * r.uniform();
  return {rho * std::cos(theta), rho * std::sin(theta)};
}

}  // namespace

void derive_gains(NetworkScenario& s, std::uint64_t gain_seed, double min_distance_m) {
  s.ul_gain.assign(static_cast<std::size_t>(s.n_bs) * s.n_users * s.n_ul, 0.0);
  s.dl_gain.assign(static_cast<std::size_t>(s.n_bs) * s.n_users * s.n_dl, 0.0);
  for (int n = 0; n < s.n_bs; ++n) {
    for (int m = 0; m < s.n_users; ++m) {
      const double r = std::max(distance(s.bs_positions[n], s.user_positions[m]), min_distance_m);
      const double path = std::pow(r, -s.path_loss_exp);
      for (int i = 0; i < s.n_ul; ++i) {
        Rng rng(derive_seed(gain_seed, {0, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m),
                                        static_cast<std::uint64_t>(i)}));
        s.ul_gain_at(n, m, i) = rng.exponential() * path;
      }
      for (int j = 0; j < s.n_dl; ++j) {
        Rng rng(derive_seed(gain_seed, {1, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m),
                                        static_cast<std::uint64_t>(j)}));
        s.dl_gain_at(n, m, j) = rng.exponential() * path;
      }
    }
  }
}

NetworkScenario generate_scenario(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  NetworkScenario s;
  s.n_bs = cfg.n_bs;
  s.n_users = cfg.n_users;
  s.n_ul = cfg.n_ul;
  s.n_dl = cfg.n_dl;
  s.resize();
  s.bandwidth_hz = cfg.bandwidth_hz;
  s.noise_power_w = dbm_to_watts(cfg.noise_dbm);
  s.path_loss_exp = cfg.path_loss_exp;
  s.p_max_ul_w = cfg.p_max_ul_w;
  s.p_max_dl_w = cfg.p_max_dl_w;
  s.n_power_levels = cfg.n_power_levels;
  s.mec_cpu_hz = cfg.mec_cpu_hz;
  s.result_ratio = cfg.result_ratio;

  for (int n = 0; n < s.n_bs; ++n) {
    Rng r(derive_seed(seed, {kPositions, 0, static_cast<std::uint64_t>(n)}));
    s.bs_positions[n] = disc_point(r, cfg.radius_m);
  }
  for (int m = 0; m < s.n_users; ++m) {
    Rng r(derive_seed(seed, {kPositions, 1, static_cast<std::uint64_t>(m)}));
    s.user_positions[m] = disc_point(r, cfg.radius_m);
  }
  {
    Rng r(derive_seed(seed, {kOmega}));
    s.cycles_per_bit_mec = r.uniform(cfg.omega_min, cfg.omega_max);
  }
  for (int m = 0; m < s.n_users; ++m) {
    Rng r(derive_seed(seed, {kTasks, static_cast<std::uint64_t>(m)}));
    s.task_bits[m] = r.uniform(cfg.lambda_min_bits, cfg.lambda_max_bits) * cfg.lambda_scale;
    const auto drawn = static_cast<TaskType>(1 + r.below_int(3));
    s.task_type[m] = cfg.task_types.empty() ? drawn : cfg.task_types[m];
    s.user_cpu_hz[m] = cfg.user_cpu_hz;
    s.cycles_per_bit_user[m] = cfg.cycles_per_bit_user;
  }
  derive_gains(s, derive_seed(seed, {kGains}), cfg.min_distance_m);
  s.validate();
  return s;
}

void save_scenario(std::ostream& os, const NetworkScenario& s, GainStorage mode, std::uint64_t gain_seed,
                   double min_distance_m) {
  auto d = [](double x) { return format_double(x, 17); };
  os << "# mecq scenario\n"
     << "n_bs = " << s.n_bs << '\n'
     << "n_users = " << s.n_users << '\n'
     << "n_ul = " << s.n_ul << '\n'
     << "n_dl = " << s.n_dl << '\n'
     << "bandwidth_hz = " << d(s.bandwidth_hz) << '\n'
     << "noise_power_w = " << d(s.noise_power_w) << '\n'
     << "path_loss_exp = " << d(s.path_loss_exp) << '\n'
     << "p_max_ul_w = " << d(s.p_max_ul_w) << '\n'
     << "p_max_dl_w = " << d(s.p_max_dl_w) << '\n'
     << "n_power_levels = " << s.n_power_levels << '\n'
     << "mec_cpu_hz = " << d(s.mec_cpu_hz) << '\n'
     << "cycles_per_bit_mec = " << d(s.cycles_per_bit_mec) << '\n'
     << "result_ratio = " << d(s.result_ratio) << '\n';
  for (int n = 0; n < s.n_bs; ++n) os << "bs." << n << " = " << d(s.bs_positions[n].x) << ' ' << d(s.bs_positions[n].y) << '\n';
  os << "# user.<m> = x y cpu_hz cycles_per_bit task_bits task_type\n";
  for (int m = 0; m < s.n_users; ++m) {
    os << "user." << m << " = " << d(s.user_positions[m].x) << ' ' << d(s.user_positions[m].y) << ' '
       << d(s.user_cpu_hz[m]) << ' ' << d(s.cycles_per_bit_user[m]) << ' ' << d(s.task_bits[m]) << ' '
       << to_string(s.task_type[m]) << '\n';
  }
  if (mode == GainStorage::Seeded) {
    os << "gains = seeded\n"
       << "gain_seed = " << gain_seed << '\n'
       << "min_distance_m = " << d(min_distance_m) << '\n';
    return;
  }
  os << "gains = explicit\n";
  for (int n = 0; n < s.n_bs; ++n) {
    for (int m = 0; m < s.n_users; ++m) {
      os << "ul_gain." << n << '.' << m << " =";
      for (int i = 0; i < s.n_ul; ++i) os << ' ' << d(s.ul_gain_at(n, m, i));
      os << "\ndl_gain." << n << '.' << m << " =";
      for (int j = 0; j < s.n_dl; ++j) os << ' ' << d(s.dl_gain_at(n, m, j));
      os << '\n';
    }
  }
}

NetworkScenario load_scenario(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("scenario: expected key = value: '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw std::invalid_argument("scenario: missing key '" + k + "'");
    return it->second;
  };
  auto real = [&](const std::string& k) { return parse_double(k, get(k)); };
  auto integer = [&](const std::string& k) { return static_cast<int>(parse_int(k, get(k))); };
  auto reals = [&](const std::string& k, std::size_t n) {
    std::vector<double> out;
    for (const auto& t : split_list(get(k))) out.push_back(parse_double(k, t));
    if (out.size() != n) throw std::invalid_argument("scenario: '" + k + "' needs " + std::to_string(n) + " values");
    return out;
  };

  NetworkScenario s;
  s.n_bs = integer("n_bs");
  s.n_users = integer("n_users");
  s.n_ul = integer("n_ul");
  s.n_dl = integer("n_dl");
  if (s.n_bs < 1 || s.n_users < 1 || s.n_ul < 0 || s.n_dl < 0) throw std::invalid_argument("scenario: bad dimensions");
  s.resize();
  s.bandwidth_hz = real("bandwidth_hz");
  s.noise_power_w = real("noise_power_w");
  s.path_loss_exp = real("path_loss_exp");
  s.p_max_ul_w = real("p_max_ul_w");
  s.p_max_dl_w = real("p_max_dl_w");
  s.n_power_levels = integer("n_power_levels");
  s.mec_cpu_hz = real("mec_cpu_hz");
  s.cycles_per_bit_mec = real("cycles_per_bit_mec");
  s.result_ratio = real("result_ratio");
  for (int n = 0; n < s.n_bs; ++n) {
    const auto xy = reals("bs." + std::to_string(n), 2);
    s.bs_positions[n] = {xy[0], xy[1]};
  }
  for (int m = 0; m < s.n_users; ++m) {
    const std::string k = "user." + std::to_string(m);
    const auto parts = split_list(get(k));
    if (parts.size() != 6) throw std::invalid_argument("scenario: '" + k + "' needs 6 fields");
    s.user_positions[m] = {parse_double(k, parts[0]), parse_double(k, parts[1])};
    s.user_cpu_hz[m] = parse_double(k, parts[2]);
    s.cycles_per_bit_user[m] = parse_double(k, parts[3]);
    s.task_bits[m] = parse_double(k, parts[4]);
    s.task_type[m] = task_type_from_string(parts[5]);
  }
  const std::string& mode = get("gains");
  if (mode == "seeded") {
    derive_gains(s, parse_u64("gain_seed", get("gain_seed")), real("min_distance_m"));
  } else if (mode == "explicit") {
    for (int n = 0; n < s.n_bs; ++n) {
      for (int m = 0; m < s.n_users; ++m) {
        const std::string tag = std::to_string(n) + "." + std::to_string(m);
        const auto ul = reals("ul_gain." + tag, s.n_ul);
        const auto dl = reals("dl_gain." + tag, s.n_dl);
        for (int i = 0; i < s.n_ul; ++i) s.ul_gain_at(n, m, i) = ul[i];
        for (int j = 0; j < s.n_dl; ++j) s.dl_gain_at(n, m, j) = dl[j];
      }
    }
  } else {
    throw std::invalid_argument("scenario: gains must be 'explicit' or 'seeded'");
  }
  s.validate();
  return s;
}

std::int64_t detect_convergence(const std::vector<double>& series, int window, double tol) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const std::size_t W = static_cast<std::size_t>(window);
  std::vector<double> prefix(series.size() + 1, 0.0);
  for (std::size_t i = 0; i < series.size(); ++i) prefix[i + 1] = prefix[i] + series[i];
  for (std::size_t k = 2 * W - 1; k < series.size(); ++k) {
    const double now = (prefix[k + 1] - prefix[k + 1 - W]) / window;
    const double before = (prefix[k + 1 - W] - prefix[k + 1 - 2 * W]) / window;
    if (std::abs(now - before) < tol * before) return static_cast<std::int64_t>(k) + 1;
  }
  return -1;
}

RunMetrics run_training(const RunConfig& cfg, const NetworkScenario& s, Algo algo, std::uint64_t seed,
                        bool keep_trace) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  MultiAgentEnv env(s, algo, cfg.agent, derive_seed(seed, {kRun}));
  const double cap = kDelayCapFactor * reward_reference(s);

  std::vector<int> collab;
  for (int m = 0; m < s.n_users; ++m)
    if (s.task_type[m] == TaskType::Collaborative) collab.push_back(m);

  RunMetrics out;
  out.algo = algo;
  out.seed = seed;
  out.iterations = cfg.budget;
  out.reference_delay = reward_reference(s);
  out.best_t_max = std::numeric_limits<double>::infinity();
  std::vector<double> capped;
  capped.reserve(cfg.budget);
  double mu_sum = 0.0;
  const std::int64_t tail_start = cfg.budget - cfg.window;

  for (std::int64_t k = 0; k < cfg.budget; ++k) {
    const StepResult r = env.step();
    capped.push_back(std::min(r.t_max, cap));
    out.best_t_max = std::min(out.best_t_max, r.t_max);
    if (keep_trace) {
      out.t_max.push_back(r.t_max);
      out.reward.push_back(r.reward);
      out.gate_rate.push_back(r.gate_rate);
    }
    if (k >= tail_start && !collab.empty()) {
      double mu = 0.0;
      for (int m : collab) mu += r.report.mu[m];
      mu_sum += mu / static_cast<double>(collab.size());
    }
  }

  out.iterations_to_converge = detect_convergence(capped, cfg.window, cfg.tolerance);
  double tail = 0.0;
  for (std::int64_t k = tail_start; k < cfg.budget; ++k) tail += capped[k];
  out.final_t_max = tail / cfg.window;
  out.final_mu = collab.empty() ? std::numeric_limits<double>::quiet_NaN() : mu_sum / cfg.window;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunMetrics run_seed(const RunConfig& cfg, Algo algo, std::uint64_t seed, bool keep_trace) {
  const NetworkScenario s = generate_scenario(cfg, seed);
  return run_training(cfg, s, algo, seed, keep_trace);
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Alpha: return "alpha";
    case SweepAxis::Gamma: return "gamma";
    case SweepAxis::Subcarriers: return "subcarriers";
    case SweepAxis::TaskBits: return "task_bits";
    case SweepAxis::Nu: return "nu";
    case SweepAxis::Users: return "users";
  }
  return "?";
}

SweepAxis axis_from_string(const std::string& s) {
  for (SweepAxis a : {SweepAxis::Alpha, SweepAxis::Gamma, SweepAxis::Subcarriers, SweepAxis::TaskBits, SweepAxis::Nu,
                      SweepAxis::Users}) {
    if (s == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

RunConfig apply_axis(RunConfig cfg, SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::Alpha: cfg.agent.alpha = v; break;
    case SweepAxis::Gamma: cfg.agent.gamma = v; break;
    case SweepAxis::Subcarriers: cfg.n_ul = cfg.n_dl = static_cast<int>(std::lround(v)); break;
    case SweepAxis::TaskBits: cfg.lambda_scale = v * 1e3 / (0.5 * (cfg.lambda_min_bits + cfg.lambda_max_bits)); break;
    case SweepAxis::Nu: cfg.result_ratio = v; break;
    case SweepAxis::Users: cfg.n_users = static_cast<int>(std::lround(v)); break;
  }
  cfg.validate();
  return cfg;
}

Summary summarize(const std::vector<double>& xs) {
  double sum = 0.0;
  int n = 0;
  for (double x : xs) {
    if (std::isnan(x)) continue;
    sum += x;
    ++n;
  }
  Summary out;
  if (n == 0) {
    out.mean = out.se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.mean = sum / n;
  if (n < 2) return out;
  double ss = 0.0;
  for (double x : xs)
    if (!std::isnan(x)) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
  return out;
}

SweepTable sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                 const std::vector<Algo>& algos) {
  cfg.validate();
  const auto seeds = cfg.seed_list();
  std::vector<RunConfig> per_value;
  for (double v : values) per_value.push_back(apply_axis(cfg, axis, v));

  const std::size_t jobs = values.size() * algos.size() * seeds.size();
  std::vector<RunMetrics> results(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      const std::size_t si = j % seeds.size();
      const std::size_t ai = (j / seeds.size()) % algos.size();
      const std::size_t vi = j / (seeds.size() * algos.size());
      results[j] = run_seed(per_value[vi], algos[ai], seeds[si], false);
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepTable table;
  table.experiment = cfg.experiment;
  table.axis = axis;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
      SweepRow row;
      row.value = values[vi];
      row.algo = algos[ai];
      std::vector<double> fin, best, iters, mu;
      int converged = 0;
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        const RunMetrics& m = results[(vi * algos.size() + ai) * seeds.size() + si];
        fin.push_back(m.final_t_max);
        best.push_back(std::min(m.best_t_max, kDelayCapFactor * m.reference_delay));
        iters.push_back(static_cast<double>(m.converged() ? m.iterations_to_converge : m.iterations));
        mu.push_back(m.final_mu);
        converged += m.converged() ? 1 : 0;
        row.per_seed.push_back(m);
      }
      row.runs = static_cast<int>(seeds.size());
      row.final_t_max = summarize(fin);
      row.best_t_max = summarize(best);
      row.iterations = summarize(iters);
      row.final_mu = summarize(mu);
      row.converged_fraction = static_cast<double>(converged) / static_cast<double>(seeds.size());
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

void write_sweep_csv(std::ostream& os, const SweepTable& t) {
  os << "experiment,axis,value,algo,runs,final_t_max_mean,final_t_max_se,best_t_max_mean,best_t_max_se,"
        "iterations_mean,iterations_se,converged_fraction,final_mu_mean,final_mu_se\n";
  for (const auto& r : t.rows) {
    os << t.experiment << ',' << to_string(t.axis) << ',' << format_double(r.value) << ',' << to_string(r.algo) << ','
       << r.runs << ',' << format_double(r.final_t_max.mean) << ',' << format_double(r.final_t_max.se) << ','
       << format_double(r.best_t_max.mean) << ',' << format_double(r.best_t_max.se) << ','
       << format_double(r.iterations.mean) << ',' << format_double(r.iterations.se) << ','
       << format_double(r.converged_fraction) << ',' << format_double(r.final_mu.mean) << ','
       << format_double(r.final_mu.se) << '\n';
  }
}

void write_sweep_dat(std::ostream& os, const SweepTable& t) {
  std::vector<Algo> order;
  for (const auto& r : t.rows)
    if (std::find(order.begin(), order.end(), r.algo) == order.end()) order.push_back(r.algo);
  bool first = true;
  for (Algo a : order) {
    if (!first) os << "\n\n";
    first = false;
    os << "# " << t.experiment << " algo=" << to_string(a) << '\n'
       << "# " << to_string(t.axis) << " final_t_max_mean final_t_max_se iterations_mean iterations_se final_mu_mean final_mu_se\n";
    for (const auto& r : t.rows) {
      if (r.algo != a) continue;
      os << format_double(r.value) << ' ' << format_double(r.final_t_max.mean) << ' '
         << format_double(r.final_t_max.se) << ' ' << format_double(r.iterations.mean) << ' '
         << format_double(r.iterations.se) << ' ' << format_double(r.final_mu.mean) << ' '
         << format_double(r.final_mu.se) << '\n';
    }
  }
}

void write_run_csv(std::ostream& os, const RunMetrics& m) {
  os << "algo,seed,iterations,iterations_to_converge,final_t_max,best_t_max,final_mu\n"
     << to_string(m.algo) << ',' << m.seed << ',' << m.iterations << ',' << m.iterations_to_converge << ','
     << format_double(m.final_t_max) << ',' << format_double(m.best_t_max) << ',' << format_double(m.final_mu)
     << '\n';
}

void write_trace_csv(std::ostream& os, const RunMetrics& m) {
  os << "iteration,t_max,reward,gate_rate\n";
  for (std::size_t k = 0; k < m.t_max.size(); ++k) {
    os << k + 1 << ',' << format_double(m.t_max[k]) << ',' << format_double(m.reward[k]) << ','
       << format_double(m.gate_rate[k]) << '\n';
  }
}

std::vector<std::string> emit_report(const std::string& dir, const std::vector<SweepTable>& tables) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& t : tables) {
    const std::string base = (std::filesystem::path(dir) / t.experiment).string();
    std::ofstream csv(base + ".csv", std::ios::binary);
    write_sweep_csv(csv, t);
    std::ofstream dat(base + ".dat", std::ios::binary);
    write_sweep_dat(dat, t);
    if (!csv || !dat) throw std::runtime_error("cannot write report files under '" + dir + "'");
    paths.push_back(base + ".csv");
    paths.push_back(base + ".dat");
  }
  return paths;
}

}  // namespace mecq
