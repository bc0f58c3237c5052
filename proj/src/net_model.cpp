#include "mecq/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mecq {

const char* to_string(TaskType t) {
  switch (t) {
    case TaskType::Edge: return "edge";
    case TaskType::Local: return "local";
    case TaskType::Collaborative: return "collaborative";
  }
  return "?";
}

TaskType task_type_from_string(const std::string& s) {
  if (s == "edge" || s == "1") return TaskType::Edge;
  if (s == "local" || s == "2") return TaskType::Local;
  if (s == "collaborative" || s == "collab" || s == "3") return TaskType::Collaborative;
  throw std::invalid_argument("unknown task type '" + s + "'");
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

void NetworkScenario::resize() {
  bs_positions.resize(n_bs);
  user_positions.resize(n_users);
  ul_gain.resize(static_cast<std::size_t>(n_bs) * n_users * n_ul);
  dl_gain.resize(static_cast<std::size_t>(n_bs) * n_users * n_dl);
  user_cpu_hz.resize(n_users);
  cycles_per_bit_user.resize(n_users);
  task_bits.resize(n_users);
  task_type.resize(n_users, TaskType::Edge);
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid scenario: ") + what);
}

bool all_positive(const std::vector<double>& xs) {
  for (double x : xs)
    if (!(x > 0.0) || !std::isfinite(x)) return false;
  return true;
}

}  // namespace

void NetworkScenario::validate() const {
  require(n_bs >= 1, "n_bs must be >= 1");
  require(n_users >= 1, "n_users must be >= 1");
  require(n_ul >= 0 && n_dl >= 0, "subcarrier counts must be >= 0");
  require(bandwidth_hz > 0.0, "bandwidth must be positive");
  require(noise_power_w > 0.0, "noise power must be positive");
  require(path_loss_exp > 0.0, "path loss exponent must be positive");
  require(bs_positions.size() == static_cast<std::size_t>(n_bs), "bs_positions size");
  require(user_positions.size() == static_cast<std::size_t>(n_users), "user_positions size");
  require(ul_gain.size() == static_cast<std::size_t>(n_bs) * n_users * n_ul, "ul_gain must be N x M x I");
  require(dl_gain.size() == static_cast<std::size_t>(n_bs) * n_users * n_dl, "dl_gain must be N x M x J");
  require(all_positive(ul_gain) && all_positive(dl_gain), "channel gains must be positive");
  require(p_max_ul_w > 0.0 && p_max_dl_w > 0.0, "power budgets must be positive");
  require(n_power_levels >= 1, "n_power_levels must be >= 1");
  require(mec_cpu_hz > 0.0 && cycles_per_bit_mec > 0.0, "MEC constants must be positive");
  require(user_cpu_hz.size() == static_cast<std::size_t>(n_users) && all_positive(user_cpu_hz),
          "user_cpu_hz must be positive per user");
  require(cycles_per_bit_user.size() == static_cast<std::size_t>(n_users) && all_positive(cycles_per_bit_user),
          "cycles_per_bit_user must be positive per user");
  require(task_bits.size() == static_cast<std::size_t>(n_users) && all_positive(task_bits),
          "task_bits must be positive per user");
  require(result_ratio > 0.0 && result_ratio <= 1.0, "result_ratio must lie in (0, 1]");
  require(task_type.size() == static_cast<std::size_t>(n_users), "task_type size");
}

Allocation::Allocation(int users_, int n_ul_, int n_dl_)
    : users(users_),
      n_ul(n_ul_),
      n_dl(n_dl_),
      u(static_cast<std::size_t>(users_) * n_ul_, 0),
      d(static_cast<std::size_t>(users_) * n_dl_, 0),
      v(static_cast<std::size_t>(users_) * n_ul_, 0.0),
      w(static_cast<std::size_t>(users_) * n_dl_, 0.0) {}

void Allocation::assign_ul(int m, int i, double power_w) {
  const auto k = static_cast<std::size_t>(m) * n_ul + i;
  u.at(k) = 1;
  v.at(k) = power_w;
}

void Allocation::assign_dl(int m, int j, double power_w) {
  const auto k = static_cast<std::size_t>(m) * n_dl + j;
  d.at(k) = 1;
  w.at(k) = power_w;
}

void Allocation::release_ul(int m, int i) {
  const auto k = static_cast<std::size_t>(m) * n_ul + i;
  u.at(k) = 0;
  v.at(k) = 0.0;
}

void Allocation::release_dl(int m, int j) {
  const auto k = static_cast<std::size_t>(m) * n_dl + j;
  d.at(k) = 0;
  w.at(k) = 0.0;
}

int Allocation::ul_count(int m) const {
  int c = 0;
  for (int i = 0; i < n_ul; ++i) c += ul_on(m, i) ? 1 : 0;
  return c;
}

int Allocation::dl_count(int m) const {
  int c = 0;
  for (int j = 0; j < n_dl; ++j) c += dl_on(m, j) ? 1 : 0;
  return c;
}

bool Allocation::serves(int m) const { return ul_count(m) > 0 || dl_count(m) > 0; }

double Allocation::ul_power_total() const {
  double t = 0.0;
  for (double x : v) t += x;
  return t;
}

double Allocation::dl_power_total() const {
  double t = 0.0;
  for (double x : w) t += x;
  return t;
}

GlobalAllocation GlobalAllocation::idle(const NetworkScenario& s) {
  GlobalAllocation g;
  g.per_bs.assign(s.n_bs, Allocation(s.n_users, s.n_ul, s.n_dl));
  return g;
}

namespace {

constexpr double kPowerTol = 1e-9;

bool on_level_grid(double p, double p_max, int levels) {
  const double step = p_max / levels;
  const double q = p / step;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
}

std::string at(const char* what, int m, int k) {
  std::ostringstream os;
  os << what << " (user " << m << ", subcarrier " << k << ")";
  return os.str();
}

}  // namespace

std::optional<std::string> check_allocation(const NetworkScenario& s, const Allocation& a, bool require_quantized) {
  if (a.users != s.n_users || a.n_ul != s.n_ul || a.n_dl != s.n_dl) return "allocation dimensions do not match scenario";
  for (int m = 0; m < a.users; ++m) {
    for (int i = 0; i < a.n_ul; ++i) {
      const double p = a.ul_power(m, i);
      if (p < 0.0 || !std::isfinite(p)) return at("negative or non-finite uplink power", m, i);
      if (p > 0.0 && !a.ul_on(m, i)) return at("uplink power on unallocated subcarrier", m, i);
      if (require_quantized && !on_level_grid(p, s.p_max_ul_w, s.n_power_levels))
        return at("uplink power off the level grid", m, i);
    }
    for (int j = 0; j < a.n_dl; ++j) {
      const double p = a.dl_power(m, j);
      if (p < 0.0 || !std::isfinite(p)) return at("negative or non-finite downlink power", m, j);
      if (p > 0.0 && !a.dl_on(m, j)) return at("downlink power on unallocated subcarrier", m, j);
      if (require_quantized && !on_level_grid(p, s.p_max_dl_w, s.n_power_levels))
        return at("downlink power off the level grid", m, j);
    }
  }
  for (int i = 0; i < a.n_ul; ++i) {
    int owners = 0;
    for (int m = 0; m < a.users; ++m) owners += a.ul_on(m, i) ? 1 : 0;
    if (owners > 1) return at("uplink subcarrier shared by several users", -1, i);
  }
  for (int j = 0; j < a.n_dl; ++j) {
    int owners = 0;
    for (int m = 0; m < a.users; ++m) owners += a.dl_on(m, j) ? 1 : 0;
    if (owners > 1) return at("downlink subcarrier shared by several users", -1, j);
  }
  if (a.ul_power_total() > s.p_max_ul_w * (1.0 + kPowerTol)) return std::string("uplink power budget exceeded");
  if (a.dl_power_total() > s.p_max_dl_w * (1.0 + kPowerTol)) return std::string("downlink power budget exceeded");
  return std::nullopt;
}

std::optional<std::string> check_global(const NetworkScenario& s, const GlobalAllocation& g, bool require_quantized) {
  if (g.per_bs.size() != static_cast<std::size_t>(s.n_bs)) return "one allocation per BS required";
  for (int n = 0; n < s.n_bs; ++n) {
    if (auto why = check_allocation(s, g.per_bs[n], require_quantized)) return "BS " + std::to_string(n) + ": " + *why;
  }
  for (int m = 0; m < s.n_users; ++m) {
    for (int i = 0; i < s.n_ul; ++i) {
      int holders = 0;
      for (int n = 0; n < s.n_bs; ++n) holders += g.per_bs[n].ul_on(m, i) ? 1 : 0;
      if (holders > 1) return at("user holds an uplink subcarrier at several BSs", m, i);
    }
    for (int j = 0; j < s.n_dl; ++j) {
      int holders = 0;
      for (int n = 0; n < s.n_bs; ++n) holders += g.per_bs[n].dl_on(m, j) ? 1 : 0;
      if (holders > 1) return at("user holds a downlink subcarrier at several BSs", m, j);
    }
  }
  return std::nullopt;
}

GlobalAllocation resolve_conflicts(const GlobalAllocation& g) {
  GlobalAllocation out = g;
  if (out.per_bs.empty()) return out;
  const int users = out.per_bs.front().users;
  const int n_ul = out.per_bs.front().n_ul;
  const int n_dl = out.per_bs.front().n_dl;
  for (int m = 0; m < users; ++m) {
    for (int i = 0; i < n_ul; ++i) {
      bool taken = false;
      for (auto& a : out.per_bs) {
        if (!a.ul_on(m, i)) continue;
        if (taken) a.release_ul(m, i);
        taken = true;
      }
    }
    for (int j = 0; j < n_dl; ++j) {
      bool taken = false;
      for (auto& a : out.per_bs) {
        if (!a.dl_on(m, j)) continue;
        if (taken) a.release_dl(m, j);
        taken = true;
      }
    }
  }
  return out;
}

namespace {

void check_indices(const NetworkScenario& s, const GlobalAllocation& g, int n, int m) {
  if (n < 0 || n >= s.n_bs) throw std::out_of_range("BS index out of range");
  if (m < 0 || m >= s.n_users) throw std::out_of_range("user index out of range");
  if (g.per_bs.size() != static_cast<std::size_t>(s.n_bs)) throw std::invalid_argument("allocation/BS count mismatch");
}

}  // namespace

double ul_rate_subcarrier(const NetworkScenario& s, const GlobalAllocation& g, int n, int m, int i) {
  check_indices(s, g, n, m);
  if (i < 0 || i >= s.n_ul) throw std::out_of_range("uplink subcarrier index out of range");
  const Allocation& a = g.per_bs[n];
  if (!a.ul_on(m, i)) return 0.0;
  double interference = 0.0;
  for (int p = 0; p < s.n_users; ++p) {
    if (p == m || !a.ul_on(p, i)) continue;
    interference += a.ul_power(p, i) * s.ul_gain_at(n, p, i);
  }
  const double sinr = a.ul_power(m, i) * s.ul_gain_at(n, m, i) / (s.noise_power_w + interference);
  return s.bandwidth_hz * std::log2(1.0 + sinr);
}

double dl_rate_subcarrier(const NetworkScenario& s, const GlobalAllocation& g, int n, int m, int j) {
  check_indices(s, g, n, m);
  if (j < 0 || j >= s.n_dl) throw std::out_of_range("downlink subcarrier index out of range");
  const Allocation& a = g.per_bs[n];
  if (!a.dl_on(m, j)) return 0.0;
  double interference = 0.0;
  for (int p = 0; p < s.n_bs; ++p) {
    if (p == n || !g.per_bs[p].dl_on(m, j)) continue;
    interference += g.per_bs[p].dl_power(m, j) * s.dl_gain_at(p, m, j);
  }
  const double sinr = a.dl_power(m, j) * s.dl_gain_at(n, m, j) / (s.noise_power_w + interference);
  return s.bandwidth_hz * std::log2(1.0 + sinr);
}

double ul_rate(const NetworkScenario& s, const GlobalAllocation& g, int n, int m) {
  check_indices(s, g, n, m);
  double total = 0.0;
  for (int i = 0; i < s.n_ul; ++i) total += ul_rate_subcarrier(s, g, n, m, i);
  return total;
}

double dl_rate(const NetworkScenario& s, const GlobalAllocation& g, int n, int m) {
  check_indices(s, g, n, m);
  double total = 0.0;
  for (int j = 0; j < s.n_dl; ++j) total += dl_rate_subcarrier(s, g, n, m, j);
  return total;
}

}  // namespace mecq
