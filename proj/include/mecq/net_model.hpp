#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mecq {

enum class TaskType : int { Edge = 1, Local = 2, Collaborative = 3 };

const char* to_string(TaskType t);
TaskType task_type_from_string(const std::string& s);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

// Converts a power level in dBm to watts.
double dbm_to_watts(double dbm);

// Static world for one episode: topology, channel power gains, task requests
// and every physical constant. Gains are |h|^2, i.e. Rayleigh power times
// r^-delta, indexed [bs][user][subcarrier].
struct NetworkScenario {
  int n_bs = 0;
  int n_users = 0;
  int n_ul = 0;  // uplink subcarriers I
  int n_dl = 0;  // downlink subcarriers J

  double bandwidth_hz = 3e6;
  double noise_power_w = 0.0;
  double path_loss_exp = 2.0;

  std::vector<Point> bs_positions;
  std::vector<Point> user_positions;

  std::vector<double> ul_gain;  // n_bs * n_users * n_ul
  std::vector<double> dl_gain;  // n_bs * n_users * n_dl

  double p_max_ul_w = 0.5;
  double p_max_dl_w = 1.0;
  int n_power_levels = 10;

  double mec_cpu_hz = 100e9;
  std::vector<double> user_cpu_hz;
  double cycles_per_bit_mec = 1500.0;
  std::vector<double> cycles_per_bit_user;
  std::vector<double> task_bits;
  double result_ratio = 1.0;
  std::vector<TaskType> task_type;

  double ul_gain_at(int n, int m, int i) const { return ul_gain[(static_cast<std::size_t>(n) * n_users + m) * n_ul + i]; }
  double dl_gain_at(int n, int m, int j) const { return dl_gain[(static_cast<std::size_t>(n) * n_users + m) * n_dl + j]; }
  double& ul_gain_at(int n, int m, int i) { return ul_gain[(static_cast<std::size_t>(n) * n_users + m) * n_ul + i]; }
  double& dl_gain_at(int n, int m, int j) { return dl_gain[(static_cast<std::size_t>(n) * n_users + m) * n_dl + j]; }

  // Resizes every per-entity array to the current dimensions.
  void resize();

  // Throws std::invalid_argument naming the first broken invariant.
  void validate() const;
};

// One BS's joint action. Indicator and power matrices are row-major
// [user][subcarrier].
struct Allocation {
  int users = 0;
  int n_ul = 0;
  int n_dl = 0;
  std::vector<std::uint8_t> u;
  std::vector<std::uint8_t> d;
  std::vector<double> v;
  std::vector<double> w;

  Allocation() = default;
  Allocation(int users_, int n_ul_, int n_dl_);

  bool ul_on(int m, int i) const { return u[static_cast<std::size_t>(m) * n_ul + i] != 0; }
  bool dl_on(int m, int j) const { return d[static_cast<std::size_t>(m) * n_dl + j] != 0; }
  double ul_power(int m, int i) const { return v[static_cast<std::size_t>(m) * n_ul + i]; }
  double dl_power(int m, int j) const { return w[static_cast<std::size_t>(m) * n_dl + j]; }

  void assign_ul(int m, int i, double power_w);
  void assign_dl(int m, int j, double power_w);
  void release_ul(int m, int i);
  void release_dl(int m, int j);

  int ul_count(int m) const;
  int dl_count(int m) const;
  bool serves(int m) const;
  double ul_power_total() const;
  double dl_power_total() const;

  bool operator==(const Allocation&) const = default;
};

struct GlobalAllocation {
  std::vector<Allocation> per_bs;

  static GlobalAllocation idle(const NetworkScenario& s);
  bool operator==(const GlobalAllocation&) const = default;
};

// Per-BS constraints: indicator/power coupling, per-subcarrier exclusivity,
// power budgets and (optionally) the N_a-level power grid. Returns the reason
// for the first violation, or nullopt when feasible.
std::optional<std::string> check_allocation(const NetworkScenario& s, const Allocation& a,
                                            bool require_quantized = true);

// Per-BS checks for every BS plus the cross-BS rule that a user holds a given
// subcarrier at no more than one BS.
std::optional<std::string> check_global(const NetworkScenario& s, const GlobalAllocation& g,
                                        bool require_quantized = true);

// Enforces the cross-BS rule by letting the lowest BS index keep a contested
// (user, subcarrier) pair; the other claims are dropped together with their power.
GlobalAllocation resolve_conflicts(const GlobalAllocation& g);

// Shannon rates. Feasibility of `g` is the caller's contract; interference
// terms are evaluated exactly as written so infeasible trial allocations can
// still be scored. Indices are range-checked (std::out_of_range).
double ul_rate_subcarrier(const NetworkScenario& s, const GlobalAllocation& g, int n, int m, int i);
double dl_rate_subcarrier(const NetworkScenario& s, const GlobalAllocation& g, int n, int m, int j);
double ul_rate(const NetworkScenario& s, const GlobalAllocation& g, int n, int m);
double dl_rate(const NetworkScenario& s, const GlobalAllocation& g, int n, int m);

}  // namespace mecq
