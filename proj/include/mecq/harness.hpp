#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mecq/learner.hpp"
#include "mecq/net_model.hpp"

namespace mecq {

struct RunConfig {
  int n_bs = 3;
  int n_users = 6;
  int n_ul = 9;
  int n_dl = 9;
  int n_power_levels = 10;

  double bandwidth_hz = 3e6;
  double noise_dbm = -95.0;
  double path_loss_exp = 2.0;
  double p_max_ul_w = 0.5;
  double p_max_dl_w = 1.0;
  double mec_cpu_hz = 100e9;
  double user_cpu_hz = 0.5e9;
  double cycles_per_bit_user = 1500.0;
  double omega_min = 1000.0;  // MEC cycles per bit, drawn once per scenario
  double omega_max = 2000.0;
  double lambda_min_bits = 100e3;
  double lambda_max_bits = 400e3;
  double lambda_scale = 1.0;
  double result_ratio = 1.0;
  double radius_m = 100.0;
  double min_distance_m = 1.0;  // path loss is evaluated at no less than this range
  std::vector<TaskType> task_types;  // empty: uniform over the three classes

  AgentConfig agent;

  std::uint64_t seed = 1;  // first seed
  int seeds = 50;
  std::int64_t budget = 20000;
  int window = 200;
  double tolerance = 0.005;
  int threads = 0;
  std::string experiment = "run";

  // Desk-scale dims for learning experiments: N=2, M=4, I=J=3, N_a=2.
  static RunConfig desk();

  std::vector<std::uint64_t> seed_list() const;
  void validate() const;  // std::invalid_argument naming the broken field

  // Applies one key=value override. Table symbols (N, M, I, J, N_a, W, P_U,
  // P_B, F, f_m, omega_m, nu, B, G, ...) are accepted as aliases.
  void set(const std::string& key, const std::string& value);
  std::string to_text() const;
};

// Parses "key = value" lines; '#' starts a comment. Unknown keys throw.
RunConfig parse_config(std::istream& is, RunConfig base = RunConfig::desk());
RunConfig load_config(const std::string& path, RunConfig base = RunConfig::desk());

NetworkScenario generate_scenario(const RunConfig& cfg, std::uint64_t seed);

// Fills ul_gain/dl_gain from the positions: Exp(1) Rayleigh power times
// max(r, min_distance)^-delta, each entry on its own keyed stream of gain_seed.
void derive_gains(NetworkScenario& s, std::uint64_t gain_seed, double min_distance_m = 1.0);

// Scenario text format: "key = value" lines; lists are space separated.
// Explicit mode embeds every gain; seeded mode embeds positions and the gain
// seed and re-derives the gains on load.
enum class GainStorage { Explicit, Seeded };
void save_scenario(std::ostream& os, const NetworkScenario& s, GainStorage mode = GainStorage::Explicit,
                   std::uint64_t gain_seed = 0, double min_distance_m = 1.0);
NetworkScenario load_scenario(std::istream& is);

struct RunMetrics {
  Algo algo = Algo::MultiStack;
  std::uint64_t seed = 0;
  std::vector<double> t_max;
  std::vector<double> reward;
  std::vector<double> gate_rate;
  std::int64_t iterations = 0;
  std::int64_t iterations_to_converge = -1;  // -1: not converged within the budget
  double final_t_max = 0.0;  // mean capped t_max over the last window
  double best_t_max = 0.0;   // smallest t_max visited
  double final_mu = 0.0;     // mean split of collaborative users over the last window (NaN if none)
  double reference_delay = 0.0;  // reward reference of the scenario
  double wall_seconds = 0.0;

  bool converged() const { return iterations_to_converge >= 0; }
};

// Infinite delays are capped at this multiple of the reward reference when
// averaging.
constexpr double kDelayCapFactor = 2.0;

// Iteration count k + 1 at the first index k >= 2W - 1 where the W-average
// ending at k differs by less than tol (relative) from the W-average ending at
// k - W; -1 when that never happens.
std::int64_t detect_convergence(const std::vector<double>& series, int window, double tol);

// keep_trace = false drops the per-iteration series (sweeps keep only summaries).
RunMetrics run_training(const RunConfig& cfg, const NetworkScenario& s, Algo algo, std::uint64_t seed,
                        bool keep_trace = true);

// Same seed, same scenario: generate_scenario(cfg, seed) then run_training.
RunMetrics run_seed(const RunConfig& cfg, Algo algo, std::uint64_t seed, bool keep_trace = true);

enum class SweepAxis { Alpha, Gamma, Subcarriers, TaskBits, Nu, Users };
const char* to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

// cfg with the axis set to v. TaskBits takes the mean task size in kbits.
RunConfig apply_axis(RunConfig cfg, SweepAxis axis, double v);

struct Summary {
  double mean = 0.0;
  double se = 0.0;
};
// Mean and standard error of the non-NaN entries.
Summary summarize(const std::vector<double>& xs);

struct SweepRow {
  double value = 0.0;
  Algo algo = Algo::MultiStack;
  int runs = 0;
  Summary final_t_max;
  Summary best_t_max;
  Summary iterations;  // non-converged runs count as the full budget
  double converged_fraction = 0.0;
  Summary final_mu;
  std::vector<RunMetrics> per_seed;  // seed order
};

struct SweepTable {
  std::string experiment;
  SweepAxis axis = SweepAxis::Subcarriers;
  std::vector<SweepRow> rows;  // value-major, then algo in the order given
};

// Every (value, algo, seed) run goes to a worker pool; results are reduced in
// seed order, so the table does not depend on the worker count.
SweepTable sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                 const std::vector<Algo>& algos);

// CSV columns: experiment,axis,value,algo,runs,final_t_max_mean,final_t_max_se,
// best_t_max_mean,best_t_max_se,iterations_mean,iterations_se,converged_fraction,
// final_mu_mean,final_mu_se
void write_sweep_csv(std::ostream& os, const SweepTable& t);

// Whitespace-separated blocks, one per algorithm, separated by two blank lines.
void write_sweep_dat(std::ostream& os, const SweepTable& t);

// One summary row per run: algo,seed,iterations,iterations_to_converge,
// final_t_max,best_t_max,final_mu
void write_run_csv(std::ostream& os, const RunMetrics& m);
void write_trace_csv(std::ostream& os, const RunMetrics& m);

// Writes <dir>/<experiment>.csv and <dir>/<experiment>.dat; returns the paths.
std::vector<std::string> emit_report(const std::string& dir, const std::vector<SweepTable>& tables);

// printf-style %.<digits>g, with "inf"/"-inf"/"nan" spelled out.
std::string format_double(double x, int digits = 9);

}  // namespace mecq
