#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mecq/action_space.hpp"
#include "mecq/gain_analysis.hpp"
#include "mecq/harness.hpp"

namespace mecq {

struct CheckRow {
  std::string scenario_id;
  std::string equation;
  double formula = 0.0;
  double direct = 0.0;
  double rel_error = 0.0;
};

// |formula - direct| / |direct|; 0 when both are 0, +inf when only direct is 0.
double relative_error(double formula, double direct);

// CSV columns: scenario_id,equation,formula,direct,rel_error
void write_check_csv(std::ostream& os, const std::vector<CheckRow>& rows);

// One user's resources at one BS, plus a change to them. The user holds
// subcarriers on both links; every other user is idle.
struct GainCase {
  NetworkScenario s;
  GlobalAllocation g;
  GainQuery q;
};

// Draws a case from generate_scenario(cfg, seed). Subcarrier knobs get c >= 1
// current and 1..(width - c) added subcarriers; power knobs raise the level of
// a random subset of the held subcarriers. With equal_rates the user's gains at
// the BS are flattened per link and every held or added subcarrier on the
// knob's link uses one power level, so all per-subcarrier rates coincide.
GainCase sample_gain_case(const RunConfig& cfg, std::uint64_t seed, TaskType type, Knob knob, bool equal_rates);

// Closed-form split and delay against a 1e-4 grid search and the direct
// two-branch delay. Rows "split/mu" and "split/delay".
std::vector<CheckRow> verify_split(const RunConfig& cfg, int count, std::uint64_t seed);

// Closed-form gains against finite differences for every non-null
// (task, knob) pair; subcarrier knobs are sampled with equal rates. Also emits
// the as-printed collaborative uplink-subcarrier variant.
std::vector<CheckRow> verify_gains(const RunConfig& cfg, int count, std::uint64_t seed);

// Action counts for every dims tuple with users <= max_users, subcarriers per
// link <= max_subcarriers and levels <= max_levels. Rows "count/budgeted"
// (formula vs enumeration) and "count/verbatim" (per-subcarrier power factor,
// all subcarriers allocated, mu factor with every user collaborative).
std::vector<CheckRow> verify_counts(int max_users, int max_subcarriers, int max_levels);

// Exhaustive optimum against the multi-stack learner's best visited delay on
// tiny scenarios drawn from cfg.
std::vector<CheckRow> verify_oracle(const RunConfig& cfg, int count, std::uint64_t seed);

std::string dims_label(const ActionDims& d);

}  // namespace mecq
