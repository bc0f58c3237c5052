#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mecq/net_model.hpp"

namespace mecq {

enum class Knob { DlSubcarriers, UlSubcarriers, DlPower, UlPower };

const char* to_string(Knob k);
Knob knob_from_string(const std::string& s);

inline bool is_downlink(Knob k) { return k == Knob::DlSubcarriers || k == Knob::DlPower; }
inline bool is_subcarrier_knob(Knob k) { return k == Knob::DlSubcarriers || k == Knob::UlSubcarriers; }

// Which closed-form branch applies. Subcarrier knobs pick one of three by the
// ratio of added to current subcarrier counts (factor 10); power knobs have one.
enum class Regime { MuchMore, MuchFewer, General, Single };

const char* to_string(Regime r);

struct SubcarrierGrant {
  int index = 0;
  double power_w = 0.0;
};

// A change to user `user`'s resources at BS `bs`, scored as if the user
// requested `task_type`.
struct GainQuery {
  int user = 0;
  int bs = 0;
  TaskType task_type = TaskType::Edge;
  Knob knob = Knob::DlSubcarriers;
  std::vector<SubcarrierGrant> added;   // subcarrier knobs: newly granted subcarriers
  std::vector<double> power_increment;  // power knobs: per subcarrier of the link (size I or J)

  bool empty() const;
};

// Reason the query cannot be applied, or nullopt. The resulting allocation must
// stay feasible (power grid not enforced).
std::optional<std::string> validate(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q);

// The allocation after the change. Throws std::invalid_argument when invalid.
GlobalAllocation apply(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q);

Regime regime_of(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q);

// True for the (task, knob) pairs whose gain is identically zero: edge tasks
// with uplink knobs and local tasks with downlink knobs.
bool is_null_pair(TaskType t, Knob k);

// Closed-form delay reduction. Subcarrier terms use the count reading: with c
// current and a added subcarriers and per-subcarrier rate r = R/c, the general
// branch is a / (c (c + a) r). Collaborative gains use the split approximation
// mu ~ Y / (Y + omega_m F). Needs a positive current rate on every link the
// task uses (std::invalid_argument otherwise).
double gain_formula(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q);

// Collaborative uplink-subcarrier gain exactly as typeset: downlink counts and
// rate symbols in place of the uplink ones, with no downlink change, so only
// the "much more" branch is nonzero.
double gain_formula_as_printed(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q);

// Finite difference t(before) - t(after) from the delay model at BS q.bs.
double gain_direct(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q);

// Label of the form "<task>/<knob>/<regime>".
std::string formula_label(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q);

struct OrderingVerdict {
  Knob knob = Knob::DlSubcarriers;
  double gain_edge = 0.0;
  double gain_local = 0.0;
  double gain_collaborative = 0.0;
  bool lower_holds = false;  // null-side gain < collaborative gain
  bool upper_holds = false;  // collaborative gain < favored-side gain

  bool holds() const { return lower_holds && upper_holds; }
};

// Direct gains of the same change under each task class, checked against the
// strict ordering local < collaborative < edge for downlink knobs and
// edge < collaborative < local for uplink knobs. q.task_type is ignored.
OrderingVerdict corollary1_check(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q);

}  // namespace mecq
