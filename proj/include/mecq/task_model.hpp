#pragma once

#include <optional>
#include <vector>

#include "mecq/net_model.hpp"

namespace mecq {

// Per-user delays for one joint allocation. Unreachable users carry +inf.
struct DelayReport {
  std::vector<double> per_user_delay;
  double max_delay = 0.0;
  int argmax_user = 0;  // smallest index attaining max_delay
  std::vector<double> mu;  // local share; 0 for edge, 1 for local tasks
  std::vector<int> serving_bs;  // -1 when no BS allocates anything to the user
};

// Delay formulas written against the link rates directly. A zero rate on a
// link the task needs yields +inf.
namespace delay {

double edge(const NetworkScenario& s, int m, double dl_rate);
double local(const NetworkScenario& s, int m, double ul_rate);
double collaborative(const NetworkScenario& s, int m, double ul_rate, double dl_rate, double mu);

// Closed-form split that balances the local and offload pipelines. Empty when
// either link rate is zero (offloading impossible; callers fall back to mu = 1).
std::optional<double> optimal_mu(const NetworkScenario& s, int m, double ul_rate, double dl_rate);

// Collaborative delay at the optimal split; local-only time when offloading is impossible.
double collaborative_opt(const NetworkScenario& s, int m, double ul_rate, double dl_rate);

// The "Y" term: f_m F / U + f_m nu F / D.
double offload_penalty(const NetworkScenario& s, int m, double ul_rate, double dl_rate);

// Delay for a hypothetical task class with the collaborative split optimized.
double for_type(const NetworkScenario& s, int m, TaskType type, double ul_rate, double dl_rate);

}  // namespace delay

// The same formulas evaluated against BS n's allocation in g. Each checks that
// user m actually requests the matching task class (std::invalid_argument).
double edge_delay(const NetworkScenario& s, const GlobalAllocation& g, int n, int m);
double local_delay(const NetworkScenario& s, const GlobalAllocation& g, int n, int m);
double collaborative_delay(const NetworkScenario& s, const GlobalAllocation& g, int n, int m, double mu);
std::optional<double> optimal_mu(const NetworkScenario& s, const GlobalAllocation& g, int n, int m);
double collaborative_delay_opt(const NetworkScenario& s, const GlobalAllocation& g, int n, int m);

// Delay of user m served by BS n, as if it requested `type`.
double user_delay(const NetworkScenario& s, const GlobalAllocation& g, int n, int m, TaskType type);

// Local-only compute time omega_m * lambda_m / f_m.
double local_compute_time(const NetworkScenario& s, int m);

struct EvaluateOptions {
  // When set, collaborative users use these splits instead of the optimal one.
  std::optional<std::vector<double>> fixed_mu;
};

// Scores a joint allocation. Each user is served by the BS (among those that
// allocate it any subcarrier) giving it the smallest delay, lowest index on
// ties. Collaborative users with no usable offload path compute locally.
DelayReport evaluate(const NetworkScenario& s, const GlobalAllocation& g, const EvaluateOptions& opts = {});

}  // namespace mecq
