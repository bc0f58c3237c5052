#include "mecq/task_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mecq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_user(const NetworkScenario& s, int m) {
  if (m < 0 || m >= s.n_users) throw std::out_of_range("user index out of range");
}

void expect_type(const NetworkScenario& s, int m, TaskType t) {
  check_user(s, m);
  if (s.task_type[m] != t)
    throw std::invalid_argument(std::string("user requests a ") + to_string(s.task_type[m]) + " task, not " +
                                to_string(t));
}

}  // namespace

double local_compute_time(const NetworkScenario& s, int m) {
  check_user(s, m);
  return s.cycles_per_bit_user[m] * s.task_bits[m] / s.user_cpu_hz[m];
}

namespace delay {

double edge(const NetworkScenario& s, int m, double dl_rate) {
  const double lambda = s.task_bits[m];
  if (!(dl_rate > 0.0)) return kInf;
  return s.cycles_per_bit_mec * lambda / s.mec_cpu_hz + s.result_ratio * lambda / dl_rate;
}

double local(const NetworkScenario& s, int m, double ul_rate) {
  const double lambda = s.task_bits[m];
  if (!(ul_rate > 0.0)) return kInf;
  return s.cycles_per_bit_user[m] * lambda / s.user_cpu_hz[m] + s.result_ratio * lambda / ul_rate;
}

double collaborative(const NetworkScenario& s, int m, double ul_rate, double dl_rate, double mu) {
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("task split must lie in [0, 1]");
  const double lambda = s.task_bits[m];
  const double local_branch = s.cycles_per_bit_user[m] * mu * lambda / s.user_cpu_hz[m];
  if (mu == 1.0) return local_branch;
  if (!(ul_rate > 0.0) || !(dl_rate > 0.0)) return kInf;
  const double off = (1.0 - mu) * lambda;
  const double offload_branch =
      off / ul_rate + s.cycles_per_bit_mec * off / s.mec_cpu_hz + s.result_ratio * off / dl_rate;
  return std::max(local_branch, offload_branch);
}

double offload_penalty(const NetworkScenario& s, int m, double ul_rate, double dl_rate) {
  const double fF = s.user_cpu_hz[m] * s.mec_cpu_hz;
  return fF / ul_rate + s.result_ratio * fF / dl_rate;
}

std::optional<double> optimal_mu(const NetworkScenario& s, int m, double ul_rate, double dl_rate) {
  if (!(ul_rate > 0.0) || !(dl_rate > 0.0)) return std::nullopt;
  const double a = s.cycles_per_bit_mec * s.user_cpu_hz[m] + offload_penalty(s, m, ul_rate, dl_rate);
  return a / (a + s.cycles_per_bit_user[m] * s.mec_cpu_hz);
}

double collaborative_opt(const NetworkScenario& s, int m, double ul_rate, double dl_rate) {
  if (!(ul_rate > 0.0) || !(dl_rate > 0.0)) return collaborative(s, m, ul_rate, dl_rate, 1.0);
  const double a = s.cycles_per_bit_mec * s.user_cpu_hz[m] + offload_penalty(s, m, ul_rate, dl_rate);
  const double wm = s.cycles_per_bit_user[m];
  return wm * s.task_bits[m] * a / (s.user_cpu_hz[m] * (a + wm * s.mec_cpu_hz));
}

double for_type(const NetworkScenario& s, int m, TaskType type, double ul_rate, double dl_rate) {
  switch (type) {
    case TaskType::Edge: return edge(s, m, dl_rate);
    case TaskType::Local: return local(s, m, ul_rate);
    case TaskType::Collaborative: return collaborative_opt(s, m, ul_rate, dl_rate);
  }
  throw std::invalid_argument("unknown task type");
}

}  // namespace delay

double edge_delay(const NetworkScenario& s, const GlobalAllocation& g, int n, int m) {
  expect_type(s, m, TaskType::Edge);
  return delay::edge(s, m, dl_rate(s, g, n, m));
}

double local_delay(const NetworkScenario& s, const GlobalAllocation& g, int n, int m) {
  expect_type(s, m, TaskType::Local);
  return delay::local(s, m, ul_rate(s, g, n, m));
}

double collaborative_delay(const NetworkScenario& s, const GlobalAllocation& g, int n, int m, double mu) {
  expect_type(s, m, TaskType::Collaborative);
  return delay::collaborative(s, m, ul_rate(s, g, n, m), dl_rate(s, g, n, m), mu);
}

std::optional<double> optimal_mu(const NetworkScenario& s, const GlobalAllocation& g, int n, int m) {
  expect_type(s, m, TaskType::Collaborative);
  return delay::optimal_mu(s, m, ul_rate(s, g, n, m), dl_rate(s, g, n, m));
}

double collaborative_delay_opt(const NetworkScenario& s, const GlobalAllocation& g, int n, int m) {
  expect_type(s, m, TaskType::Collaborative);
  return delay::collaborative_opt(s, m, ul_rate(s, g, n, m), dl_rate(s, g, n, m));
}

double user_delay(const NetworkScenario& s, const GlobalAllocation& g, int n, int m, TaskType type) {
  check_user(s, m);
  return delay::for_type(s, m, type, ul_rate(s, g, n, m), dl_rate(s, g, n, m));
}

DelayReport evaluate(const NetworkScenario& s, const GlobalAllocation& g, const EvaluateOptions& opts) {
  if (g.per_bs.size() != static_cast<std::size_t>(s.n_bs)) throw std::invalid_argument("one allocation per BS required");
  if (opts.fixed_mu && opts.fixed_mu->size() != static_cast<std::size_t>(s.n_users))
    throw std::invalid_argument("fixed_mu needs one entry per user");

  DelayReport r;
  r.per_user_delay.assign(s.n_users, kInf);
  r.mu.assign(s.n_users, 0.0);
  r.serving_bs.assign(s.n_users, -1);

  for (int m = 0; m < s.n_users; ++m) {
    const TaskType type = s.task_type[m];
    double best = kInf;
    double best_mu = type == TaskType::Local ? 1.0 : 0.0;
    int best_bs = -1;

    if (type == TaskType::Collaborative) {
      best_mu = opts.fixed_mu ? (*opts.fixed_mu)[m] : 1.0;
      best = delay::collaborative(s, m, 0.0, 0.0, best_mu);
    }

    for (int n = 0; n < s.n_bs; ++n) {
      if (!g.per_bs[n].serves(m)) continue;
      const double U = ul_rate(s, g, n, m);
      const double D = dl_rate(s, g, n, m);
      double t = kInf;
      double mu = best_mu;
      switch (type) {
        case TaskType::Edge: t = delay::edge(s, m, D); break;
        case TaskType::Local: t = delay::local(s, m, U); break;
        case TaskType::Collaborative:
          if (opts.fixed_mu) {
            mu = (*opts.fixed_mu)[m];
            t = delay::collaborative(s, m, U, D, mu);
          } else {
            mu = delay::optimal_mu(s, m, U, D).value_or(1.0);
            t = delay::collaborative_opt(s, m, U, D);
          }
          break;
      }
      if (best_bs < 0 ? t <= best : t < best) {
        // The first serving BS replaces the no-service fallback on ties.
        best = t;
        best_mu = mu;
        best_bs = n;
      }
    }
    r.per_user_delay[m] = best;
    r.mu[m] = best_mu;
    r.serving_bs[m] = best_bs;
  }

  r.max_delay = r.per_user_delay[0];
  r.argmax_user = 0;
  for (int m = 1; m < s.n_users; ++m) {
    if (r.per_user_delay[m] > r.max_delay) {
      r.max_delay = r.per_user_delay[m];
      r.argmax_user = m;
    }
  }
  return r;
}

}  // namespace mecq
