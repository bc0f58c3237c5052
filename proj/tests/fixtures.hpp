#pragma once

#include "mecq/net_model.hpp"

namespace mecq::testing {

// Unit constants: W = 1 Hz, noise 1 W, every gain 1, every user at the origin.
inline NetworkScenario unit_scenario(int n_bs, int users, int n_ul, int n_dl, int levels = 1) {
  NetworkScenario s;
  s.n_bs = n_bs;
  s.n_users = users;
  s.n_ul = n_ul;
  s.n_dl = n_dl;
  s.n_power_levels = levels;
  s.bandwidth_hz = 1.0;
  s.noise_power_w = 1.0;
  s.p_max_ul_w = 1.0;
  s.p_max_dl_w = 1.0;
  s.resize();
  for (auto& g : s.ul_gain) g = 1.0;
  for (auto& g : s.dl_gain) g = 1.0;
  for (int m = 0; m < users; ++m) {
    s.user_cpu_hz[m] = 5e8;
    s.cycles_per_bit_user[m] = 1500.0;
    s.task_bits[m] = 1e5;
    s.task_type[m] = TaskType::Edge;
  }
  for (int n = 0; n < n_bs; ++n) s.bs_positions[n] = {10.0 * n, 0.0};
  s.mec_cpu_hz = 1e11;
  s.cycles_per_bit_mec = 1500.0;
  s.result_ratio = 1.0;
  return s;
}

}  // namespace mecq::testing
