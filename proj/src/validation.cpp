#include "mecq/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "mecq/oracle.hpp"
#include "mecq/rng.hpp"
#include "mecq/task_model.hpp"

namespace mecq {

double relative_error(double formula, double direct) {
  if (formula == direct) return 0.0;
  if (direct == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(formula - direct) / std::abs(direct);
}

void write_check_csv(std::ostream& os, const std::vector<CheckRow>& rows) {
  os << "scenario_id,equation,formula,direct,rel_error\n";
  for (const auto& r : rows) {
    os << r.scenario_id << ',' << r.equation << ',' << format_double(r.formula, 12) << ','
       << format_double(r.direct, 12) << ',' << format_double(r.rel_error, 6) << '\n';
  }
}

namespace {

std::vector<int> pick(Rng& r, int width, int k) {
  std::vector<int> idx(width);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + r.below_int(width - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> levels(Rng& r, int k, int budget) {
  return level_vector_unrank(r.below(level_vector_count(k, budget)), k, budget);
}

}  // namespace

GainCase sample_gain_case(const RunConfig& cfg, std::uint64_t seed, TaskType type, Knob knob, bool equal_rates) {
  GainCase c;
  c.s = generate_scenario(cfg, seed);
  NetworkScenario& s = c.s;
  Rng r(derive_seed(seed, {0x6a1f, static_cast<std::uint64_t>(type), static_cast<std::uint64_t>(knob)}));
  const int n = r.below_int(s.n_bs);
  const int m = r.below_int(s.n_users);
  const int Na = s.n_power_levels;
  s.task_type[m] = type;
  if (equal_rates) {
    for (int i = 1; i < s.n_ul; ++i) s.ul_gain_at(n, m, i) = s.ul_gain_at(n, m, 0);
    for (int j = 1; j < s.n_dl; ++j) s.dl_gain_at(n, m, j) = s.dl_gain_at(n, m, 0);
  }

  c.g = GlobalAllocation::idle(s);
  Allocation& a = c.g.per_bs[n];
  c.q.user = m;
  c.q.bs = n;
  c.q.task_type = type;
  c.q.knob = knob;

  for (bool dl : {true, false}) {
    const int width = dl ? s.n_dl : s.n_ul;
    const double step = (dl ? s.p_max_dl_w : s.p_max_ul_w) / Na;
    auto hold = [&](int k, double p) {
      if (dl) a.assign_dl(m, k, p);
      else a.assign_ul(m, k, p);
    };
    if (width < 1) throw std::invalid_argument("gain cases need subcarriers on both links");

    if (is_downlink(knob) != dl) {
      const int cur = 1 + r.below_int(std::min(width, Na));
      const auto chosen = pick(r, width, cur);
      const auto lv = equal_rates ? std::vector<int>(cur, 1 + r.below_int(Na / cur)) : levels(r, cur, Na);
      for (int t = 0; t < cur; ++t) hold(chosen[t], lv[t] * step);
      continue;
    }
    if (Na < 2) throw std::invalid_argument("gain cases need at least two power levels");

    if (is_subcarrier_knob(knob)) {
      if (width < 2) throw std::invalid_argument("subcarrier gain cases need two subcarriers on the link");
      const int cur = 1 + r.below_int(std::min(width - 1, Na - 1));
      const int add = 1 + r.below_int(std::min(width - cur, Na - cur));
      const auto chosen = pick(r, width, cur + add);
      const auto lv =
          equal_rates ? std::vector<int>(cur + add, 1 + r.below_int(Na / (cur + add))) : levels(r, cur + add, Na);
      // Shuffle which of the chosen subcarriers are already held.
      std::vector<int> order(cur + add);
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < cur + add; ++i) std::swap(order[i], order[i + r.below_int(cur + add - i)]);
      for (int t = 0; t < cur; ++t) hold(chosen[order[t]], lv[t] * step);
      for (int t = cur; t < cur + add; ++t) c.q.added.push_back({chosen[order[t]], lv[t] * step});
    } else {
      const int cur = 1 + r.below_int(std::min(width, Na - 1));
      const auto chosen = pick(r, width, cur);
      const auto lv = levels(r, cur, Na - 1);
      for (int t = 0; t < cur; ++t) hold(chosen[t], lv[t] * step);
      const int spare = Na - std::accumulate(lv.begin(), lv.end(), 0);
      const int k = 1 + r.below_int(std::min(cur, spare));
      const auto which = pick(r, cur, k);
      const auto inc = levels(r, k, spare);
      c.q.power_increment.assign(width, 0.0);
      for (int t = 0; t < k; ++t) c.q.power_increment[chosen[which[t]]] = inc[t] * step;
    }
  }
  if (auto why = validate(c.s, c.g, c.q)) throw std::logic_error("sampled an invalid gain case: " + *why);
  return c;
}

std::vector<CheckRow> verify_split(const RunConfig& cfg, int count, std::uint64_t seed) {
  std::vector<CheckRow> rows;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t sd = seed + static_cast<std::uint64_t>(i);
    const GainCase c = sample_gain_case(cfg, sd, TaskType::Collaborative, Knob::DlPower, false);
    const int m = c.q.user;
    const double U = ul_rate(c.s, c.g, c.q.bs, m);
    const double D = dl_rate(c.s, c.g, c.q.bs, m);
    const double mu = *delay::optimal_mu(c.s, m, U, D);
    double best_mu = 0.0;
    double best_t = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double x = k * 1e-4;
      const double t = delay::collaborative(c.s, m, U, D, x);
      if (t < best_t) {
        best_t = t;
        best_mu = x;
      }
    }
    const std::string id = "s" + std::to_string(sd);
    rows.push_back({id, "split/mu", mu, best_mu, relative_error(mu, best_mu)});
    const double closed = delay::collaborative_opt(c.s, m, U, D);
    const double direct = delay::collaborative(c.s, m, U, D, mu);
    rows.push_back({id, "split/delay", closed, direct, relative_error(closed, direct)});
  }
  return rows;
}

std::vector<CheckRow> verify_gains(const RunConfig& cfg, int count, std::uint64_t seed) {
  std::vector<CheckRow> rows;
  const TaskType types[] = {TaskType::Edge, TaskType::Local, TaskType::Collaborative};
  const Knob knobs[] = {Knob::DlSubcarriers, Knob::UlSubcarriers, Knob::DlPower, Knob::UlPower};
  for (int i = 0; i < count; ++i) {
    const std::uint64_t sd = seed + static_cast<std::uint64_t>(i);
    const std::string id = "s" + std::to_string(sd);
    for (TaskType t : types) {
      for (Knob k : knobs) {
        if (is_null_pair(t, k)) continue;
        const GainCase c = sample_gain_case(cfg, sd, t, k, is_subcarrier_knob(k));
        const double f = gain_formula(c.s, c.g, c.q);
        const double d = gain_direct(c.s, c.g, c.q);
        rows.push_back({id, formula_label(c.s, c.g, c.q), f, d, relative_error(f, d)});
        if (t == TaskType::Collaborative && k == Knob::UlSubcarriers) {
          const double p = gain_formula_as_printed(c.s, c.g, c.q);
          rows.push_back({id, "collaborative/ul-subcarriers/as-printed", p, d, relative_error(p, d)});
        }
      }
    }
  }
  return rows;
}

std::string dims_label(const ActionDims& d) {
  return "M" + std::to_string(d.users) + "-I" + std::to_string(d.n_ul) + "-J" + std::to_string(d.n_dl) + "-Na" +
         std::to_string(d.levels);
}

std::vector<CheckRow> verify_counts(int max_users, int max_subcarriers, int max_levels) {
  std::vector<CheckRow> rows;
  for (int M = 1; M <= max_users; ++M) {
    for (int I = 0; I <= max_subcarriers; ++I) {
      for (int J = 0; J <= max_subcarriers; ++J) {
        for (int Na = 1; Na <= max_levels; ++Na) {
          RunConfig cfg = RunConfig::desk();
          cfg.n_bs = 1;
          cfg.n_users = M;
          cfg.n_ul = I;
          cfg.n_dl = J;
          cfg.n_power_levels = Na;
          const NetworkScenario s = generate_scenario(cfg, 1);
          const ActionCatalog cat = enumerate_actions(s, 0);
          const ActionDims dims = ActionDims::of(s);
          const double enumerated = static_cast<double>(cat.size());
          const double formula = static_cast<double>(theorem3_total(dims));
          Theorem3Options verbatim;
          verbatim.power = PowerCounting::PerSubcarrier;
          verbatim.include_mu_factor = true;
          verbatim.collaborative_users = M;
          verbatim.all_subcarriers_allocated = true;
          const double printed = static_cast<double>(theorem3_total(dims, verbatim));
          const std::string id = dims_label(dims);
          rows.push_back({id, "count/budgeted", formula, enumerated, relative_error(formula, enumerated)});
          rows.push_back({id, "count/verbatim", printed, enumerated, relative_error(printed, enumerated)});
        }
      }
    }
  }
  return rows;
}

std::vector<CheckRow> verify_oracle(const RunConfig& cfg, int count, std::uint64_t seed) {
  std::vector<CheckRow> rows;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t sd = seed + static_cast<std::uint64_t>(i);
    const NetworkScenario s = generate_scenario(cfg, sd);
    const OracleResult opt = solve_exhaustive(s);
    const RunMetrics m = run_training(cfg, s, Algo::MultiStack, sd, false);
    const double gap = (m.best_t_max - opt.best_max_delay) / opt.best_max_delay;
    rows.push_back({"s" + std::to_string(sd), "oracle/multistack-best", opt.best_max_delay, m.best_t_max, gap});
  }
  return rows;
}

}  // namespace mecq
