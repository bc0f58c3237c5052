#include "mecq/gain_analysis.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "mecq/task_model.hpp"

namespace mecq {

const char* to_string(Knob k) {
  switch (k) {
    case Knob::DlSubcarriers: return "dl-subcarriers";
    case Knob::UlSubcarriers: return "ul-subcarriers";
    case Knob::DlPower: return "dl-power";
    case Knob::UlPower: return "ul-power";
  }
  return "?";
}

Knob knob_from_string(const std::string& s) {
  if (s == "dl-subcarriers") return Knob::DlSubcarriers;
  if (s == "ul-subcarriers") return Knob::UlSubcarriers;
  if (s == "dl-power") return Knob::DlPower;
  if (s == "ul-power") return Knob::UlPower;
  throw std::invalid_argument("unknown knob '" + s + "'");
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::MuchMore: return "much-more";
    case Regime::MuchFewer: return "much-fewer";
    case Regime::General: return "general";
    case Regime::Single: return "single";
  }
  return "?";
}

bool GainQuery::empty() const {
  if (is_subcarrier_knob(knob)) return added.empty();
  for (double p : power_increment)
    if (p != 0.0) return false;
  return true;
}

bool is_null_pair(TaskType t, Knob k) {
  return (t == TaskType::Edge && !is_downlink(k)) || (t == TaskType::Local && is_downlink(k));
}

namespace {

GlobalAllocation apply_unchecked(const GlobalAllocation& g, const GainQuery& q) {
  const bool dl = is_downlink(q.knob);
  GlobalAllocation after = g;
  Allocation& b = after.per_bs[q.bs];
  for (const auto& grant : q.added) {
    if (dl) b.assign_dl(q.user, grant.index, grant.power_w);
    else b.assign_ul(q.user, grant.index, grant.power_w);
  }
  for (std::size_t k = 0; k < q.power_increment.size(); ++k) {
    const int idx = static_cast<int>(k);
    if (q.power_increment[k] == 0.0) continue;
    if (dl) b.assign_dl(q.user, idx, b.dl_power(q.user, idx) + q.power_increment[k]);
    else b.assign_ul(q.user, idx, b.ul_power(q.user, idx) + q.power_increment[k]);
  }
  return after;
}

}  // namespace

std::optional<std::string> validate(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  if (g.per_bs.size() != static_cast<std::size_t>(s.n_bs)) return "one allocation per BS required";
  if (q.bs < 0 || q.bs >= s.n_bs) return "BS index out of range";
  if (q.user < 0 || q.user >= s.n_users) return "user index out of range";
  const bool dl = is_downlink(q.knob);
  const int width = dl ? s.n_dl : s.n_ul;
  const Allocation& a = g.per_bs[q.bs];

  if (is_subcarrier_knob(q.knob)) {
    if (!q.power_increment.empty()) return "subcarrier knob takes no power increments";
    std::set<int> seen;
    for (const auto& grant : q.added) {
      if (grant.index < 0 || grant.index >= width) return "added subcarrier index out of range";
      if (!seen.insert(grant.index).second) return "subcarrier added twice";
      if (!(grant.power_w > 0.0) || !std::isfinite(grant.power_w)) return "added subcarrier needs positive power";
      for (int m = 0; m < s.n_users; ++m) {
        if (dl ? a.dl_on(m, grant.index) : a.ul_on(m, grant.index)) return "added subcarrier is already allocated";
      }
      for (int n = 0; n < s.n_bs; ++n) {
        const Allocation& other = g.per_bs[n];
        if (dl ? other.dl_on(q.user, grant.index) : other.ul_on(q.user, grant.index))
          return "user already holds the added subcarrier at another BS";
      }
    }
  } else {
    if (!q.added.empty()) return "power knob adds no subcarriers";
    if (!q.power_increment.empty() && q.power_increment.size() != static_cast<std::size_t>(width))
      return "power increment needs one entry per subcarrier of the link";
    for (std::size_t k = 0; k < q.power_increment.size(); ++k) {
      const double p = q.power_increment[k];
      if (p < 0.0 || !std::isfinite(p)) return "power increments must be finite and non-negative";
      const int idx = static_cast<int>(k);
      if (p > 0.0 && !(dl ? a.dl_on(q.user, idx) : a.ul_on(q.user, idx)))
        return "power increment on a subcarrier the user does not hold";
    }
  }

  if (auto why = check_global(s, apply_unchecked(g, q), false)) return "change makes the allocation infeasible: " + *why;
  return std::nullopt;
}

GlobalAllocation apply(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  if (auto why = validate(s, g, q)) throw std::invalid_argument(*why);
  return apply_unchecked(g, q);
}

namespace {

Regime regime_for(int current, int added) {
  if (added >= 10 * current) return Regime::MuchMore;
  if (10 * added <= current) return Regime::MuchFewer;
  return Regime::General;
}

int current_count(const GlobalAllocation& g, const GainQuery& q) {
  const Allocation& a = g.per_bs[q.bs];
  return is_downlink(q.knob) ? a.dl_count(q.user) : a.ul_count(q.user);
}

// Count-reading ratio a / (c (c + a) r) and its two limits.
double count_term(Regime r, int c, int a, double per_subcarrier_rate) {
  switch (r) {
    case Regime::MuchMore: return 1.0 / (c * per_subcarrier_rate);
    case Regime::MuchFewer: return a / (static_cast<double>(c) * c * per_subcarrier_rate);
    default: return a / (static_cast<double>(c) * (c + a) * per_subcarrier_rate);
  }
}

void need_rate(double r, const char* link) {
  if (!(r > 0.0)) throw std::invalid_argument(std::string("closed form needs a positive current ") + link + " rate");
}

struct Rates {
  double U, D, U2, D2;
};

Rates rates_of(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  const GlobalAllocation after = apply(s, g, q);
  return {ul_rate(s, g, q.bs, q.user), dl_rate(s, g, q.bs, q.user), ul_rate(s, after, q.bs, q.user),
          dl_rate(s, after, q.bs, q.user)};
}

// (omega_m F)^2 / ((omega_m F + Y)(omega_m F + Y')).
double split_factor(const NetworkScenario& s, int m, const Rates& r) {
  const double K = s.cycles_per_bit_user[m] * s.mec_cpu_hz;
  const double Y = delay::offload_penalty(s, m, r.U, r.D);
  const double Y2 = delay::offload_penalty(s, m, r.U2, r.D2);
  return K * K / ((K + Y) * (K + Y2));
}

}  // namespace

Regime regime_of(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  if (auto why = validate(s, g, q)) throw std::invalid_argument(*why);
  if (!is_subcarrier_knob(q.knob)) return Regime::Single;
  return regime_for(current_count(g, q), static_cast<int>(q.added.size()));
}

double gain_formula(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  if (auto why = validate(s, g, q)) throw std::invalid_argument(*why);
  if (is_null_pair(q.task_type, q.knob) || q.empty()) return 0.0;

  const int m = q.user;
  const double lambda = s.task_bits[m];
  const double nu = s.result_ratio;
  const Rates r = rates_of(s, g, q);
  const bool collab = q.task_type == TaskType::Collaborative;
  const bool dl = is_downlink(q.knob);

  need_rate(dl ? r.D : r.U, dl ? "downlink" : "uplink");
  if (collab) {
    need_rate(r.U, "uplink");
    need_rate(r.D, "downlink");
  }
  const double scale = (dl ? nu * lambda : (collab ? lambda : nu * lambda)) * (collab ? split_factor(s, m, r) : 1.0);

  if (is_subcarrier_knob(q.knob)) {
    const int c = current_count(g, q);
    const int a = static_cast<int>(q.added.size());
    const double per_sc = (dl ? r.D : r.U) / c;
    return scale * count_term(regime_for(c, a), c, a, per_sc);
  }
  const double R = dl ? r.D : r.U;
  const double R2 = dl ? r.D2 : r.U2;
  return scale * (R2 - R) / (R * R2);
}

double gain_formula_as_printed(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  if (q.task_type != TaskType::Collaborative || q.knob != Knob::UlSubcarriers)
    throw std::invalid_argument("printed variant exists only for collaborative uplink subcarriers");
  if (auto why = validate(s, g, q)) throw std::invalid_argument(*why);
  if (q.empty()) return 0.0;
  const int m = q.user;
  const Rates r = rates_of(s, g, q);
  need_rate(r.U, "uplink");
  need_rate(r.D, "downlink");
  const double scale = s.task_bits[m] * split_factor(s, m, r);
  const int cd = g.per_bs[q.bs].dl_count(m);
  switch (regime_for(current_count(g, q), static_cast<int>(q.added.size()))) {
    case Regime::MuchMore: return scale / r.D;
    default: return scale * count_term(Regime::General, cd, 0, r.D / cd);
  }
}

double gain_direct(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  const GlobalAllocation after = apply(s, g, q);
  const int m = q.user;
  const double before_t =
      delay::for_type(s, m, q.task_type, ul_rate(s, g, q.bs, m), dl_rate(s, g, q.bs, m));
  const double after_t =
      delay::for_type(s, m, q.task_type, ul_rate(s, after, q.bs, m), dl_rate(s, after, q.bs, m));
  if (before_t == after_t) return 0.0;
  return before_t - after_t;
}

std::string formula_label(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  return std::string(to_string(q.task_type)) + "/" + to_string(q.knob) + "/" + to_string(regime_of(s, g, q));
}

OrderingVerdict corollary1_check(const NetworkScenario& s, const GlobalAllocation& g, const GainQuery& q) {
  OrderingVerdict v;
  v.knob = q.knob;
  GainQuery t = q;
  t.task_type = TaskType::Edge;
  v.gain_edge = gain_direct(s, g, t);
  t.task_type = TaskType::Local;
  v.gain_local = gain_direct(s, g, t);
  t.task_type = TaskType::Collaborative;
  v.gain_collaborative = gain_direct(s, g, t);
  if (is_downlink(q.knob)) {
    v.lower_holds = v.gain_local < v.gain_collaborative;
    v.upper_holds = v.gain_collaborative < v.gain_edge;
  } else {
    v.lower_holds = v.gain_edge < v.gain_collaborative;
    v.upper_holds = v.gain_collaborative < v.gain_local;
  }
  return v;
}

}  // namespace mecq
