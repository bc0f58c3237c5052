#include "mecq/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace mecq {

StateKey state_key(const EnvState& x) {
  return (static_cast<StateKey>(static_cast<std::uint32_t>(x.t_bin) & 0xffffu) << 48) |
         (static_cast<StateKey>(static_cast<std::uint32_t>(x.m_max) & 0xffffffu) << 24) |
         static_cast<StateKey>(static_cast<std::uint32_t>(x.m_star) & 0xffffffu);
}

EnvState state_from_key(StateKey k) {
  return {static_cast<int>(k >> 48), static_cast<int>((k >> 24) & 0xffffffu), static_cast<int>(k & 0xffffffu)};
}

int StateEncoder::bin_of(double t_max) const {
  if (!std::isfinite(t_max)) return bins;
  if (t_max <= 0.0) return 0;
  const double b = std::floor(t_max / t_ref * bins);
  return static_cast<int>(std::min(b, static_cast<double>(bins - 1)));
}

EnvState StateEncoder::encode(const DelayReport& r, int m_star) const {
  return {bin_of(r.max_delay), r.argmax_user, m_star};
}

double reward_reference(const NetworkScenario& s) {
  double ref = 0.0;
  for (int m = 0; m < s.n_users; ++m) ref = std::max(ref, local_compute_time(s, m));
  return ref;
}

double reward_from(double t_max, double ref, double r_min) {
  if (!std::isfinite(t_max)) return r_min;
  return std::clamp((ref - t_max) / ref, r_min, 1.0);
}

double reward(const NetworkScenario& s, const DelayReport& report, double r_min) {
  return reward_from(report.max_delay, reward_reference(s), r_min);
}

QTable::QTable(std::uint64_t n_actions) : n_actions_(n_actions) {
  if (n_actions == 0) throw std::invalid_argument("QTable needs at least one action");
}

double QTable::get(StateKey x, ActionId a) const {
  auto row = rows_.find(x);
  if (row == rows_.end()) return 0.0;
  auto it = row->second.values.find(a);
  return it == row->second.values.end() ? 0.0 : it->second;
}

void QTable::set(StateKey x, ActionId a, double value) {
  if (a >= n_actions_) throw std::out_of_range("action id out of range");
  if (!std::isfinite(value)) throw std::invalid_argument("Q-values must be finite");
  Row& row = rows_[x];
  auto it = row.values.find(a);
  if (it != row.values.end()) {
    row.ordered.erase({it->second, a});
    it->second = value;
  } else {
    row.values.emplace(a, value);
  }
  row.ordered.insert({value, a});
  while (row.gap < n_actions_ && row.values.count(row.gap)) ++row.gap;
}

ActionId QTable::argmax(StateKey x) const {
  auto it = rows_.find(x);
  if (it == rows_.end()) return 0;
  const Row& row = it->second;
  if (row.ordered.empty()) return row.gap;
  const auto [best, id] = *row.ordered.begin();
  if (row.gap >= n_actions_ || best > 0.0) return id;
  if (best < 0.0) return row.gap;
  return std::min(id, row.gap);
}

ActionId QTable::argmax(StateKey x, Rng& rng) const {
  auto it = rows_.find(x);
  if (it == rows_.end()) return rng.below(n_actions_);
  const Row& row = it->second;
  const double best = max_value(x);
  if (best != 0.0 || row.gap >= n_actions_) {
    // Every maximal action is stored.
    std::uint64_t ties = 0;
    for (auto e = row.ordered.begin(); e != row.ordered.end() && e->first == best; ++e) ++ties;
    auto e = row.ordered.begin();
    std::advance(e, static_cast<std::ptrdiff_t>(rng.below(ties)));
    return e->second;
  }
  // The maximum is 0 and some actions are unvisited: draw from the unvisited
  // actions together with the stored zeros.
  auto is_tie = [&](ActionId a) {
    auto v = row.values.find(a);
    return v == row.values.end() || v->second == 0.0;
  };
  for (int attempt = 0; attempt < 64; ++attempt) {
    const ActionId a = rng.below(n_actions_);
    if (is_tie(a)) return a;
  }
  std::vector<ActionId> ties;
  for (ActionId a = row.gap; a < n_actions_; ++a)
    if (is_tie(a)) ties.push_back(a);
  return ties[rng.below(ties.size())];
}

double QTable::max_value(StateKey x) const {
  auto it = rows_.find(x);
  if (it == rows_.end() || it->second.ordered.empty()) return 0.0;
  const double best = it->second.ordered.begin()->first;
  return it->second.gap < n_actions_ ? std::max(best, 0.0) : best;
}

std::size_t QTable::entries() const {
  std::size_t n = 0;
  for (const auto& [x, row] : rows_) n += row.values.size();
  return n;
}

void QTable::dump(std::ostream& os) const {
  os << "# t_bin m_max m_star action value\n";
  char buf[64];
  for (const auto& [x, row] : rows_) {
    const EnvState st = state_from_key(x);
    std::vector<std::pair<ActionId, double>> items(row.values.begin(), row.values.end());
    std::sort(items.begin(), items.end());
    for (const auto& [a, v] : items) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << st.t_bin << ' ' << st.m_max << ' ' << st.m_star << ' ' << a << ' ' << buf << '\n';
    }
  }
}

bool QTable::operator==(const QTable& o) const {
  if (n_actions_ != o.n_actions_ || rows_.size() != o.rows_.size()) return false;
  auto a = rows_.begin();
  auto b = o.rows_.begin();
  for (; a != rows_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.values != b->second.values) return false;
  }
  return true;
}

ActionId select_action(const QTable& q, StateKey x, double epsilon, Rng& rng, TieBreak ties) {
  if (rng.uniform() < epsilon) return rng.below(q.n_actions());
  return ties == TieBreak::Random ? q.argmax(x, rng) : q.argmax(x);
}

StackSet::StackSet(int stacks, int depth) : G_(stacks), B_(depth) {
  if (stacks < 0 || depth < 0) throw std::invalid_argument("stack counts must be >= 0");
  data_.assign(G_, std::vector<StackRecord>(B_));
  fill_.assign(G_, 0);
}

bool StackSet::contains(std::int64_t k, StateKey x, ActionId a) const {
  if (!active(k)) return false;
  const int i = route(k);
  const auto& st = data_[i];
  for (int j = 0; j < fill_[i]; ++j) {
    if (st[j].filled && st[j].state == x && st[j].action == a) return true;
  }
  return false;
}

int novelty_check(const StackSet& st, std::int64_t k, StateKey x, ActionId a) { return st.contains(k, x, a) ? 0 : 1; }

void record(StackSet& st, std::int64_t k, StateKey x, ActionId a, double r) {
  if (st.G_ == 0 || st.B_ == 0) throw std::logic_error("cannot record into an empty stack set");
  if (k < 0) throw std::invalid_argument("step index must be >= 0");
  const int i = st.route(k);
  const int j = st.slot(k);
  st.data_[i][j] = {x, a, r, true};
  st.fill_[i] = std::max(st.fill_[i], j + 1);
}

void q_update(QTable& q, const Experience& e, int gate, double alpha, double gamma) {
  if (gate == 0) return;
  const double cur = q.get(e.state, e.action);
  const double target = e.reward + gamma * q.max_value(e.next_state);
  q.set(e.state, e.action, cur + alpha * (target - cur));
}

const char* to_string(Algo a) {
  switch (a) {
    case Algo::MultiStack: return "multistack";
    case Algo::QLearning: return "qlearning";
    case Algo::Random: return "random";
    case Algo::TaskOnly: return "task-only";
    case Algo::TaskSubcarrier: return "task+subcarrier";
    case Algo::TaskPower: return "task+power";
  }
  return "?";
}

Algo algo_from_string(const std::string& s) {
  for (Algo a : all_algos())
    if (s == to_string(a)) return a;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

const std::vector<Algo>& all_algos() {
  static const std::vector<Algo> v{Algo::MultiStack, Algo::QLearning,      Algo::Random,
                                   Algo::TaskOnly,   Algo::TaskSubcarrier, Algo::TaskPower};
  return v;
}

double AgentConfig::epsilon_at(std::int64_t k) const {
  if (epsilon_decay_steps <= 0) return epsilon;
  const double frac = std::min(1.0, static_cast<double>(k) / static_cast<double>(epsilon_decay_steps));
  return epsilon + (epsilon_final - epsilon) * frac;
}

std::vector<std::vector<int>> nearest_bs_association(const NetworkScenario& s) {
  std::vector<std::vector<int>> assoc(s.n_bs);
  for (int m = 0; m < s.n_users; ++m) {
    int best = 0;
    double best_d = distance(s.user_positions[m], s.bs_positions[0]);
    for (int n = 1; n < s.n_bs; ++n) {
      const double d = distance(s.user_positions[m], s.bs_positions[n]);
      if (d < best_d) {
        best_d = d;
        best = n;
      }
    }
    assoc[best].push_back(m);
  }
  return assoc;
}

namespace {

std::uint64_t key_count_for(Algo algo, const ActionSpace& space) {
  switch (algo) {
    case Algo::TaskSubcarrier: return space.subcarrier_key_count();
    case Algo::TaskPower: return space.power_key_count();
    default: return space.size();
  }
}

}  // namespace

MultiAgentEnv::MultiAgentEnv(const NetworkScenario& s, Algo algo, AgentConfig cfg, std::uint64_t seed)
    : s_(s),
      algo_(algo),
      cfg_(cfg),
      space_(ActionSpace::for_scenario(s)),
      n_keys_(key_count_for(algo, space_)),
      enc_{cfg.bins, 0.0},
      ref_(0.0),
      rng_(seed) {
  s.validate();
  if (cfg.bins < 1) throw std::invalid_argument("need at least one delay bin");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0) || !(cfg.epsilon_final >= 0.0 && cfg.epsilon_final <= 1.0))
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (cfg.retry_cap < 0) throw std::invalid_argument("retry cap must be >= 0");
  ref_ = reward_reference(s);
  enc_.t_ref = ref_;
  q_.assign(s.n_bs, QTable(n_keys_));
  stacks_.assign(s.n_bs, StackSet(uses_stacks() ? cfg.stacks : 0, uses_stacks() ? cfg.stack_depth : 0));
  assoc_ = nearest_bs_association(s);
  for (auto& users : assoc_) {
    if (!users.empty()) continue;
    for (int m = 0; m < s.n_users; ++m) users.push_back(m);
  }
  last_ = GlobalAllocation::idle(s);
  const DelayReport r0 = evaluate(s, last_);
  for (int n = 0; n < s.n_bs; ++n) x_.push_back(enc_.encode(r0, m_star(n, 0)));
}

int MultiAgentEnv::m_star(int n, std::int64_t k) const {
  const auto& users = assoc_[n];
  return users[static_cast<std::size_t>(k % static_cast<std::int64_t>(users.size()))];
}

ActionId MultiAgentEnv::to_action(std::uint64_t key) {
  switch (algo_) {
    case Algo::TaskSubcarrier: return space_.complete_subcarrier_key(key, rng_);
    case Algo::TaskPower: return space_.complete_power_key(key, rng_);
    default: return key;
  }
}

StepResult MultiAgentEnv::step() {
  const int N = s_.n_bs;
  const double eps = cfg_.epsilon_at(k_);
  std::vector<std::uint64_t> keys(N);
  std::vector<StateKey> xs(N);
  std::vector<int> gates(N, 1);
  std::vector<bool> novel(N, false);
  StepResult out;

  for (int n = 0; n < N; ++n) {
    xs[n] = state_key(x_[n]);
    if (!learns()) {
      keys[n] = rng_.below(n_keys_);
      continue;
    }
    std::uint64_t key = select_action(q_[n], xs[n], eps, rng_, cfg_.tie_break);
    if (uses_stacks() && stacks_[n].active(k_)) {
      int tries = 0;
      while (novelty_check(stacks_[n], k_, xs[n], key) == 0 && tries < cfg_.retry_cap) {
        key = select_action(q_[n], xs[n], eps, rng_, cfg_.tie_break);
        ++tries;
      }
      novel[n] = novelty_check(stacks_[n], k_, xs[n], key) == 1;
      gates[n] = novel[n] ? 1 : 0;
      out.retries += tries;
    }
    keys[n] = key;
  }

  GlobalAllocation g;
  g.per_bs.reserve(N);
  for (int n = 0; n < N; ++n) g.per_bs.push_back(space_.decode(to_action(keys[n])));
  last_ = resolve_conflicts(g);

  EvaluateOptions opts;
  if (algo_ == Algo::Random) {
    std::vector<double> mu(s_.n_users, 1.0);
    for (int m = 0; m < s_.n_users; ++m)
      if (s_.task_type[m] == TaskType::Collaborative) mu[m] = rng_.uniform();
    opts.fixed_mu = std::move(mu);
  }
  out.report = evaluate(s_, last_, opts);
  out.t_max = out.report.max_delay;
  out.reward = reward_from(out.t_max, ref_, cfg_.r_min);

  int gated_on = 0;
  for (int n = 0; n < N; ++n) {
    const EnvState next = enc_.encode(out.report, m_star(n, k_ + 1));
    if (learns()) {
      if (novel[n]) record(stacks_[n], k_, xs[n], keys[n], out.reward);
      const Experience e{xs[n], keys[n], out.reward, state_key(next)};
      q_update(q_[n], e, gates[n], cfg_.alpha, cfg_.gamma);
      out.experiences.push_back(e);
      gated_on += gates[n];
    }
    x_[n] = next;
  }
  out.gate_rate = learns() ? static_cast<double>(gated_on) / N : 0.0;
  ++k_;
  return out;
}

}  // namespace mecq
