#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mecq/action_space.hpp"
#include "mecq/net_model.hpp"
#include "mecq/rng.hpp"
#include "mecq/task_model.hpp"

namespace mecq {

// Discretized (t_max, m_max, m*). t_bin == bins is the overflow bin for an
// infinite maximal delay.
struct EnvState {
  int t_bin = 0;
  int m_max = 0;
  int m_star = 0;

  auto operator<=>(const EnvState&) const = default;
};

using StateKey = std::uint64_t;

StateKey state_key(const EnvState& x);
EnvState state_from_key(StateKey k);

// Uniform bins over [0, t_ref]; finite delays above t_ref land in the last
// regular bin.
struct StateEncoder {
  int bins = 32;
  double t_ref = 1.0;

  int bin_of(double t_max) const;
  EnvState encode(const DelayReport& r, int m_star) const;
};

// Reference delay for the reward: max_m omega_m lambda_m / f_m, the longest
// all-local compute time.
double reward_reference(const NetworkScenario& s);

// (ref - t_max) / ref clamped to [r_min, 1]; +inf maps to r_min.
double reward(const NetworkScenario& s, const DelayReport& report, double r_min = -1.0);
double reward_from(double t_max, double ref, double r_min = -1.0);

// Sparse Q-table over a dense action range [0, n_actions). Missing entries
// read as 0. Each row keeps its values ordered so the greedy action and the
// max are O(log n) even when most actions are unvisited.
class QTable {
 public:
  explicit QTable(std::uint64_t n_actions);

  std::uint64_t n_actions() const { return n_actions_; }
  double get(StateKey x, ActionId a) const;
  void set(StateKey x, ActionId a, double value);

  // Greedy action; ties go to the smallest id, unvisited actions count as 0.
  ActionId argmax(StateKey x) const;
  // Greedy action with ties broken uniformly at random.
  ActionId argmax(StateKey x, Rng& rng) const;
  double max_value(StateKey x) const;

  std::size_t entries() const;
  std::size_t states() const { return rows_.size(); }

  // Text dump: a header line, then one "t_bin m_max m_star action value" line
  // per stored entry, rows in state order and actions ascending.
  void dump(std::ostream& os) const;

  bool operator==(const QTable& o) const;

 private:
  struct ByValue {
    bool operator()(const std::pair<double, ActionId>& a, const std::pair<double, ActionId>& b) const {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    }
  };
  struct Row {
    std::unordered_map<ActionId, double> values;
    std::set<std::pair<double, ActionId>, ByValue> ordered;
    ActionId gap = 0;  // smallest action without a stored entry
  };

  std::uint64_t n_actions_;
  std::map<StateKey, Row> rows_;
};

enum class TieBreak { Lowest, Random };

// With probability epsilon a uniform draw from [0, n), otherwise the greedy
// action: the smallest maximal id, or a uniform pick among the maximal ids.
ActionId select_action(const QTable& q, StateKey x, double epsilon, Rng& rng, TieBreak ties = TieBreak::Lowest);

struct StackRecord {
  StateKey state = 0;
  ActionId action = 0;
  double reward = 0.0;
  bool filled = false;  // slots skipped by gated steps stay empty
};

// G stacks of B records. Step k routes to stack k mod G, slot floor(k / G)
// mod B. Only consulted while k < G * B.
class StackSet {
 public:
  StackSet(int stacks, int depth);

  int stacks() const { return G_; }
  int depth() const { return B_; }
  bool active(std::int64_t k) const { return k >= 0 && k < static_cast<std::int64_t>(G_) * B_; }
  int route(std::int64_t k) const { return static_cast<int>(k % G_); }
  int slot(std::int64_t k) const { return static_cast<int>((k / G_) % B_); }

  bool contains(std::int64_t k, StateKey x, ActionId a) const;
  const std::vector<StackRecord>& stack(int i) const { return data_.at(i); }
  int fill(int i) const { return fill_.at(i); }

 private:
  friend void record(StackSet& st, std::int64_t k, StateKey x, ActionId a, double r);

  int G_;
  int B_;
  std::vector<std::vector<StackRecord>> data_;
  std::vector<int> fill_;
};

// 1 when the routed stack holds no record of (x, a), else 0.
int novelty_check(const StackSet& st, std::int64_t k, StateKey x, ActionId a);
void record(StackSet& st, std::int64_t k, StateKey x, ActionId a, double r);

struct Experience {
  StateKey state = 0;
  ActionId action = 0;
  double reward = 0.0;
  StateKey next_state = 0;
};

// Q(x,a) += gate * alpha * (r + gamma * max_a' Q(x', a') - Q(x, a)).
void q_update(QTable& q, const Experience& e, int gate, double alpha, double gamma);

enum class Algo { MultiStack, QLearning, Random, TaskOnly, TaskSubcarrier, TaskPower };

const char* to_string(Algo a);
Algo algo_from_string(const std::string& s);
const std::vector<Algo>& all_algos();

struct AgentConfig {
  double alpha = 0.7;
  double gamma = 0.9;
  double epsilon = 0.1;
  double epsilon_final = 0.1;
  std::int64_t epsilon_decay_steps = 0;  // 0 keeps epsilon fixed
  int stacks = 10;                       // G
  int stack_depth = 150;                 // B
  int bins = 32;
  int retry_cap = 10;
  double r_min = -1.0;
  TieBreak tie_break = TieBreak::Lowest;

  double epsilon_at(std::int64_t k) const;
};

struct StepResult {
  double t_max = 0.0;
  double reward = 0.0;
  double gate_rate = 0.0;  // fraction of learning agents whose update was gated on
  int retries = 0;
  DelayReport report;
  std::vector<Experience> experiences;  // one per learning agent
};

// N agents acting jointly on one scenario. Agents choose in BS order from a
// single RNG stream, the joint allocation is conflict-resolved (lowest BS index
// keeps a contested pair) and evaluated once, and every agent learns from the
// shared reward.
class MultiAgentEnv {
 public:
  MultiAgentEnv(const NetworkScenario& s, Algo algo, AgentConfig cfg, std::uint64_t seed);

  StepResult step();

  std::int64_t iteration() const { return k_; }
  Algo algo() const { return algo_; }
  const NetworkScenario& scenario() const { return s_; }
  const ActionSpace& space() const { return space_; }
  const QTable& q_table(int n) const { return q_.at(n); }
  const StackSet& stacks(int n) const { return stacks_.at(n); }
  const EnvState& state(int n) const { return x_.at(n); }
  std::uint64_t key_count() const { return n_keys_; }
  const GlobalAllocation& last_allocation() const { return last_; }
  const std::vector<int>& associated_users(int n) const { return assoc_.at(n); }

  bool learns() const { return algo_ != Algo::Random && algo_ != Algo::TaskOnly; }
  bool uses_stacks() const { return algo_ == Algo::MultiStack; }

 private:
  ActionId to_action(std::uint64_t key);
  int m_star(int n, std::int64_t k) const;

  const NetworkScenario& s_;
  Algo algo_;
  AgentConfig cfg_;
  ActionSpace space_;
  std::uint64_t n_keys_;
  StateEncoder enc_;
  double ref_;
  Rng rng_;
  std::vector<QTable> q_;
  std::vector<StackSet> stacks_;
  std::vector<EnvState> x_;
  std::vector<std::vector<int>> assoc_;
  GlobalAllocation last_;
  std::int64_t k_ = 0;
};

// Users whose nearest BS is n (lowest index on distance ties).
std::vector<std::vector<int>> nearest_bs_association(const NetworkScenario& s);

}  // namespace mecq
