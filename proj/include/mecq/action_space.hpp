#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mecq/net_model.hpp"
#include "mecq/rng.hpp"

namespace mecq {

using ActionId = std::uint64_t;
using Count = unsigned __int128;

Count binomial(int n, int k);
std::string to_string(Count c);

// Shape of one BS's action space.
struct ActionDims {
  int users = 1;
  int n_ul = 0;
  int n_dl = 0;
  int levels = 1;

  static ActionDims of(const NetworkScenario& s) { return {s.n_users, s.n_ul, s.n_dl, s.n_power_levels}; }
};

// Lexicographic ranking of slot patterns over {0 = none, 1..alphabet}, slot 0
// most significant, where a pattern with k non-empty slots carries weight(k)
// consecutive ids.
class PatternRanker {
 public:
  PatternRanker(int slots, int alphabet, std::vector<Count> weight_by_k);

  std::uint64_t total() const { return total_; }
  std::uint64_t weight(int k) const { return static_cast<std::uint64_t>(weight_[k]); }

  // Total weight of all patterns that sort before `pattern`.
  std::uint64_t prefix(std::span<const int> pattern) const;

  // Pattern whose id block contains r, and r's offset inside that block.
  std::pair<std::vector<int>, std::uint64_t> locate(std::uint64_t r) const;

 private:
  int slots_;
  int alphabet_;
  std::vector<Count> weight_;
  std::vector<std::vector<Count>> tail_;  // tail_[pos][k]: weight of all completions from pos with k filled
  std::uint64_t total_;
};

// Power level vectors (l_1..l_k), l_i >= 1, sum <= levels, in lexicographic order.
std::uint64_t level_vector_count(int k, int levels);
std::uint64_t level_vector_rank(std::span<const int> lv, int levels);
std::vector<int> level_vector_unrank(std::uint64_t r, int k, int levels);

// Per-link decomposition of a BS action: owner per subcarrier (-1 = idle) and
// the power level (1..N_a) of every allocated subcarrier in subcarrier order.
struct LinkAction {
  std::vector<int> owner;
  std::vector<int> level;

  int allocated() const;
  bool operator==(const LinkAction&) const = default;
};

// Bijection between dense ids and the feasible joint actions of one BS.
// Ordering is lexicographic over (downlink pattern, uplink pattern, downlink
// levels, uplink levels). Zero power is canonicalized to "not allocated", and
// the level sum on each link stays within N_a (the per-BS power budget).
// Nothing is materialized; ids are ranked and unranked on demand.
class ActionSpace {
 public:
  ActionSpace(ActionDims dims, double p_max_ul_w, double p_max_dl_w);
  static ActionSpace for_scenario(const NetworkScenario& s);

  const ActionDims& dims() const { return dims_; }
  std::uint64_t size() const { return size_; }

  Allocation decode(ActionId id) const;
  ActionId encode(const Allocation& a) const;  // std::invalid_argument if not a canonical catalog member
  ActionId sample(Rng& rng) const { return rng.below(size_); }

  LinkAction link_of(const Allocation& a, bool downlink) const;
  Allocation compose(const LinkAction& dl, const LinkAction& ul) const;
  ActionId encode_links(const LinkAction& dl, const LinkAction& ul) const;
  std::pair<LinkAction, LinkAction> decode_links(ActionId id) const;

  // Key space that fixes subcarrier ownership only (powers drawn at random).
  std::uint64_t subcarrier_key_count() const { return dl_owner_.total() * ul_owner_.total(); }
  ActionId complete_subcarrier_key(std::uint64_t key, Rng& rng) const;

  // Key space that fixes which subcarriers are active and their power levels
  // (owners drawn at random).
  std::uint64_t power_key_count() const { return dl_power_.total() * ul_power_.total(); }
  ActionId complete_power_key(std::uint64_t key, Rng& rng) const;

 private:
  ActionDims dims_;
  double p_ul_;
  double p_dl_;
  PatternRanker dl_;
  PatternRanker ul_;
  PatternRanker dl_owner_;
  PatternRanker ul_owner_;
  PatternRanker dl_power_;
  PatternRanker ul_power_;
  std::uint64_t size_;
};

struct CatalogCounts {
  std::uint64_t subcarrier_patterns = 0;  // (downlink, uplink) ownership patterns with a feasible power completion
  std::uint64_t power_patterns = 0;       // (downlink, uplink) active-set + level configurations
  std::uint64_t total = 0;
};

// Fully materialized action list for one BS.
class ActionCatalog {
 public:
  const Allocation& at(ActionId id) const { return actions_.at(id); }
  std::uint64_t size() const { return actions_.size(); }
  const std::vector<Allocation>& actions() const { return actions_; }
  const CatalogCounts& counts() const { return counts_; }
  const ActionSpace& space() const { return space_; }

 private:
  friend ActionCatalog enumerate_actions(const NetworkScenario&, int, std::uint64_t);
  explicit ActionCatalog(ActionSpace space) : space_(std::move(space)) {}

  ActionSpace space_;
  std::vector<Allocation> actions_;
  CatalogCounts counts_;
};

constexpr std::uint64_t kDefaultCatalogCap = 2'000'000;

// Throws std::length_error when the catalog exceeds `cap`; use ActionSpace
// (sampled mode) for such dimensions.
ActionCatalog enumerate_actions(const NetworkScenario& s, int n, std::uint64_t cap = kDefaultCatalogCap);

enum class PowerCounting {
  Budgeted,      // level vectors of the allocated subcarriers with sum <= N_a: C(N_a, K)
  PerSubcarrier  // N_a^J, every subcarrier independently on one of N_a levels
};

struct Theorem3Options {
  PowerCounting power = PowerCounting::Budgeted;
  bool include_mu_factor = false;  // the M^{||mu_n||} factor
  int collaborative_users = 0;     // ||mu_n||
  bool all_subcarriers_allocated = false;  // restrict compositions to sum m_i = J
};

// One link's factor for a given per-user subcarrier count vector:
// prod_i C(J - sum_{k<i} m_k, m_i) times the power factor.
Count theorem3_link_count(int subcarriers, int levels, std::span<const int> per_user_counts, PowerCounting power);

// Count for one (downlink counts, uplink counts) pair.
Count theorem3_count(const ActionDims& dims, std::span<const int> dl_counts, std::span<const int> ul_counts,
                     const Theorem3Options& opts = {});

// Sum over every per-user count vector of both links.
Count theorem3_total(const ActionDims& dims, const Theorem3Options& opts = {});

// Probability that every BS picks its optimal action at the last iteration of a
// worst-case sweep: prod_n (1 - eps/|A_n|)^(|A_n| - 1).
double worst_case_probability(std::span<const double> catalog_sizes, double epsilon);

}  // namespace mecq
