#include "mecq/action_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mecq {

namespace {

constexpr Count kU64Max = std::numeric_limits<std::uint64_t>::max();

std::uint64_t narrow(Count c, const char* what) {
  if (c > kU64Max) throw std::overflow_error(std::string(what) + " does not fit in 64 bits");
  return static_cast<std::uint64_t>(c);
}

Count checked_mul(Count a, Count b) {
  if (a != 0 && b > std::numeric_limits<Count>::max() / a) throw std::overflow_error("count overflow");
  return a * b;
}

Count ipow(Count base, int exp) {
  Count r = 1;
  for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

std::vector<Count> budgeted_weights(int slots, int levels) {
  std::vector<Count> w(slots + 1);
  for (int k = 0; k <= slots; ++k) w[k] = binomial(levels, k);
  return w;
}

std::vector<Count> indicator_weights(int slots, int levels) {
  std::vector<Count> w(slots + 1);
  for (int k = 0; k <= slots; ++k) w[k] = k <= levels ? 1 : 0;
  return w;
}

}  // namespace

Count binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  Count r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<Count>(n - k + i) / static_cast<Count>(i);
  return r;
}

std::string to_string(Count c) {
  if (c == 0) return "0";
  std::string s;
  while (c > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(c % 10)));
    c /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

PatternRanker::PatternRanker(int slots, int alphabet, std::vector<Count> weight_by_k)
    : slots_(slots), alphabet_(alphabet), weight_(std::move(weight_by_k)) {
  if (slots < 0 || alphabet < 1) throw std::invalid_argument("PatternRanker: bad shape");
  if (weight_.size() != static_cast<std::size_t>(slots) + 1) throw std::invalid_argument("PatternRanker: weight size");
  tail_.assign(slots + 1, std::vector<Count>(slots + 2, 0));
  for (int k = 0; k <= slots; ++k) tail_[slots][k] = weight_[k];
  for (int pos = slots - 1; pos >= 0; --pos) {
    for (int k = 0; k <= pos; ++k) {
      tail_[pos][k] = tail_[pos + 1][k] + checked_mul(static_cast<Count>(alphabet), tail_[pos + 1][k + 1]);
    }
  }
  total_ = narrow(tail_[0][0], "pattern space");
}

std::uint64_t PatternRanker::prefix(std::span<const int> pattern) const {
  if (pattern.size() != static_cast<std::size_t>(slots_)) throw std::invalid_argument("pattern length mismatch");
  Count r = 0;
  int k = 0;
  for (int pos = 0; pos < slots_; ++pos) {
    const int val = pattern[pos];
    if (val < 0 || val > alphabet_) throw std::invalid_argument("pattern symbol out of range");
    if (val > 0) {
      r += tail_[pos + 1][k];
      r += static_cast<Count>(val - 1) * tail_[pos + 1][k + 1];
      ++k;
    }
  }
  return narrow(r, "pattern prefix");
}

std::pair<std::vector<int>, std::uint64_t> PatternRanker::locate(std::uint64_t r) const {
  if (r >= total_) throw std::out_of_range("pattern id out of range");
  std::vector<int> pattern(slots_, 0);
  Count rem = r;
  int k = 0;
  for (int pos = 0; pos < slots_; ++pos) {
    const Count none = tail_[pos + 1][k];
    if (rem < none) continue;
    rem -= none;
    const Count each = tail_[pos + 1][k + 1];
    pattern[pos] = 1 + static_cast<int>(rem / each);
    rem %= each;
    ++k;
  }
  return {std::move(pattern), static_cast<std::uint64_t>(rem)};
}

std::uint64_t level_vector_count(int k, int levels) { return narrow(binomial(levels, k), "level vectors"); }

std::uint64_t level_vector_rank(std::span<const int> lv, int levels) {
  const int k = static_cast<int>(lv.size());
  Count r = 0;
  int budget = levels;
  for (int i = 0; i < k; ++i) {
    const int rem = k - i;
    if (lv[i] < 1 || lv[i] > budget) throw std::invalid_argument("power level vector outside the budget");
    for (int val = 1; val < lv[i]; ++val) r += binomial(budget - val, rem - 1);
    budget -= lv[i];
  }
  return narrow(r, "level rank");
}

std::vector<int> level_vector_unrank(std::uint64_t r, int k, int levels) {
  if (r >= level_vector_count(k, levels)) throw std::out_of_range("level vector id out of range");
  std::vector<int> lv(k);
  Count rem = r;
  int budget = levels;
  for (int i = 0; i < k; ++i) {
    const int left = k - i;
    int val = 1;
    for (;; ++val) {
      const Count c = binomial(budget - val, left - 1);
      if (rem < c) break;
      rem -= c;
    }
    lv[i] = val;
    budget -= val;
  }
  return lv;
}

int LinkAction::allocated() const {
  return static_cast<int>(std::count_if(owner.begin(), owner.end(), [](int o) { return o >= 0; }));
}

ActionSpace::ActionSpace(ActionDims dims, double p_max_ul_w, double p_max_dl_w)
    : dims_(dims),
      p_ul_(p_max_ul_w),
      p_dl_(p_max_dl_w),
      dl_(dims.n_dl, dims.users, budgeted_weights(dims.n_dl, dims.levels)),
      ul_(dims.n_ul, dims.users, budgeted_weights(dims.n_ul, dims.levels)),
      dl_owner_(dims.n_dl, dims.users, indicator_weights(dims.n_dl, dims.levels)),
      ul_owner_(dims.n_ul, dims.users, indicator_weights(dims.n_ul, dims.levels)),
      dl_power_(dims.n_dl, 1, budgeted_weights(dims.n_dl, dims.levels)),
      ul_power_(dims.n_ul, 1, budgeted_weights(dims.n_ul, dims.levels)),
      size_(narrow(static_cast<Count>(dl_.total()) * ul_.total(), "action space")) {
  if (dims.users < 1 || dims.levels < 1) throw std::invalid_argument("ActionSpace: need >= 1 user and >= 1 level");
  if (!(p_max_ul_w > 0.0) || !(p_max_dl_w > 0.0)) throw std::invalid_argument("ActionSpace: budgets must be positive");
}

ActionSpace ActionSpace::for_scenario(const NetworkScenario& s) {
  return ActionSpace(ActionDims::of(s), s.p_max_ul_w, s.p_max_dl_w);
}

namespace {

std::vector<int> to_symbols(const std::vector<int>& owner) {
  std::vector<int> p(owner.size());
  for (std::size_t i = 0; i < owner.size(); ++i) p[i] = owner[i] + 1;
  return p;
}

int filled(const std::vector<int>& pattern) {
  return static_cast<int>(std::count_if(pattern.begin(), pattern.end(), [](int x) { return x > 0; }));
}

void check_link(const LinkAction& a, int slots, int users, int levels) {
  if (a.owner.size() != static_cast<std::size_t>(slots)) throw std::invalid_argument("link action has wrong width");
  for (int o : a.owner)
    if (o < -1 || o >= users) throw std::invalid_argument("link action owner out of range");
  if (a.level.size() != static_cast<std::size_t>(a.allocated()))
    throw std::invalid_argument("one power level per allocated subcarrier required");
  int sum = 0;
  for (int l : a.level) {
    if (l < 1) throw std::invalid_argument("power level must be at least 1");
    sum += l;
  }
  if (sum > levels) throw std::invalid_argument("power levels exceed the link budget");
}

}  // namespace

ActionId ActionSpace::encode_links(const LinkAction& dl, const LinkAction& ul) const {
  check_link(dl, dims_.n_dl, dims_.users, dims_.levels);
  check_link(ul, dims_.n_ul, dims_.users, dims_.levels);
  const auto dpat = to_symbols(dl.owner);
  const auto upat = to_symbols(ul.owner);
  const std::uint64_t cd = dl_.weight(dl.allocated());
  const std::uint64_t cu = ul_.weight(ul.allocated());
  const std::uint64_t w_rank = level_vector_rank(dl.level, dims_.levels);
  const std::uint64_t v_rank = level_vector_rank(ul.level, dims_.levels);
  return dl_.prefix(dpat) * ul_.total() + cd * ul_.prefix(upat) + w_rank * cu + v_rank;
}

std::pair<LinkAction, LinkAction> ActionSpace::decode_links(ActionId id) const {
  if (id >= size_) throw std::out_of_range("action id out of range");
  const std::uint64_t ul_total = ul_.total();
  auto dpat = dl_.locate(id / ul_total).first;
  const int kd = filled(dpat);
  const std::uint64_t cd = dl_.weight(kd);
  const std::uint64_t rest = id - dl_.prefix(dpat) * ul_total;
  auto upat = ul_.locate(rest / cd).first;
  const int ku = filled(upat);
  const std::uint64_t cu = ul_.weight(ku);
  const std::uint64_t inner = rest - cd * ul_.prefix(upat);

  LinkAction dl, ul;
  dl.owner.resize(dpat.size());
  ul.owner.resize(upat.size());
  for (std::size_t j = 0; j < dpat.size(); ++j) dl.owner[j] = dpat[j] - 1;
  for (std::size_t i = 0; i < upat.size(); ++i) ul.owner[i] = upat[i] - 1;
  dl.level = level_vector_unrank(inner / cu, kd, dims_.levels);
  ul.level = level_vector_unrank(inner % cu, ku, dims_.levels);
  return {std::move(dl), std::move(ul)};
}

Allocation ActionSpace::compose(const LinkAction& dl, const LinkAction& ul) const {
  Allocation a(dims_.users, dims_.n_ul, dims_.n_dl);
  const double dl_step = p_dl_ / dims_.levels;
  const double ul_step = p_ul_ / dims_.levels;
  std::size_t k = 0;
  for (int j = 0; j < dims_.n_dl; ++j)
    if (dl.owner[j] >= 0) a.assign_dl(dl.owner[j], j, dl.level[k++] * dl_step);
  k = 0;
  for (int i = 0; i < dims_.n_ul; ++i)
    if (ul.owner[i] >= 0) a.assign_ul(ul.owner[i], i, ul.level[k++] * ul_step);
  return a;
}

Allocation ActionSpace::decode(ActionId id) const {
  const auto [dl, ul] = decode_links(id);
  return compose(dl, ul);
}

LinkAction ActionSpace::link_of(const Allocation& a, bool downlink) const {
  if (a.users != dims_.users || a.n_ul != dims_.n_ul || a.n_dl != dims_.n_dl)
    throw std::invalid_argument("allocation shape does not match the action space");
  const int slots = downlink ? dims_.n_dl : dims_.n_ul;
  const double step = (downlink ? p_dl_ : p_ul_) / dims_.levels;
  LinkAction out;
  out.owner.assign(slots, -1);
  for (int k = 0; k < slots; ++k) {
    for (int m = 0; m < dims_.users; ++m) {
      const bool on = downlink ? a.dl_on(m, k) : a.ul_on(m, k);
      const double p = downlink ? a.dl_power(m, k) : a.ul_power(m, k);
      if (!on) {
        if (p != 0.0) throw std::invalid_argument("power on an unallocated subcarrier");
        continue;
      }
      if (out.owner[k] >= 0) throw std::invalid_argument("subcarrier allocated to several users");
      const double q = p / step;
      const int level = static_cast<int>(std::lround(q));
      if (level < 1 || std::abs(q - level) > 1e-9 * std::max(1.0, q))
        throw std::invalid_argument("allocated subcarrier without a positive grid power level");
      out.owner[k] = m;
      out.level.push_back(level);
    }
  }
  return out;
}

ActionId ActionSpace::encode(const Allocation& a) const { return encode_links(link_of(a, true), link_of(a, false)); }

ActionId ActionSpace::complete_subcarrier_key(std::uint64_t key, Rng& rng) const {
  if (key >= subcarrier_key_count()) throw std::out_of_range("subcarrier key out of range");
  const auto dpat = dl_owner_.locate(key / ul_owner_.total()).first;
  const auto upat = ul_owner_.locate(key % ul_owner_.total()).first;
  LinkAction dl, ul;
  for (int x : dpat) dl.owner.push_back(x - 1);
  for (int x : upat) ul.owner.push_back(x - 1);
  dl.level = level_vector_unrank(rng.below(level_vector_count(dl.allocated(), dims_.levels)), dl.allocated(), dims_.levels);
  ul.level = level_vector_unrank(rng.below(level_vector_count(ul.allocated(), dims_.levels)), ul.allocated(), dims_.levels);
  return encode_links(dl, ul);
}

ActionId ActionSpace::complete_power_key(std::uint64_t key, Rng& rng) const {
  if (key >= power_key_count()) throw std::out_of_range("power key out of range");
  auto [dact, doff] = dl_power_.locate(key / ul_power_.total());
  auto [uact, uoff] = ul_power_.locate(key % ul_power_.total());
  LinkAction dl, ul;
  for (int x : dact) dl.owner.push_back(x > 0 ? rng.below_int(dims_.users) : -1);
  for (int x : uact) ul.owner.push_back(x > 0 ? rng.below_int(dims_.users) : -1);
  dl.level = level_vector_unrank(doff, dl.allocated(), dims_.levels);
  ul.level = level_vector_unrank(uoff, ul.allocated(), dims_.levels);
  return encode_links(dl, ul);
}

ActionCatalog enumerate_actions(const NetworkScenario& s, int n, std::uint64_t cap) {
  if (n < 0 || n >= s.n_bs) throw std::out_of_range("BS index out of range");
  ActionCatalog cat(ActionSpace::for_scenario(s));
  const std::uint64_t total = cat.space_.size();
  if (total > cap) {
    throw std::length_error("action catalog has " + std::to_string(total) + " entries, above the cap of " +
                            std::to_string(cap) + "; use the sampled action mode (ActionSpace) for these dimensions");
  }
  cat.actions_.reserve(total);
  for (ActionId id = 0; id < total; ++id) cat.actions_.push_back(cat.space_.decode(id));
  cat.counts_.subcarrier_patterns = cat.space_.subcarrier_key_count();
  cat.counts_.power_patterns = cat.space_.power_key_count();
  cat.counts_.total = total;
  return cat;
}

Count theorem3_link_count(int subcarriers, int levels, std::span<const int> per_user_counts, PowerCounting power) {
  Count product = 1;
  int used = 0;
  for (int mi : per_user_counts) {
    if (mi < 0) throw std::invalid_argument("per-user subcarrier counts must be >= 0");
    product = checked_mul(product, binomial(subcarriers - used, mi));
    used += mi;
  }
  if (used > subcarriers) return 0;
  const Count power_factor =
      power == PowerCounting::Budgeted ? binomial(levels, used) : ipow(static_cast<Count>(levels), subcarriers);
  return checked_mul(product, power_factor);
}

namespace {

Count mu_factor(const ActionDims& dims, const Theorem3Options& opts) {
  return opts.include_mu_factor ? ipow(static_cast<Count>(dims.users), opts.collaborative_users) : 1;
}

void sum_compositions(int subcarriers, int levels, int users, const Theorem3Options& opts, std::vector<int>& counts,
                      int used, Count& acc) {
  const int idx = static_cast<int>(counts.size());
  if (idx == users) {
    if (opts.all_subcarriers_allocated && used != subcarriers) return;
    acc += theorem3_link_count(subcarriers, levels, counts, opts.power);
    return;
  }
  for (int mi = 0; used + mi <= subcarriers; ++mi) {
    counts.push_back(mi);
    sum_compositions(subcarriers, levels, users, opts, counts, used + mi, acc);
    counts.pop_back();
  }
}

}  // namespace

Count theorem3_count(const ActionDims& dims, std::span<const int> dl_counts, std::span<const int> ul_counts,
                     const Theorem3Options& opts) {
  if (dl_counts.size() != static_cast<std::size_t>(dims.users) || ul_counts.size() != static_cast<std::size_t>(dims.users))
    throw std::invalid_argument("one subcarrier count per user required");
  const Count dl = theorem3_link_count(dims.n_dl, dims.levels, dl_counts, opts.power);
  const Count ul = theorem3_link_count(dims.n_ul, dims.levels, ul_counts, opts.power);
  return checked_mul(checked_mul(dl, ul), mu_factor(dims, opts));
}

Count theorem3_total(const ActionDims& dims, const Theorem3Options& opts) {
  Count dl = 0, ul = 0;
  std::vector<int> scratch;
  sum_compositions(dims.n_dl, dims.levels, dims.users, opts, scratch, 0, dl);
  scratch.clear();
  sum_compositions(dims.n_ul, dims.levels, dims.users, opts, scratch, 0, ul);
  return checked_mul(checked_mul(dl, ul), mu_factor(dims, opts));
}

double worst_case_probability(std::span<const double> catalog_sizes, double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must lie in [0, 1]");
  double log_p = 0.0;
  for (double size : catalog_sizes) {
    if (!(size >= 1.0)) throw std::invalid_argument("catalog sizes must be >= 1");
    log_p += (size - 1.0) * std::log1p(-epsilon / size);
  }
  return std::exp(log_p);
}

}  // namespace mecq
