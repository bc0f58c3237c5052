#include "mecq/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "mecq/task_model.hpp"

namespace mecq {

namespace {

using Mask = std::vector<std::uint64_t>;

Mask holdings(const Allocation& a) {
  const std::size_t bits = a.u.size() + a.d.size();
  Mask mask((bits + 63) / 64, 0);
  std::size_t b = 0;
  for (auto x : a.u) {
    if (x) mask[b / 64] |= std::uint64_t{1} << (b % 64);
    ++b;
  }
  for (auto x : a.d) {
    if (x) mask[b / 64] |= std::uint64_t{1} << (b % 64);
    ++b;
  }
  return mask;
}

bool overlaps(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] & b[i]) return true;
  return false;
}

struct Partial {
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t id = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t evaluated = 0;
  std::uint64_t skipped = 0;
};

}  // namespace

OracleResult solve_exhaustive(const NetworkScenario& s, const OracleOptions& opts) {
  s.validate();
  const ActionCatalog cat = enumerate_actions(s, 0, opts.catalog_cap);
  const std::uint64_t A = cat.size();
  const int N = s.n_bs;

  std::uint64_t total = 1;
  for (int n = 0; n < N; ++n) {
    if (total > opts.cap / A) {
      throw std::length_error("exhaustive search needs " + std::to_string(A) + "^" + std::to_string(N) +
                              " joint combinations, above the cap of " + std::to_string(opts.cap));
    }
    total *= A;
  }

  std::vector<Mask> masks;
  masks.reserve(A);
  for (const auto& a : cat.actions()) masks.push_back(holdings(a));

  auto scan = [&](std::uint64_t lo, std::uint64_t hi) {
    Partial p;
    std::vector<std::uint64_t> digit(N);
    GlobalAllocation g;
    g.per_bs.resize(N);
    for (std::uint64_t j = lo; j < hi; ++j) {
      std::uint64_t rest = j;
      for (int n = N - 1; n >= 0; --n) {
        digit[n] = rest % A;
        rest /= A;
      }
      bool clash = false;
      for (int a = 0; a < N && !clash; ++a)
        for (int b = a + 1; b < N && !clash; ++b) clash = overlaps(masks[digit[a]], masks[digit[b]]);
      if (clash) {
        ++p.skipped;
        continue;
      }
      for (int n = 0; n < N; ++n) g.per_bs[n] = cat.at(digit[n]);
      const double t = evaluate(s, g).max_delay;
      ++p.evaluated;
      if (t < p.value || p.id == std::numeric_limits<std::uint64_t>::max()) {
        p.value = t;
        p.id = j;
      }
    }
    return p;
  };

  int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::uint64_t>(threads, total));
  std::vector<Partial> parts(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    const std::uint64_t lo = total * t / threads;
    const std::uint64_t hi = total * (t + 1) / threads;
    if (threads == 1) parts[t] = scan(lo, hi);
    else pool.emplace_back([&, t, lo, hi] { parts[t] = scan(lo, hi); });
  }
  for (auto& th : pool) th.join();

  Partial best;
  std::uint64_t evaluated = 0, skipped = 0;
  for (const auto& p : parts) {
    evaluated += p.evaluated;
    skipped += p.skipped;
    if (p.id == std::numeric_limits<std::uint64_t>::max()) continue;
    if (best.id == std::numeric_limits<std::uint64_t>::max() || p.value < best.value) best = p;
  }
  if (best.id == std::numeric_limits<std::uint64_t>::max()) throw std::logic_error("no feasible joint allocation");

  OracleResult r;
  r.best_max_delay = best.value;
  r.evaluated_count = evaluated;
  r.skipped_count = skipped;
  r.best_ids.resize(N);
  std::uint64_t rest = best.id;
  for (int n = N - 1; n >= 0; --n) {
    r.best_ids[n] = rest % A;
    rest /= A;
  }
  for (int n = 0; n < N; ++n) r.best_allocation.per_bs.push_back(cat.at(r.best_ids[n]));
  return r;
}

}  // namespace mecq
