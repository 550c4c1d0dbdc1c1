#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "singtens/combinatorics.hpp"
#include "singtens/tracker.hpp"

namespace singtens {

/// A refined singular tuple in the chart x_{i,1} = 1.
struct SingularTuple {
  std::vector<CVector> x;
  CVector lambda;
  double residual = 0.0;
  CTensor rank_one;  // x_1 (x) ... (x) x_k

  SystemPoint point() const { return {x, lambda}; }
};

struct TrackerStats {
  std::size_t paths_tracked = 0;
  std::map<std::string, std::size_t> failures;  // status name -> count
};

/// The singular tuples found for one tensor.
struct SolutionSet {
  Format format;
  std::vector<SingularTuple> tuples;
  std::int64_t ed = 0;
  std::uint64_t seed = 0;
  int loops_run = 0;
  bool complete = false;
  std::vector<std::string> warnings;
  TrackerStats stats;

  std::size_t size() const { return tuples.size(); }
};

struct MonodromyConfig {
  TrackerConfig tracker;
  int stall_limit = 10;     // consecutive loops without a new tuple
  int max_loops = 500;
  int start_retries = 5;
  int threads = 1;
  double dedup_tol = 1e-6;  // max-norm chart distance

  void validate() const {
    tracker.validate();
    if (stall_limit < 1 || max_loops < 1 || start_retries < 1 || threads < 1 || !(dedup_tol > 0)) {
      throw std::invalid_argument("invalid monodromy configuration");
    }
  }
};

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::int64_t ed_degree_int(const Format& format) {
  const BigInt ed = ed_degree(format);
  if (ed > BigInt(std::numeric_limits<std::int64_t>::max())) throw SolveError("ED degree too large to solve for");
  return static_cast<std::int64_t>(ed);
}

/// Max-norm distance between the x-blocks of two points.
inline double chart_distance(const std::vector<CVector>& a, const std::vector<CVector>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t s = 0; s < a[i].size(); ++s) d = std::max(d, std::abs(a[i][s] - b[i][s]));
  return d;
}

/// Inserts a refined candidate unless an existing tuple lies within `tol`
/// in chart coordinates. The chart coordinates x_{i,1} are pinned to 1.
inline bool dedup_insert(SolutionSet& set, const SystemPoint& candidate, double residual, double tol = 1e-6) {
  SingularTuple t{candidate.x, candidate.lambda, residual, {}};
  for (auto& xi : t.x) xi[0] = 1.0;
  for (const auto& existing : set.tuples) {
    if (chart_distance(existing.x, t.x) < tol) return false;
  }
  t.rank_one = rank_one(t.x);
  set.tuples.push_back(std::move(t));
  return true;
}

namespace detail {

/// Runs f(i) for i in [0, n) on up to `threads` workers; results are written
/// by index, so the outcome does not depend on the thread count.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) f(i);
    });
  }
}

inline CTensor random_like(const CTensor& U, std::uint64_t seed) {
  CTensor R = random_tensor(U.format(), seed);
  const double target = U.norm();
  if (target > 0) R *= cplx(target / R.norm());
  return R;
}

}  // namespace detail

/// Collects the singular tuples of U: one start path from a constructed start
/// pair, then monodromy loops U -> U1 -> U2 -> U through fresh random tensors
/// until ed(n) tuples are known or `stall_limit` loops add nothing.
inline SolutionSet solve_singular_tuples(const CTensor& U, std::uint64_t seed, const MonodromyConfig& cfg = {}) {
  cfg.validate();
  const Format& format = U.format();
  const SingularSystem sys(format);
  SolutionSet set;
  set.format = format;
  set.seed = seed;
  set.ed = ed_degree_int(format);

  Rng phases(seed, 0x9a77a);
  auto record = [&](const TrackResult& r) {
    ++set.stats.paths_tracked;
    if (r.status != TrackStatus::success) ++set.stats.failures[to_string(r.status)];
  };
  auto refine_and_insert = [&](const SystemPoint& p) {
    try {
      auto ref = newton_refine(sys, p, U, cfg.tracker.newton_tol, cfg.tracker.endpoint_refine_iters);
      for (auto& xi : ref.point.x) xi[0] = 1.0;
      const double res = residual_norm(sys, ref.point, U);
      if (res >= cfg.tracker.newton_tol) return false;
      return dedup_insert(set, ref.point, res, cfg.dedup_tol);
    } catch (const SingularMatrix&) {
      return false;
    }
  };

  bool started = false;
  for (int attempt = 0; attempt < cfg.start_retries && !started; ++attempt) {
    auto [U_star, p_star] = start_pair(format, mix_seed(seed, 0x5000 + static_cast<std::uint64_t>(attempt)));
    const auto r = track(sys, p_star, U_star, U, phases.unit_phase(), cfg.tracker);
    record(r);
    if (r.status == TrackStatus::success) started = refine_and_insert(r.endpoint);
  }
  if (!started) {
    throw SolveError("could not track any start solution to the target tensor after " +
                     std::to_string(cfg.start_retries) + " attempts");
  }

  int stall = 0;
  while (static_cast<std::int64_t>(set.size()) < set.ed && stall < cfg.stall_limit && set.loops_run < cfg.max_loops) {
    const auto loop = static_cast<std::uint64_t>(set.loops_run);
    const CTensor U1 = detail::random_like(U, mix_seed(seed, 0x10000 + 2 * loop));
    const CTensor U2 = detail::random_like(U, mix_seed(seed, 0x10001 + 2 * loop));
    const cplx g1 = phases.unit_phase(), g2 = phases.unit_phase(), g3 = phases.unit_phase();

    std::vector<SystemPoint> known;
    known.reserve(set.size());
    for (const auto& t : set.tuples) known.push_back(t.point());

    std::vector<std::vector<TrackResult>> legs(known.size());
    detail::parallel_for(known.size(), cfg.threads, [&](std::size_t i) {
      auto a = track(sys, known[i], U, U1, g1, cfg.tracker);
      legs[i].push_back(a);
      if (a.status != TrackStatus::success) return;
      auto b = track(sys, a.endpoint, U1, U2, g2, cfg.tracker);
      legs[i].push_back(b);
      if (b.status != TrackStatus::success) return;
      legs[i].push_back(track(sys, b.endpoint, U2, U, g3, cfg.tracker));
    });

    std::size_t added = 0;
    for (const auto& path : legs) {
      for (const auto& r : path) record(r);
      if (path.size() == 3 && path.back().status == TrackStatus::success) {
        if (refine_and_insert(path.back().endpoint)) ++added;
      }
    }
    ++set.loops_run;
    stall = added ? 0 : stall + 1;
  }

  set.complete = static_cast<std::int64_t>(set.size()) == set.ed;
  if (!set.complete) {
    set.warnings.push_back("found " + std::to_string(set.size()) + " of " + std::to_string(set.ed) +
                           " singular tuples after " + std::to_string(set.loops_run) +
                           " monodromy loops; the tensor may be non-generic. Re-running after a random "
                           "orthogonal change of basis on each factor may help.");
  }
  return set;
}

struct SpecializationCheck {
  bool supported = true;   // every tuple vanishes beyond the original last dimension
  bool skipped = false;    // nothing was padded
  double max_leakage = 0;  // max_{t, j > N} |x_{k,j}| / |x_k|
  SolutionSet solutions;
};

/// Pads U (last dimension N) with zeros to last dimension m, solves the padded
/// tensor and checks that every tuple is supported on the first N coordinates
/// of the last factor.
inline SpecializationCheck check_specialization(const CTensor& U, std::size_t m, std::uint64_t seed,
                                                const MonodromyConfig& cfg = {}, double leak_tol = 1e-8) {
  SpecializationCheck out;
  const std::size_t N = U.format().last_dim();
  if (m <= N) {
    out.skipped = true;
    return out;
  }
  const CTensor padded = pad_last(U, m);
  out.solutions = solve_singular_tuples(padded, seed, cfg);
  const std::size_t k = padded.format().order();
  for (const auto& t : out.solutions.tuples) {
    const CVector& xk = t.x[k - 1];
    const double scale = norm2(xk);
    for (std::size_t j = N; j < m; ++j) out.max_leakage = std::max(out.max_leakage, std::abs(xk[j]) / scale);
  }
  out.supported = out.max_leakage < leak_tol;
  return out;
}

}  // namespace singtens
