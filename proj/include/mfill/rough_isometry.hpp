#pragma once

// eps-isometries between finite spaces: distortion and covering radius,
// AI-distance, inverse maps, and Gromov-Hausdorff distance via
// correspondences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mfill/error.hpp"
#include "mfill/moebius.hpp"
#include "mfill/random.hpp"
#include "mfill/semimetric.hpp"

namespace mfill {

/// A total map between two finite spaces given by their separation matrices.
struct PointMap {
  SquareMatrix source;
  SquareMatrix target;
  std::vector<std::size_t> assignment;

  PointMap(SquareMatrix src, SquareMatrix tgt, std::vector<std::size_t> f)
      : source(std::move(src)), target(std::move(tgt)), assignment(std::move(f)) {
    if (assignment.size() != source.size())
      throw Error(ErrorCode::DimensionMismatch, "map is not total: " + std::to_string(assignment.size()) +
                                                    " images for " + std::to_string(source.size()) + " points");
    for (auto y : assignment)
      if (y >= target.size()) throw Error(ErrorCode::DimensionMismatch, "image index out of range");
  }
  PointMap(const FiniteSemiMetric& src, const FiniteSemiMetric& tgt, std::vector<std::size_t> f)
      : PointMap(src.matrix(), tgt.matrix(), std::move(f)) {}
};

inline PointMap identity_map(const SquareMatrix& m) {
  std::vector<std::size_t> id(m.size());
  std::iota(id.begin(), id.end(), std::size_t{0});
  return PointMap(m, m, std::move(id));
}

namespace detail {
inline double distortion(const SquareMatrix& src, const SquareMatrix& tgt, std::span<const std::size_t> f) {
  double dis = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) dis = std::max(dis, std::abs(tgt(f[i], f[j]) - src(i, j)));
  return dis;
}

inline double covering_radius(const SquareMatrix& tgt, std::span<const std::size_t> f) {
  double cov = 0.0;
  for (std::size_t y = 0; y < tgt.size(); ++y) {
    double near = std::numeric_limits<double>::infinity();
    for (auto fx : f) near = std::min(near, tgt(y, fx));
    cov = std::max(cov, near);
  }
  return cov;
}
}  // namespace detail

/// sup over source pairs of |rho_2(f x, f x') - rho_1(x, x')|.
inline double distortion(const PointMap& f) { return detail::distortion(f.source, f.target, f.assignment); }

/// Smallest r such that every target point is within r of the image.
inline double covering_radius(const PointMap& f) { return detail::covering_radius(f.target, f.assignment); }

struct RoughIsometryReport {
  double distortion = 0.0;
  double covering_radius = 0.0;
  double epsilon = 0.0;  // max of the two
};

inline RoughIsometryReport rough_isometry_report(const PointMap& f) {
  RoughIsometryReport r{distortion(f), covering_radius(f), 0.0};
  r.epsilon = std::max(r.distortion, r.covering_radius);
  return r;
}

struct EpsIsometryCheck {
  bool holds = false;
  RoughIsometryReport report;
};

/// Strict comparisons: distortion < eps and the image is an open eps-net.
inline EpsIsometryCheck is_eps_isometry(const PointMap& f, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParameter, "eps must be positive");
  EpsIsometryCheck c{false, rough_isometry_report(f)};
  c.holds = c.report.distortion < eps && c.report.covering_radius < eps;
  return c;
}

/// g(y) = the source point whose image is nearest to y, lowest index on ties.
/// For an eps-isometry between metric spaces, g has distortion <= 3 eps and
/// its image is an eps-net.
inline PointMap invert_rough_isometry(const PointMap& f) {
  std::vector<std::size_t> g(f.target.size());
  for (std::size_t y = 0; y < f.target.size(); ++y) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < f.assignment.size(); ++x) {
      const double d = f.target(y, f.assignment[x]);
      if (d < best_d) {
        best_d = d;
        best = x;
      }
    }
    g[y] = best;
  }
  return PointMap(f.target, f.source, std::move(g));
}

// ---------------------------------------------------------------------------
// AI-distance

enum class SearchMode { Exact, Heuristic };

struct SearchOptions {
  SearchMode mode = SearchMode::Exact;
  std::size_t restarts = 32;
  std::uint64_t seed = 0;
  std::size_t exact_max_points = 8;
};

namespace detail {

/// All terms of max(distortion, covering radius), sorted descending.
/// primary is the objective; the rest breaks plateaus lexicographically
/// (smallest worst term, then smallest second-worst, ...).
struct MapScore {
  double primary;
  std::vector<double> terms;
};

inline MapScore score_map(const SquareMatrix& src, const SquareMatrix& tgt, std::span<const std::size_t> f) {
  MapScore s{0.0, {}};
  s.terms.reserve(f.size() * (f.size() - 1) / 2 + tgt.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) s.terms.push_back(std::abs(tgt(f[i], f[j]) - src(i, j)));
  for (std::size_t y = 0; y < tgt.size(); ++y) {
    double near = std::numeric_limits<double>::infinity();
    for (auto fx : f) near = std::min(near, tgt(y, fx));
    s.terms.push_back(near);
  }
  std::sort(s.terms.begin(), s.terms.end(), std::greater<>());
  s.primary = s.terms.empty() ? 0.0 : s.terms.front();
  return s;
}

inline bool better(const MapScore& a, const MapScore& b) {
  constexpr double eps = 1e-15;
  const std::size_t n = std::min(a.terms.size(), b.terms.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a.terms[k] < b.terms[k] - eps) return true;
    if (a.terms[k] > b.terms[k] + eps) return false;
  }
  return false;
}

inline std::vector<std::size_t> eccentricity_order(const SquareMatrix& m) {
  std::vector<double> ecc(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) ecc[i] = std::max(ecc[i], m(i, j));
  std::vector<std::size_t> order(m.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ecc[a] > ecc[b]; });
  return order;
}

/// Best single-point reassignment; true if it improved `cur`.
inline bool single_move(const SquareMatrix& src, const SquareMatrix& tgt, std::vector<std::size_t>& f, MapScore& cur) {
  bool improved = false;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const std::size_t keep = f[x];
    std::size_t best_y = keep;
    for (std::size_t y = 0; y < tgt.size(); ++y) {
      if (y == keep) continue;
      f[x] = y;
      const MapScore s = score_map(src, tgt, f);
      if (better(s, cur)) {
        cur = s;
        best_y = y;
      }
    }
    f[x] = best_y;
    improved |= best_y != keep;
  }
  return improved;
}

/// First improving simultaneous reassignment of two points. Only tried on
/// small pairs, where the max objective often has no improving single move.
inline bool pair_move(const SquareMatrix& src, const SquareMatrix& tgt, std::vector<std::size_t>& f, MapScore& cur) {
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b) {
      const std::size_t ka = f[a], kb = f[b];
      for (std::size_t ya = 0; ya < tgt.size(); ++ya)
        for (std::size_t yb = 0; yb < tgt.size(); ++yb) {
          if (ya == ka && yb == kb) continue;
          f[a] = ya;
          f[b] = yb;
          const MapScore s = score_map(src, tgt, f);
          if (better(s, cur)) {
            cur = s;
            return true;
          }
        }
      f[a] = ka;
      f[b] = kb;
    }
  return false;
}

/// Hill climbing from a start map: single-point moves, then pair moves when
/// the source is small enough for them to be cheap.
inline MapScore hill_climb(const SquareMatrix& src, const SquareMatrix& tgt, std::vector<std::size_t>& f) {
  constexpr std::size_t pair_limit = 12;
  MapScore cur = score_map(src, tgt, f);
  while (single_move(src, tgt, f, cur) ||
         (std::max(src.size(), tgt.size()) <= pair_limit && pair_move(src, tgt, f, cur))) {
  }
  return cur;
}

struct DirectionResult {
  double value;
  std::vector<std::size_t> map;
};

/// Restart 0 matches points in order of decreasing eccentricity; the other
/// restarts start from random maps. Each is polished by hill climbing.
inline DirectionResult heuristic_direction(const SquareMatrix& src, const SquareMatrix& tgt, std::size_t restarts,
                                           std::uint64_t seed) {
  DirectionResult best{std::numeric_limits<double>::infinity(), {}};
  MapScore best_score{std::numeric_limits<double>::infinity(), {std::numeric_limits<double>::infinity()}};
  const auto so = eccentricity_order(src), to = eccentricity_order(tgt);
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    std::vector<std::size_t> f(src.size());
    if (r == 0) {
      for (std::size_t k = 0; k < so.size(); ++k) f[so[k]] = to[k % to.size()];
    } else {
      Rng rng(derive_seed(seed, r));
      for (auto& y : f) y = rng.index(tgt.size());
    }
    const MapScore s = hill_climb(src, tgt, f);
    if (better(s, best_score)) {
      best_score = s;
      best = {s.primary, f};
    }
  }
  return best;
}

/// Branch and bound over all maps, pruning on partial distortion.
class ExactDirection {
 public:
  ExactDirection(const SquareMatrix& src, const SquareMatrix& tgt, DirectionResult start)
      : src_(src), tgt_(tgt), best_(std::move(start)), f_(src.size()) {}

  DirectionResult run() {
    dfs(0, 0.0);
    return best_;
  }

 private:
  void dfs(std::size_t depth, double partial) {
    if (depth == f_.size()) {
      const double v = std::max(partial, covering_radius(tgt_, f_));
      if (v < best_.value) best_ = {v, f_};
      return;
    }
    for (std::size_t y = 0; y < tgt_.size(); ++y) {
      double p = partial;
      for (std::size_t i = 0; i < depth && p < best_.value; ++i)
        p = std::max(p, std::abs(tgt_(f_[i], y) - src_(i, depth)));
      if (p >= best_.value) continue;
      f_[depth] = y;
      dfs(depth + 1, p);
    }
  }

  const SquareMatrix& src_;
  const SquareMatrix& tgt_;
  DirectionResult best_;
  std::vector<std::size_t> f_;
};

inline DirectionResult best_direction(const SquareMatrix& src, const SquareMatrix& tgt, const SearchOptions& opts) {
  DirectionResult h = heuristic_direction(src, tgt, opts.restarts, opts.seed);
  if (opts.mode == SearchMode::Heuristic) return h;
  return ExactDirection(src, tgt, std::move(h)).run();
}

}  // namespace detail

struct AiResult {
  double value = 0.0;
  PointMap forward;   // a -> b
  PointMap backward;  // b -> a
  bool exact = false;
};

/// min over map pairs (f, g) of max(Dis f, cov f, Dis g, cov g). The two
/// directions are independent, so each is minimized separately. Every
/// eps strictly above the value is witnessed by (forward, backward).
inline AiResult ai_distance(const SquareMatrix& a, const SquareMatrix& b, SearchOptions opts = {}) {
  if (opts.mode == SearchMode::Exact && std::max(a.size(), b.size()) > opts.exact_max_points)
    throw Error(ErrorCode::ExactBudgetExceeded, "exact AI search is limited to " +
                                                    std::to_string(opts.exact_max_points) + " points per space");
  auto fwd = detail::best_direction(a, b, opts);
  auto bwd = detail::best_direction(b, a, opts);
  return AiResult{std::max(fwd.value, bwd.value), PointMap(a, b, std::move(fwd.map)), PointMap(b, a, std::move(bwd.map)),
                  opts.mode == SearchMode::Exact};
}

inline AiResult ai_distance(const FiniteSemiMetric& a, const FiniteSemiMetric& b, SearchOptions opts = {}) {
  return ai_distance(a.matrix(), b.matrix(), opts);
}

// ---------------------------------------------------------------------------
// Gromov-Hausdorff distance: half the least distortion of a correspondence.

struct Correspondence {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline double correspondence_distortion(const SquareMatrix& x, const SquareMatrix& y, const Correspondence& r) {
  double dis = 0.0;
  for (std::size_t a = 0; a < r.pairs.size(); ++a)
    for (std::size_t b = a + 1; b < r.pairs.size(); ++b)
      dis = std::max(dis, std::abs(x(r.pairs[a].first, r.pairs[b].first) - y(r.pairs[a].second, r.pairs[b].second)));
  return dis;
}

struct GhResult {
  double value = 0.0;  // d_GH estimate (exact or upper bound)
  Correspondence witness;
  bool exact = false;
};

struct GhOptions {
  SearchMode mode = SearchMode::Exact;
  std::size_t exact_max_points = 7;
  std::size_t restarts = 8;
  std::size_t anneal_steps = 20000;
  std::uint64_t seed = 0;
};

namespace detail {

inline Correspondence correspondence_of(std::span<const std::size_t> f, std::span<const std::size_t> g) {
  Correspondence r;
  for (std::size_t i = 0; i < f.size(); ++i) r.pairs.emplace_back(i, f[i]);
  for (std::size_t j = 0; j < g.size(); ++j) r.pairs.emplace_back(g[j], j);
  return r;
}

/// Annealing on map pairs (f: X -> Y, g: Y -> X); the correspondence is
/// graph(f) together with the transpose of graph(g).
inline GhResult gh_anneal(const SquareMatrix& x, const SquareMatrix& y, const GhOptions& opts) {
  const std::size_t nx = x.size(), ny = y.size();
  GhResult best{std::numeric_limits<double>::infinity(), {}, false};
  const double scale = std::max(x.max_off_diagonal(), y.max_off_diagonal());
  for (std::size_t r = 0; r < std::max<std::size_t>(opts.restarts, 1); ++r) {
    Rng rng(derive_seed(opts.seed, r));
    std::vector<std::size_t> f(nx), g(ny);
    if (r == 0) {
      const auto xo = eccentricity_order(x), yo = eccentricity_order(y);
      for (std::size_t k = 0; k < nx; ++k) f[xo[k]] = yo[k % ny];
      for (std::size_t k = 0; k < ny; ++k) g[yo[k]] = xo[k % nx];
    } else {
      for (auto& v : f) v = rng.index(ny);
      for (auto& v : g) v = rng.index(nx);
    }
    double cur = correspondence_distortion(x, y, correspondence_of(f, g));
    std::vector<std::size_t> bf = f, bg = g;
    double bcur = cur;
    for (std::size_t step = 0; step < opts.anneal_steps; ++step) {
      const double temp = 0.1 * scale * (1.0 - static_cast<double>(step) / static_cast<double>(opts.anneal_steps));
      const bool move_f = rng.index(nx + ny) < nx;
      auto& vec = move_f ? f : g;
      const std::size_t pos = rng.index(vec.size());
      const std::size_t old = vec[pos];
      vec[pos] = rng.index(move_f ? ny : nx);
      const double cand = correspondence_distortion(x, y, correspondence_of(f, g));
      if (cand <= cur || (temp > 0.0 && rng.uniform() < std::exp((cur - cand) / temp))) {
        cur = cand;
        if (cur < bcur) {
          bcur = cur;
          bf = f;
          bg = g;
        }
      } else {
        vec[pos] = old;
      }
    }
    if (bcur < best.value) best = {bcur, correspondence_of(bf, bg), false};
  }
  best.value *= 0.5;
  return best;
}

/// Branch and bound over (f, g), adding one relation pair at a time.
class ExactCorrespondence {
 public:
  ExactCorrespondence(const SquareMatrix& x, const SquareMatrix& y, double upper, Correspondence start)
      : x_(x), y_(y), best_(upper), best_r_(std::move(start)) {}

  GhResult run() {
    dfs(0);
    return GhResult{0.5 * best_, best_r_, true};
  }

 private:
  void dfs(std::size_t depth) {
    const std::size_t nx = x_.size(), total = nx + y_.size();
    if (depth == total) {
      const double d = correspondence_distortion(x_, y_, cur_);
      if (d < best_) {
        best_ = d;
        best_r_ = cur_;
      }
      return;
    }
    const bool from_x = depth < nx;
    const std::size_t fixed = from_x ? depth : depth - nx;
    const std::size_t choices = from_x ? y_.size() : nx;
    for (std::size_t c = 0; c < choices; ++c) {
      const std::pair<std::size_t, std::size_t> p = from_x ? std::pair{fixed, c} : std::pair{c, fixed};
      bool ok = true;
      for (const auto& q : cur_.pairs)
        if (std::abs(x_(p.first, q.first) - y_(p.second, q.second)) >= best_) {
          ok = false;
          break;
        }
      if (!ok) continue;
      cur_.pairs.push_back(p);
      dfs(depth + 1);
      cur_.pairs.pop_back();
    }
  }

  const SquareMatrix& x_;
  const SquareMatrix& y_;
  double best_;
  Correspondence best_r_;
  Correspondence cur_;
};

inline void require_metric(const SquareMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m(i, i) != 0.0) throw Error(ErrorCode::NotAMetric, "nonzero diagonal");
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m(i, j) < 0.0 || m(i, j) != m(j, i)) throw Error(ErrorCode::NotAMetric, "negative or asymmetric entry");
  }
  if (!satisfies_triangle_inequality(m, 1e-9)) throw Error(ErrorCode::NotAMetric, "triangle inequality fails");
}

}  // namespace detail

/// d_GH between finite metric spaces (zero separations allowed, so sampled
/// balls with repeated points are accepted).
inline GhResult gh_distance(const SquareMatrix& x, const SquareMatrix& y, GhOptions opts = {}) {
  detail::require_metric(x);
  detail::require_metric(y);
  GhResult h = detail::gh_anneal(x, y, opts);
  if (opts.mode == SearchMode::Heuristic || std::max(x.size(), y.size()) > opts.exact_max_points) return h;
  return detail::ExactCorrespondence(x, y, 2.0 * h.value, h.witness).run();
}

inline GhResult gh_ball_distance(const BallSample& a, const BallSample& b, GhOptions opts = {}) {
  return gh_distance(a.gram, b.gram, opts);
}

inline GhResult gh_ball_distance(const FiniteSemiMetric& a, const FiniteSemiMetric& b, GhOptions opts = {}) {
  return gh_distance(a.matrix(), b.matrix(), opts);
}

}  // namespace mfill
