#pragma once

// The filling M(Z) of a finite antipodal space, in the chart
// rho = E(tau) = e^{tau/2} (x) e^{tau/2} rho0 centred at the base rho0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mfill/error.hpp"
#include "mfill/random.hpp"
#include "mfill/semimetric.hpp"

namespace mfill {

using SpaceRef = std::shared_ptr<const AntipodalSpace>;

inline SpaceRef share(AntipodalSpace s) { return std::make_shared<const AntipodalSpace>(std::move(s)); }

inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Log-derivative of a separation with respect to the base space.
struct TauVector {
  SpaceRef base;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double norm_inf() const { return sup_norm(values); }
};

/// A TauVector whose discrepancy vanishes within tolerance.
struct MoebiusPoint {
  TauVector tau;
  double membership_residual = 0.0;

  const SpaceRef& base() const noexcept { return tau.base; }
  std::span<const double> values() const noexcept { return tau.values; }
};

inline bool same_base(const SpaceRef& a, const SpaceRef& b) { return a == b || (a && b && *a == *b); }

inline void check_dimension(std::span<const double> tau, const AntipodalSpace& rho) {
  if (tau.size() != rho.size())
    throw Error(ErrorCode::DimensionMismatch, "tau has " + std::to_string(tau.size()) + " entries, space has " +
                                                  std::to_string(rho.size()) + " points");
}

// ---------------------------------------------------------------------------
// Discrepancy

struct Discrepancy {
  std::vector<double> values;
  std::vector<std::size_t> argmax;  // the partner attaining the max, lowest index on ties
};

/// Writes D(tau)(i) = tau_i + max_{j != i} (tau_j + 2 log rho(i, j)) into out.
inline void discrepancy_into(std::span<const double> tau, const AntipodalSpace& rho, std::span<double> out) {
  const std::size_t n = rho.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = rho.two_log_row(i);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) best = std::max(best, tau[j] + row[j]);  // row[i] = -inf
    out[i] = tau[i] + best;
  }
}

inline Discrepancy discrepancy(std::span<const double> tau, const AntipodalSpace& rho) {
  check_dimension(tau, rho);
  if (rho.size() < 2) throw Error(ErrorCode::TooFewPoints, "discrepancy needs at least 2 points");
  const std::size_t n = rho.size();
  Discrepancy d{std::vector<double>(n), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = tau[j] + rho.two_log(i, j);
      if (v > best) {
        best = v;
        arg = j;
      }
    }
    d.values[i] = tau[i] + best;
    d.argmax[i] = arg;
  }
  return d;
}

inline Discrepancy discrepancy(const TauVector& tau) { return discrepancy(tau.values, *tau.base); }

inline double discrepancy_norm(std::span<const double> tau, const AntipodalSpace& rho) {
  check_dimension(tau, rho);
  std::vector<double> d(rho.size());
  discrepancy_into(tau, rho, d);
  return sup_norm(d);
}

// ---------------------------------------------------------------------------
// Antipodal flow d/dt tau = -D(tau), explicit Euler

struct FlowOptions {
  double step = 0.05;
  std::size_t max_steps = 1'000'000;
};

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> taus;
  std::vector<double> discrepancy_norms;
};

namespace detail {
class EulerFlow {
 public:
  EulerFlow(std::span<const double> tau0, const AntipodalSpace& rho, double step)
      : rho_(rho), step_(step), tau_(tau0.begin(), tau0.end()), d_(tau_.size()) {
    discrepancy_into(tau_, rho_, d_);
  }

  void advance() {
    for (std::size_t i = 0; i < tau_.size(); ++i) {
      tau_[i] -= step_ * d_[i];
      if (!std::isfinite(tau_[i])) throw Error(ErrorCode::NonfiniteState, "flow state overflowed");
    }
    discrepancy_into(tau_, rho_, d_);
    time_ += step_;
  }

  const std::vector<double>& tau() const noexcept { return tau_; }
  std::vector<double>& tau() noexcept { return tau_; }
  double residual() const { return sup_norm(d_); }
  double time() const noexcept { return time_; }

 private:
  const AntipodalSpace& rho_;
  double step_;
  std::vector<double> tau_, d_;
  double time_ = 0.0;
};
}  // namespace detail

/// Integrates the antipodal flow on [0, horizon], recording every
/// `record_stride`-th step (and always the last).
inline FlowTrajectory flow_trajectory(std::span<const double> tau0, const AntipodalSpace& rho, double step,
                                      double horizon, std::size_t record_stride = 1) {
  check_dimension(tau0, rho);
  if (!(step > 0.0) || !(horizon > 0.0)) throw Error(ErrorCode::InvalidParameter, "step and horizon must be positive");
  if (record_stride == 0) record_stride = 1;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / step));
  detail::EulerFlow flow(tau0, rho, step);
  FlowTrajectory traj;
  auto record = [&] {
    traj.times.push_back(flow.time());
    traj.taus.push_back(flow.tau());
    traj.discrepancy_norms.push_back(flow.residual());
  };
  record();
  for (std::size_t k = 1; k <= steps; ++k) {
    flow.advance();
    if (k % record_stride == 0 || k == steps) record();
  }
  return traj;
}

struct AntipodalizeStats {
  double time = 0.0;
  std::size_t steps = 0;
  double residual = 0.0;
};

/// Flows tau to the limit tau_inf. Stops once the a-priori estimate
/// 4 ||D(tau0)|| e^{-t/2} is below tol/2 and the measured residual is <= tol.
inline std::vector<double> antipodalize_values(std::span<const double> tau, const AntipodalSpace& rho,
                                               double tolerance = tol::membership, FlowOptions opts = {},
                                               AntipodalizeStats* stats = nullptr) {
  check_dimension(tau, rho);
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerance must be positive");
  detail::EulerFlow flow(tau, rho, opts.step);
  const double d0 = flow.residual();
  const double t_needed = d0 > 0.0 ? std::max(0.0, 2.0 * std::log(8.0 * d0 / tolerance)) : 0.0;
  std::size_t steps = 0;
  while (flow.time() < t_needed || flow.residual() > tolerance) {
    if (steps == opts.max_steps)
      throw Error(ErrorCode::BudgetExceeded, "antipodalization did not converge in " + std::to_string(steps) +
                                                 " steps; residual " + std::to_string(flow.residual()));
    flow.advance();
    ++steps;
  }
  if (stats) *stats = {flow.time(), steps, flow.residual()};
  return std::move(flow.tau());
}

inline MoebiusPoint antipodalize(const TauVector& tau, double tolerance = tol::membership, FlowOptions opts = {}) {
  AntipodalizeStats stats;
  auto values = antipodalize_values(tau.values, *tau.base, tolerance, opts, &stats);
  return MoebiusPoint{TauVector{tau.base, std::move(values)}, stats.residual};
}

// ---------------------------------------------------------------------------
// Metric and membership

inline double moebius_metric(const MoebiusPoint& a, const MoebiusPoint& b) {
  if (!same_base(a.base(), b.base())) throw Error(ErrorCode::BaseMismatch, "points live in different charts");
  return sup_distance(a.values(), b.values());
}

/// Distance to the chart base rho0.
inline double distance_to_base(const MoebiusPoint& p) { return p.tau.norm_inf(); }

inline MoebiusPoint base_point(const SpaceRef& base) {
  return MoebiusPoint{TauVector{base, std::vector<double>(base->size(), 0.0)}, 0.0};
}

struct MembershipReport {
  bool member = false;
  double residual = 0.0;
  std::vector<std::size_t> positive_rows;  // D > tol
  std::vector<std::size_t> negative_rows;  // D < -tol
  std::optional<MoebiusPoint> point;
};

inline MembershipReport is_member(const TauVector& tau, double tolerance = tol::membership) {
  const auto d = discrepancy(tau);
  MembershipReport rep;
  rep.residual = sup_norm(d.values);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (d.values[i] > tolerance) rep.positive_rows.push_back(i);
    if (d.values[i] < -tolerance) rep.negative_rows.push_back(i);
  }
  rep.member = rep.residual <= tolerance;
  if (rep.member) rep.point = MoebiusPoint{tau, rep.residual};
  return rep;
}

/// Indices within `tie` of the maximum, ascending.
inline std::vector<std::size_t> argmax_set(std::span<const double> v, double tie = tol::argmax_tie) {
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] >= m - tie) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Geodesics, retraction, rays

/// P_inf(t tau_p, rho0): the point at parameter t on the geodesic from rho0
/// to p; its distance to rho0 is t d(p, rho0).
inline MoebiusPoint geodesic_point(const MoebiusPoint& p, double t, double tolerance = tol::membership,
                                   FlowOptions opts = {}) {
  if (t < 0.0 || t > 1.0) throw Error(ErrorCode::InvalidParameter, "geodesic parameter outside [0, 1]");
  std::vector<double> scaled(p.values().begin(), p.values().end());
  for (double& x : scaled) x *= t;
  return antipodalize(TauVector{p.base(), std::move(scaled)}, tolerance, opts);
}

/// Retraction of M(Z) onto the closed ball B(rho0, R).
inline MoebiusPoint retract_ball(const MoebiusPoint& p, double radius, double tolerance = tol::membership,
                                 FlowOptions opts = {}) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParameter, "radius must be positive");
  const double r = distance_to_base(p);
  if (r <= radius) return p;
  return geodesic_point(p, radius / r, tolerance, opts);
}

struct RayOptions {
  double membership_tol = tol::membership;
  double distance_tol = 1e-6;
  FlowOptions flow{};
};

/// Candidate tau_t(eta) = min(t, -t - 2 log rho0(zeta, eta)), tau_t(zeta) = t.
inline std::vector<double> ray_candidate(const AntipodalSpace& base, std::size_t zeta, double t) {
  std::vector<double> tau(base.size());
  for (std::size_t j = 0; j < base.size(); ++j)
    tau[j] = j == zeta ? t : std::min(t, -t - base.two_log(zeta, j));
  return tau;
}

/// The point at distance t from rho0 on a geodesic ray towards boundary
/// point zeta. Throws RayConstructionFailed if, after antipodalization, the
/// distance is off by more than distance_tol or the argmax is wrong. The
/// argmax must contain zeta; it may also contain points eta with
/// rho0(zeta, eta) <= e^{-t}, which the ray cannot yet tell apart from zeta
/// (they share the value t exactly on ultrametric boundaries). Whenever every
/// separation from zeta exceeds e^{-t} the argmax is exactly {zeta}.
inline MoebiusPoint boundary_ray_point(const SpaceRef& base, std::size_t zeta, double t, RayOptions opts = {}) {
  if (zeta >= base->size()) throw Error(ErrorCode::DimensionMismatch, "boundary index out of range");
  if (t < 0.0) throw Error(ErrorCode::InvalidParameter, "ray parameter must be non-negative");
  if (t == 0.0) return base_point(base);
  MoebiusPoint p = antipodalize(TauVector{base, ray_candidate(*base, zeta, t)}, opts.membership_tol, opts.flow);
  const double dist = distance_to_base(p);
  if (std::abs(dist - t) > opts.distance_tol)
    throw Error(ErrorCode::RayConstructionFailed,
                "ray point at distance " + std::to_string(dist) + ", expected " + std::to_string(t));
  const auto arg = argmax_set(p.values());
  const double unresolved = std::exp(-t) * (1.0 + tol::structural);
  const bool has_zeta = std::find(arg.begin(), arg.end(), zeta) != arg.end();
  const bool only_close =
      std::all_of(arg.begin(), arg.end(), [&](std::size_t eta) { return eta == zeta || (*base)(zeta, eta) <= unresolved; });
  if (!has_zeta || !only_close)
    throw Error(ErrorCode::RayConstructionFailed,
                "ray point argmax does not single out " + std::to_string(zeta) + " at radius " + std::to_string(t));
  return p;
}

// ---------------------------------------------------------------------------
// Gromov products and visual functions

inline double gromov_product(const MoebiusPoint& a, const MoebiusPoint& b, const MoebiusPoint& x) {
  return 0.5 * (moebius_metric(a, x) + moebius_metric(b, x) - moebius_metric(a, b));
}

/// The antipodal function E(tau_p) seen from p, revalidated within tol.
inline AntipodalSpace visual_function_at(const MoebiusPoint& p, double rel_tol = 1e-6) {
  FiniteSemiMetric s = gmvt_apply(p.values(), *p.base());
  try {
    return AntipodalSpace(std::move(s), rel_tol);
  } catch (const Error& e) {
    throw Error(ErrorCode::NotAntipodalWithinTol, e.what());
  }
}

/// (i|j)_p = -log rho_p(i, j); +infinity when i == j.
inline double boundary_gromov_product(std::size_t i, std::size_t j, const MoebiusPoint& p) {
  const auto& base = *p.base();
  if (i >= base.size() || j >= base.size()) throw Error(ErrorCode::DimensionMismatch, "boundary index out of range");
  if (i == j) return std::numeric_limits<double>::infinity();
  return -0.5 * base.two_log(i, j) - 0.5 * (p.values()[i] + p.values()[j]);
}

// ---------------------------------------------------------------------------
// Ball samples

struct BallSample {
  MoebiusPoint center;
  double radius = 0.0;
  std::vector<MoebiusPoint> points;
  SquareMatrix gram;
};

inline SquareMatrix gram_matrix(std::span<const MoebiusPoint> pts) {
  SquareMatrix g(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) g(i, j) = g(j, i) = moebius_metric(pts[i], pts[j]);
  return g;
}

struct BallSampleOptions {
  double pool_factor = 2.0;  // random candidates = pool_factor * count
  double membership_tol = tol::membership;
  FlowOptions flow{};
};

/// Random tau in the sup-ball, antipodalized and retracted, then thinned by
/// farthest-point insertion. rho0 and the ray points at radius R are always
/// taken first (truncated to `count`). Candidate k draws from
/// derive_seed(seed, k), so the sample is independent of evaluation order.
inline BallSample sample_ball(const SpaceRef& base, double radius, std::size_t count, std::uint64_t seed,
                              BallSampleOptions opts = {}) {
  if (!(radius > 0.0) || count == 0) throw Error(ErrorCode::InvalidParameter, "need R > 0 and count >= 1");
  const std::size_t n = base->size();
  BallSample out;
  out.center = base_point(base);
  out.radius = radius;
  out.points.push_back(out.center);
  for (std::size_t z = 0; z < n && out.points.size() < count; ++z)
    out.points.push_back(boundary_ray_point(base, z, radius, {opts.membership_tol, 1e-6, opts.flow}));

  if (out.points.size() < count) {
    const auto pool_size = static_cast<std::size_t>(std::ceil(opts.pool_factor * static_cast<double>(count)));
    std::vector<MoebiusPoint> pool;
    pool.reserve(pool_size);
    for (std::size_t k = 0; k < pool_size; ++k) {
      Rng rng(derive_seed(seed, k));
      std::vector<double> tau(n);
      for (double& x : tau) x = rng.uniform(-radius, radius);
      MoebiusPoint p = antipodalize(TauVector{base, std::move(tau)}, opts.membership_tol, opts.flow);
      pool.push_back(retract_ball(p, radius, opts.membership_tol, opts.flow));
    }
    std::vector<double> dist(pool.size(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < pool.size(); ++k)
      for (const auto& q : out.points) dist[k] = std::min(dist[k], moebius_metric(pool[k], q));
    while (out.points.size() < count) {
      const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      if (dist[far] <= 0.0) break;  // pool exhausted
      out.points.push_back(pool[far]);
      for (std::size_t k = 0; k < pool.size(); ++k) dist[k] = std::min(dist[k], moebius_metric(pool[k], pool[far]));
    }
  }
  out.gram = gram_matrix(out.points);
  return out;
}

// ---------------------------------------------------------------------------
// Hyperconvexity and hyperbolicity probes

struct BallConstraint {
  std::size_t index;  // into the sample
  double radius;
};

struct HyperconvexityResult {
  bool found = false;
  std::vector<double> witness;
  double residual = 0.0;  // max_i (d(y, x_i) - r_i)
};

/// Looks for y in M(Z) inside every ball B(x_i, r_i). The intersection of the
/// sup-norm boxes [tau_i - r_i, tau_i + r_i] has lower corner L; L satisfies
/// D(L) <= 0, and raising coordinates one at a time to their caps
/// tau_k = -max_{j != k}(tau_j + 2 log rho(k, j)) turns it into a member that
/// stays below the upper corner. A final antipodalization absorbs roundoff.
inline HyperconvexityResult hyperconvexity_check(const BallSample& sample, std::span<const BallConstraint> balls,
                                                 double tolerance = 1e-6, FlowOptions opts = {}) {
  if (balls.empty()) throw Error(ErrorCode::InvalidParameter, "no balls given");
  for (const auto& b : balls)
    if (b.index >= sample.points.size() || b.radius < 0.0)
      throw Error(ErrorCode::InvalidParameter, "ball index out of range or negative radius");
  for (std::size_t a = 0; a < balls.size(); ++a)
    for (std::size_t b = a + 1; b < balls.size(); ++b) {
      const double d = sample.gram(balls[a].index, balls[b].index);
      if (balls[a].radius + balls[b].radius < d - tolerance)
        throw Error(ErrorCode::PairwiseConditionViolated,
                    "balls " + std::to_string(a) + " and " + std::to_string(b) + ": radii sum " +
                        std::to_string(balls[a].radius + balls[b].radius) + " < distance " + std::to_string(d));
    }
  const auto& space = *sample.center.base();
  const std::size_t n = space.size();
  std::vector<double> y(n, -std::numeric_limits<double>::infinity());
  for (const auto& b : balls)
    for (std::size_t k = 0; k < n; ++k) y[k] = std::max(y[k], sample.points[b.index].values()[k] - b.radius);
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = space.two_log_row(k);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) best = std::max(best, y[j] + row[j]);
    y[k] = -best;
  }
  y = antipodalize_values(y, space, tol::membership, opts);
  HyperconvexityResult res;
  res.residual = -std::numeric_limits<double>::infinity();
  for (const auto& b : balls)
    res.residual = std::max(res.residual, sup_distance(y, sample.points[b.index].values()) - b.radius);
  res.found = res.residual <= tolerance;
  res.witness = std::move(y);
  return res;
}

/// Gromov's four-point delta: max over quadruples of half the gap between
/// the largest and second largest of the three pair sums.
inline double hyperbolicity_delta(const SquareMatrix& d) {
  const std::size_t n = d.size();
  double delta = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t e = c + 1; e < n; ++e) {
          double s[3] = {d(a, b) + d(c, e), d(a, c) + d(b, e), d(a, e) + d(b, c)};
          std::sort(s, s + 3);
          delta = std::max(delta, 0.5 * (s[2] - s[1]));
        }
  return delta;
}

inline double hyperbolicity_delta(const BallSample& sample) { return hyperbolicity_delta(sample.gram); }

}  // namespace mfill
