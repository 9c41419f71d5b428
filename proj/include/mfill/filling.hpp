#pragma once

// Maps between fillings induced by rough isometries of boundaries:
//   rho  ->  P_inf(C_n(tau_rho o f_n), rho_n)  ->  retract to B(rho_n, R)
// and the convergence experiment built on them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mfill/error.hpp"
#include "mfill/moebius.hpp"
#include "mfill/rough_isometry.hpp"
#include "mfill/semimetric.hpp"

namespace mfill {

/// Weights P[k][xi] of the partition of unity subordinate to the open balls
/// B(net[k], delta): P_k = f_k / sum f, f_k(xi) = rho(xi, complement of ball k).
struct PartitionOfUnity {
  std::vector<std::size_t> net;
  std::vector<std::vector<double>> weights;
  double delta = 0.0;
};

inline PartitionOfUnity partition_of_unity(const FiniteSemiMetric& z, std::vector<std::size_t> net, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidParameter, "delta must be positive");
  if (net.empty()) throw Error(ErrorCode::NotACover, "empty net");
  const std::size_t n = z.size();
  for (auto k : net)
    if (k >= n) throw Error(ErrorCode::DimensionMismatch, "net index out of range");
  PartitionOfUnity pou{std::move(net), {}, delta};
  pou.weights.assign(pou.net.size(), std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < pou.net.size(); ++k) {
    const std::size_t c = pou.net[k];
    bool complement_empty = true;
    for (std::size_t xi = 0; xi < n; ++xi) {
      double f = std::numeric_limits<double>::infinity();
      for (std::size_t eta = 0; eta < n; ++eta)
        if (z(c, eta) >= delta) f = std::min(f, z(xi, eta));
      if (std::isinf(f)) break;
      complement_empty = false;
      pou.weights[k][xi] = f;
    }
    // A ball covering everything has an empty complement; weight it uniformly.
    if (complement_empty) std::fill(pou.weights[k].begin(), pou.weights[k].end(), 1.0);
  }
  for (std::size_t xi = 0; xi < n; ++xi) {
    double total = 0.0;
    for (const auto& w : pou.weights) total += w[xi];
    if (!(total > 0.0))
      throw Error(ErrorCode::NotACover, "point " + std::to_string(xi) + " lies outside every " +
                                            std::to_string(delta) + "-ball of the net");
    for (auto& w : pou.weights) w[xi] /= total;
  }
  return pou;
}

/// C(tau)(xi) = sum_k tau(net[k]) P_k(xi), with tau given on the net points.
inline std::vector<double> smoothing_operator(std::span<const double> values_on_net, const PartitionOfUnity& pou) {
  if (values_on_net.size() != pou.net.size())
    throw Error(ErrorCode::DimensionMismatch, std::to_string(values_on_net.size()) + " values for a net of " +
                                                  std::to_string(pou.net.size()) + " points");
  const std::size_t n = pou.weights.empty() ? 0 : pou.weights.front().size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < pou.net.size(); ++k)
    for (std::size_t xi = 0; xi < n; ++xi) out[xi] += values_on_net[k] * pou.weights[k][xi];
  return out;
}

/// tau o f for a map f given by its index assignment.
inline std::vector<double> pullback_tau(std::span<const double> tau, std::span<const std::size_t> f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] >= tau.size()) throw Error(ErrorCode::DimensionMismatch, "map image outside the domain of tau");
    out[i] = tau[f[i]];
  }
  return out;
}

struct FillingOptions {
  double membership_tol = tol::membership;
  FlowOptions flow{};
};

/// F: B(rho0, R) in M(Z) -> B(rho_n, R) in M(Z_n) induced by f: Z_n -> Z.
/// The net and partition of unity on Z_n are built once.
class FillingMap {
 public:
  FillingMap(SpaceRef z, SpaceRef zn, std::vector<std::size_t> f, double radius, double pou_delta,
             FillingOptions opts = {})
      : z_(std::move(z)), zn_(std::move(zn)), f_(std::move(f)), radius_(radius), opts_(opts) {
    if (f_.size() != zn_->size()) throw Error(ErrorCode::DimensionMismatch, "map must be defined on all of Z_n");
    for (auto y : f_)
      if (y >= z_->size()) throw Error(ErrorCode::DimensionMismatch, "map image outside Z");
    pou_ = partition_of_unity(zn_->metric(), epsilon_net(zn_->metric(), pou_delta), pou_delta);
  }

  const PartitionOfUnity& partition() const noexcept { return pou_; }
  const SpaceRef& target_space() const noexcept { return zn_; }

  /// tau_rho o f, before smoothing.
  std::vector<double> pulled_back(const MoebiusPoint& p) const {
    if (!same_base(p.base(), z_)) throw Error(ErrorCode::BaseMismatch, "point is not in the source filling");
    return pullback_tau(p.values(), f_);
  }

  MoebiusPoint operator()(const MoebiusPoint& p) const {
    const auto pulled = pulled_back(p);
    std::vector<double> on_net(pou_.net.size());
    for (std::size_t k = 0; k < pou_.net.size(); ++k) on_net[k] = pulled[pou_.net[k]];
    TauVector smoothed{zn_, smoothing_operator(on_net, pou_)};
    MoebiusPoint a = antipodalize(smoothed, opts_.membership_tol, opts_.flow);
    return retract_ball(a, radius_, opts_.membership_tol, opts_.flow);
  }

 private:
  SpaceRef z_, zn_;
  std::vector<std::size_t> f_;
  double radius_;
  FillingOptions opts_;
  PartitionOfUnity pou_;
};

inline MoebiusPoint filling_map(const MoebiusPoint& rho, const SpaceRef& zn, std::vector<std::size_t> f_n,
                                double radius, double pou_delta, FillingOptions opts = {}) {
  if (distance_to_base(rho) > radius + 1e-9)
    throw Error(ErrorCode::InvalidParameter, "point lies outside the ball of radius " + std::to_string(radius));
  return FillingMap(rho.base(), zn, std::move(f_n), radius, pou_delta, opts)(rho);
}

/// Default smoothing scale: twice the rough-isometry constant, or half the
/// minimal separation when the map is an isometry.
inline double default_pou_delta(double eps_n, const FiniteSemiMetric& zn) {
  return eps_n > 0.0 ? 2.0 * eps_n : 0.5 * zn.min_separation();
}

/// Worst oscillation |tau(xi) - tau(eta)| over sampled members and pairs with
/// rho(xi, eta) < delta.
inline double tau_oscillation(std::span<const MoebiusPoint> pts, const FiniteSemiMetric& z, double delta) {
  double osc = 0.0;
  for (const auto& p : pts)
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = i + 1; j < z.size(); ++j)
        if (z(i, j) < delta) osc = std::max(osc, std::abs(p.values()[i] - p.values()[j]));
  return osc;
}

// ---------------------------------------------------------------------------
// Convergence experiment

struct FillingRow {
  std::size_t n = 0;
  double eps_n = 0.0;
  double distortion = 0.0;
  double net_defect = 0.0;
  double sup_discrepancy = 0.0;
  double wallclock_ms = 0.0;
};

struct FillingReport {
  double radius = 0.0;
  std::vector<FillingRow> rows;
};

struct FillingExperimentOptions {
  std::size_t target_count = 200;
  BallSampleOptions sampling{};
  FillingOptions filling{};
};

/// The subspace on `net`, repaired to be antipodal if the restriction is not.
inline AntipodalSpace restrict_antipodal(const AntipodalSpace& z, std::span<const std::size_t> net) {
  FiniteSemiMetric sub = z.metric().subspace(net);
  try {
    return AntipodalSpace(sub);
  } catch (const Error&) {
    return repair_antipodes(sub);
  }
}

/// One row per net size n: Z_n is the farthest-point net of size n with the
/// inclusion f_n: Z_n -> Z. Records
///   eps_n           max(distortion, covering radius) of f_n,
///   distortion      of F_n over all pairs of the sampled source ball,
///   net_defect      max over a sampled target ball of the distance to the
///                   nearest witnessed image point (sampled images plus
///                   F_n(beta^) where beta^ = retract(P_inf(C(tau_beta o g_n))))
///                   and g_n the inverse rough isometry of f_n,
///   sup_discrepancy max over samples of ||D_{rho_n}(tau o f_n)||.
inline FillingReport filling_convergence_experiment(const SpaceRef& z, std::span<const std::size_t> net_sizes,
                                                    double radius, std::size_t sample_count, std::uint64_t seed,
                                                    FillingExperimentOptions opts = {}) {
  for (std::size_t k = 1; k < net_sizes.size(); ++k)
    if (net_sizes[k] <= net_sizes[k - 1]) throw Error(ErrorCode::InvalidParameter, "net sizes must increase");
  const BallSample source = sample_ball(z, radius, sample_count, seed, opts.sampling);
  FillingReport report{radius, {}};
  for (std::size_t row = 0; row < net_sizes.size(); ++row) {
    const auto start = std::chrono::steady_clock::now();
    const auto net = farthest_point_net(z->metric(), net_sizes[row]);
    SpaceRef zn = share(restrict_antipodal(*z, net));
    const PointMap inclusion(zn->metric(), z->metric(), net);
    const double eps_n = rough_isometry_report(inclusion).epsilon;
    const FillingMap forward(z, zn, net, radius, default_pou_delta(eps_n, zn->metric()), opts.filling);

    FillingRow r;
    r.n = net.size();
    r.eps_n = eps_n;
    std::vector<MoebiusPoint> images;
    images.reserve(source.points.size());
    for (const auto& p : source.points) {
      r.sup_discrepancy = std::max(r.sup_discrepancy, discrepancy_norm(forward.pulled_back(p), *zn));
      images.push_back(forward(p));
    }
    for (std::size_t a = 0; a < images.size(); ++a)
      for (std::size_t b = a + 1; b < images.size(); ++b)
        r.distortion =
            std::max(r.distortion, std::abs(moebius_metric(images[a], images[b]) - source.gram(a, b)));

    // Backward witnesses through g_n: Z -> Z_n.
    const PointMap g = invert_rough_isometry(inclusion);
    const double back_delta = default_pou_delta(eps_n, z->metric());
    const FillingMap backward(zn, z, g.assignment, radius, back_delta, opts.filling);
    const BallSample target =
        sample_ball(zn, radius, opts.target_count, derive_seed(seed, 1000 + row), opts.sampling);
    for (const auto& beta : target.points) {
      double near = moebius_metric(beta, forward(backward(beta)));
      for (const auto& im : images) near = std::min(near, moebius_metric(beta, im));
      r.net_defect = std::max(r.net_defect, near);
    }
    r.wallclock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.rows.push_back(r);
  }
  return report;
}

}  // namespace mfill
