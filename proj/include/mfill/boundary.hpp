#pragma once

// Spheres in M(Z), their linkage components and shadows on the boundary,
// boundary maps read off from maps between balls, and the boundary
// convergence experiment for finite boundaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mfill/error.hpp"
#include "mfill/gallery.hpp"
#include "mfill/moebius.hpp"
#include "mfill/rough_isometry.hpp"

namespace mfill {

/// Points on S(rho0, R). The first |Z| points are the ray points z(zeta) at
/// radius R, in boundary order; extra points follow.
struct SphereSample {
  MoebiusPoint center;
  double radius = 0.0;
  std::vector<MoebiusPoint> points;
  std::size_t boundary_size = 0;

  const MoebiusPoint& ray_point(std::size_t zeta) const { return points.at(zeta); }
};

struct SphereOptions {
  double distance_tol = 1e-6;
  double membership_tol = tol::membership;
  std::size_t max_redraws = 64;
  FlowOptions flow{};
};

/// Ray points for every boundary point plus `extra_count` random far points
/// (jittered ray candidates) retracted onto the sphere.
inline SphereSample sphere_sample(const SpaceRef& base, double radius, std::size_t extra_count, std::uint64_t seed,
                                  SphereOptions opts = {}) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParameter, "radius must be positive");
  const std::size_t n = base->size();
  SphereSample s{base_point(base), radius, {}, n};
  for (std::size_t z = 0; z < n; ++z)
    s.points.push_back(
        boundary_ray_point(base, z, radius, {opts.membership_tol, opts.distance_tol, opts.flow}));
  for (std::size_t k = 0; k < extra_count; ++k) {
    Rng rng(derive_seed(seed, k));
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt == opts.max_redraws)
        throw Error(ErrorCode::BudgetExceeded, "could not draw a point outside the ball");
      // a ray candidate well past the sphere, jittered
      std::vector<double> tau = ray_candidate(*base, rng.index(n), rng.uniform(1.5 * radius, 3.0 * radius));
      for (double& x : tau) x += rng.uniform(-0.5 * radius, 0.5 * radius);
      MoebiusPoint p = antipodalize(TauVector{base, std::move(tau)}, opts.membership_tol, opts.flow);
      if (distance_to_base(p) <= radius) continue;
      s.points.push_back(retract_ball(p, radius, opts.membership_tol, opts.flow));
      break;
    }
  }
  for (const auto& p : s.points)
    if (std::abs(distance_to_base(p) - radius) > opts.distance_tol)
      throw Error(ErrorCode::RayConstructionFailed, "sphere point at distance " +
                                                        std::to_string(distance_to_base(p)) + " from the center");
  return s;
}

/// One third of the smallest distance between two ray points.
inline double default_eps_link(const SphereSample& s) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < s.boundary_size; ++a)
    for (std::size_t b = a + 1; b < s.boundary_size; ++b) m = std::min(m, moebius_metric(s.points[a], s.points[b]));
  return m / 3.0;
}

struct ComponentDecomposition {
  std::vector<std::vector<std::size_t>> components;  // sphere point indices, ascending
  std::vector<std::vector<std::size_t>> shadows;     // boundary indices per component
  std::vector<std::size_t> component_of_point;
  std::vector<std::size_t> shadow_owner;  // boundary index -> component
  std::vector<double> diameters;
};

/// Components of the graph joining sphere points closer than eps_link.
/// Boundary point zeta belongs to the shadow of the component holding z(zeta).
inline ComponentDecomposition components(const SphereSample& s, double eps_link) {
  if (!(eps_link > 0.0)) throw Error(ErrorCode::InvalidParameter, "eps_link must be positive");
  const std::size_t m = s.points.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      if (moebius_metric(s.points[a], s.points[b]) < eps_link) {
        const auto ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }

  ComponentDecomposition d;
  d.component_of_point.assign(m, 0);
  std::vector<std::size_t> label(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    const auto r = find(a);
    if (label[r] == m) {
      label[r] = d.components.size();
      d.components.emplace_back();
    }
    d.component_of_point[a] = label[r];
    d.components[label[r]].push_back(a);
  }
  d.shadows.assign(d.components.size(), {});
  d.shadow_owner.assign(s.boundary_size, m);
  for (std::size_t z = 0; z < s.boundary_size; ++z) {
    const auto c = d.component_of_point[z];
    if (d.shadow_owner[z] != m && d.shadow_owner[z] != c)
      throw Error(ErrorCode::AmbiguousShadow, "boundary point " + std::to_string(z) + " has two owners");
    d.shadow_owner[z] = c;
    d.shadows[c].push_back(z);
  }
  d.diameters.assign(d.components.size(), 0.0);
  for (std::size_t c = 0; c < d.components.size(); ++c)
    for (auto a : d.components[c])
      for (auto b : d.components[c]) d.diameters[c] = std::max(d.diameters[c], moebius_metric(s.points[a], s.points[b]));
  return d;
}

/// True iff every boundary index lies in exactly one shadow.
inline bool shadows_partition(const ComponentDecomposition& d, std::size_t boundary_size) {
  std::vector<int> hits(boundary_size, 0);
  for (const auto& sh : d.shadows)
    for (auto z : sh) {
      if (z >= boundary_size) return false;
      ++hits[z];
    }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

struct GromovBoundRow {
  enum class Kind { Cross, SameShadow } kind;
  std::size_t xi, eta;
  double value;  // |(xi|eta) - (x|y)| for Cross, (xi|eta) for SameShadow
  double bound;
  bool satisfied;
};

struct GromovBoundReport {
  std::vector<GromovBoundRow> rows;
  double max_cross_gromov = 0.0;  // max (p|q) over sphere points in distinct components
  double min_same_shadow_gromov = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
};

/// Cross rows: boundary pairs in distinct shadows satisfy
///   |(xi|eta) - (z(xi)|z(eta))| <= diam U + diam V.
/// Same-shadow rows: (xi|eta) >= R - diam U / 2.
/// Also tracks (p|q) <= R for sphere points in distinct components.
inline GromovBoundReport component_gromov_bounds(const SphereSample& s, const ComponentDecomposition& d,
                                                 double tolerance = 1e-6) {
  GromovBoundReport rep;
  const auto& o = s.center;
  for (std::size_t xi = 0; xi < s.boundary_size; ++xi)
    for (std::size_t eta = xi + 1; eta < s.boundary_size; ++eta) {
      const auto cu = d.shadow_owner[xi], cv = d.shadow_owner[eta];
      const double bgp = boundary_gromov_product(xi, eta, o);
      GromovBoundRow row{};
      row.xi = xi;
      row.eta = eta;
      if (cu != cv) {
        row.kind = GromovBoundRow::Kind::Cross;
        row.value = std::abs(bgp - gromov_product(s.ray_point(xi), s.ray_point(eta), o));
        row.bound = d.diameters[cu] + d.diameters[cv];
        row.satisfied = row.value <= row.bound + tolerance;
      } else {
        row.kind = GromovBoundRow::Kind::SameShadow;
        row.value = bgp;
        row.bound = s.radius - d.diameters[cu] / 2.0;
        row.satisfied = row.value >= row.bound - tolerance;
        rep.min_same_shadow_gromov = std::min(rep.min_same_shadow_gromov, bgp);
      }
      if (!row.satisfied) ++rep.violations;
      rep.rows.push_back(row);
    }
  for (std::size_t a = 0; a < s.points.size(); ++a)
    for (std::size_t b = a + 1; b < s.points.size(); ++b)
      if (d.component_of_point[a] != d.component_of_point[b]) {
        const double gp = gromov_product(s.points[a], s.points[b], o);
        rep.max_cross_gromov = std::max(rep.max_cross_gromov, gp);
        if (gp > s.radius + tolerance) ++rep.violations;
      }
  return rep;
}

// ---------------------------------------------------------------------------
// Boundary maps

using BallMap = std::function<std::optional<MoebiusPoint>(const MoebiusPoint&)>;

struct BoundaryMapResult {
  PointMap map;
  RoughIsometryReport report;
};

/// g(zeta) = lowest index of argmax tau of ball_map(z(zeta)) for zeta in a net
/// F of Z (all of Z when eps0 <= 0); other points go through the nearest net
/// point first.
inline BoundaryMapResult boundary_map(const SpaceRef& source, const SpaceRef& target, const BallMap& ball_map,
                                      double radius, double eps0 = 0.0, RayOptions ray = {}) {
  const std::size_t n = source->size();
  std::vector<std::size_t> net;
  if (eps0 > 0.0) {
    net = epsilon_net(source->metric(), eps0);
  } else {
    net.resize(n);
    std::iota(net.begin(), net.end(), std::size_t{0});
  }
  std::vector<std::size_t> g(n, 0), on_net(n, n);
  for (auto zeta : net) {
    const auto image = ball_map(boundary_ray_point(source, zeta, radius, ray));
    if (!image) throw Error(ErrorCode::RayPointUnmapped, "ball map has no image for z(" + std::to_string(zeta) + ")");
    if (!same_base(image->base(), target)) throw Error(ErrorCode::BaseMismatch, "ball map left the target filling");
    const auto vals = image->values();
    g[zeta] = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    on_net[zeta] = zeta;
  }
  for (std::size_t xi = 0; xi < n; ++xi) {
    if (on_net[xi] != n) continue;
    std::size_t p = net.front();
    for (auto k : net)
      if ((*source)(xi, k) < (*source)(xi, p)) p = k;
    g[xi] = g[p];
  }
  PointMap map(source->metric(), target->metric(), std::move(g));
  auto report = rough_isometry_report(map);
  return {std::move(map), report};
}

// ---------------------------------------------------------------------------
// Boundary convergence experiment

struct BoundaryRow {
  double eta = 0.0;
  std::size_t component_count = 0;
  double epsilon_g = 0.0;
  double max_cross_gromov = 0.0;
  double min_same_shadow_gromov = std::numeric_limits<double>::infinity();
  bool shadows_partition = false;
  std::size_t bound_violations = 0;
  std::vector<std::size_t> g;  // Z_n -> Z
};

struct BoundaryReport {
  double radius = 0.0;
  std::vector<BoundaryRow> rows;
};

struct BoundaryExperimentOptions {
  std::size_t extra_points = 8;
  std::size_t max_boundary = 8;
  SphereOptions sphere{};
};

/// For each eta: Z_n = perturb(limit, eta) with a fixed noise pattern, sphere
/// samples of radius R in both fillings, linkage components, a component
/// matching read off from the exact AI witness between component
/// representatives, and g_n(xi) = the boundary label matched to the component
/// whose shadow holds xi.
inline BoundaryReport boundary_convergence_experiment(const AntipodalSpace& limit, std::span<const double> etas,
                                                      double radius, std::uint64_t seed,
                                                      BoundaryExperimentOptions opts = {}) {
  if (limit.size() > opts.max_boundary)
    throw Error(ErrorCode::InvalidParameter, "limit boundary has more than " + std::to_string(opts.max_boundary) +
                                                 " points");
  SpaceRef z = share(limit);
  const SphereSample s0 = sphere_sample(z, radius, opts.extra_points, derive_seed(seed, 1), opts.sphere);
  const ComponentDecomposition d0 = components(s0, default_eps_link(s0));

  // Representative of a component: its lowest-index point, a ray point
  // whenever the component owns a shadow.
  auto require_shadows = [](const ComponentDecomposition& d, double eta) {
    for (const auto& sh : d.shadows)
      if (sh.empty())
        throw Error(ErrorCode::ComponentCountMismatch,
                    "eta = " + std::to_string(eta) + ": a sphere component holds no ray point");
  };
  require_shadows(d0, 0.0);
  auto representatives = [](const SphereSample& s, const ComponentDecomposition& d) {
    SquareMatrix g(d.components.size());
    for (std::size_t a = 0; a < d.components.size(); ++a)
      for (std::size_t b = 0; b < d.components.size(); ++b)
        g(a, b) = moebius_metric(s.points[d.components[a].front()], s.points[d.components[b].front()]);
    return g;
  };
  const SquareMatrix rep0 = representatives(s0, d0);

  BoundaryReport report{radius, {}};
  for (double eta : etas) {
    SpaceRef zn = share(perturb_antipodal(limit, eta, seed));
    const SphereSample sn = sphere_sample(zn, radius, opts.extra_points, derive_seed(seed, 2), opts.sphere);
    const ComponentDecomposition dn = components(sn, default_eps_link(sn));
    if (dn.components.size() != d0.components.size())
      throw Error(ErrorCode::ComponentCountMismatch, "eta = " + std::to_string(eta) + ": " +
                                                         std::to_string(dn.components.size()) + " components vs " +
                                                         std::to_string(d0.components.size()));
    require_shadows(dn, eta);
    const SquareMatrix repn = representatives(sn, dn);
    // match: components of S_n -> components of S_0
    const AiResult match = ai_distance(repn, rep0, {SearchMode::Exact, 32, seed, opts.max_boundary});
    std::vector<std::size_t> g(zn->size());
    for (std::size_t xi = 0; xi < zn->size(); ++xi)
      g[xi] = d0.shadows[match.forward.assignment[dn.shadow_owner[xi]]].front();
    const PointMap gmap(zn->metric(), z->metric(), g);

    BoundaryRow row;
    row.eta = eta;
    row.component_count = dn.components.size();
    row.epsilon_g = rough_isometry_report(gmap).epsilon;
    const auto bounds = component_gromov_bounds(sn, dn);
    row.max_cross_gromov = bounds.max_cross_gromov;
    row.min_same_shadow_gromov = bounds.min_same_shadow_gromov;
    row.shadows_partition = shadows_partition(dn, zn->size());
    row.bound_violations = bounds.violations;
    row.g = std::move(g);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace mfill
