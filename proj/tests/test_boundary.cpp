#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfill/boundary.hpp"
#include "mfill/filling.hpp"
#include "mfill/gallery.hpp"
#include "oracles.hpp"

using namespace mfill;
using Catch::Matchers::WithinAbs;

namespace {

SpaceRef z4() {
  static const SpaceRef z = share(z4_space());
  return z;
}

AntipodalSpace z4_with_13(double v) {
  auto m = z4_space().metric().matrix();
  m(0, 2) = m(2, 0) = v;
  return AntipodalSpace(FiniteSemiMetric(m));
}

}  // namespace

TEST_CASE("sphere samples", "[boundary]") {
  const auto s = sphere_sample(z4(), 3.0, 0, 1);
  CHECK(s.points.size() == 4);
  CHECK(s.boundary_size == 4);

  const auto t = sphere_sample(z4(), 3.0, 10, 1);
  CHECK(t.points.size() == 14);
  for (const auto& p : t.points) CHECK_THAT(distance_to_base(p), WithinAbs(3.0, 1e-6));
  const auto again = sphere_sample(z4(), 3.0, 10, 1);
  for (std::size_t k = 0; k < t.points.size(); ++k)
    CHECK(std::ranges::equal(t.points[k].values(), again.points[k].values()));
}

TEST_CASE("sphere components", "[boundary]") {
  const auto s = sphere_sample(z4(), 3.0, 0, 1);
  const auto d = components(s, 0.5);
  CHECK(d.components.size() == 4);
  CHECK(d.shadows == std::vector<std::vector<std::size_t>>{{0}, {1}, {2}, {3}});
  CHECK(shadows_partition(d, 4));

  const auto small = sphere_sample(z4(), 0.1, 6, 1);
  const auto ds = components(small, 0.5);
  CHECK(ds.components.size() == 1);
  CHECK(ds.shadows.front() == std::vector<std::size_t>{0, 1, 2, 3});

  CHECK_THROWS_AS(components(s, 0.0), Error);
}

TEST_CASE("component count is bounded by the boundary beyond the branching radius", "[boundary]") {
  // Sparse extra points can sit alone, so only components that own a shadow
  // are counted. With a fixed link scale that count only grows with R and
  // stays at |Z| once every ray has split off.
  for (const auto& z : {z4(), share(circle_boundary(8))}) {
    std::size_t last = 0;
    double branching = -1;
    for (double R : {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
      const auto s = sphere_sample(z, R, 12, 4);
      const auto d = components(s, 0.5);
      CHECK(shadows_partition(d, z->size()));
      std::size_t owning = 0;
      for (const auto& sh : d.shadows) owning += !sh.empty();
      CHECK(owning >= last);
      last = owning;
      if (branching < 0 && owning == z->size()) branching = R;
      if (branching >= 0) CHECK(owning == z->size());
    }
    INFO("branching radius " << branching);
    CHECK(branching > 0);
  }
}

TEST_CASE("Gromov bounds on Z4 components", "[boundary]") {
  const auto s = sphere_sample(z4(), 3.0, 0, 1);
  const auto d = components(s, 0.5);
  const auto rep = component_gromov_bounds(s, d);
  CHECK(rep.violations == 0);
  CHECK(std::isinf(rep.min_same_shadow_gromov));  // no same-shadow rows
  for (const auto& row : rep.rows) {
    CHECK(row.kind == GromovBoundRow::Kind::Cross);
    CHECK(row.bound == 0.0);
    CHECK(row.satisfied);
  }
  // 1-vs-3: both boundary and ray-point products equal ln 2
  CHECK_THAT(boundary_gromov_product(0, 2, s.center), WithinAbs(std::log(2.0), 1e-15));
  CHECK_THAT(gromov_product(s.ray_point(0), s.ray_point(2), s.center), WithinAbs(std::log(2.0), 1e-6));
  CHECK(rep.max_cross_gromov <= 3.0 + 1e-6);
}

TEST_CASE("same-shadow bound when rays merge", "[boundary]") {
  // On a tree, leaves closer than e^-R share a component.
  SpaceRef t = share(tree_boundary(2, 4));
  const auto s = sphere_sample(t, 1.5, 8, 2);
  const auto d = components(s, default_eps_link(s) > 0 ? default_eps_link(s) : 0.1);
  CHECK(shadows_partition(d, t->size()));
  const auto rep = component_gromov_bounds(s, d);
  CHECK(rep.violations == 0);
}

TEST_CASE("boundary map from ball maps", "[boundary]") {
  const BallMap identity = [](const MoebiusPoint& p) { return std::optional<MoebiusPoint>(p); };
  const auto r = boundary_map(z4(), z4(), identity, 3.0);
  CHECK(r.map.assignment == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(r.report.distortion == 0.0);

  SpaceRef pert = share(z4_with_13(0.55));
  const FillingMap fill(z4(), pert, {0, 1, 2, 3}, 3.0, 0.25);
  const BallMap through = [&](const MoebiusPoint& p) { return std::optional<MoebiusPoint>(fill(p)); };
  const auto g = boundary_map(z4(), pert, through, 3.0);
  CHECK(g.report.distortion <= 0.05 + 1e-12);
  CHECK(oracle::map_epsilon(z4()->metric().matrix(), pert->metric().matrix(), g.map.assignment) <= 0.05 + 1e-12);

  const BallMap none = [](const MoebiusPoint&) { return std::optional<MoebiusPoint>{}; };
  CHECK_THROWS_AS(boundary_map(z4(), z4(), none, 3.0), Error);
}

TEST_CASE("boundary map between circle fillings", "[boundary]") {
  // circle16 sits at the even points of circle32; f: circle32 -> circle16
  // rounds down to the nearest even point.
  SpaceRef c16 = share(circle_boundary(16)), c32 = share(circle_boundary(32));
  const double R = 3.0;
  std::vector<std::size_t> f(32);
  for (std::size_t k = 0; k < 32; ++k) f[k] = k / 2;
  const double eps = rough_isometry_report(PointMap(c32->metric(), c16->metric(), f)).epsilon;
  const FillingMap fill(c16, c32, f, R, default_pou_delta(eps, c32->metric()));
  const BallMap through = [&](const MoebiusPoint& p) { return std::optional<MoebiusPoint>(fill(p)); };
  const auto g = boundary_map(c16, c32, through, R);
  INFO("eps(f) = " << eps << ", boundary distortion " << g.report.distortion);
  CHECK(g.report.distortion <= 2.0 * eps);
  CHECK(g.report.covering_radius <= 2.0 * eps);
}

TEST_CASE("boundary convergence ladder", "[boundary]") {
  const std::vector<double> etas{0.0, 0.1, 0.05, 0.02, 0.01};
  const auto rep = boundary_convergence_experiment(z4_space(), etas, 3.0, 7);
  REQUIRE(rep.rows.size() == etas.size());
  CHECK(rep.rows[0].epsilon_g == 0.0);
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    CHECK(rep.rows[k].component_count == 4);
    CHECK(rep.rows[k].shadows_partition);
    CHECK(rep.rows[k].bound_violations == 0);
    CHECK(rep.rows[k].max_cross_gromov <= 3.0 + 1e-6);
    if (k >= 2) CHECK(rep.rows[k].epsilon_g < rep.rows[k - 1].epsilon_g);
  }
  // measured constant C in eps <= C eta
  double c = 0;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) c = std::max(c, rep.rows[k].epsilon_g / rep.rows[k].eta);
  INFO("measured C = " << c);
  CHECK(c < 10.0);
}
