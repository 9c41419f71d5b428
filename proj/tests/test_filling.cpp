#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "mfill/filling.hpp"
#include "mfill/gallery.hpp"
#include "oracles.hpp"

using namespace mfill;
using Catch::Matchers::WithinAbs;

namespace {

/// Non-increasing from first to last, allowing one adjacent rise of at most 10%.
bool trend_ok(const std::vector<double>& v) {
  int inversions = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[k - 1]) {
      ++inversions;
      if (v[k] > 1.1 * v[k - 1] + 1e-12) return false;
    }
  return inversions <= 1 && v.back() <= v.front();
}

}  // namespace

TEST_CASE("partition of unity", "[filling]") {
  const auto z4 = z4_space().metric();
  const auto trivial = partition_of_unity(z4, {0, 1, 2, 3}, 0.1);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t xi = 0; xi < 4; ++xi) CHECK(trivial.weights[k][xi] == (k == xi ? 1.0 : 0.0));

  const auto pou = partition_of_unity(z4, {0, 2}, 0.6);
  for (std::size_t xi = 0; xi < 4; ++xi) CHECK_THAT(pou.weights[0][xi] + pou.weights[1][xi], WithinAbs(1.0, 1e-15));
  // support of the weight of net point k is exactly its open delta-ball
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t xi = 0; xi < 4; ++xi) CHECK((pou.weights[k][xi] > 0) == (z4(pou.net[k], xi) < 0.6));

  const auto c = circle_boundary(64).metric();
  const auto cp = partition_of_unity(c, epsilon_net(c, 0.3), 0.3);
  for (std::size_t xi = 0; xi < 64; ++xi) {
    double s = 0;
    for (const auto& w : cp.weights) s += w[xi];
    CHECK_THAT(s, WithinAbs(1.0, 1e-14));
  }

  CHECK_THROWS_AS(partition_of_unity(z4, {0}, 0.6), Error);
}

TEST_CASE("smoothing operator", "[filling]") {
  const auto z4 = z4_space().metric();
  const auto pou = partition_of_unity(z4, {0, 2}, 0.6);
  const auto constant = smoothing_operator(std::vector<double>{2.5, 2.5}, pou);
  for (double v : constant) CHECK_THAT(v, WithinAbs(2.5, 1e-15));
  const auto ind = smoothing_operator(std::vector<double>{1.0, 0.0}, pou);
  for (std::size_t xi = 0; xi < 4; ++xi) CHECK(ind[xi] == pou.weights[0][xi]);

  const auto c = circle_boundary(64).metric();
  std::vector<double> sine(64);
  for (std::size_t k = 0; k < 64; ++k) sine[k] = std::sin(2 * std::numbers::pi * k / 64.0);
  const auto net = epsilon_net(c, 0.2);
  const auto cp = partition_of_unity(c, net, 0.2);
  std::vector<double> on_net;
  for (auto k : net) on_net.push_back(sine[k]);
  const auto smooth = smoothing_operator(on_net, cp);
  double err = 0;
  for (std::size_t k = 0; k < 64; ++k) err = std::max(err, std::abs(smooth[k] - sine[k]));
  CHECK(err <= oracle::oscillation(sine, c.matrix(), 0.2));
  CHECK(err > 0.0);
}

TEST_CASE("smoothing never increases the sup norm", "[filling][property]") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto z = random_antipodal(6 + rng.index(20), rng.next()).metric();
    const double delta = rng.uniform(0.15, 0.9);
    const auto net = epsilon_net(z, delta, rng.index(z.size()));
    const auto pou = partition_of_unity(z, net, delta);
    std::vector<double> t(net.size());
    for (double& x : t) x = rng.uniform(-4, 4);
    double in = 0, out = 0;
    for (double x : t) in = std::max(in, std::abs(x));
    for (double x : smoothing_operator(t, pou)) out = std::max(out, std::abs(x));
    REQUIRE(out <= in * (1 + 1e-15));
  }
}

TEST_CASE("pullback", "[filling]") {
  const std::vector<double> zero(8, 0.0);
  for (double v : pullback_tau(zero, std::vector<std::size_t>{0, 2, 4, 6})) CHECK(v == 0.0);
  const std::vector<double> tau{1, -1, 0, 0};
  CHECK(pullback_tau(tau, std::vector<std::size_t>{0, 1, 2, 3}) == tau);
  // Z4 sitting at the even indices of an 8-point refinement
  const std::vector<double> ext{1, 0.9, -1, -0.9, 0, 0.1, 0, -0.1};
  CHECK(pullback_tau(ext, std::vector<std::size_t>{0, 2, 4, 6}) == tau);
  CHECK_THROWS_AS(pullback_tau(tau, std::vector<std::size_t>{0, 9}), Error);
}

TEST_CASE("filling map", "[filling]") {
  SpaceRef z4 = share(z4_space());
  const auto base = filling_map(base_point(z4), z4, {0, 1, 2, 3}, 2.0, 0.25);
  CHECK(sup_norm(base.values()) == 0.0);

  const auto member = is_member(TauVector{z4, {0.5, -0.5, 0.5, -0.5}});
  REQUIRE(member.point);
  const auto e = *member.point;
  const auto same = filling_map(e, z4, {0, 1, 2, 3}, 2.0, 0.25);
  CHECK(sup_distance(same.values(), e.values()) <= 1e-6);

  SpaceRef c64 = share(circle_boundary(64)), c16 = share(circle_boundary(16));
  std::vector<std::size_t> f(16);
  for (std::size_t k = 0; k < 16; ++k) f[k] = 4 * k;
  const double eps = rough_isometry_report(PointMap(c16->metric(), c64->metric(), f)).epsilon;
  const auto far = boundary_ray_point(c64, 5, 3.0);
  const auto rho = retract_ball(far, 1.5);
  REQUIRE_THAT(distance_to_base(rho), WithinAbs(1.5, 1e-6));
  const auto out = filling_map(rho, c16, f, 2.0, default_pou_delta(eps, c16->metric()));
  CHECK(out.membership_residual <= 1e-8);
  CHECK(is_member(out.tau).member);
  CHECK(distance_to_base(out) <= 2.0 + 1e-9);
  CHECK(same_base(out.base(), c16));

  CHECK(sup_norm(filling_map(base_point(c64), c16, f, 2.0, default_pou_delta(eps, c16->metric())).values()) == 0.0);
  CHECK_THROWS_AS(filling_map(far, c16, f, 2.0, 0.3), Error);
}

TEST_CASE("oscillation of tau over a ball", "[filling]") {
  // For a metric boundary and rho in B(rho0, R): if rho0(xi, eta) < delta < e^-R
  // then |tau(xi) - tau(eta)| <= -2 log(1 - delta e^R). (Take zeta antipodal to
  // xi for rho; then tau(eta) - tau(xi) <= 2 log(rho0(xi, zeta) / rho0(eta, zeta))
  // and rho0(xi, zeta) >= e^-R.)
  SpaceRef z = share(circle_boundary(64));
  const double R = 1.0;
  const auto ball = sample_ball(z, R, 120, 3);
  for (double delta : {0.05, 0.1, 0.2, 0.3}) {
    const double bound = -2.0 * std::log(1.0 - delta * std::exp(R));
    CHECK(tau_oscillation(ball.points, z->metric(), delta) <= bound + 1e-7);
  }
}

TEST_CASE("identity fillings have no distortion", "[filling]") {
  for (const auto& z : {share(z4_space()), share(circle_boundary(16))}) {
    const std::vector<std::size_t> all{z->size()};
    const auto rep = filling_convergence_experiment(z, all, 3.0, 60, 7);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].eps_n == 0.0);
    CHECK(rep.rows[0].distortion <= 1e-6);
    CHECK(rep.rows[0].sup_discrepancy <= 1e-6);
  }
}

TEST_CASE("filling convergence on a tree boundary", "[filling]") {
  const auto rep = filling_convergence_experiment(share(tree_boundary(2, 6)), std::vector<std::size_t>{4, 8, 16},
                                                  3.0, 200, 7);
  std::vector<double> dis, disc, eps;
  for (const auto& r : rep.rows) {
    dis.push_back(r.distortion);
    disc.push_back(r.sup_discrepancy);
    eps.push_back(r.eps_n);
  }
  CHECK(trend_ok(dis));
  CHECK(trend_ok(disc));
  CHECK(trend_ok(eps));
  CHECK_THROWS_AS(filling_convergence_experiment(share(z4_space()), std::vector<std::size_t>{4, 2}, 3.0, 10, 1),
                  Error);
}
