#pragma once

// Seeded battery of cross-module invariants run by `mfill invariant-suite`.
// Every check records the worst observed slack so a failure can be read off
// the report without rerunning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "mfill/mfill.hpp"

namespace mfill::suite {

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // largest violation margin seen (<= 0 or tiny means fine)
  std::string note;
};

namespace detail {

inline std::vector<double> random_tau(Rng& rng, std::size_t n, double scale) {
  std::vector<double> t(n);
  for (double& x : t) x = rng.uniform(-scale, scale);
  return t;
}

inline CheckResult gallery_valid(std::uint64_t seed) {
  CheckResult r{"gallery outputs are antipodal", true, 0.0, {}};
  std::vector<AntipodalSpace> spaces;
  for (std::size_t n = 4; n <= 21; ++n) spaces.push_back(circle_boundary(n));
  spaces.push_back(tree_boundary(2, 3));
  spaces.push_back(tree_boundary(3, 2));
  for (std::uint64_t k = 0; k < 10; ++k) spaces.push_back(random_antipodal(4 + k, derive_seed(seed, k)));
  spaces.push_back(perturb_antipodal(z4_space(), 0.05, seed));
  for (const auto& s : spaces) {
    try {
      validate_antipodal(s.metric());
    } catch (const Error& e) {
      r.pass = false;
      r.note = e.what();
    }
  }
  return r;
}

inline CheckResult circle_doubling() {
  CheckResult r{"circle(n) sits isometrically in circle(2n)", true, 0.0, {}};
  for (std::size_t n : {4, 6, 8, 16, 32}) {
    const auto small = circle_boundary(n), big = circle_boundary(2 * n);
    std::vector<std::size_t> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = 2 * k;
    r.worst = std::max(r.worst, distortion(PointMap(small.metric(), big.metric(), f)));
  }
  r.pass = r.worst <= 1e-15;
  return r;
}

inline CheckResult cross_ratio_invariance(std::uint64_t seed) {
  CheckResult r{"cross-ratios survive GMVT rescaling", true, 0.0, {}};
  Rng rng(seed);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = random_antipodal(5 + rng.index(4), rng.next());
    const auto tau = random_tau(rng, z.size(), 2.0);
    const auto s1 = gmvt_apply(tau, z);
    for (int q = 0; q < 20; ++q) {
      std::size_t a = rng.index(z.size()), b = rng.index(z.size()), c = rng.index(z.size()), d = rng.index(z.size());
      if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
      const double c0 = cross_ratio(z.metric(), a, b, c, d), c1 = cross_ratio(s1, a, b, c, d);
      r.worst = std::max(r.worst, std::abs(c1 - c0) / c0);
    }
  }
  r.pass = r.worst <= 1e-12;
  return r;
}

inline CheckResult gmvt_round_trip(std::uint64_t seed) {
  CheckResult r{"GMVT derivative recovers the rescaling", true, 0.0, {}};
  Rng rng(seed);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = random_antipodal(4 + rng.index(8), rng.next());
    const auto tau = random_tau(rng, z.size(), 1.5);
    const auto back = gmvt_derivative(gmvt_apply(tau, z), z.metric());
    r.worst = std::max(r.worst, sup_distance(back, tau));
  }
  r.pass = r.worst <= 1e-9;
  return r;
}

inline CheckResult discrepancy_lipschitz(std::uint64_t seed) {
  CheckResult r{"discrepancy is 2-Lipschitz and 2-bounded", true, 0.0, {}};
  Rng rng(seed);
  for (int trial = 0; trial < 200; ++trial) {
    const auto z = random_antipodal(4 + rng.index(13), rng.next());
    const auto t1 = random_tau(rng, z.size(), 3.0), t2 = random_tau(rng, z.size(), 3.0);
    const auto d1 = discrepancy(t1, z).values, d2 = discrepancy(t2, z).values;
    r.worst = std::max(r.worst, sup_distance(d1, d2) - 2.0 * sup_distance(t1, t2));
    r.worst = std::max(r.worst, sup_norm(d1) - 2.0 * sup_norm(t1));
  }
  r.pass = r.worst <= 1e-12 * 10.0;
  return r;
}

inline CheckResult antipodalization(std::uint64_t seed) {
  CheckResult r{"antipodalization lands in M(Z) within 4||D||", true, 0.0, {}};
  Rng rng(seed);
  for (int trial = 0; trial < 30; ++trial) {
    SpaceRef z = share(random_antipodal(4 + rng.index(8), rng.next()));
    TauVector tau{z, random_tau(rng, z->size(), 3.0)};
    const double d0 = discrepancy_norm(tau.values, *z);
    const auto p = antipodalize(tau);
    r.worst = std::max(r.worst, p.membership_residual - tol::membership);
    r.worst = std::max(r.worst, sup_distance(p.values(), tau.values) - 4.0 * d0 - 1e-6);
    // a member is a fixed point
    const auto again = antipodalize(p.tau);
    r.worst = std::max(r.worst, sup_distance(again.values(), p.values()) - 1e-7);
  }
  r.pass = r.worst <= 0.0;
  return r;
}

inline CheckResult geodesic_and_retraction(std::uint64_t seed) {
  CheckResult r{"geodesic scaling and retraction identities", true, 0.0, {}};
  Rng rng(seed);
  SpaceRef z = share(circle_boundary(12));
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = antipodalize(TauVector{z, random_tau(rng, z->size(), 4.0)});
    const double d = distance_to_base(p);
    for (double t : {0.25, 0.5, 0.75}) r.worst = std::max(r.worst, std::abs(distance_to_base(geodesic_point(p, t)) - t * d) - 1e-4);
    const double radius = 0.5 * d;
    const auto q = retract_ball(p, radius);
    r.worst = std::max(r.worst, std::abs(distance_to_base(q) - radius) - 1e-6);
    r.worst = std::max(r.worst, std::abs(d - moebius_metric(p, q) - radius) - 1e-6);
  }
  r.pass = r.worst <= 0.0;
  return r;
}

inline CheckResult gromov_upper_bound(std::uint64_t seed) {
  CheckResult r{"Gromov product bounded by boundary distances", true, 0.0, {}};
  SpaceRef z = share(z4_space());
  const auto ball = sample_ball(z, 3.0, 60, seed);
  const auto o = base_point(z);
  for (std::size_t a = 0; a < ball.points.size(); ++a)
    for (std::size_t b = a + 1; b < ball.points.size(); ++b) {
      const auto A = argmax_set(ball.points[a].values()), B = argmax_set(ball.points[b].values());
      if (A == B) continue;
      const double gp = gromov_product(ball.points[a], ball.points[b], o);
      for (auto xi : A)
        for (auto eta : B)
          if (xi != eta) r.worst = std::max(r.worst, gp + std::log((*z)(xi, eta)));
    }
  r.pass = r.worst <= 1e-9;
  return r;
}

inline CheckResult nets(std::uint64_t seed) {
  CheckResult r{"epsilon-nets cover and separate", true, 0.0, {}};
  const auto z = circle_boundary(64);
  for (double eps : {0.1, 0.2, 0.3, 0.5}) {
    const auto net = epsilon_net(z.metric(), eps, seed % z.size());
    r.worst = std::max(r.worst, covering_radius_of(z.metric(), net) - eps);
    for (auto a : net)
      for (auto b : net)
        if (a != b) r.worst = std::max(r.worst, eps - z(a, b));
  }
  r.pass = r.worst <= 0.0;
  return r;
}

inline CheckResult inverse_maps(std::uint64_t seed) {
  CheckResult r{"inverse of an eps-isometry is a 3eps-isometry", true, 0.0, {}};
  Rng rng(seed);
  for (int trial = 0; trial < 20; ++trial) {
    // metric ambient spaces: the bound relies on the triangle inequality
    const auto z = trial % 2 ? circle_boundary(8 + rng.index(40)) : tree_boundary(2, 2 + rng.index(3));
    const auto net = farthest_point_net(z.metric(), 2 + rng.index(5), rng.index(z.size()));
    const PointMap f(z.metric().subspace(net), z.metric(), net);
    const double eps = rough_isometry_report(f).epsilon;
    const auto g = invert_rough_isometry(f);
    r.worst = std::max(r.worst, rough_isometry_report(g).epsilon - 3.0 * eps);
  }
  r.pass = r.worst <= 1e-12;
  return r;
}

inline CheckResult ai_symmetry(std::uint64_t seed) {
  CheckResult r{"AI-distance is symmetric and vanishes on relabellings", true, 0.0, {}};
  Rng rng(seed);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_antipodal(4 + rng.index(3), rng.next());
    const auto b = random_antipodal(4 + rng.index(3), rng.next());
    r.worst = std::max(r.worst, std::abs(ai_distance(a.metric(), b.metric()).value -
                                         ai_distance(b.metric(), a.metric()).value));
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.index(k)]);
    const auto shuffled = a.metric().subspace(perm);
    r.worst = std::max(r.worst, ai_distance(a.metric(), shuffled).value);
  }
  r.pass = r.worst == 0.0;
  return r;
}

inline CheckResult smoothing(std::uint64_t seed) {
  CheckResult r{"smoothing contracts and fixes constants", true, 0.0, {}};
  Rng rng(seed);
  const auto z = circle_boundary(48);
  for (double delta : {0.15, 0.3, 0.6}) {
    const auto pou = partition_of_unity(z.metric(), epsilon_net(z.metric(), delta), delta);
    for (std::size_t xi = 0; xi < z.size(); ++xi) {
      double s = 0.0;
      for (const auto& w : pou.weights) s += w[xi];
      r.worst = std::max(r.worst, std::abs(s - 1.0) - 1e-12);
    }
    std::vector<double> c(pou.net.size(), 1.7);
    r.worst = std::max(r.worst, sup_distance(smoothing_operator(c, pou), std::vector<double>(z.size(), 1.7)) - 1e-12);
    const auto t = random_tau(rng, pou.net.size(), 2.0);
    r.worst = std::max(r.worst, sup_norm(smoothing_operator(t, pou)) - sup_norm(t) - 1e-12);
  }
  r.pass = r.worst <= 0.0;
  return r;
}

inline CheckResult shadows(std::uint64_t seed) {
  CheckResult r{"sphere shadows partition the boundary", true, 0.0, {}};
  for (double radius : {1.0, 2.0, 3.0}) {
    const auto s = sphere_sample(share(z4_space()), radius, 6, seed);
    const auto d = components(s, default_eps_link(s));
    if (!shadows_partition(d, s.boundary_size)) r.pass = false;
    const auto b = component_gromov_bounds(s, d);
    r.worst = std::max(r.worst, b.max_cross_gromov - radius);
  }
  r.pass = r.pass && r.worst <= 1e-6;
  return r;
}

inline CheckResult filling_base_point(std::uint64_t) {
  CheckResult r{"filling map sends the base point to the base point", true, 0.0, {}};
  SpaceRef z = share(circle_boundary(32));
  const auto net = farthest_point_net(z->metric(), 8);
  SpaceRef zn = share(restrict_antipodal(*z, net));
  const auto image = filling_map(base_point(z), zn, net, 3.0, 0.5 * zn->metric().min_separation());
  r.worst = sup_norm(image.values());
  r.pass = r.worst == 0.0;
  return r;
}

}  // namespace detail

inline std::vector<CheckResult> run_all(std::uint64_t seed) {
  using Fn = std::function<CheckResult(std::uint64_t)>;
  const std::vector<Fn> checks{
      detail::gallery_valid,    [](std::uint64_t) { return detail::circle_doubling(); },
      detail::cross_ratio_invariance, detail::gmvt_round_trip,
      detail::discrepancy_lipschitz,  detail::antipodalization,
      detail::geodesic_and_retraction, detail::gromov_upper_bound,
      detail::nets,             detail::inverse_maps,
      detail::ai_symmetry,      detail::smoothing,
      detail::shadows,          detail::filling_base_point,
  };
  std::vector<CheckResult> out;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    try {
      out.push_back(checks[k](derive_seed(seed, k)));
    } catch (const Error& e) {
      out.push_back({"check " + std::to_string(k), false, 0.0, e.what()});
    }
  }
  return out;
}

}  // namespace mfill::suite
