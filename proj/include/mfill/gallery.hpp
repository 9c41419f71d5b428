#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>

#include "mfill/random.hpp"
#include "mfill/semimetric.hpp"

namespace mfill {

enum class OddCircle { Repair, Reject };

/// n equally spaced points on the circle with rho = |sin((a - b) / 2)|, the
/// visual metric of the disk seen from its center.
inline AntipodalSpace circle_boundary(std::size_t n, OddCircle odd = OddCircle::Repair) {
  if (n < 4) throw Error(ErrorCode::InvalidParameter, "circle needs n >= 4");
  if (n % 2 == 1 && odd == OddCircle::Reject)
    throw Error(ErrorCode::OddNRequiresRepair, "odd n = " + std::to_string(n) + " has no exact antipodes");
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto k = (j + n - i) % n;
      // Index-distance form keeps rho(i, i + n/2) exactly 1 and makes the
      // matrix exactly symmetric.
      const auto steps = std::min(k, n - k);
      m(i, j) = n % 2 == 0 && 2 * steps == n ? 1.0
                                             : std::sin(std::numbers::pi * static_cast<double>(steps) /
                                                        static_cast<double>(n));
    }
  FiniteSemiMetric s(std::move(m));
  if (n % 2 == 1) return repair_antipodes(s);
  return AntipodalSpace(std::move(s));
}

/// Leaves of the complete b-ary tree of depth d with
/// rho = exp(-depth of the deepest common ancestor). Ultrametric.
inline AntipodalSpace tree_boundary(std::size_t branching, std::size_t depth) {
  if (branching < 2 || depth < 1) throw Error(ErrorCode::InvalidParameter, "tree needs b >= 2 and d >= 1");
  std::size_t n = 1;
  for (std::size_t k = 0; k < depth; ++k) n *= branching;
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      // split level = number of leading base-b digits the two leaves share
      std::size_t shared = 0;
      std::size_t block = n / branching;
      while (block > 0 && i / block == j / block) {
        ++shared;
        block /= branching;
      }
      m(i, j) = std::exp(-static_cast<double>(shared));
    }
  return AntipodalSpace(FiniteSemiMetric(std::move(m)));
}

/// Symmetric off-diagonal noise eta * u with u uniform in [-1, 1], drawn from
/// `seed` independently of eta, then clipped positive, renormalized and
/// antipode-repaired.
inline AntipodalSpace perturb_antipodal(const AntipodalSpace& z, double eta, std::uint64_t seed) {
  const double limit = z.metric().min_separation() / 2.0;
  if (eta < 0.0 || eta >= limit)
    throw Error(ErrorCode::EtaTooLarge,
                "eta = " + std::to_string(eta) + " must lie in [0, " + std::to_string(limit) + ")");
  if (eta == 0.0) return z;
  Rng rng(seed);
  const std::size_t n = z.size();
  SquareMatrix m = z.metric().matrix();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max(m(i, j) + eta * rng.uniform(-1.0, 1.0), 1e-12);
      m(i, j) = m(j, i) = v;
    }
  return repair_antipodes(FiniteSemiMetric(std::move(m), z.labels()));
}

/// Random symmetric separations in [0.1, 1), made antipodal by pairing
/// points {2k, 2k+1} at separation 1 (an odd last point pairs with 0).
inline AntipodalSpace random_antipodal(std::size_t n, std::uint64_t seed) {
  if (n < 4) throw Error(ErrorCode::InvalidParameter, "random space needs n >= 4");
  Rng rng(seed);
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(0.1, 1.0);
  for (std::size_t k = 0; k + 1 < n; k += 2) m(k, k + 1) = m(k + 1, k) = 1.0;
  if (n % 2 == 1) m(n - 1, 0) = m(0, n - 1) = 1.0;
  return AntipodalSpace(normalize_diameter(FiniteSemiMetric(std::move(m))));
}

/// Z4 = {0,1,2,3} with rho(0,1) = rho(2,3) = 1 and 0.5 elsewhere; the smallest
/// non-trivial antipodal space and the running example of the test suite.
inline AntipodalSpace z4_space() {
  SquareMatrix m(4, 0.5);
  for (std::size_t i = 0; i < 4; ++i) m(i, i) = 0.0;
  m(0, 1) = m(1, 0) = m(2, 3) = m(3, 2) = 1.0;
  return AntipodalSpace(FiniteSemiMetric(std::move(m), {"1", "2", "3", "4"}));
}

struct CircleSpec {
  std::size_t n = 16;
};
struct TreeSpec {
  std::size_t branching = 2;
  std::size_t depth = 3;
};
struct RandomSpec {
  std::size_t n = 6;
  std::uint64_t seed = 1;
};
struct PerturbSpec {
  std::size_t circle_n = 0;  // 0 selects Z4 as the base space
  double eta = 0.05;
  std::uint64_t seed = 1;
};
using GallerySpec = std::variant<CircleSpec, TreeSpec, RandomSpec, PerturbSpec>;

inline AntipodalSpace make_space(const GallerySpec& spec) {
  struct Visitor {
    AntipodalSpace operator()(const CircleSpec& c) const { return circle_boundary(c.n); }
    AntipodalSpace operator()(const TreeSpec& t) const { return tree_boundary(t.branching, t.depth); }
    AntipodalSpace operator()(const RandomSpec& r) const { return random_antipodal(r.n, r.seed); }
    AntipodalSpace operator()(const PerturbSpec& p) const {
      return perturb_antipodal(p.circle_n == 0 ? z4_space() : circle_boundary(p.circle_n), p.eta, p.seed);
    }
  };
  return std::visit(Visitor{}, spec);
}

}  // namespace mfill
