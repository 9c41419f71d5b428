#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mfill/gallery.hpp"
#include "mfill/random.hpp"
#include "mfill/semimetric.hpp"
#include "oracles.hpp"

using namespace mfill;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SquareMatrix z4_matrix() { return z4_space().metric().matrix(); }

SquareMatrix scaled(SquareMatrix m, double c) {
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) m(i, j) *= c;
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ParseError;
}

std::vector<double> random_tau(Rng& rng, std::size_t n, double scale) {
  std::vector<double> t(n);
  for (double& x : t) x = rng.uniform(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("semi-metric validation clauses", "[semimetric]") {
  CHECK_NOTHROW(validate_semimetric(z4_matrix()));

  SquareMatrix zero_entry(3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) zero_entry(i, i) = 0.0;
  zero_entry(0, 2) = zero_entry(2, 0) = 0.0;
  CHECK(code_of([&] { validate_semimetric(zero_entry); }) == ErrorCode::NonpositiveOffDiagonal);

  auto asym = z4_matrix();
  asym(0, 1) = 0.7;
  CHECK(code_of([&] { validate_semimetric(asym); }) == ErrorCode::AsymmetricMatrix);

  auto diag = z4_matrix();
  diag(2, 2) = 0.1;
  CHECK(code_of([&] { validate_semimetric(diag); }) == ErrorCode::NonzeroDiagonal);

  CHECK(code_of([] { validate_semimetric(SquareMatrix(1)); }) == ErrorCode::TooFewPoints);
  CHECK(code_of([] { SquareMatrix::from_rows({{0, 1}, {1}}); }) == ErrorCode::NotSquare);
}

TEST_CASE("antipodal validation", "[semimetric]") {
  CHECK_NOTHROW(validate_antipodal(FiniteSemiMetric(z4_matrix())));

  auto m = z4_matrix();
  m(0, 1) = m(1, 0) = 0.9;
  try {
    validate_antipodal(FiniteSemiMetric(m, {"1", "2", "3", "4"}));
    FAIL("accepted a space without antipode for point 1");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingAntipode);
    CHECK_THAT(e.detail(), Catch::Matchers::ContainsSubstring("1"));
  }

  CHECK(code_of([] { validate_antipodal(FiniteSemiMetric(scaled(z4_matrix(), 2.0))); }) ==
        ErrorCode::DiameterNotOne);
}

TEST_CASE("diameter normalization", "[semimetric]") {
  const FiniteSemiMetric z4(z4_matrix());
  CHECK(normalize_diameter(FiniteSemiMetric(scaled(z4_matrix(), 2.0))).matrix() == z4.matrix());
  CHECK(normalize_diameter(z4).matrix() == z4.matrix());

  Rng rng(11);
  SquareMatrix m(5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) m(i, j) = m(j, i) = rng.uniform(0.2, 3.0);
  const FiniteSemiMetric s(m);
  const auto out = normalize_diameter(s);
  CHECK_THAT(out.diameter(), WithinRel(1.0, 1e-15));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t k = 0; k < 5; ++k)
        for (std::size_t l = 0; l < 5; ++l)
          if (i != j && k != l) CHECK_THAT(out(i, j) / out(k, l), WithinRel(s(i, j) / s(k, l), 1e-13));
}

TEST_CASE("cross-ratio", "[semimetric]") {
  const auto z = z4_space().metric();
  CHECK_THAT(cross_ratio(z, 0, 2, 1, 3), WithinRel(4.0, 1e-15));
  CHECK_THAT(cross_ratio(z, 0, 2, 3, 1), WithinRel(0.25, 1e-15));

  SquareMatrix c(5, 0.7);
  for (std::size_t i = 0; i < 5; ++i) c(i, i) = 0.0;
  CHECK(cross_ratio(FiniteSemiMetric(c), 0, 1, 2, 3) == 1.0);

  CHECK(code_of([&] { cross_ratio(z, 0, 0, 1, 2); }) == ErrorCode::NonDistinctPoints);
  CHECK(code_of([] {
          SquareMatrix m(3, 1.0);
          for (std::size_t i = 0; i < 3; ++i) m(i, i) = 0.0;
          cross_ratio(FiniteSemiMetric(m), 0, 1, 2, 0);
        }) == ErrorCode::TooFewPoints);
}

TEST_CASE("GMVT rescaling", "[semimetric]") {
  const auto z = z4_space();
  CHECK(gmvt_apply(std::vector<double>(4, 0.0), z).matrix() == z.metric().matrix());

  const std::vector<double> tau{1, -1, 0, 0};
  const auto s1 = gmvt_apply(tau, z);
  CHECK_THAT(s1(0, 2), WithinAbs(std::exp(0.5) * 0.5, 1e-15));
  CHECK_THAT(s1(0, 2), WithinAbs(0.8244, 1e-4));

  // cross-ratios agree on every quadruple of distinct points
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 4; ++d)
          if (a != b && a != c && a != d && b != c && b != d && c != d)
            CHECK_THAT(cross_ratio(s1, a, b, c, d), WithinRel(cross_ratio(z.metric(), a, b, c, d), 1e-12));

  // applying -tau to the image undoes it; the image is generally not antipodal,
  // so undo entrywise.
  const std::vector<double> minus{-1, 1, 0, 0};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) CHECK_THAT(std::exp(0.5 * (minus[i] + minus[j])) * s1(i, j), WithinRel(z(i, j), 1e-15));
}

TEST_CASE("GMVT derivative", "[semimetric]") {
  const auto z = z4_space();
  const std::vector<double> tau{0.3, -0.7, 1.1, -0.2};
  const auto back = gmvt_derivative(gmvt_apply(tau, z), z.metric());
  for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(back[i], WithinAbs(tau[i], 1e-10));

  for (double v : gmvt_derivative(z.metric(), z.metric())) CHECK_THAT(v, WithinAbs(0.0, 1e-15));

  auto m = z.metric().matrix();
  m(0, 2) = m(2, 0) = 0.6;
  CHECK(code_of([&] { gmvt_derivative(FiniteSemiMetric(m), z.metric()); }) == ErrorCode::NotMoebiusEquivalent);
}

TEST_CASE("GMVT round trip on random spaces", "[semimetric][property]") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const auto z = random_antipodal(4 + rng.index(10), rng.next());
    const auto tau = random_tau(rng, z.size(), 2.0);
    const auto s1 = gmvt_apply(tau, z);
    const auto back = gmvt_derivative(s1, z.metric());
    for (std::size_t i = 0; i < z.size(); ++i) REQUIRE_THAT(back[i], WithinAbs(tau[i], 1e-10));
    for (int q = 0; q < 10; ++q) {
      std::size_t p[4];
      for (auto& x : p) x = rng.index(z.size());
      if (p[0] == p[1] || p[0] == p[2] || p[0] == p[3] || p[1] == p[2] || p[1] == p[3] || p[2] == p[3]) continue;
      REQUIRE_THAT(cross_ratio(s1, p[0], p[1], p[2], p[3]),
                   WithinRel(cross_ratio(z.metric(), p[0], p[1], p[2], p[3]), 1e-12));
    }
  }
}

TEST_CASE("quasi-metric constant", "[semimetric]") {
  // brute force over ordered triples of distinct points
  auto brute = [](const FiniteSemiMetric& s) {
    double k = 1.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        for (std::size_t l = 0; l < s.size(); ++l)
          if (i != j && j != l && i != l) k = std::max(k, s(i, l) / std::max(s(i, j), s(j, l)));
    return k;
  };
  const auto z4 = z4_space().metric();
  CHECK(quasimetric_constant(z4) == brute(z4));
  CHECK(quasimetric_constant(z4) == 2.0);
  CHECK(quasimetric_constant(tree_boundary(2, 3).metric()) == 1.0);
  for (std::size_t n : {6, 10, 16}) {
    const auto c = circle_boundary(n).metric();
    CHECK(satisfies_triangle_inequality(c.matrix()));
    CHECK(quasimetric_constant(c) <= 2.0);
    CHECK(quasimetric_constant(c) == brute(c));
  }
}

TEST_CASE("epsilon nets", "[semimetric]") {
  const auto z4 = z4_space().metric();
  CHECK(epsilon_net(z4, 1.5).size() == 1);
  CHECK(epsilon_net(z4, 0.4).size() == 4);

  const auto c = circle_boundary(64).metric();
  for (double eps : {0.05, 0.1, 0.3, 0.7}) {
    const auto net = epsilon_net(c, eps);
    for (std::size_t i = 0; i < c.size(); ++i) {
      double nearest = 1e9;
      for (auto k : net) nearest = std::min(nearest, c(i, k));
      CHECK(nearest < eps);
    }
    for (auto a : net)
      for (auto b : net)
        if (a != b) CHECK(c(a, b) >= eps);
  }
  CHECK(epsilon_net(c, 0.3, 5).front() == 5);
}

TEST_CASE("equicontinuity modulus", "[semimetric]") {
  const std::vector<double> grid{0.05, 0.1, 0.2, 0.4, 0.8};
  const std::vector<FiniteSemiMetric> one{circle_boundary(20).metric()};
  const auto m1 = equicontinuity_modulus(one, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(m1.omegas[k] <= grid[k]);

  const std::vector<FiniteSemiMetric> z4{z4_space().metric()};
  CHECK(equicontinuity_modulus(z4, {0.4}).omegas[0] == 0.0);

  std::vector<FiniteSemiMetric> circles;
  for (std::size_t n = 8; n <= 64; n += 8) circles.push_back(circle_boundary(n).metric());
  const auto mc = equicontinuity_modulus(circles, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(mc.omegas[k] <= 2.0 * grid[k]);
    CHECK(mc.omegas[k] <= grid[k]);
    if (k) CHECK(mc.omegas[k] >= mc.omegas[k - 1]);
  }
}

TEST_CASE("modulus against a direct scan", "[semimetric][property]") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = random_antipodal(5 + rng.index(6), rng.next()).metric();
    const double delta = rng.uniform(0.1, 1.0);
    double expect = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < z.size(); ++j)
        if (i != j && z(i, j) < delta)
          for (std::size_t k = 0; k < z.size(); ++k) expect = std::max(expect, std::abs(z(i, k) - z(j, k)));
    const std::vector<FiniteSemiMetric> fam{z};
    CHECK(equicontinuity_modulus(fam, {delta}).omegas[0] == expect);
  }
}
