#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfill/error.hpp"

namespace mfill {

/// Default tolerances shared across modules.
namespace tol {
inline constexpr double structural = 1e-12;  // relative, for exact identities
inline constexpr double equivalence = 1e-8;  // GMVT residual
inline constexpr double membership = 1e-8;   // sup-norm of the discrepancy
inline constexpr double argmax_tie = 1e-9;
}  // namespace tol

/// Dense row-major square matrix of doubles.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n)
        throw Error(ErrorCode::NotSquare, "row " + std::to_string(i) + " has " +
                                              std::to_string(rows[i].size()) + " entries, expected " +
                                              std::to_string(n));
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  /// Largest off-diagonal entry (0 for n < 2).
  double max_off_diagonal() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j) m = std::max(m, (*this)(i, j));
    return m;
  }

  SquareMatrix submatrix(std::span<const std::size_t> idx) const {
    SquareMatrix s(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) s(a, b) = (*this)(idx[a], idx[b]);
    return s;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

/// n labelled points with a separating function rho: symmetric, zero on the
/// diagonal and strictly positive off it. No triangle inequality is assumed.
class FiniteSemiMetric {
 public:
  /// Validates and takes ownership. Throws NotSquare, TooFewPoints,
  /// AsymmetricMatrix, NonzeroDiagonal, NonpositiveOffDiagonal.
  explicit FiniteSemiMetric(SquareMatrix rho, std::vector<std::string> labels = {})
      : rho_(std::move(rho)), labels_(std::move(labels)) {
    const std::size_t n = rho_.size();
    if (labels_.empty()) labels_ = default_labels(n);
    if (labels_.size() != n)
      throw Error(ErrorCode::DimensionMismatch,
                  std::to_string(labels_.size()) + " labels for " + std::to_string(n) + " points");
    if (n < 2) throw Error(ErrorCode::TooFewPoints, "need at least 2 points, got " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (rho_(i, i) != 0.0)
        throw Error(ErrorCode::NonzeroDiagonal, "rho[" + std::to_string(i) + "][" + std::to_string(i) + "] != 0");
      for (std::size_t j = i + 1; j < n; ++j) {
        const double a = rho_(i, j), b = rho_(j, i);
        if (!std::isfinite(a) || !std::isfinite(b) || a != b)
          throw Error(ErrorCode::AsymmetricMatrix,
                      "rho[" + std::to_string(i) + "][" + std::to_string(j) + "] != rho[" + std::to_string(j) +
                          "][" + std::to_string(i) + "]");
        if (!(a > 0.0))
          throw Error(ErrorCode::NonpositiveOffDiagonal,
                      "rho[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + std::to_string(a));
      }
    }
  }

  std::size_t size() const noexcept { return rho_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return rho_(i, j); }
  const SquareMatrix& matrix() const noexcept { return rho_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double diameter() const { return rho_.max_off_diagonal(); }

  /// Smallest positive separation.
  double min_separation() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) m = std::min(m, rho_(i, j));
    return m;
  }

  FiniteSemiMetric subspace(std::span<const std::size_t> idx) const {
    std::vector<std::string> l;
    l.reserve(idx.size());
    for (auto i : idx) l.push_back(labels_[i]);
    return FiniteSemiMetric(rho_.submatrix(idx), std::move(l));
  }

  friend bool operator==(const FiniteSemiMetric& a, const FiniteSemiMetric& b) { return a.rho_ == b.rho_; }

 private:
  SquareMatrix rho_;
  std::vector<std::string> labels_;
};

inline FiniteSemiMetric validate_semimetric(const SquareMatrix& m, std::vector<std::string> labels = {}) {
  return FiniteSemiMetric(m, std::move(labels));
}

/// A semi-metric of diameter one in which every point has an antipode.
/// Caches 2*log(rho), the quantity every discrepancy evaluation needs.
class AntipodalSpace {
 public:
  /// Throws DiameterNotOne or MissingAntipode.
  explicit AntipodalSpace(FiniteSemiMetric base, double rel_tol = tol::structural) : base_(std::move(base)) {
    const std::size_t n = base_.size();
    const double diam = base_.diameter();
    if (std::abs(diam - 1.0) > rel_tol)
      throw Error(ErrorCode::DiameterNotOne, "diameter is " + std::to_string(diam));
    for (std::size_t i = 0; i < n; ++i) {
      double row_max = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) row_max = std::max(row_max, base_(i, j));
      if (row_max < 1.0 - rel_tol)
        throw Error(ErrorCode::MissingAntipode, "point " + base_.labels()[i] + " (index " + std::to_string(i) +
                                                    ") has no antipode; row max " + std::to_string(row_max));
    }
    two_log_rho_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        two_log_rho_[i * n + j] = i == j ? -std::numeric_limits<double>::infinity() : 2.0 * std::log(base_(i, j));
  }

  std::size_t size() const noexcept { return base_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return base_(i, j); }
  const FiniteSemiMetric& metric() const noexcept { return base_; }
  const std::vector<std::string>& labels() const noexcept { return base_.labels(); }

  /// 2 log rho(i, j); -inf on the diagonal so it never wins a max.
  double two_log(std::size_t i, std::size_t j) const { return two_log_rho_[i * size() + j]; }
  std::span<const double> two_log_row(std::size_t i) const { return {two_log_rho_.data() + i * size(), size()}; }

  friend bool operator==(const AntipodalSpace& a, const AntipodalSpace& b) { return a.base_ == b.base_; }

 private:
  FiniteSemiMetric base_;
  std::vector<double> two_log_rho_;
};

inline AntipodalSpace validate_antipodal(const FiniteSemiMetric& s) { return AntipodalSpace(s); }

inline FiniteSemiMetric normalize_diameter(const FiniteSemiMetric& s) {
  const double diam = s.diameter();
  SquareMatrix m = s.matrix();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) m(i, j) /= diam;
  return FiniteSemiMetric(std::move(m), s.labels());
}

/// Normalizes to diameter one, then raises each row's largest entry (and its
/// mirror) to exactly 1 where no antipode exists. Rows are processed in index
/// order, so a row that received a 1 from an earlier row is left alone.
inline AntipodalSpace repair_antipodes(const FiniteSemiMetric& s) {
  FiniteSemiMetric normalized = normalize_diameter(s);
  SquareMatrix m = normalized.matrix();
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = i == 0 ? 1 : 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && m(i, j) > m(i, arg)) arg = j;
    if (m(i, arg) < 1.0 - tol::structural) {
      m(i, arg) = 1.0;
      m(arg, i) = 1.0;
    } else {
      m(i, arg) = m(arg, i) = 1.0;  // snap roundoff
    }
  }
  return AntipodalSpace(FiniteSemiMetric(std::move(m), s.labels()));
}

/// rho(a, c) rho(b, d) / (rho(a, d) rho(b, c)) for points (xi, xi', eta, eta')
/// = (a, b, c, d).
inline double cross_ratio(const FiniteSemiMetric& s, std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  const std::size_t n = s.size();
  if (n < 4) throw Error(ErrorCode::TooFewPoints, "cross-ratio needs at least 4 points");
  if (a >= n || b >= n || c >= n || d >= n) throw Error(ErrorCode::DimensionMismatch, "index out of range");
  if (a == b || a == c || a == d || b == c || b == d || c == d)
    throw Error(ErrorCode::NonDistinctPoints, "cross-ratio needs four distinct points");
  return s(a, c) * s(b, d) / (s(a, d) * s(b, c));
}

/// Moebius image of the base under log-derivative tau:
/// rho1(i, j) = e^{tau_i / 2} e^{tau_j / 2} rho0(i, j).
inline FiniteSemiMetric gmvt_apply(std::span<const double> tau, const AntipodalSpace& base) {
  const std::size_t n = base.size();
  if (tau.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "tau has " + std::to_string(tau.size()) + " entries, space has " +
                                                  std::to_string(n) + " points");
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m(i, j) = std::exp(0.5 * (tau[i] + tau[j])) * base(i, j);
  return FiniteSemiMetric(std::move(m), base.labels());
}

struct GmvtFit {
  std::vector<double> tau;
  double residual = 0.0;  // max |log rho1 - log rho0 - (tau_i + tau_j)/2|
};

/// Least-squares fit of tau in log rho1(i,j) - log rho0(i,j) = (tau_i + tau_j)/2.
/// The normal equations (n-2) tau_i + sum(tau) = S_i have a closed form.
inline GmvtFit gmvt_fit(const FiniteSemiMetric& rho1, const FiniteSemiMetric& rho0) {
  const std::size_t n = rho0.size();
  if (rho1.size() != n) throw Error(ErrorCode::DimensionMismatch, "point sets differ in size");
  if (n < 3) throw Error(ErrorCode::TooFewPoints, "the derivative is not unique on fewer than 3 points");
  std::vector<double> b(n * n, 0.0), row_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) {
        b[i * n + j] = 2.0 * (std::log(rho1(i, j)) - std::log(rho0(i, j)));
        row_sum[i] += b[i * n + j];
      }
  const double total = std::accumulate(row_sum.begin(), row_sum.end(), 0.0) / (2.0 * static_cast<double>(n - 1));
  GmvtFit fit;
  fit.tau.resize(n);
  for (std::size_t i = 0; i < n; ++i) fit.tau[i] = (row_sum[i] - total) / static_cast<double>(n - 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      fit.residual = std::max(fit.residual, 0.5 * std::abs(b[i * n + j] - fit.tau[i] - fit.tau[j]));
  return fit;
}

/// Recovers the log-derivative relating two Moebius-equivalent separations.
/// Throws NotMoebiusEquivalent when the log-space residual exceeds tol.
inline std::vector<double> gmvt_derivative(const FiniteSemiMetric& rho1, const FiniteSemiMetric& rho0,
                                           double tolerance = tol::equivalence) {
  GmvtFit fit = gmvt_fit(rho1, rho0);
  if (!(fit.residual <= tolerance))
    throw Error(ErrorCode::NotMoebiusEquivalent, "GMVT residual " + std::to_string(fit.residual));
  return std::move(fit.tau);
}

/// Smallest K with rho(i,k) <= K max(rho(i,j), rho(j,k)) over all triples of
/// distinct points. Finite for any finite space; 1 exactly for ultrametrics.
inline double quasimetric_constant(const FiniteSemiMetric& s) {
  const std::size_t n = s.size();
  double k = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t l = i + 1; l < n; ++l) {
        if (l == j) continue;
        k = std::max(k, s(i, l) / std::max(s(i, j), s(j, l)));
      }
    }
  return k;
}

/// Distance from each point to the subset.
inline std::vector<double> distance_to_subset(const FiniteSemiMetric& s, std::span<const std::size_t> subset) {
  std::vector<double> d(s.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (auto k : subset) d[i] = std::min(d[i], s(i, k));
  return d;
}

inline double covering_radius_of(const FiniteSemiMetric& s, std::span<const std::size_t> subset) {
  const auto d = distance_to_subset(s, subset);
  return *std::max_element(d.begin(), d.end());
}

namespace detail {
/// Farthest-point greedy. Stops when `count` points are chosen or when the
/// farthest remaining point is closer than `eps`. Ties go to the lowest index.
inline std::vector<std::size_t> farthest_point_greedy(const FiniteSemiMetric& s, std::size_t count, double eps,
                                                      std::size_t seed) {
  const std::size_t n = s.size();
  if (seed >= n) throw Error(ErrorCode::DimensionMismatch, "seed index out of range");
  std::vector<std::size_t> net{seed};
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = s(i, seed);
  while (net.size() < count) {
    std::size_t far = n;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (dist[i] > best) {
        best = dist[i];
        far = i;
      }
    if (best < eps || best <= 0.0) break;
    net.push_back(far);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], s(i, far));
  }
  return net;
}
}  // namespace detail

/// eps-net by farthest-point insertion: every point lies at separation < eps
/// from the net and net points are pairwise >= eps apart.
inline std::vector<std::size_t> epsilon_net(const FiniteSemiMetric& s, double eps, std::size_t seed = 0) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParameter, "eps must be positive");
  return detail::farthest_point_greedy(s, s.size(), eps, seed);
}

/// First `count` points of the farthest-point ordering.
inline std::vector<std::size_t> farthest_point_net(const FiniteSemiMetric& s, std::size_t count,
                                                   std::size_t seed = 0) {
  if (count == 0) throw Error(ErrorCode::InvalidParameter, "net size must be positive");
  return detail::farthest_point_greedy(s, std::min(count, s.size()), 0.0, seed);
}

struct EquicontinuityModulus {
  std::vector<double> deltas;
  std::vector<double> omegas;
};

/// omega(delta) = sup over spaces, pairs (xi, eta) with rho(xi, eta) < delta,
/// and third points zeta of |rho(xi, zeta) - rho(eta, zeta)|.
inline EquicontinuityModulus equicontinuity_modulus(std::span<const FiniteSemiMetric> family,
                                                    std::vector<double> delta_grid) {
  if (family.empty()) throw Error(ErrorCode::InvalidParameter, "empty family");
  std::sort(delta_grid.begin(), delta_grid.end());
  EquicontinuityModulus mod{delta_grid, std::vector<double>(delta_grid.size(), 0.0)};
  for (const auto& s : family) {
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double sep = s(i, j);
        double drift = 0.0;
        for (std::size_t k = 0; k < n; ++k) drift = std::max(drift, std::abs(s(i, k) - s(j, k)));
        // first grid index with sep < delta
        auto it = std::upper_bound(delta_grid.begin(), delta_grid.end(), sep);
        for (auto d = static_cast<std::size_t>(it - delta_grid.begin()); d < delta_grid.size(); ++d)
          mod.omegas[d] = std::max(mod.omegas[d], drift);
      }
  }
  return mod;
}

/// Triangle-inequality check with absolute slack.
inline bool satisfies_triangle_inequality(const SquareMatrix& d, double slack = 1e-9) {
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (d(i, k) > d(i, j) + d(j, k) + slack) return false;
  return true;
}

}  // namespace mfill
