#pragma once

// Two-sample U-statistics comparing a training block with (a segment of) the monitoring stream,
// plus the incremental state that evaluates the CUSUM, Page and repurposing detectors online.
//
// Notation used below, for training size m and k monitoring points X_{m+1..m+k}:
//   cross(r, k)  = sum_{i <= m} sum_{m+r < j <= m+k} h(X_i, X_j)
//   within(r, k) = sum_{m+r < i < j <= m+k} h(X_i, X_j)
//   U(r, k)      = 2 cross / ((k-r) m) - train_pairs / C(m,2) - within / C(k-r,2)
// U(r, k) is evaluated at (min(r, k-2), max(k, 2)) so every segment holds at least two points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ucpd/core.hpp"
#include "ucpd/kernels.hpp"

namespace ucpd {

namespace detail {
inline long double pairs(std::size_t n) { return static_cast<long double>(n) * (n - 1) / 2.0L; }
}  // namespace detail

/// Direct triple-sum evaluation of U(r, k); O((m + k)^2) kernel calls. Reference for the incremental path.
template <PairKernel K>
double u_stat_batch(const K& h, const Sample& training, const Sample& monitoring, std::size_t r, std::size_t k) {
  const std::size_t m = training.size();
  if (m < 2) throw InputError("training sample needs at least two points");
  if (monitoring.empty()) throw InputError("monitoring sample is empty");
  if (training.dim() != monitoring.dim()) throw InputError("training and monitoring dimensions differ");
  k = std::max<std::size_t>(k, 2);
  r = std::min(r, k - 2);
  if (k > monitoring.size()) throw InputError("k exceeds the number of monitoring points");

  long double cross = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = r; j < k; ++j) cross += h(training[i], monitoring[j]);
  }
  long double train = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) train += h(training[i], training[j]);
  }
  long double within = 0.0L;
  for (std::size_t i = r; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) within += h(monitoring[i], monitoring[j]);
  }
  const std::size_t n = k - r;
  const long double u = 2.0L * cross / (static_cast<long double>(n) * m) - train / detail::pairs(m) -
                        within / detail::pairs(n);
  return static_cast<double>(u);
}

/// Boundary shape. Standard: ((k/m)/(1+k/m))^beta (1+k/m)^2. ShortHorizon(M): (M/m)(k/M)^beta.
struct BoundaryParams {
  enum class Mode { Standard, ShortHorizon };
  double beta = 0.0;
  Mode mode = Mode::Standard;
  std::size_t horizon = 0;  // M, ShortHorizon only

  void validate() const {
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("boundary weight beta must lie in [0, 1)");
    if (mode == Mode::ShortHorizon && horizon < 2) throw ConfigError("short-horizon boundary needs M >= 2");
  }
};

inline double boundary(std::size_t k, std::size_t m, const BoundaryParams& p) {
  p.validate();
  if (k < 1 || m < 1) throw ContractViolation("boundary needs k >= 1 and m >= 1");
  const double km = static_cast<double>(k) / static_cast<double>(m);
  if (p.mode == BoundaryParams::Mode::ShortHorizon) {
    if (k > p.horizon) throw ContractViolation("short-horizon boundary evaluated beyond M");
    const double M = static_cast<double>(p.horizon);
    return (M / static_cast<double>(m)) * std::pow(static_cast<double>(k) / M, p.beta);
  }
  return std::pow(km / (1.0 + km), p.beta) * (1.0 + km) * (1.0 + km);
}

/// Moving window w(k, m) = floor(c_w m + b_w ((k - c_w m) v 0)).
struct WindowParams {
  double cw = 1.0;
  double bw = 0.5;

  void validate() const {
    if (!(cw >= 0.0 && std::isfinite(cw))) throw ConfigError("window c_w must be >= 0");
    if (!(bw >= 0.0 && bw <= 1.0)) throw ConfigError("window b_w must lie in [0, 1]");
  }

  [[nodiscard]] std::size_t window(std::size_t k, std::size_t m) const {
    const double base = cw * static_cast<double>(m);
    const double extra = std::max(static_cast<double>(k) - base, 0.0);
    // tolerance so that e.g. 6 + 0.5 * 4 does not floor to 7.999...
    return static_cast<std::size_t>(std::floor(base + bw * extra + 1e-9));
  }
};

/// Incremental sufficient statistics for one stream.
///
/// Stores every point (kernels are not linear, so nothing can be sketched). Aggregates:
///   train_pairs   sum over training pairs
///   cross_[t]     cross(0, t), t = 0..k
///   mon_pairs_[t] within(0, t), t = 0..k
///   suffix_[r]    within(r, k) at the current k, r = 0..k-1
/// Each update costs exactly m + k kernel evaluations plus O(k) additions; suffix_ makes the exact
/// Page maximum and the repurposing statistic available in O(k) memory.
template <PairKernel K>
class DetectorState {
 public:
  DetectorState(K h, Sample training) : h_(std::move(h)), points_(std::move(training)) {
    m_ = points_.size();
    if (m_ < 2) throw InputError("training sample needs at least two points");
    long double acc = 0.0L;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = i + 1; j < m_; ++j) acc += h_(points_[i], points_[j]);
    }
    train_pairs_ = acc;
    cross_.push_back(0.0L);
    mon_pairs_.push_back(0.0L);
  }

  /// Appends monitoring observation k + 1.
  void update(std::span<const double> x) {
    if (x.size() != points_.dim()) throw InputError("observation dimension does not match training data");
    const std::size_t k = monitoring_size();

    long double c = 0.0L;
    for (std::size_t i = 0; i < m_; ++i) c += h_(points_[i], x);

    row_.resize(k);
    for (std::size_t i = 0; i < k; ++i) row_[i] = h_(points_[m_ + i], x);

    // suffix_[r] gains sum_{i=r}^{k-1} row_[i] for the new pairs (m+i+1, m+k+1)
    long double running = 0.0L;
    for (std::size_t r = k; r-- > 0;) {
      running += row_[r];
      suffix_[r] += running;
    }
    suffix_.push_back(0.0L);

    cross_.push_back(cross_.back() + c);
    mon_pairs_.push_back(mon_pairs_.back() + running);
    points_.push_back(x);
  }

  [[nodiscard]] std::size_t training_size() const { return m_; }
  [[nodiscard]] std::size_t monitoring_size() const { return points_.size() - m_; }
  [[nodiscard]] std::size_t dim() const { return points_.dim(); }
  [[nodiscard]] const Sample& points() const { return points_; }
  [[nodiscard]] const K& kernel() const { return h_; }

  [[nodiscard]] long double training_pair_sum() const { return train_pairs_; }
  /// cross(0, t) for t <= k.
  [[nodiscard]] long double cross_prefix(std::size_t t) const { return cross_.at(t); }
  /// within(0, t) for t <= k.
  [[nodiscard]] long double monitoring_pair_prefix(std::size_t t) const { return mon_pairs_.at(t); }
  /// Row sum of monitoring point j (1-based) against earlier monitoring points.
  [[nodiscard]] long double monitoring_row(std::size_t j) const {
    if (j == 0 || j > monitoring_size()) throw ContractViolation("monitoring row index out of range");
    return mon_pairs_[j] - mon_pairs_[j - 1];
  }
  /// within(r, k) at the current k.
  [[nodiscard]] long double segment_pair_sum(std::size_t r) const { return suffix_.at(r); }

  /// U(r, k) at the current k (r clamped to k - 2).
  [[nodiscard]] double u_stat(std::size_t r) const {
    const std::size_t k = require_current(monitoring_size());
    r = std::min(r, k - 2);
    return static_cast<double>(u_segment(r, k));
  }

  /// CUSUM detector m^{-1} k^2 |U(0, k)|; any k <= current, k < 2 evaluated at k = 2.
  [[nodiscard]] double d1(std::size_t k) const {
    k = std::max<std::size_t>(k, 2);
    if (k > monitoring_size()) throw ContractViolation("detector evaluated beyond the observed stream");
    const long double u = 2.0L * cross_[k] / (static_cast<long double>(k) * m_) - train_pairs_ / detail::pairs(m_) -
                          mon_pairs_[k] / detail::pairs(k);
    return static_cast<double>(static_cast<long double>(k) * k * std::abs(u) / m_);
  }
  [[nodiscard]] double d1() const { return d1(monitoring_size()); }

  /// Page detector m^{-1} max_r (k - r)^2 |U(r, k)| at the current k.
  /// `max_lag` keeps r = 0 and r >= k - max_lag as candidates.
  [[nodiscard]] double d2(std::optional<std::size_t> max_lag = std::nullopt) const {
    const std::size_t k = require_current(monitoring_size());
    long double best = 0.0L;
    const std::size_t lo = (max_lag && *max_lag < k) ? std::max<std::size_t>(1, k - *max_lag) : 1;
    auto consider = [&](std::size_t r) {
      const std::size_t n = k - r;
      const long double v = static_cast<long double>(n) * n * std::abs(u_segment(r, k));
      best = std::max(best, v);
    };
    consider(0);
    for (std::size_t r = lo; r + 2 <= k; ++r) consider(r);
    return static_cast<double>(best / m_);
  }

  /// Repurposing detector m^{-1} (k ^ w)^2 |U~(w, k)| at the current k. Equals d1 while k <= w.
  [[nodiscard]] double d3(const WindowParams& wp) const {
    const std::size_t k = require_current(monitoring_size());
    const std::size_t w = wp.window(k, m_);
    if (w < 2) throw ConfigError("repurposing window w < 2; increase c_w or b_w");
    if (k <= w) return d1(k);
    const std::size_t r = k - w;
    const long double train = train_pairs_ + cross_[r] + mon_pairs_[r];
    const long double cross = (cross_[k] - cross_[r]) + (mon_pairs_[k] - mon_pairs_[r] - suffix_[r]);
    const std::size_t mr = m_ + r;
    const long double u = 2.0L * cross / (static_cast<long double>(w) * mr) - train / detail::pairs(mr) -
                          suffix_[r] / detail::pairs(w);
    return static_cast<double>(static_cast<long double>(w) * w * std::abs(u) / m_);
  }

 private:
  [[nodiscard]] std::size_t require_current(std::size_t k) const {
    if (k < 2) throw ContractViolation("Page and repurposing detectors need k >= 2 monitoring points");
    return k;
  }

  [[nodiscard]] long double u_segment(std::size_t r, std::size_t k) const {
    const std::size_t n = k - r;
    return 2.0L * (cross_[k] - cross_[r]) / (static_cast<long double>(n) * m_) - train_pairs_ / detail::pairs(m_) -
           suffix_[r] / detail::pairs(n);
  }

  K h_;
  Sample points_;
  std::size_t m_ = 0;
  long double train_pairs_ = 0.0L;
  std::vector<long double> cross_;
  std::vector<long double> mon_pairs_;
  std::vector<long double> suffix_;
  std::vector<double> row_;
};

template <PairKernel K>
DetectorState<K> make_state(K h, Sample training) {
  return DetectorState<K>(std::move(h), std::move(training));
}

}  // namespace ucpd
