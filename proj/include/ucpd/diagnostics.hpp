#pragma once

// Randomised test of H0: E|X|^k = infinity.
//
//   mu_k  = mean|X|^k / (mean X^2)^{k/2},   psi_k = exp(mu_k) - 1
//   per replication b: xi_1..xi_N ~ N(0,1), zeta_n(u) = 1{psi^{1/2} xi_n <= u}, u = +-sqrt(2)
//   theta(u) = 2 N^{-1/2} sum_n (zeta_n(u) - 1/2),  Theta_b = (theta(sqrt2)^2 + theta(-sqrt2)^2) / 2
//   Q = B^{-1} sum_b 1{Theta_b <= c_alpha},  c_alpha the upper-alpha chi-square(1) quantile
// H0 is retained (infinite moment) when Q >= (1 - alpha) - sqrt(alpha (1 - alpha)) / B^{1/4}.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/random/normal_distribution.hpp>
#include <nlohmann/json.hpp>

#include "ucpd/core.hpp"

namespace ucpd {

struct MomentTestResult {
  std::size_t order_k = 0;
  double mu_k = 0.0;
  double psi_k = 0.0;
  double Q = 0.0;
  double threshold = 0.0;
  bool decide_infinite_moment = false;
  std::size_t B = 0;
  double alpha = 0.0;
};

inline nlohmann::json moment_json(const MomentTestResult& r) {
  return {{"order_k", r.order_k}, {"mu_k", r.mu_k}, {"psi_k", r.psi_k}, {"Q", r.Q}, {"threshold", r.threshold},
          {"decide_infinite_moment", r.decide_infinite_moment}, {"B", r.B}, {"alpha", r.alpha}};
}

/// P{chi^2_1 >= c} = alpha.
inline double chi2_1_upper_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(1.0), alpha));
}

inline double moment_ratio(std::span<const double> xs, std::size_t k) {
  if (xs.empty()) throw InputError("moment test needs a non-empty sample");
  if (k < 1) throw ConfigError("moment order k must be >= 1");
  long double sk = 0.0L, s2 = 0.0L;
  for (double x : xs) {
    const long double a = std::abs(static_cast<long double>(x));
    sk += std::pow(a, static_cast<long double>(k));
    s2 += a * a;
  }
  if (s2 == 0.0L) throw InputError("moment test undefined for an all-zero sample");
  const auto n = static_cast<long double>(xs.size());
  return static_cast<double>((sk / n) / std::pow(s2 / n, static_cast<long double>(k) / 2.0L));
}

/// Randomised confidence function Q for a given psi; replication b draws from (seed, "diagnose", b).
inline double randomised_confidence(double psi, double alpha, std::size_t B, std::uint64_t seed,
                                    unsigned workers = 1) {
  if (B < 100) throw ConfigError("B must be >= 100");
  if (!(psi > 0.0)) throw ContractViolation("psi must be positive");
  const double c_alpha = chi2_1_upper_quantile(alpha);
  // psi^{1/2} xi <= u  <=>  xi <= u / psi^{1/2}; stays finite when psi overflows
  const double cut = std::sqrt(2.0) / std::sqrt(psi);
  const std::size_t N = B;
  std::vector<char> accept(B, 0);
  parallel_for(B, workers, [&](std::size_t b) {
    auto eng = make_engine(seed, "diagnose", b);
    boost::random::normal_distribution<double> z;
    std::size_t below_hi = 0, below_lo = 0;
    for (std::size_t n = 0; n < N; ++n) {
      const double xi = z(eng);
      below_hi += xi <= cut;
      below_lo += xi <= -cut;
    }
    const double rn = std::sqrt(static_cast<double>(N));
    const double th_hi = 2.0 / rn * (static_cast<double>(below_hi) - 0.5 * static_cast<double>(N));
    const double th_lo = 2.0 / rn * (static_cast<double>(below_lo) - 0.5 * static_cast<double>(N));
    const double Theta = 0.5 * (th_hi * th_hi + th_lo * th_lo);
    accept[b] = Theta <= c_alpha;
  });
  std::size_t hits = 0;
  for (char a : accept) hits += static_cast<std::size_t>(a);
  return static_cast<double>(hits) / static_cast<double>(B);
}

inline double moment_threshold(double alpha, std::size_t B) {
  return (1.0 - alpha) - std::sqrt(alpha * (1.0 - alpha)) / std::pow(static_cast<double>(B), 0.25);
}

inline MomentTestResult moment_test(std::span<const double> sample, std::size_t order_k, double alpha,
                                    std::size_t B, std::uint64_t seed, unsigned workers = 1) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (B < 100) throw ConfigError("B must be >= 100");
  MomentTestResult r;
  r.order_k = order_k;
  r.alpha = alpha;
  r.B = B;
  r.mu_k = moment_ratio(sample, order_k);
  r.psi_k = std::expm1(r.mu_k);
  r.Q = randomised_confidence(r.psi_k, alpha, B, seed, workers);
  r.threshold = moment_threshold(alpha, B);
  r.decide_infinite_moment = r.Q >= r.threshold;
  return r;
}

/// Vector data: the test applied to ||X_i||_2.
inline MomentTestResult moment_test_norm(const Sample& xs, std::size_t order_k, double alpha, std::size_t B,
                                         std::uint64_t seed, unsigned workers = 1) {
  std::vector<double> norms(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double s = 0.0;
    for (double v : xs[i]) s += v * v;
    norms[i] = std::sqrt(s);
  }
  return moment_test(norms, order_k, alpha, B, seed, workers);
}

/// Vector data: one test per coordinate, all with the same auxiliary draws.
inline std::vector<MomentTestResult> moment_test_coordinates(const Sample& xs, std::size_t order_k, double alpha,
                                                             std::size_t B, std::uint64_t seed,
                                                             unsigned workers = 1) {
  std::vector<MomentTestResult> out;
  std::vector<double> col(xs.size());
  for (std::size_t d = 0; d < xs.dim(); ++d) {
    for (std::size_t i = 0; i < xs.size(); ++i) col[i] = xs[i][d];
    out.push_back(moment_test(col, order_k, alpha, B, seed, workers));
  }
  return out;
}

}  // namespace ucpd
