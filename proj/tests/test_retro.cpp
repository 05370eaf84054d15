#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ucpd/retro.hpp"

using namespace ucpd;

namespace {

struct Additive {
  double operator()(std::span<const double> x, std::span<const double> y) const {
    return std::sin(x[0]) + x[0] * x[0] + std::sin(y[0]) + y[0] * y[0];
  }
};

Sample gaussian(std::mt19937_64& g, std::size_t n, std::size_t d, double shift = 0.0) {
  std::normal_distribution<double> z;
  Sample s(d);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = z(g) + shift;
    s.push_back(x);
  }
  return s;
}

// Direct double sums over ordered pairs.
double oracle_r(const Kernel& h, const Sample& s, std::size_t k, double zeta) {
  const std::size_t m = s.size();
  double cross = 0.0, left = 0.0, right = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double v = h(s[i], s[j]);
      if (i < k && j < k) left += v;
      else if (i >= k && j >= k) right += v;
      else if (i < k) cross += v;
    }
  }
  const double kd = static_cast<double>(k), n2 = static_cast<double>(m - k), md = static_cast<double>(m);
  const double R = 2.0 * cross / (kd * n2) - left / (kd * (kd - 1.0)) - right / (n2 * (n2 - 1.0));
  const double t = kd / md;
  return std::abs(md * t * t * (1 - t) * (1 - t) * R) / std::pow(t * (1 - t), zeta);
}

}  // namespace

TEST(Retro, AdditiveKernelAnnihilated) {
  std::mt19937_64 g(1);
  const Sample s = gaussian(g, 60, 1, 0.0);
  for (double v : retro_path(Additive{}, s, 0.0)) EXPECT_LE(v, 1e-12);
  EXPECT_LE(retro_statistic(Additive{}, s).statistic, 1e-12);
}

TEST(Retro, IdenticalObservationsGiveZero) {
  Sample s(2);
  for (int i = 0; i < 20; ++i) s.push_back(std::vector<double>{0.5, -1.0});
  EXPECT_EQ(retro_statistic(kernels::h2(), s).statistic, 0.0);
}

TEST(Retro, PathMatchesBruteForce) {
  std::mt19937_64 g(2);
  const Kernel h(kernels::h1());
  for (std::size_t m : {5u, 6u, 9u, 23u}) {
    const Sample s = gaussian(g, m, 2);
    for (double zeta : {0.0, 0.4, -0.5}) {
      const std::vector<double> path = retro_path(h, s, zeta);
      ASSERT_EQ(path.size(), m - 3);
      for (std::size_t k = 2; k + 2 <= m; ++k) {
        const double ref = oracle_r(h, s, k, zeta);
        EXPECT_NEAR(path[k - 2], ref, 1e-10 * std::max(1.0, ref)) << "m=" << m << " k=" << k;
      }
    }
  }
}

TEST(Retro, ReversalSymmetry) {
  std::mt19937_64 g(3);
  const Sample s = gaussian(g, 31, 3);
  Sample rev(3);
  for (std::size_t i = s.size(); i-- > 0;) rev.push_back(s[i]);
  const Kernel h(kernels::h2());
  const auto a = retro_path(h, s, 0.3), b = retro_path(h, rev, 0.3);
  const std::size_t m = s.size();
  for (std::size_t k = 2; k + 2 <= m; ++k) EXPECT_NEAR(a[k - 2], b[m - k - 2], 1e-10 * std::max(1.0, a[k - 2]));
}

TEST(Retro, StatisticNondecreasingInZeta) {
  std::mt19937_64 g(4);
  const Sample s = gaussian(g, 80, 2);
  double prev = 0.0;
  for (double zeta : {-0.5, 0.0, 0.5, 0.9}) {
    const double v = retro_statistic(kernels::h2(), s, zeta).statistic;
    EXPECT_GE(v, prev);
    EXPECT_TRUE(std::isfinite(v));
    prev = v;
  }
}

TEST(Retro, ArgmaxInRangeAndLocatesLargeBreak) {
  std::mt19937_64 g(5);
  Sample s = gaussian(g, 60, 3).concat(gaussian(g, 40, 3, 3.0));
  const RetroResult r = retro_statistic(kernels::h2(), s);
  EXPECT_GE(r.argmax_k, 2u);
  EXPECT_LE(r.argmax_k, 98u);
  EXPECT_NEAR(static_cast<double>(r.argmax_k), 60.0, 3.0);
}

TEST(Retro, LargeShiftRejects) {
  std::mt19937_64 g(6);
  const Sample s = gaussian(g, 50, 3).concat(gaussian(g, 50, 3, 2.0));
  LimitSimConfig sim;
  sim.grid_n = 100;
  sim.reps = 500;
  sim.seed = 3;
  const RetroResult r = retro_test(kernels::h2(), s, 0.0, 0.05, sim);
  EXPECT_TRUE(r.reject);
  EXPECT_GT(r.statistic, r.critical_value);
  const BridgeBank bank(100, 100, 500, 3);
  const RetroResult rb = retro_test(kernels::h2(), s, 0.0, 0.05, bank);
  EXPECT_TRUE(rb.reject);
  EXPECT_EQ(rb.statistic, r.statistic);
  // the bank holds 100 paths, the full spectrum has 100 eigenvalues
  EXPECT_NEAR(rb.critical_value, r.critical_value, 1e-4 * r.critical_value);
}

TEST(Retro, Errors) {
  std::mt19937_64 g(7);
  EXPECT_THROW(retro_path(Kernel(kernels::h2()), gaussian(g, 4, 2), 0.0), InputError);
  EXPECT_THROW(retro_path(Kernel(kernels::h2()), gaussian(g, 10, 2), 1.0), ConfigError);
  LimitSimConfig sim;
  EXPECT_THROW(retro_test(kernels::h2(), gaussian(g, 4, 2), 0.0, 0.05, sim), InputError);
  const BridgeBank small(3, 100, 100, 1);
  EXPECT_THROW(retro_test(kernels::h2(), gaussian(g, 10, 2), 0.0, 0.05, small), ConfigError);
  EXPECT_NO_THROW(retro_test(kernels::h2(), gaussian(g, 10, 2), 0.0, 0.05, small, 3));
}

TEST(Retro, Json) {
  RetroResult r;
  r.statistic = 2.5;
  r.argmax_k = 17;
  r.critical_value = 1.5;
  r.reject = true;
  const auto j = retro_json(r);
  EXPECT_EQ(j.at("k_hat"), 17);
  EXPECT_EQ(j.at("reject"), true);
}
