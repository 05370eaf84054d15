#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ucpd/kernels.hpp"

using namespace ucpd;

namespace {

std::vector<double> randvec(std::mt19937_64& g, std::size_t d, double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(d);
  for (double& x : v) x = z(g);
  return v;
}

std::vector<KernelSpec> all_resolved() {
  return {kernel_spec::Energy{1.0, Norm::L2},
          kernel_spec::Energy{0.5, Norm::L1},
          kernel_spec::Energy{1.5, Norm::L2},
          kernel_spec::GaussianDerived{1.3},
          kernel_spec::Grothendieck{},
          kernel_spec::PsdDerivedMetric{kernel_spec::PsdGaussian{0.7}, 0.5},
          kernel_spec::PsdDerivedMetric{kernel_spec::PsdGaussian{2.0}, 0.25}};
}

}  // namespace

TEST(Kernels, EnergyIdentityIsZero) {
  const std::vector<double> x{1.5, -2.0, 0.25};
  EXPECT_EQ(eval_kernel(kernels::h2(), x, x), 0.0);
  EXPECT_EQ(eval_kernel(kernels::h1(), x, x), 0.0);
}

TEST(Kernels, EnergyPythagorean) {
  const std::vector<double> x{0.0, 0.0}, y{3.0, 4.0};
  EXPECT_DOUBLE_EQ(eval_kernel(kernels::h2(), x, y), 5.0);
  // ||.||_1 = 7, square root for h1
  EXPECT_DOUBLE_EQ(eval_kernel(kernels::h1(), x, y), std::sqrt(7.0));
}

TEST(Kernels, GaussianDerivedHandValues) {
  const KernelSpec g = kernel_spec::GaussianDerived{1.0};
  const std::vector<double> o{0.0}, y{1.7};
  EXPECT_EQ(eval_kernel(g, o, o), 0.0);
  EXPECT_NEAR(eval_kernel(g, o, y), std::sqrt(1.0 - std::exp(-1.7 * 1.7 / 2.0)), 1e-15);
}

TEST(Kernels, GrothendieckValues) {
  const std::vector<double> a{1.0}, b{-1.0};
  EXPECT_NEAR(grothendieck_psi(a, b), std::numbers::pi / 2.0, 1e-15);
  const std::vector<double> z{0.0, 0.0, 0.0};
  EXPECT_EQ(grothendieck_psi(z, z), 0.0);
  const std::vector<double> x{0.3, -1.2};
  EXPECT_EQ(grothendieck_psi(x, x), 0.0);
}

TEST(Kernels, GrothendieckRange) {
  std::mt19937_64 g(11);
  for (int i = 0; i < 2000; ++i) {
    const auto x = randvec(g, 4, 3.0), y = randvec(g, 4, 3.0);
    const double v = grothendieck_psi(x, y);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, std::numbers::pi);
  }
}

TEST(Kernels, MedianBandwidth) {
  EXPECT_DOUBLE_EQ(median_bandwidth(Sample::from_rows({{0.0}, {2.0}})), 2.0);
  EXPECT_DOUBLE_EQ(median_bandwidth(Sample::from_rows({{0.0}, {1.0}, {3.0}})), 2.0);
  // four points, six distances {1,2,3,1,2,1}: lower median of sorted {1,1,1,2,2,3} is 1
  EXPECT_DOUBLE_EQ(median_bandwidth(Sample::from_rows({{0.0}, {1.0}, {2.0}, {3.0}})), 1.0);
  EXPECT_THROW(median_bandwidth(Sample::from_rows({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}})), DegenerateError);
  EXPECT_THROW(median_bandwidth(Sample::from_rows({{1.0}})), InputError);
}

TEST(Kernels, Symmetry) {
  std::mt19937_64 g(7);
  for (const auto& spec : all_resolved()) {
    for (int i = 0; i < 10000 / 7; ++i) {
      const auto x = randvec(g, 3), y = randvec(g, 3);
      EXPECT_EQ(eval_kernel(spec, x, y), eval_kernel(spec, y, x)) << kernel_label(spec);
    }
  }
}

TEST(Kernels, NonNegativeAndZeroOnDiagonal) {
  std::mt19937_64 g(8);
  for (const auto& spec : all_resolved()) {
    for (int i = 0; i < 500; ++i) {
      const auto x = randvec(g, 5), y = randvec(g, 5);
      EXPECT_GE(eval_kernel(spec, x, y), 0.0);
      EXPECT_EQ(eval_kernel(spec, x, x), 0.0);
    }
  }
}

TEST(Kernels, DerivedMetricIsSqrt2TimesGaussianDerived) {
  std::mt19937_64 g(9);
  for (double a : {0.4, 1.0, 2.5}) {
    const KernelSpec d = derived_metric(kernel_spec::PsdGaussian{a}, 0.5);
    const KernelSpec h3 = kernel_spec::GaussianDerived{a};
    for (int i = 0; i < 2000; ++i) {
      const auto x = randvec(g, 3), y = randvec(g, 3);
      const double ref = std::sqrt(2.0) * eval_kernel(h3, x, y);
      const double v = eval_kernel(d, x, y);
      EXPECT_NEAR(v, ref, 1e-12 * std::max(1.0, ref));
    }
  }
}

TEST(Kernels, DerivedMetricTriangleInequality) {
  std::mt19937_64 g(10);
  const KernelSpec d = derived_metric(kernel_spec::PsdGaussian{1.1}, 0.5);
  for (int i = 0; i < 10000; ++i) {
    const auto x = randvec(g, 2), y = randvec(g, 2), z = randvec(g, 2);
    EXPECT_LE(eval_kernel(d, x, z), eval_kernel(d, x, y) + eval_kernel(d, y, z) + 1e-9);
  }
  // distinct points are separated
  const std::vector<double> p{0.0, 0.0}, q{1e-3, 0.0};
  EXPECT_GT(eval_kernel(d, p, q), 0.0);
}

TEST(Kernels, PsdBaseGramIsPositiveSemidefinite) {
  // Gram matrix of the Gaussian base: smallest eigenvalue via a Rayleigh quotient check on random vectors
  std::mt19937_64 g(12);
  const std::size_t n = 25;
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(randvec(g, 2));
  const PsdKernelSpec base = kernel_spec::PsdGaussian{0.8};
  for (int t = 0; t < 200; ++t) {
    const auto c = randvec(g, n);
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) q += c[i] * c[j] * detail::psd_eval(base, pts[i], pts[j]);
    }
    EXPECT_GE(q, -1e-8 * n);
  }
}

TEST(Kernels, Errors) {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  EXPECT_THROW(eval_kernel(kernels::h2(), a, b), InputError);
  EXPECT_THROW(validate(KernelSpec{kernel_spec::Energy{2.0, Norm::L2}}), ConfigError);
  EXPECT_THROW(validate(KernelSpec{kernel_spec::Energy{0.0, Norm::L2}}), ConfigError);
  EXPECT_THROW(validate(KernelSpec{kernel_spec::GaussianDerived{-1.0}}), ConfigError);
  EXPECT_THROW(derived_metric(kernel_spec::PsdGaussian{1.0}, 0.6), ConfigError);
  EXPECT_THROW(derived_metric(kernel_spec::PsdGaussian{1.0}, 0.0), ConfigError);
  EXPECT_THROW(Kernel{kernels::h3()}, ConfigError);  // median placeholder unresolved
}

TEST(Kernels, ResolveMedianBandwidth) {
  const Sample s = Sample::from_rows({{0.0}, {1.0}, {3.0}});
  const KernelSpec r = resolve_kernel(kernels::h3(), s);
  ASSERT_TRUE(std::get<kernel_spec::GaussianDerived>(r).a.has_value());
  EXPECT_DOUBLE_EQ(*std::get<kernel_spec::GaussianDerived>(r).a, 2.0);
  const Kernel k(r);
  const std::vector<double> x{0.0}, y{2.0};
  EXPECT_NEAR(k(x, y), std::sqrt(1.0 - std::exp(-0.5)), 1e-15);
}

TEST(Kernels, JsonRoundTrip) {
  for (const auto& spec : all_resolved()) {
    const auto j = kernel_to_json(spec);
    EXPECT_EQ(kernel_to_json(kernel_from_json(j)), j);
  }
  const auto med = kernel_from_json(nlohmann::json::parse(R"({"kind":"gaussian","a":"median"})"));
  EXPECT_TRUE(needs_training_resolution(med));
  EXPECT_THROW(kernel_from_json(nlohmann::json::parse(R"({"kind":"laplace"})")), ConfigError);
  EXPECT_THROW(kernel_from_json(nlohmann::json::parse(R"({"kind":"energy","norm":"l3"})")), ConfigError);
}

TEST(Kernels, MeanSquaredKernelFiniteOnGaussianData) {
  std::mt19937_64 g(13);
  Sample s(5);
  for (int i = 0; i < 300; ++i) s.push_back(randvec(g, 5));
  const double v = mean_squared_kernel(Kernel(kernels::h2()), s);
  // E||X - Y||^2 = 2 d = 10 for independent N(0, I_5)
  EXPECT_NEAR(v, 10.0, 1.0);
}
