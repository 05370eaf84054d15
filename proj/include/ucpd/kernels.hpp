#pragma once

// Symmetric kernels h(x, y) on R^d for the U-statistic detectors.
//
// Shipped variants:
//   energy        ||x - y||_p^eta, p in {1, 2}, eta in (0, 2)
//   gaussian      [1 - exp(-||x - y||^2 / (2 a^2))]^{1/2}
//   grothendieck  arccos[(1 + <x,y>) / sqrt((1 + <x,x>)(1 + <y,y>))]
//   psd_metric    [K(x,x) + K(y,y) - 2 K(x,y)]^s for a PSD base kernel K, s in (0, 1/2]
//
// The U-statistic code is templated on any callable (span, span) -> double, so test doubles such as
// additive or product kernels plug in without going through KernelSpec.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucpd/core.hpp"

namespace ucpd {

template <class K>
concept PairKernel = requires(const K& k, std::span<const double> x, std::span<const double> y) {
  { k(x, y) } -> std::convertible_to<double>;
};

enum class Norm { L1, L2 };

namespace kernel_spec {

struct Energy {
  double eta = 1.0;
  Norm norm = Norm::L2;
};

/// `a` unset means "median heuristic at training time".
struct GaussianDerived {
  std::optional<double> a;
};

struct Grothendieck {};

/// Gaussian PSD kernel exp(-||x - y||^2 / (2 a^2)).
struct PsdGaussian {
  std::optional<double> a;
};

/// Finite-rank PSD kernel sum_l w_l <v_l, x> <v_l, y>, w_l >= 0. Test double only.
struct PsdEigenTable {
  std::vector<double> weights;
  std::vector<std::vector<double>> directions;
};

}  // namespace kernel_spec

using PsdKernelSpec = std::variant<kernel_spec::PsdGaussian, kernel_spec::PsdEigenTable>;

namespace kernel_spec {
struct PsdDerivedMetric {
  PsdKernelSpec base;
  double s = 0.5;
};
}  // namespace kernel_spec

using KernelSpec = std::variant<kernel_spec::Energy, kernel_spec::GaussianDerived, kernel_spec::Grothendieck,
                                kernel_spec::PsdDerivedMetric>;

namespace detail {

inline void require_same_dim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw InputError("kernel arguments must have equal, nonzero dimension (got " + std::to_string(x.size()) +
                     " and " + std::to_string(y.size()) + ")");
  }
}

inline double squared_l2(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

inline double l1(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double psd_eval(const PsdKernelSpec& base, std::span<const double> x, std::span<const double> y) {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, kernel_spec::PsdGaussian>) {
          if (!k.a) throw ConfigError("Gaussian bandwidth unresolved: call resolve_kernel with training data first");
          const double a = *k.a;
          return std::exp(-squared_l2(x, y) / (2.0 * a * a));
        } else {
          double s = 0.0;
          for (std::size_t l = 0; l < k.weights.size(); ++l) {
            s += k.weights[l] * (dot(k.directions[l], x) * dot(k.directions[l], y));
          }
          return s;
        }
      },
      base);
}

}  // namespace detail

/// arccos of the normalised affine inner product; argument clamped to [-1, 1].
inline double grothendieck_psi(std::span<const double> x, std::span<const double> y) {
  detail::require_same_dim(x, y);
  const double num = 1.0 + detail::dot(x, y);
  const double den = std::sqrt((1.0 + detail::dot(x, x)) * (1.0 + detail::dot(y, y)));
  return std::acos(std::clamp(num / den, -1.0, 1.0));
}

inline void validate(const PsdKernelSpec& base) {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, kernel_spec::PsdGaussian>) {
          if (k.a && !(*k.a > 0.0 && std::isfinite(*k.a))) throw ConfigError("Gaussian bandwidth a must be > 0");
        } else {
          if (k.weights.size() != k.directions.size()) throw ConfigError("eigen table: weights/directions mismatch");
          for (double w : k.weights) {
            if (!(w >= 0.0)) throw ConfigError("eigen table weights must be nonnegative");
          }
        }
      },
      base);
}

inline void validate(const KernelSpec& spec) {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, kernel_spec::Energy>) {
          if (!(k.eta > 0.0 && k.eta < 2.0)) throw ConfigError("energy exponent eta must lie in (0, 2)");
        } else if constexpr (std::is_same_v<T, kernel_spec::GaussianDerived>) {
          if (k.a && !(*k.a > 0.0 && std::isfinite(*k.a))) throw ConfigError("Gaussian bandwidth a must be > 0");
        } else if constexpr (std::is_same_v<T, kernel_spec::PsdDerivedMetric>) {
          if (!(k.s > 0.0 && k.s <= 0.5)) throw ConfigError("derived metric exponent s must lie in (0, 1/2]");
          validate(k.base);
        }
      },
      spec);
}

/// True when some bandwidth is still the "median" placeholder.
inline bool needs_training_resolution(const KernelSpec& spec) {
  if (const auto* g = std::get_if<kernel_spec::GaussianDerived>(&spec)) return !g->a.has_value();
  if (const auto* p = std::get_if<kernel_spec::PsdDerivedMetric>(&spec)) {
    if (const auto* b = std::get_if<kernel_spec::PsdGaussian>(&p->base)) return !b->a.has_value();
  }
  return false;
}

/// Evaluates h(x, y). The KernelSpec must be validated and have every bandwidth resolved.
inline double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  detail::require_same_dim(x, y);
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, kernel_spec::Energy>) {
          if (k.norm == Norm::L2) {
            const double sq = detail::squared_l2(x, y);
            return k.eta == 1.0 ? std::sqrt(sq) : std::pow(sq, 0.5 * k.eta);
          }
          const double d = detail::l1(x, y);
          return k.eta == 1.0 ? d : (k.eta == 0.5 ? std::sqrt(d) : std::pow(d, k.eta));
        } else if constexpr (std::is_same_v<T, kernel_spec::GaussianDerived>) {
          if (!k.a) throw ConfigError("Gaussian bandwidth unresolved: call resolve_kernel with training data first");
          const double a = *k.a;
          // -expm1(-t) == 1 - exp(-t) without cancellation for small distances
          return std::sqrt(-std::expm1(-detail::squared_l2(x, y) / (2.0 * a * a)));
        } else if constexpr (std::is_same_v<T, kernel_spec::Grothendieck>) {
          const double num = 1.0 + detail::dot(x, y);
          const double den = std::sqrt((1.0 + detail::dot(x, x)) * (1.0 + detail::dot(y, y)));
          return std::acos(std::clamp(num / den, -1.0, 1.0));
        } else {
          const double delta = detail::psd_eval(k.base, x, x) + detail::psd_eval(k.base, y, y) -
                               2.0 * detail::psd_eval(k.base, x, y);
          const double floored = std::max(delta, 0.0);
          return k.s == 0.5 ? std::sqrt(floored) : std::pow(floored, k.s);
        }
      },
      spec);
}

/// Median of ||X_i - X_j||_2 over unordered pairs i < j (lower median for an even pair count).
inline double median_bandwidth(const Sample& sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw InputError("median bandwidth needs at least two points");
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(std::sqrt(detail::squared_l2(sample[i], sample[j])));
  }
  const double med = median_of(std::move(d));
  if (!(med > 0.0)) throw DegenerateError("median pairwise distance is zero; Gaussian bandwidth undefined");
  return med;
}

/// Metric [K(x,x) + K(y,y) - 2K(x,y)]^s built from a PSD base kernel.
inline KernelSpec derived_metric(PsdKernelSpec base, double s) {
  KernelSpec out = kernel_spec::PsdDerivedMetric{std::move(base), s};
  validate(out);
  return out;
}

/// Replaces "median" bandwidth placeholders using the training sample.
inline KernelSpec resolve_kernel(KernelSpec spec, const Sample& training) {
  if (auto* g = std::get_if<kernel_spec::GaussianDerived>(&spec); g && !g->a) g->a = median_bandwidth(training);
  if (auto* p = std::get_if<kernel_spec::PsdDerivedMetric>(&spec)) {
    if (auto* b = std::get_if<kernel_spec::PsdGaussian>(&p->base); b && !b->a) b->a = median_bandwidth(training);
  }
  validate(spec);
  return spec;
}

/// Callable wrapper so a KernelSpec satisfies PairKernel.
class Kernel {
 public:
  explicit Kernel(KernelSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    if (needs_training_resolution(spec_)) {
      throw ConfigError("kernel has an unresolved median bandwidth; resolve against training data first");
    }
  }

  double operator()(std::span<const double> x, std::span<const double> y) const { return eval_kernel(spec_, x, y); }

  [[nodiscard]] const KernelSpec& spec() const { return spec_; }

 private:
  KernelSpec spec_;
};

/// The three kernels of the reference simulation design.
namespace kernels {
inline KernelSpec h1() { return kernel_spec::Energy{0.5, Norm::L1}; }
inline KernelSpec h2() { return kernel_spec::Energy{1.0, Norm::L2}; }
inline KernelSpec h3() { return kernel_spec::GaussianDerived{std::nullopt}; }
}  // namespace kernels

/// Mean of h^2 over training pairs; a finite, stable value is the practical sanity check for the
/// kernel's second-moment requirement.
template <PairKernel K>
double mean_squared_kernel(const K& h, const Sample& sample) {
  const std::size_t n = sample.size();
  if (n < 2) throw InputError("need at least two points");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = h(sample[i], sample[j]);
      acc += static_cast<long double>(v) * v;
    }
  }
  return static_cast<double>(acc / (static_cast<long double>(n) * (n - 1) / 2.0L));
}

// JSON: {"kind": "energy"|"gaussian"|"grothendieck"|"psd_metric", "eta", "norm": "l1"|"l2", "a", "s"}.
// "a" may be the string "median".

namespace detail {
inline nlohmann::json bandwidth_json(const std::optional<double>& a) {
  return a ? nlohmann::json(*a) : nlohmann::json("median");
}
inline std::optional<double> bandwidth_from_json(const nlohmann::json& j) {
  if (!j.contains("a")) return std::nullopt;
  const auto& a = j.at("a");
  if (a.is_string()) {
    if (a.get<std::string>() != "median") throw ConfigError("bandwidth string must be \"median\"");
    return std::nullopt;
  }
  if (!a.is_number()) throw ConfigError("bandwidth must be a number or \"median\"");
  return a.get<double>();
}
}  // namespace detail

inline nlohmann::json kernel_to_json(const KernelSpec& spec) {
  return std::visit(
      [](const auto& k) -> nlohmann::json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, kernel_spec::Energy>) {
          return {{"kind", "energy"}, {"eta", k.eta}, {"norm", k.norm == Norm::L1 ? "l1" : "l2"}};
        } else if constexpr (std::is_same_v<T, kernel_spec::GaussianDerived>) {
          return {{"kind", "gaussian"}, {"a", detail::bandwidth_json(k.a)}};
        } else if constexpr (std::is_same_v<T, kernel_spec::Grothendieck>) {
          return {{"kind", "grothendieck"}};
        } else {
          const auto* g = std::get_if<kernel_spec::PsdGaussian>(&k.base);
          if (!g) throw ConfigError("only Gaussian-based psd_metric kernels serialize to JSON");
          return {{"kind", "psd_metric"}, {"a", detail::bandwidth_json(g->a)}, {"s", k.s}};
        }
      },
      spec);
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("kernel JSON needs a \"kind\" field");
  const auto kind = j.at("kind").get<std::string>();
  KernelSpec spec;
  if (kind == "energy") {
    kernel_spec::Energy e;
    e.eta = j.value("eta", 1.0);
    const auto norm = j.value("norm", std::string("l2"));
    if (norm != "l1" && norm != "l2") throw ConfigError("energy norm must be \"l1\" or \"l2\"");
    e.norm = norm == "l1" ? Norm::L1 : Norm::L2;
    spec = e;
  } else if (kind == "gaussian") {
    spec = kernel_spec::GaussianDerived{detail::bandwidth_from_json(j)};
  } else if (kind == "grothendieck") {
    spec = kernel_spec::Grothendieck{};
  } else if (kind == "psd_metric") {
    spec = kernel_spec::PsdDerivedMetric{kernel_spec::PsdGaussian{detail::bandwidth_from_json(j)}, j.value("s", 0.5)};
  } else {
    throw ConfigError("unknown kernel kind \"" + kind + "\"");
  }
  validate(spec);
  return spec;
}

inline std::string kernel_label(const KernelSpec& spec) { return kernel_to_json(spec).dump(); }

}  // namespace ucpd
