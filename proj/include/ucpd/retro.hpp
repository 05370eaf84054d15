#pragma once

// Retrospective test for a change inside the training sample.
//
//   R(k) = 2 cross(k) / (k (m-k)) - left(k) / C(k,2) - right(k) / C(m-k,2),   2 <= k <= m-2
//   r(t) = m t^2 (1-t)^2 R(floor(m t)),  statistic = sup_t |r(t)| / (t(1-t))^zeta
// with left/right the pair sums inside X_1..X_k and X_{k+1}..X_m and cross the pair sum between them.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucpd/core.hpp"
#include "ucpd/kernels.hpp"
#include "ucpd/limits.hpp"
#include "ucpd/spectrum.hpp"

namespace ucpd {

struct RetroResult {
  double statistic = 0.0;
  std::size_t argmax_k = 0;  // heuristic break date
  double critical_value = 0.0;
  bool reject = false;
  double zeta = 0.0;
};

inline nlohmann::json retro_json(const RetroResult& r) {
  return {{"stat", r.statistic}, {"k_hat", r.argmax_k}, {"cv", r.critical_value}, {"reject", r.reject},
          {"zeta", r.zeta}};
}

/// Weighted |r(k/m)| for k = 2..m-2 (index k - 2). O(m^2) kernel calls, each pair evaluated once.
template <PairKernel K>
std::vector<double> retro_path(const K& h, const Sample& sample, double zeta) {
  const std::size_t m = sample.size();
  if (m < 5) throw InputError("retrospective test needs at least 5 observations");
  if (!(zeta < 1.0)) throw ConfigError("weight exponent zeta must be < 1");

  // before[j] = sum_{i<j} h(X_i, X_j), after[j] = sum_{i>j} h(X_i, X_j)
  std::vector<long double> before(m, 0.0L), after(m, 0.0L);
  long double total = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = h(sample[i], sample[j]);
      after[i] += v;
      before[j] += v;
      total += v;
    }
  }

  std::vector<double> out;
  out.reserve(m - 3);
  long double left = 0.0L;   // pairs inside the first k points
  long double cross = 0.0L;  // pairs between first k and the rest
  const long double md = static_cast<long double>(m);
  for (std::size_t k = 1; k + 2 <= m; ++k) {
    // move point k-1 (0-based) from the right block to the left block
    left += before[k - 1];
    cross += after[k - 1] - before[k - 1];
    if (k < 2) continue;
    const long double right = total - left - cross;
    const std::size_t n2 = m - k;
    const long double R = 2.0L * cross / (static_cast<long double>(k) * n2) - left / detail::pairs(k) -
                          right / detail::pairs(n2);
    const long double t = static_cast<long double>(k) / md;
    const long double r = md * t * t * (1.0L - t) * (1.0L - t) * R;
    const double q = zeta == 0.0 ? 1.0 : std::pow(static_cast<double>(t * (1.0L - t)), zeta);
    out.push_back(static_cast<double>(std::abs(r)) / q);
  }
  return out;
}

/// Statistic and argmax; critical_value and reject are left for the caller.
template <PairKernel K>
RetroResult retro_statistic(const K& h, const Sample& sample, double zeta = 0.0) {
  const std::vector<double> path = retro_path(h, sample, zeta);
  RetroResult res;
  res.zeta = zeta;
  res.argmax_k = 2;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] > res.statistic) {
      res.statistic = path[i];
      res.argmax_k = i + 2;
    }
  }
  return res;
}

inline RetroResult retro_statistic(const KernelSpec& spec, const Sample& sample, double zeta = 0.0) {
  return retro_statistic(Kernel(resolve_kernel(spec, sample)), sample, zeta);
}

/// Full test: spectrum from the whole sample, bridge limit at level alpha. `sim` supplies grid, reps,
/// seed and workers; its lambdas and zeta are overwritten.
inline RetroResult retro_test(const KernelSpec& spec, const Sample& sample, double zeta, double alpha,
                              LimitSimConfig sim) {
  if (sample.size() < 5) throw InputError("retrospective test needs at least 5 observations");
  const Kernel h(resolve_kernel(spec, sample));
  RetroResult res = retro_statistic(h, sample, zeta);
  sim.lambdas = estimate_spectrum(h, sample).lambdas;
  sim.zeta = zeta;
  res.critical_value = critical_value(simulate_bridge_sup(sim), alpha);
  res.reject = res.statistic > res.critical_value;
  return res;
}

/// Same test with the limit draws taken from a precomputed bank (many tests, one set of paths).
inline RetroResult retro_test(const KernelSpec& spec, const Sample& sample, double zeta, double alpha,
                              const BridgeBank& bank, std::optional<std::size_t> top_L = std::nullopt) {
  if (sample.size() < 5) throw InputError("retrospective test needs at least 5 observations");
  const Kernel h(resolve_kernel(spec, sample));
  RetroResult res = retro_statistic(h, sample, zeta);
  res.critical_value = critical_value(bank.draws(estimate_spectrum(h, sample).top(top_L), zeta), alpha);
  res.reject = res.statistic > res.critical_value;
  return res;
}

}  // namespace ucpd
