#pragma once

// Monte Carlo approximation of the null limit laws and their critical values.
//
// Each replication draws L independent Wiener paths on an equispaced grid and evaluates a weighted
// sup-functional of a lambda-weighted sum of squared (transformed) paths:
//   Gamma        sup_{0<u<=u0} u^{-beta} |sum_l lambda_l (W_l(u)^2 - u)|
//   GammaBar     sup_{0<u<=u0} u^{-beta} sup_{0<=v<u} |G(u, v)|
//   GammaWindow  sup_{0<u<=u0} u^{-beta} |sum_l lambda_l ((W_l(u) - W_l(y(u)))^2 - (u - y(u)))|
//   Bridge       sup_{0<t<1} (t(1-t))^{-zeta} |sum_l lambda_l (B_l(t)^2 - t(1-t))|
// Replication r always uses the engine derived from (seed, "limits", r), so every functional sees the
// same paths for the same (seed, L, grid_n); that coupling is what the pathwise property tests rely on.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>
#include <nlohmann/json.hpp>

#include "ucpd/core.hpp"
#include "ucpd/ustat.hpp"

namespace ucpd {

enum class LimitKind { Gamma, GammaBar, GammaWindow, Bridge };

inline std::string to_string(LimitKind k) {
  switch (k) {
    case LimitKind::Gamma: return "gamma";
    case LimitKind::GammaBar: return "gamma_bar";
    case LimitKind::GammaWindow: return "gamma_window";
    case LimitKind::Bridge: return "bridge";
  }
  return "unknown";
}

inline constexpr std::size_t kDefaultGrid = 4096;
inline constexpr std::size_t kDefaultGridBar = 1024;

struct LimitSimConfig {
  std::vector<double> lambdas;
  double beta = 0.0;
  double u0 = 1.0;
  std::size_t grid_n = kDefaultGrid;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  std::optional<WindowParams> window;
  std::optional<double> zeta;
  std::optional<std::size_t> top_L;
  unsigned workers = 1;

  void validate() const {
    if (grid_n < 100) throw ConfigError("grid_n must be >= 100");
    if (reps < 100) throw ConfigError("reps must be >= 100");
    if (!(u0 > 0.0 && u0 <= 1.0)) throw ConfigError("u0 must lie in (0, 1]");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
    if (window) window->validate();
    if (zeta && !(*zeta < 1.0)) throw ConfigError("bridge weight exponent zeta must be < 1");
  }

  [[nodiscard]] std::vector<double> effective_lambdas() const {
    if (!top_L || *top_L >= lambdas.size()) return lambdas;
    return {lambdas.begin(), lambdas.begin() + static_cast<std::ptrdiff_t>(*top_L)};
  }
};

struct LimitSample {
  std::vector<double> sup_draws;
  LimitKind kind = LimitKind::Gamma;
};

/// u0 = a0 / (1 + a0) for a closed horizon with M / m -> a0.
inline double horizon_fraction(double a0) {
  if (!(a0 > 0.0)) throw ConfigError("horizon ratio M/m must be positive");
  return std::isinf(a0) ? 1.0 : a0 / (1.0 + a0);
}

/// Fraction recycled into the training side at time u: 0 for u <= c/(1+c), else f(1-b)/(1+f(1-b))
/// with f = u/(1-u) - c.
inline double recycled_fraction(double u, const WindowParams& wp) {
  if (u <= wp.cw / (1.0 + wp.cw)) return 0.0;
  if (wp.bw >= 1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double g = (u / (1.0 - u) - wp.cw) * (1.0 - wp.bw);
  return g / (1.0 + g);
}

/// Grid u_j = horizon * (j + 1) / n, j = 0..n-1.
inline Eigen::VectorXd uniform_grid(std::size_t n, double horizon) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) g(static_cast<Eigen::Index>(j)) = horizon * static_cast<double>(j + 1) / n;
  return g;
}

/// L independent Wiener paths sampled on uniform_grid(n, horizon); row l is path l.
template <class Engine>
Eigen::MatrixXd wiener_paths(Engine& eng, std::size_t L, std::size_t n, double horizon) {
  boost::random::normal_distribution<double> z;
  const double sd = std::sqrt(horizon / static_cast<double>(n));
  Eigen::MatrixXd W(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(n));
  for (Eigen::Index l = 0; l < W.rows(); ++l) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      acc += sd * z(eng);
      W(l, j) = acc;
    }
  }
  return W;
}

// Path functionals. `W` rows are paths, columns follow `grid`.

/// Gamma(u_j) = sum_l lambda_l (W_l(u_j)^2 - u_j).
inline Eigen::VectorXd gamma_values(const Eigen::MatrixXd& W, const std::vector<double>& lambdas,
                                    const Eigen::VectorXd& grid) {
  const auto L = static_cast<Eigen::Index>(lambdas.size());
  if (W.rows() < L) throw ContractViolation("fewer paths than eigenvalues");
  const Eigen::Map<const Eigen::VectorXd> lam(lambdas.data(), L);
  const double total = lam.sum();
  Eigen::VectorXd out = W.topRows(L).array().square().matrix().transpose() * lam;
  out.array() -= grid.array() * total;
  return out;
}

inline double weighted_sup(const Eigen::VectorXd& values, const Eigen::VectorXd& grid, double beta) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double w = beta == 0.0 ? 1.0 : std::pow(grid(j), -beta);
    best = std::max(best, w * std::abs(values(j)));
  }
  return best;
}

inline double gamma_sup(const Eigen::MatrixXd& W, const std::vector<double>& lambdas, const Eigen::VectorXd& grid,
                        double beta) {
  if (lambdas.empty()) return 0.0;
  return weighted_sup(gamma_values(W, lambdas, grid), grid, beta);
}

/// sup over u of u^{-beta} sup_{0 <= v < u} |G(u, v)|, where v = 0 (W(0) = 0) reproduces Gamma(u).
/// Cost O(n^2 L): the cross products sum_l lambda_l W_l(u) W_l(v) come from two rank updates.
inline double gamma_bar_sup(const Eigen::MatrixXd& W, const std::vector<double>& lambdas,
                            const Eigen::VectorXd& grid, double beta) {
  if (lambdas.empty()) return 0.0;
  const auto L = static_cast<Eigen::Index>(lambdas.size());
  const Eigen::Index n = W.cols();
  Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(L, n);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(L, n);
  double total = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    const double lam = lambdas[static_cast<std::size_t>(l)];
    total += lam;
    (lam >= 0.0 ? pos : neg).row(l) = std::sqrt(std::abs(lam)) * W.row(l);
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  P.selfadjointView<Eigen::Lower>().rankUpdate(pos.transpose(), 1.0);
  P.selfadjointView<Eigen::Lower>().rankUpdate(neg.transpose(), -1.0);

  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = grid(i);
    const double q_u = P(i, i);
    double inner = std::abs(q_u - u * total);  // v = 0
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = grid(j);
      const double a = (1.0 - u) / (1.0 - v);
      const double c = (u - v * a) * (1.0 - v * a);
      const double g = q_u - 2.0 * a * P(i, j) + a * a * P(j, j) - c * total;
      inner = std::max(inner, std::abs(g));
    }
    const double w = beta == 0.0 ? 1.0 : std::pow(u, -beta);
    best = std::max(best, w * inner);
  }
  return best;
}

/// Windowed process with y(u) rounded to the nearest grid point (or 0); the centring uses the same
/// rounded point so every term keeps mean zero.
inline double gamma_window_sup(const Eigen::MatrixXd& W, const std::vector<double>& lambdas,
                               const Eigen::VectorXd& grid, double beta, const WindowParams& wp) {
  if (lambdas.empty()) return 0.0;
  const auto L = static_cast<Eigen::Index>(lambdas.size());
  const Eigen::Index n = W.cols();
  const double step = grid(0);
  double best = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double u = grid(j);
    const double y = recycled_fraction(u, wp);
    auto iy = static_cast<Eigen::Index>(std::llround(y / step)) - 1;  // -1 means y = 0
    iy = std::min(iy, j);
    const double y_grid = iy < 0 ? 0.0 : grid(iy);
    double s = 0.0;
    for (Eigen::Index l = 0; l < L; ++l) {
      const double d = W(l, j) - (iy < 0 ? 0.0 : W(l, iy));
      s += lambdas[static_cast<std::size_t>(l)] * (d * d - (u - y_grid));
    }
    const double w = beta == 0.0 ? 1.0 : std::pow(u, -beta);
    best = std::max(best, w * std::abs(s));
  }
  return best;
}

/// Bridges B_l(t) = W_l(t) - t W_l(1) on t = j/n, j = 1..n-1; W must be sampled on uniform_grid(n, 1).
inline Eigen::VectorXd bridge_values(const Eigen::MatrixXd& W, const std::vector<double>& lambdas) {
  const auto L = static_cast<Eigen::Index>(lambdas.size());
  const Eigen::Index n = W.cols();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n - 1);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double t = static_cast<double>(j + 1) / static_cast<double>(n);
    double s = 0.0;
    for (Eigen::Index l = 0; l < L; ++l) {
      const double b = W(l, j) - t * W(l, n - 1);
      s += lambdas[static_cast<std::size_t>(l)] * (b * b - t * (1.0 - t));
    }
    out(j) = s;
  }
  return out;
}

inline double bridge_sup(const Eigen::MatrixXd& W, const std::vector<double>& lambdas, double zeta) {
  if (lambdas.empty()) return 0.0;
  const Eigen::VectorXd v = bridge_values(W, lambdas);
  const Eigen::Index n = W.cols();
  double best = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double t = static_cast<double>(j + 1) / static_cast<double>(n);
    const double q = zeta == 0.0 ? 1.0 : std::pow(t * (1.0 - t), zeta);
    best = std::max(best, std::abs(v(j)) / q);
  }
  return best;
}

namespace detail {

inline bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

template <class Functional>
LimitSample simulate(const LimitSimConfig& cfg, LimitKind kind, double horizon, Functional&& f) {
  cfg.validate();
  LimitSample out;
  out.kind = kind;
  out.sup_draws.assign(cfg.reps, 0.0);
  const std::vector<double> lambdas = cfg.effective_lambdas();
  if (all_zero(lambdas)) return out;
  const Eigen::VectorXd grid = uniform_grid(cfg.grid_n, horizon);
  parallel_for(cfg.reps, cfg.workers, [&](std::size_t r) {
    auto eng = make_engine(cfg.seed, "limits", r);
    const Eigen::MatrixXd W = wiener_paths(eng, lambdas.size(), cfg.grid_n, horizon);
    out.sup_draws[r] = f(W, lambdas, grid);
  });
  return out;
}

}  // namespace detail

inline LimitSample simulate_gamma_sup(const LimitSimConfig& cfg) {
  return detail::simulate(cfg, LimitKind::Gamma, cfg.u0, [&](const auto& W, const auto& lam, const auto& grid) {
    return gamma_sup(W, lam, grid, cfg.beta);
  });
}

inline LimitSample simulate_gamma_bar_sup(const LimitSimConfig& cfg) {
  return detail::simulate(cfg, LimitKind::GammaBar, cfg.u0, [&](const auto& W, const auto& lam, const auto& grid) {
    return gamma_bar_sup(W, lam, grid, cfg.beta);
  });
}

inline LimitSample simulate_gamma_window_sup(const LimitSimConfig& cfg) {
  if (!cfg.window) throw ConfigError("window parameters (c_w, b_w) are required for the windowed limit");
  const WindowParams wp = *cfg.window;
  return detail::simulate(cfg, LimitKind::GammaWindow, cfg.u0,
                          [&](const auto& W, const auto& lam, const auto& grid) {
                            return gamma_window_sup(W, lam, grid, cfg.beta, wp);
                          });
}

inline LimitSample simulate_bridge_sup(const LimitSimConfig& cfg) {
  if (!cfg.zeta) throw ConfigError("bridge limit needs the weight exponent zeta");
  const double zeta = *cfg.zeta;
  return detail::simulate(cfg, LimitKind::Bridge, 1.0, [&](const auto& W, const auto& lam, const auto&) {
    return bridge_sup(W, lam, zeta);
  });
}

inline LimitSample simulate_limit(LimitKind kind, const LimitSimConfig& cfg) {
  switch (kind) {
    case LimitKind::Gamma: return simulate_gamma_sup(cfg);
    case LimitKind::GammaBar: return simulate_gamma_bar_sup(cfg);
    case LimitKind::GammaWindow: return simulate_gamma_window_sup(cfg);
    case LimitKind::Bridge: return simulate_bridge_sup(cfg);
  }
  throw ConfigError("unknown limit kind");
}

/// Squared Brownian bridges stored once and reused for many eigenvalue vectors. Draw r uses the same
/// paths as replication r of simulate_bridge_sup with the same seed and grid (float storage).
class BridgeBank {
 public:
  BridgeBank(std::size_t L, std::size_t grid_n, std::size_t reps, std::uint64_t seed, unsigned workers = 1)
      : L_(L), n_(grid_n), reps_(reps) {
    if (grid_n < 3 || reps < 1 || L < 1) throw ConfigError("bridge bank needs L >= 1, grid_n >= 3, reps >= 1");
    const auto inner = static_cast<Eigen::Index>(n_ - 1);
    sq_.resize(static_cast<Eigen::Index>(reps_) * inner, static_cast<Eigen::Index>(L_));
    parallel_for(reps_, workers, [&](std::size_t r) {
      auto eng = make_engine(seed, "limits", r);
      const Eigen::MatrixXd W = wiener_paths(eng, L_, n_, 1.0);
      const Eigen::Index base = static_cast<Eigen::Index>(r) * inner;
      for (Eigen::Index l = 0; l < W.rows(); ++l) {
        for (Eigen::Index j = 0; j < inner; ++j) {
          const double t = static_cast<double>(j + 1) / static_cast<double>(n_);
          const double b = W(l, j) - t * W(l, W.cols() - 1);
          sq_(base + j, l) = static_cast<float>(b * b);
        }
      }
    });
  }

  [[nodiscard]] std::size_t paths() const { return L_; }
  [[nodiscard]] std::size_t grid() const { return n_; }
  [[nodiscard]] std::size_t reps() const { return reps_; }

  /// Bridge sup draws for `lambdas`; extra eigenvalues beyond the bank's L are an error.
  [[nodiscard]] LimitSample draws(const std::vector<double>& lambdas, double zeta) const {
    if (!(zeta < 1.0)) throw ConfigError("bridge weight exponent zeta must be < 1");
    if (lambdas.size() > L_) throw ConfigError("bridge bank holds fewer paths than eigenvalues");
    LimitSample out;
    out.kind = LimitKind::Bridge;
    out.sup_draws.assign(reps_, 0.0);
    if (detail::all_zero(lambdas)) return out;
    Eigen::VectorXf lam = Eigen::VectorXf::Zero(static_cast<Eigen::Index>(L_));
    double total = 0.0;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      lam(static_cast<Eigen::Index>(l)) = static_cast<float>(lambdas[l]);
      total += lambdas[l];
    }
    const Eigen::VectorXf v = sq_ * lam;
    const auto inner = static_cast<Eigen::Index>(n_ - 1);
    std::vector<double> centre(n_ - 1), weight(n_ - 1);
    for (Eigen::Index j = 0; j < inner; ++j) {
      const double t = static_cast<double>(j + 1) / static_cast<double>(n_);
      centre[static_cast<std::size_t>(j)] = total * t * (1.0 - t);
      weight[static_cast<std::size_t>(j)] = zeta == 0.0 ? 1.0 : std::pow(t * (1.0 - t), -zeta);
    }
    for (std::size_t r = 0; r < reps_; ++r) {
      double best = 0.0;
      const Eigen::Index base = static_cast<Eigen::Index>(r) * inner;
      for (Eigen::Index j = 0; j < inner; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        best = std::max(best, weight[ju] * std::abs(static_cast<double>(v(base + j)) - centre[ju]));
      }
      out.sup_draws[r] = best;
    }
    return out;
  }

 private:
  std::size_t L_, n_, reps_;
  Eigen::MatrixXf sq_;
};

/// Empirical (1 - alpha)-quantile: the ceil((1 - alpha) R)-th smallest draw, so exactly
/// floor(alpha R) draws exceed it.
inline double critical_value(const LimitSample& sample, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (sample.sup_draws.empty()) throw InputError("limit sample is empty");
  return order_statistic_quantile(sample.sup_draws, 1.0 - alpha);
}

inline nlohmann::json critical_value_json(LimitKind kind, double alpha, double cv, const LimitSimConfig& cfg) {
  return {{"kind", to_string(kind)}, {"alpha", alpha},         {"critical_value", cv},
          {"reps", cfg.reps},        {"grid_n", cfg.grid_n}, {"seed", cfg.seed}};
}

}  // namespace ucpd
