#pragma once

// Sequential stopping rules driven by the detectors, plus the early-change delay constants.
//
//   open:   tau   = min{k >= 2 : D(k) > c g(k)},          infinity if never
//   closed: tau_M = min{2 <= k <= M - 1 : D(k) > c g(k)},  M if never

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ucpd/core.hpp"
#include "ucpd/kernels.hpp"
#include "ucpd/ustat.hpp"

namespace ucpd {

enum class Scheme { D1, D2, D3 };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::D1: return "D1";
    case Scheme::D2: return "D2";
    case Scheme::D3: return "D3";
  }
  return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "D1" || s == "d1" || s == "cusum") return Scheme::D1;
  if (s == "D2" || s == "d2" || s == "page") return Scheme::D2;
  if (s == "D3" || s == "d3" || s == "repurpose") return Scheme::D3;
  throw ConfigError("unknown detector scheme '" + s + "' (expected D1, D2 or D3)");
}

inline constexpr std::size_t kNeverStopped = std::numeric_limits<std::size_t>::max();

struct MonitorConfig {
  Scheme scheme = Scheme::D1;
  WindowParams window{};  // D3
  BoundaryParams boundary{};
  std::optional<std::size_t> horizon;  // M for closed-ended monitoring, empty for open-ended
  double c = 1.0;
  KernelSpec kernel = kernels::h2();
  std::optional<std::size_t> max_page_lag;  // D2; unset means unbounded when closed, 4m when open

  void validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("critical value c must be positive and finite");
    if (horizon && *horizon < 3) throw ConfigError("closed-ended horizon M must be >= 3");
    BoundaryParams b = boundary;
    if (b.mode == BoundaryParams::Mode::ShortHorizon && b.horizon == 0 && horizon) b.horizon = *horizon;
    b.validate();
    if (boundary.mode == BoundaryParams::Mode::ShortHorizon) {
      if (!horizon) throw ConfigError("short-horizon boundary requires a closed-ended horizon");
      if (boundary.horizon != 0 && boundary.horizon != *horizon) {
        throw ConfigError("short-horizon boundary M differs from the monitoring horizon");
      }
    }
    window.validate();
    ucpd::validate(kernel);
  }

  [[nodiscard]] std::optional<std::size_t> page_lag(std::size_t m) const {
    if (max_page_lag) return max_page_lag;
    if (horizon) return std::nullopt;
    return 4 * m;
  }
};

struct MonitorEvent {
  std::size_t k = 0;
  double detector_value = 0.0;
  double boundary_value = 0.0;
  bool alarm = false;
  std::optional<std::size_t> stopped_at;
};

inline nlohmann::json event_json(const MonitorEvent& e) {
  return {{"k", e.k}, {"stat", e.detector_value}, {"bound", e.boundary_value}, {"alarm", e.alarm}};
}

/// One monitoring session over one stream.
class Monitor {
 public:
  Monitor(MonitorConfig cfg, const Sample& training)
      : cfg_(std::move(cfg)), state_(make_kernel(cfg_, training), training) {
    cfg_.validate();
    if (cfg_.boundary.mode == BoundaryParams::Mode::ShortHorizon) cfg_.boundary.horizon = *cfg_.horizon;
    lag_ = cfg_.page_lag(training.size());
  }

  /// Feeds observation k + 1. Returns no event during warm-up (k = 1).
  std::optional<MonitorEvent> step(std::span<const double> x) {
    if (stopped()) throw StateError("monitor already stopped at k = " + std::to_string(stopping_time_));
    state_.update(x);
    const std::size_t k = state_.monitoring_size();
    if (k < 2) return std::nullopt;

    MonitorEvent ev;
    ev.k = k;
    ev.detector_value = detector_value();
    ev.boundary_value = boundary(k, state_.training_size(), cfg_.boundary);
    ev.alarm = ev.detector_value > cfg_.c * ev.boundary_value;
    if (ev.alarm) {
      ev.stopped_at = k;
    } else if (cfg_.horizon && k + 1 >= *cfg_.horizon) {
      ev.stopped_at = *cfg_.horizon;
    }
    if (ev.stopped_at) {
      stopping_time_ = *ev.stopped_at;
      alarmed_ = ev.alarm;
    }
    return ev;
  }

  [[nodiscard]] bool stopped() const { return stopping_time_ != kNeverStopped; }
  [[nodiscard]] bool alarmed() const { return alarmed_; }
  /// Stopping time, or kNeverStopped while running.
  [[nodiscard]] std::size_t stopping_time() const { return stopping_time_; }
  [[nodiscard]] const MonitorConfig& config() const { return cfg_; }
  [[nodiscard]] const DetectorState<Kernel>& state() const { return state_; }

 private:
  static Kernel make_kernel(const MonitorConfig& cfg, const Sample& training) {
    if (training.size() < 2) throw InputError("training sample needs at least two points");
    return Kernel(resolve_kernel(cfg.kernel, training));
  }

  double detector_value() const {
    switch (cfg_.scheme) {
      case Scheme::D1: return state_.d1();
      case Scheme::D2: return state_.d2(lag_);
      case Scheme::D3: return state_.d3(cfg_.window);
    }
    return 0.0;
  }

  MonitorConfig cfg_;
  DetectorState<Kernel> state_;
  std::optional<std::size_t> lag_;
  std::size_t stopping_time_ = kNeverStopped;
  bool alarmed_ = false;
};

struct MonitorRun {
  std::vector<MonitorEvent> events;
  std::size_t stopping_time = kNeverStopped;  // kNeverStopped: stream exhausted first
  bool alarm = false;
};

inline MonitorRun run(const MonitorConfig& cfg, const Sample& training, const Sample& stream,
                      const std::function<void(const MonitorEvent&)>& on_event = {}) {
  Monitor mon(cfg, training);
  MonitorRun out;
  for (std::size_t i = 0; i < stream.size() && !mon.stopped(); ++i) {
    if (auto ev = mon.step(stream[i])) {
      if (on_event) on_event(*ev);
      out.events.push_back(*ev);
    }
  }
  out.stopping_time = mon.stopping_time();
  out.alarm = mon.alarmed();
  return out;
}

/// Constants of the early-change normal approximation of the delay.
struct DelayConstants {
  double rho = 0.0;
  double w_const = 0.0;
  double v_m = 0.0;
  double v_m_prime = 0.0;

  /// Centre of the early-change delay, w m^rho.
  [[nodiscard]] double expected_delay(std::size_t m) const { return w_const * std::pow(static_cast<double>(m), rho); }
};

class UndetectableChange : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// rho = (1-beta)/(2-beta), w = (c / (theta |nu|))^{1/(2-beta)},
/// v_m = 2 sigma_* (w m^rho)^{1/2} / ((2-beta) |nu|), v'_m = m^{1/2} / (theta |D_h|^{1/2}).
inline DelayConstants delay_constants(double beta, double c, double theta, double nu_gap, double sigma_star,
                                      std::size_t m, double Dh) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
  if (!(c > 0.0)) throw ConfigError("critical value must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (nu_gap == 0.0) throw UndetectableChange("nu_1 - nu_2 = 0: the change is invisible to the detector drift");
  if (Dh == 0.0) throw UndetectableChange("kernel divergence D_h(F, G) = 0");
  if (m == 0) throw ConfigError("m must be positive");
  DelayConstants d;
  const double md = static_cast<double>(m);
  d.rho = (1.0 - beta) / (2.0 - beta);
  d.w_const = std::pow(c / (theta * std::abs(nu_gap)), 1.0 / (2.0 - beta));
  d.v_m = 2.0 * sigma_star / ((2.0 - beta) * std::abs(nu_gap)) * std::sqrt(d.w_const * std::pow(md, d.rho));
  d.v_m_prime = std::sqrt(md) / (theta * std::sqrt(std::abs(Dh)));
  return d;
}

struct DelaySummary {
  std::size_t reps = 0;
  std::size_t alarms = 0;
  double power = 0.0;  // alarmed before the horizon
  std::size_t delayed = 0;  // alarms strictly after the change
  double median = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> delays;
};

/// Summary of alarm times tau against change points k*. An alarm counts toward power when
/// tau < horizon; the delay tau - k* is recorded only when k* < tau.
inline DelaySummary summarize_delays(const std::vector<std::size_t>& stopping_times,
                                     const std::vector<std::size_t>& change_points, std::size_t horizon) {
  if (stopping_times.size() != change_points.size()) throw ContractViolation("delay summary: size mismatch");
  DelaySummary s;
  s.reps = stopping_times.size();
  for (std::size_t i = 0; i < s.reps; ++i) {
    const std::size_t tau = stopping_times[i];
    if (tau == kNeverStopped || tau >= horizon) continue;
    ++s.alarms;
    if (tau > change_points[i]) s.delays.push_back(static_cast<double>(tau - change_points[i]));
  }
  s.delayed = s.delays.size();
  s.power = s.reps == 0 ? 0.0 : static_cast<double>(s.alarms) / static_cast<double>(s.reps);
  if (!s.delays.empty()) {
    s.median = order_statistic_quantile(s.delays, 0.5);
    s.q1 = order_statistic_quantile(s.delays, 0.25);
    s.q3 = order_statistic_quantile(s.delays, 0.75);
  }
  return s;
}

/// Draw of one replication: training block, stream, and the change point used to generate it.
struct Replication {
  Sample training;
  Sample stream;
  std::size_t k_star = kNeverStopped;
};

/// Monte Carlo delay distribution. `generator(engine)` yields one replication; replication r uses
/// the engine derived from (seed, "delay", r).
inline DelaySummary empirical_delay_distribution(const MonitorConfig& cfg,
                                                 const std::function<Replication(Engine&)>& generator,
                                                 std::size_t reps, std::uint64_t seed, unsigned workers = 1) {
  if (reps < 1) throw ConfigError("reps must be >= 1");
  cfg.validate();
  std::vector<std::size_t> taus(reps, kNeverStopped);
  std::vector<std::size_t> kstars(reps, kNeverStopped);
  std::size_t horizon = cfg.horizon.value_or(kNeverStopped);
  parallel_for(reps, workers, [&](std::size_t r) {
    auto eng = make_engine(seed, "delay", r);
    Replication rep = generator(eng);
    const MonitorRun res = run(cfg, rep.training, rep.stream);
    taus[r] = res.alarm ? res.stopping_time : kNeverStopped;
    kstars[r] = rep.k_star;
  });
  return summarize_delays(taus, kstars, horizon);
}

/// Writes events as JSON Lines.
inline void write_jsonl(std::ostream& os, const std::vector<MonitorEvent>& events) {
  for (const auto& e : events) os << event_json(e).dump() << '\n';
}

}  // namespace ucpd
