#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ucpd/monitor.hpp"

using namespace ucpd;

namespace {

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

Sample constant(std::size_t n, std::vector<double> x) {
  Sample s(x.size());
  for (std::size_t i = 0; i < n; ++i) s.push_back(x);
  return s;
}

MonitorConfig closed(Scheme s, std::size_t M, double c) {
  MonitorConfig cfg;
  cfg.scheme = s;
  cfg.horizon = M;
  cfg.c = c;
  return cfg;
}

}  // namespace

TEST(Monitor, ConstantDataNeverAlarms) {
  const Sample train = constant(30, {1.0, 2.0});
  const Sample stream = constant(200, {1.0, 2.0});
  for (Scheme s : {Scheme::D1, Scheme::D2, Scheme::D3}) {
    const MonitorRun r = run(closed(s, 150, 1e-6), train, stream);
    EXPECT_FALSE(r.alarm);
    EXPECT_EQ(r.stopping_time, 150u);
    for (const auto& e : r.events) EXPECT_EQ(e.detector_value, 0.0);
  }
}

TEST(Monitor, TinyThresholdAlarmsAtFirstEvaluation) {
  std::mt19937_64 g(1);
  const Sample train = gaussian(g, 40, 3), stream = gaussian(g, 20, 3, 1.0);
  for (Scheme s : {Scheme::D1, Scheme::D2, Scheme::D3}) {
    MonitorConfig cfg;
    cfg.scheme = s;
    cfg.c = 1e-12;
    const MonitorRun r = run(cfg, train, stream);
    EXPECT_TRUE(r.alarm);
    EXPECT_EQ(r.stopping_time, 2u);
    ASSERT_EQ(r.events.size(), 1u);
    EXPECT_EQ(r.events[0].k, 2u);
  }
}

TEST(Monitor, ClosedRunStopsAtHorizon) {
  std::mt19937_64 g(2);
  const Sample train = gaussian(g, 50, 2), stream = gaussian(g, 300, 2);
  const MonitorRun r = run(closed(Scheme::D1, 100, 1e9), train, stream);
  EXPECT_FALSE(r.alarm);
  EXPECT_EQ(r.stopping_time, 100u);
  ASSERT_FALSE(r.events.empty());
  EXPECT_EQ(r.events.front().k, 2u);
  EXPECT_EQ(r.events.back().k, 99u);
  for (const auto& e : r.events) EXPECT_LT(e.k, 100u);
}

TEST(Monitor, OpenRunOnShortStreamNeverStops) {
  std::mt19937_64 g(3);
  const Sample train = gaussian(g, 50, 2), stream = gaussian(g, 40, 2);
  MonitorConfig cfg;
  cfg.c = 1e9;
  const MonitorRun r = run(cfg, train, stream);
  EXPECT_FALSE(r.alarm);
  EXPECT_EQ(r.stopping_time, kNeverStopped);
  EXPECT_EQ(r.events.size(), 39u);
}

TEST(Monitor, Deterministic) {
  std::mt19937_64 g(4);
  const Sample train = gaussian(g, 60, 3), stream = gaussian(g, 200, 3, 0.4);
  MonitorConfig cfg = closed(Scheme::D3, 250, 1.0);
  cfg.kernel = kernels::h3();
  const MonitorRun a = run(cfg, train, stream), b = run(cfg, train, stream);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) EXPECT_EQ(a.events[i].detector_value, b.events[i].detector_value);
  EXPECT_EQ(a.stopping_time, b.stopping_time);
}

TEST(Monitor, StoppingTimeMonotoneInThreshold) {
  std::mt19937_64 g(5);
  const Sample train = gaussian(g, 60, 3), stream = gaussian(g, 300, 3, 0.5);
  for (Scheme s : {Scheme::D1, Scheme::D2, Scheme::D3}) {
    std::size_t prev = 0;
    for (double c : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) {
      const MonitorRun r = run(closed(s, 400, c), train, stream);
      const std::size_t tau = r.alarm ? r.stopping_time : 400;
      EXPECT_GE(tau, prev) << to_string(s) << " c=" << c;
      prev = tau;
    }
  }
}

TEST(Monitor, PageStopsNoLaterThanCusum) {
  std::mt19937_64 g(6);
  for (int t = 0; t < 10; ++t) {
    const Sample train = gaussian(g, 50, 2);
    Sample stream = gaussian(g, 30, 2);
    stream = stream.concat(gaussian(g, 200, 2, 0.6));
    const MonitorRun d1 = run(closed(Scheme::D1, 300, 1.5), train, stream);
    const MonitorRun d2 = run(closed(Scheme::D2, 300, 1.5), train, stream);
    EXPECT_LE(d2.stopping_time, d1.stopping_time);
    for (std::size_t i = 0; i < d2.events.size(); ++i) {
      EXPECT_GE(d2.events[i].detector_value, d1.events[i].detector_value - 1e-12);
    }
  }
}

TEST(Monitor, StepAfterStopThrows) {
  std::mt19937_64 g(7);
  const Sample train = gaussian(g, 20, 2), stream = gaussian(g, 5, 2);
  MonitorConfig cfg;
  cfg.c = 1e-12;
  Monitor mon(cfg, train);
  EXPECT_FALSE(mon.step(stream[0]).has_value());
  const auto ev = mon.step(stream[1]);
  ASSERT_TRUE(ev.has_value());
  EXPECT_TRUE(ev->alarm);
  EXPECT_TRUE(mon.stopped());
  EXPECT_THROW(mon.step(stream[2]), StateError);
}

TEST(Monitor, ConfigErrors) {
  std::mt19937_64 g(8);
  const Sample train = gaussian(g, 20, 2);
  MonitorConfig cfg;
  cfg.c = 0.0;
  EXPECT_THROW(Monitor(cfg, train), ConfigError);
  cfg.c = 1.0;
  cfg.horizon = 2;
  EXPECT_THROW(Monitor(cfg, train), ConfigError);
  cfg.horizon.reset();
  cfg.boundary.mode = BoundaryParams::Mode::ShortHorizon;
  EXPECT_THROW(Monitor(cfg, train), ConfigError);
  cfg = MonitorConfig{};
  cfg.boundary.beta = 1.0;
  EXPECT_THROW(Monitor(cfg, train), ConfigError);
  EXPECT_THROW(Monitor(MonitorConfig{}, gaussian(g, 1, 2)), InputError);
  EXPECT_THROW(scheme_from_string("D4"), ConfigError);
  EXPECT_EQ(scheme_from_string("page"), Scheme::D2);
  EXPECT_EQ(scheme_from_string("repurpose"), Scheme::D3);
}

TEST(Monitor, ShortHorizonBoundaryUsesMonitoringHorizon) {
  std::mt19937_64 g(9);
  const Sample train = gaussian(g, 40, 2), stream = gaussian(g, 100, 2);
  MonitorConfig cfg = closed(Scheme::D1, 60, 1e9);
  cfg.boundary.mode = BoundaryParams::Mode::ShortHorizon;
  cfg.boundary.beta = 0.5;
  const MonitorRun r = run(cfg, train, stream);
  BoundaryParams ref = cfg.boundary;
  ref.horizon = 60;
  for (const auto& e : r.events) EXPECT_DOUBLE_EQ(e.boundary_value, boundary(e.k, 40, ref));
}

TEST(Monitor, DelayConstants) {
  const DelayConstants d0 = delay_constants(0.0, 2.0, 0.5, 4.0, 1.0, 100, 1.0);
  EXPECT_DOUBLE_EQ(d0.rho, 0.5);
  EXPECT_DOUBLE_EQ(d0.w_const, 1.0);  // c = theta |nu|
  EXPECT_DOUBLE_EQ(d0.expected_delay(100), 10.0);
  EXPECT_DOUBLE_EQ(d0.v_m, 2.0 / (2.0 * 4.0) * std::sqrt(10.0));
  EXPECT_DOUBLE_EQ(d0.v_m_prime, 10.0 / 0.5);
  EXPECT_NEAR(delay_constants(0.9, 1.0, 0.5, 1.0, 1.0, 100, 1.0).rho, 0.1 / 1.1, 1e-15);
  double prev = 1.0;
  for (double beta : {0.0, 0.2, 0.4, 0.6, 0.8, 0.95}) {
    const double rho = delay_constants(beta, 1.0, 0.5, 1.0, 1.0, 100, 1.0).rho;
    EXPECT_LT(rho, prev);
    prev = rho;
  }
  // ratio of early-change delays between m and 4m is 4^rho
  EXPECT_NEAR(d0.expected_delay(400) / d0.expected_delay(100), 2.0, 1e-12);
  EXPECT_THROW(delay_constants(0.0, 1.0, 0.5, 0.0, 1.0, 100, 1.0), UndetectableChange);
  EXPECT_THROW(delay_constants(0.0, 1.0, 0.5, 1.0, 1.0, 100, 0.0), UndetectableChange);
  EXPECT_THROW(delay_constants(1.0, 1.0, 0.5, 1.0, 1.0, 100, 1.0), ConfigError);
}

TEST(Monitor, SummarizeDelays) {
  const std::vector<std::size_t> taus{15, 30, kNeverStopped, 5, 200, 20};
  const std::vector<std::size_t> ks{10, 10, 10, 10, 10, 10};
  const DelaySummary s = summarize_delays(taus, ks, 100);
  EXPECT_EQ(s.reps, 6u);
  EXPECT_EQ(s.alarms, 4u);  // 200 is past the horizon
  EXPECT_DOUBLE_EQ(s.power, 4.0 / 6.0);
  EXPECT_EQ(s.delayed, 3u);  // tau = 5 is a false alarm
  EXPECT_EQ(s.median, 10.0);
  EXPECT_EQ(s.q1, 5.0);
  EXPECT_EQ(s.q3, 20.0);
  EXPECT_THROW(summarize_delays({1}, {}, 10), ContractViolation);
}

TEST(Monitor, EmpiricalDelayDistributionDetectsShift) {
  MonitorConfig cfg = closed(Scheme::D1, 800, 2.0);
  const auto gen = [](Engine& eng) {
    std::normal_distribution<double> z;
    Replication r;
    r.training = Sample(2);
    r.stream = Sample(2);
    r.k_star = 20;
    for (int i = 0; i < 50; ++i) r.training.push_back(std::vector<double>{z(eng), z(eng)});
    for (int i = 0; i < 400; ++i) {
      const double s = i >= 20 ? 2.0 : 0.0;
      r.stream.push_back(std::vector<double>{z(eng) + s, z(eng) + s});
    }
    return r;
  };
  const DelaySummary a = empirical_delay_distribution(cfg, gen, 40, 11);
  const DelaySummary b = empirical_delay_distribution(cfg, gen, 40, 11, 2);
  EXPECT_EQ(a.delays, b.delays);
  EXPECT_GE(a.power, 0.9);
  EXPECT_GT(a.median, 0.0);
  EXPECT_LT(a.median, 200.0);
}

TEST(Monitor, EventJson) {
  MonitorEvent e;
  e.k = 7;
  e.detector_value = 1.5;
  e.boundary_value = 2.0;
  e.alarm = false;
  EXPECT_EQ(event_json(e).dump(), R"({"alarm":false,"bound":2.0,"k":7,"stat":1.5})");
  std::ostringstream os;
  write_jsonl(os, {e, e});
  const std::string out = os.str();
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 2);
}
