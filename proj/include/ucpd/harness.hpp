#pragma once

// Simulation study: data generators, the CUSUM baselines, critical-value calibration and the
// experiment driver that produces size / power / delay tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "ucpd/core.hpp"
#include "ucpd/kernels.hpp"
#include "ucpd/limits.hpp"
#include "ucpd/monitor.hpp"
#include "ucpd/spectrum.hpp"
#include "ucpd/ustat.hpp"

namespace ucpd {

enum class Alternative { Null, Location, Scale, Tail };
enum class Strength { Strong, Weak };

inline std::string to_string(Alternative a) {
  switch (a) {
    case Alternative::Null: return "null";
    case Alternative::Location: return "location";
    case Alternative::Scale: return "scale";
    case Alternative::Tail: return "tail";
  }
  return "?";
}

inline Alternative alternative_from_string(const std::string& s) {
  if (s == "null") return Alternative::Null;
  if (s == "location") return Alternative::Location;
  if (s == "scale") return Alternative::Scale;
  if (s == "tail") return Alternative::Tail;
  throw ConfigError("unknown alternative '" + s + "' (null, location, scale, tail)");
}

inline std::string to_string(Strength s) { return s == Strength::Strong ? "strong" : "weak"; }

inline Strength strength_from_string(const std::string& s) {
  if (s == "strong") return Strength::Strong;
  if (s == "weak") return Strength::Weak;
  throw ConfigError("unknown strength '" + s + "' (strong, weak)");
}

struct ScenarioSpec {
  std::size_t d = 5;
  std::size_t m = 200;
  std::size_t M = 0;                    // 0 means 10 m
  std::optional<std::size_t> k_star;    // unset: uniform over {10, m, 5m}
  Alternative alternative = Alternative::Null;
  Strength strength = Strength::Strong;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  std::optional<double> mu;     // location shift per coordinate
  std::optional<double> decay;  // scale: Sigma_ij = exp(-|i-j| / decay)
  std::optional<double> nu;     // tail degrees of freedom

  [[nodiscard]] std::size_t horizon() const { return M == 0 ? 10 * m : M; }
  [[nodiscard]] double shift() const { return mu.value_or(strength == Strength::Strong ? 0.3 : 0.25); }
  [[nodiscard]] double decay_length() const { return decay.value_or(strength == Strength::Strong ? 10.0 : 5.0); }
  [[nodiscard]] double dof() const { return nu.value_or(strength == Strength::Strong ? 2.5 : 3.0); }

  void validate() const {
    if (d < 1) throw ConfigError("dimension d must be >= 1");
    if (m < 3) throw ConfigError("training size m must be >= 3");
    if (horizon() < 3) throw ConfigError("horizon M must be >= 3");
    if (k_star && *k_star >= horizon()) throw ConfigError("change point k* must be < M");
    if (alternative == Alternative::Tail && !(dof() > 2.0)) throw ConfigError("tail alternative needs nu > 2");
    if (alternative == Alternative::Scale && !(decay_length() > 0.0)) throw ConfigError("decay length must be > 0");
  }
};

/// Draws (training, stream, k*) replications for one scenario. The pre-change law is N(0, I_d).
class ScenarioGenerator {
 public:
  explicit ScenarioGenerator(ScenarioSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.alternative == Alternative::Scale) {
      const auto d = static_cast<Eigen::Index>(spec_.d);
      Eigen::MatrixXd S(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) S(i, j) = std::exp(-std::abs(static_cast<double>(i - j)) / spec_.decay_length());
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
      root_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    }
  }

  [[nodiscard]] const ScenarioSpec& spec() const { return spec_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance_root() const { return root_; }

  [[nodiscard]] std::size_t draw_change_point(Engine& eng) const {
    if (spec_.alternative == Alternative::Null) return kNeverStopped;
    if (spec_.k_star) return *spec_.k_star;
    boost::random::uniform_int_distribution<int> pick(0, 2);
    const std::size_t choices[3] = {10, spec_.m, 5 * spec_.m};
    return std::min(choices[pick(eng)], spec_.horizon() - 1);
  }

  Replication operator()(Engine& eng) const {
    Replication rep;
    rep.training = null_block(eng, spec_.m);
    rep.k_star = draw_change_point(eng);
    const std::size_t M = spec_.horizon();
    rep.stream = Sample(spec_.d);
    rep.stream.reserve(M);
    std::vector<double> x(spec_.d);
    for (std::size_t k = 1; k <= M; ++k) {
      if (k <= rep.k_star) {
        draw_null(eng, x);
      } else {
        draw_post(eng, x);
      }
      rep.stream.push_back(x);
    }
    return rep;
  }

  Sample null_block(Engine& eng, std::size_t n) const {
    Sample s(spec_.d);
    s.reserve(n);
    std::vector<double> x(spec_.d);
    for (std::size_t i = 0; i < n; ++i) {
      draw_null(eng, x);
      s.push_back(x);
    }
    return s;
  }

 private:
  static void draw_null(Engine& eng, std::vector<double>& x) {
    boost::random::normal_distribution<double> z;
    for (double& v : x) v = z(eng);
  }

  void draw_post(Engine& eng, std::vector<double>& x) const {
    boost::random::normal_distribution<double> z;
    switch (spec_.alternative) {
      case Alternative::Null: draw_null(eng, x); return;
      case Alternative::Location: {
        const double mu = spec_.shift();
        for (double& v : x) v = mu + z(eng);
        return;
      }
      case Alternative::Scale: {
        Eigen::VectorXd g(static_cast<Eigen::Index>(spec_.d));
        for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = z(eng);
        const Eigen::VectorXd y = root_ * g;
        for (std::size_t i = 0; i < spec_.d; ++i) x[i] = y(static_cast<Eigen::Index>(i));
        return;
      }
      case Alternative::Tail: {
        const double nu = spec_.dof();
        boost::random::chi_squared_distribution<double> chi(nu);
        const double sd = std::sqrt(nu / (nu - 2.0));
        for (double& v : x) v = z(eng) / std::sqrt(chi(eng) / nu) / sd;
        return;
      }
    }
  }

  ScenarioSpec spec_;
  Eigen::MatrixXd root_;
};

/// Replication r of a scenario, drawn from the engine (seed, "scenario", r).
inline Replication generate(const ScenarioSpec& spec, std::size_t r) {
  auto eng = make_engine(spec.seed, "scenario", r);
  return ScenarioGenerator(spec)(eng);
}

enum class CusumVariant { Mean, Vech };

inline std::string to_string(CusumVariant v) { return v == CusumVariant::Mean ? "cusum" : "cusum_vech"; }

/// Y = vech(x x^T), column-major lower triangle (d (d + 1) / 2 entries).
inline std::vector<double> vech_outer(std::span<const double> x) {
  std::vector<double> y;
  y.reserve(x.size() * (x.size() + 1) / 2);
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t i = j; i < x.size(); ++i) y.push_back(x[i] * x[j]);
  }
  return y;
}

/// Incremental Z_m(k) = || sum_{i=m+1}^{m+k} Y_i - (k/m) sum_{i<=m} Y_i ||_2.
class CusumBaseline {
 public:
  CusumBaseline(const Sample& training, CusumVariant variant) : variant_(variant) {
    if (training.empty()) throw InputError("CUSUM baseline needs a training sample");
    m_ = training.size();
    for (std::size_t i = 0; i < m_; ++i) {
      const auto y = transform(training[i]);
      if (train_sum_.empty()) train_sum_.assign(y.size(), 0.0L);
      for (std::size_t j = 0; j < y.size(); ++j) train_sum_[j] += y[j];
    }
    mon_sum_.assign(train_sum_.size(), 0.0L);
    dim_ = training.dim();
  }

  double update(std::span<const double> x) {
    if (x.size() != dim_) throw InputError("observation dimension does not match training data");
    const auto y = transform(x);
    for (std::size_t j = 0; j < y.size(); ++j) mon_sum_[j] += y[j];
    ++k_;
    return value();
  }

  [[nodiscard]] double value() const {
    const long double ratio = static_cast<long double>(k_) / static_cast<long double>(m_);
    long double s = 0.0L;
    for (std::size_t j = 0; j < mon_sum_.size(); ++j) {
      const long double d = mon_sum_[j] - ratio * train_sum_[j];
      s += d * d;
    }
    return static_cast<double>(std::sqrt(s));
  }

  [[nodiscard]] std::size_t monitoring_size() const { return k_; }
  [[nodiscard]] std::size_t training_size() const { return m_; }

 private:
  [[nodiscard]] std::vector<double> transform(std::span<const double> x) const {
    if (variant_ == CusumVariant::Vech) return vech_outer(x);
    return {x.begin(), x.end()};
  }

  CusumVariant variant_;
  std::size_t m_ = 0, k_ = 0, dim_ = 0;
  std::vector<long double> train_sum_, mon_sum_;
};

/// Trajectory Z_m(1..n) over a whole stream.
inline std::vector<double> cusum_baseline(const Sample& training, const Sample& stream, CusumVariant variant) {
  CusumBaseline cb(training, variant);
  std::vector<double> out;
  out.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) out.push_back(cb.update(stream[i]));
  return out;
}

/// Boundary for the baseline: sqrt(m) (1 + k/m) (k / (m + k))^beta.
inline double cusum_boundary(std::size_t k, std::size_t m, double beta) {
  const double km = static_cast<double>(k) / static_cast<double>(m);
  return std::sqrt(static_cast<double>(m)) * (1.0 + km) * std::pow(km / (1.0 + km), beta);
}

// Critical values from the limit laws.

inline LimitKind limit_kind_for(Scheme s) {
  switch (s) {
    case Scheme::D1: return LimitKind::Gamma;
    case Scheme::D2: return LimitKind::GammaBar;
    case Scheme::D3: return LimitKind::GammaWindow;
  }
  return LimitKind::Gamma;
}

/// u0 for a monitoring horizon: M/m / (1 + M/m) when closed, 1 when open or short-horizon.
inline double limit_horizon(std::optional<std::size_t> M, std::size_t m, const BoundaryParams& b) {
  if (!M || b.mode == BoundaryParams::Mode::ShortHorizon) return 1.0;
  return horizon_fraction(static_cast<double>(*M) / static_cast<double>(m));
}

/// Simulation settings for a scheme; grid_n follows the per-kind default unless `grid_n` is given.
inline LimitSimConfig limit_config(const std::vector<double>& lambdas, Scheme scheme, double beta, double u0,
                                   const WindowParams& window, std::size_t reps, std::uint64_t seed,
                                   std::optional<std::size_t> grid_n = std::nullopt, unsigned workers = 1) {
  LimitSimConfig cfg;
  cfg.lambdas = lambdas;
  cfg.beta = beta;
  cfg.u0 = u0;
  cfg.reps = reps;
  cfg.seed = seed;
  cfg.workers = workers;
  cfg.grid_n = grid_n.value_or(scheme == Scheme::D2 ? kDefaultGridBar : kDefaultGrid);
  if (scheme == Scheme::D3) cfg.window = window;
  return cfg;
}

inline double detector_critical_value(const LimitSimConfig& cfg, Scheme scheme, double alpha) {
  return critical_value(simulate_limit(limit_kind_for(scheme), cfg), alpha);
}

// Experiment driver.

struct DetectorChannel {
  enum class Kind { Kernel, Cusum };
  Kind kind = Kind::Kernel;
  std::size_t kernel_index = 0;  // Kernel
  Scheme scheme = Scheme::D1;    // Kernel
  CusumVariant cusum = CusumVariant::Mean;
  double beta = 0.0;
  double c = std::numeric_limits<double>::infinity();

  [[nodiscard]] std::string label(const std::vector<KernelSpec>& kernels) const {
    if (kind == Kind::Cusum) return to_string(cusum);
    return to_string(scheme) + "/" + kernel_label(kernels.at(kernel_index));
  }
};

struct ChannelOutcome {
  std::size_t first_alarm = kNeverStopped;  // first k with D(k) > c g(k), k <= M - 1
  double max_ratio = 0.0;                   // max_k D(k) / g(k) over the whole run
};

struct RunOptions {
  WindowParams window{};
  std::optional<std::size_t> max_page_lag;
  bool stop_when_all_alarmed = true;  // false for calibration runs that need the full trajectory
};

/// Runs every channel on one replication over k = 2..M-1, sharing one DetectorState per kernel.
inline std::vector<ChannelOutcome> run_channels(const Replication& rep, std::size_t M,
                                                const std::vector<KernelSpec>& kernels,
                                                const std::vector<DetectorChannel>& channels,
                                                const RunOptions& opt) {
  const std::size_t m = rep.training.size();
  const std::size_t nk = kernels.size();
  std::vector<std::array<bool, 3>> wanted(nk, {false, false, false});
  bool need_mean = false, need_vech = false;
  for (const auto& ch : channels) {
    if (ch.kind == DetectorChannel::Kind::Kernel) {
      wanted.at(ch.kernel_index)[static_cast<std::size_t>(ch.scheme)] = true;
    } else {
      (ch.cusum == CusumVariant::Mean ? need_mean : need_vech) = true;
    }
  }
  std::vector<std::optional<DetectorState<Kernel>>> states(nk);
  for (std::size_t i = 0; i < nk; ++i) {
    if (wanted[i][0] || wanted[i][1] || wanted[i][2]) {
      states[i].emplace(Kernel(resolve_kernel(kernels[i], rep.training)), rep.training);
    }
  }
  std::optional<CusumBaseline> cmean, cvech;
  if (need_mean) cmean.emplace(rep.training, CusumVariant::Mean);
  if (need_vech) cvech.emplace(rep.training, CusumVariant::Vech);

  std::vector<ChannelOutcome> out(channels.size());
  std::size_t pending = channels.size();
  const std::size_t last = std::min(M - 1, rep.stream.size());
  std::vector<std::array<double, 3>> value(nk);
  for (std::size_t k = 1; k <= last; ++k) {
    const auto x = rep.stream[k - 1];
    for (auto& st : states) {
      if (st) st->update(x);
    }
    if (cmean) cmean->update(x);
    if (cvech) cvech->update(x);
    if (k < 2) continue;
    for (std::size_t i = 0; i < nk; ++i) {
      if (!states[i]) continue;
      if (wanted[i][0]) value[i][0] = states[i]->d1();
      if (wanted[i][1]) value[i][1] = states[i]->d2(opt.max_page_lag);
      if (wanted[i][2]) value[i][2] = states[i]->d3(opt.window);
    }
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const auto& ch = channels[c];
      double ratio = 0.0;
      if (ch.kind == DetectorChannel::Kind::Kernel) {
        ratio = value[ch.kernel_index][static_cast<std::size_t>(ch.scheme)] / boundary(k, m, BoundaryParams{ch.beta});
      } else {
        const double z = ch.cusum == CusumVariant::Mean ? cmean->value() : cvech->value();
        ratio = z / cusum_boundary(k, m, ch.beta);
      }
      auto& o = out[c];
      o.max_ratio = std::max(o.max_ratio, ratio);
      if (o.first_alarm == kNeverStopped && ratio > ch.c) {
        o.first_alarm = k;
        --pending;
      }
    }
    if (opt.stop_when_all_alarmed && pending == 0) break;
  }
  return out;
}

struct CellResult {
  std::string detector;
  std::string kernel;  // empty for baselines
  double beta = 0.0;
  double critical_value = 0.0;
  std::size_t reps = 0;
  std::size_t alarms = 0;
  double rejection_rate = 0.0;
  double median_delay = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> delays;
};

struct ExperimentReport {
  ScenarioSpec scenario;
  double alpha = 0.05;
  bool size_adjusted = false;
  std::vector<CellResult> cells;

  [[nodiscard]] const CellResult& cell(const std::string& detector, const std::string& kernel = "",
                                       double beta = 0.0) const {
    for (const auto& c : cells) {
      if (c.detector == detector && c.kernel == kernel && c.beta == beta) return c;
    }
    throw InputError("no table cell " + detector + " " + kernel);
  }
};

struct TableConfig {
  ScenarioSpec scenario;
  std::vector<KernelSpec> kernels = {kernels::h1(), kernels::h2(), kernels::h3()};
  std::vector<Scheme> schemes = {Scheme::D1, Scheme::D2, Scheme::D3};
  std::vector<CusumVariant> baselines;
  std::vector<double> betas = {0.0};
  double alpha = 0.05;
  WindowParams window{};
  std::optional<std::size_t> max_page_lag;
  // asymptotic critical values: spectrum of a pilot training sample, then the limit simulation
  std::size_t limit_reps = 1000;
  std::optional<std::size_t> limit_grid;
  // size-adjusted mode: c is the empirical (1 - alpha) quantile of max_k D/g over null pilot runs
  bool size_adjusted = false;
  std::size_t pilot_reps = 0;  // 0: same as scenario reps
  unsigned workers = 1;
};

/// Short kernel name used in reports: h1, h2, h3 for the reference kernels, else the JSON label.
inline std::string kernel_name(const KernelSpec& k) {
  const std::string l = kernel_label(k);
  if (l == kernel_label(kernels::h1())) return "h1";
  if (l == kernel_label(kernels::h2())) return "h2";
  if (l == kernel_label(kernels::h3())) return "h3";
  return l;
}

/// Asymptotic critical value for every kernel channel, from a pilot N(0, I) training sample.
inline void calibrate_asymptotic(const TableConfig& cfg, std::vector<DetectorChannel>& channels) {
  const ScenarioSpec& sc = cfg.scenario;
  ScenarioSpec null_spec = sc;
  null_spec.alternative = Alternative::Null;
  ScenarioGenerator gen(null_spec);
  auto eng = make_engine(sc.seed, "pilot_spectrum");
  const Sample pilot = gen.null_block(eng, sc.m);
  const double u0 = limit_horizon(sc.horizon(), sc.m, BoundaryParams{});
  std::vector<std::vector<double>> spectra(cfg.kernels.size());
  for (auto& ch : channels) {
    if (ch.kind != DetectorChannel::Kind::Kernel) continue;
    auto& lam = spectra[ch.kernel_index];
    if (lam.empty()) {
      const Kernel h(resolve_kernel(cfg.kernels[ch.kernel_index], pilot));
      lam = estimate_spectrum(h, pilot).lambdas;
    }
    const auto lcfg = limit_config(lam, ch.scheme, ch.beta, u0, cfg.window, cfg.limit_reps,
                                   derive_seed(sc.seed, "critval"), cfg.limit_grid, cfg.workers);
    ch.c = detector_critical_value(lcfg, ch.scheme, cfg.alpha);
  }
}

/// Size adjustment: c = (1 - alpha)-quantile of max_k D(k)/g(k) over null replications.
inline void calibrate_size_adjusted(const TableConfig& cfg, std::vector<DetectorChannel>& channels) {
  ScenarioSpec null_spec = cfg.scenario;
  null_spec.alternative = Alternative::Null;
  null_spec.seed = derive_seed(cfg.scenario.seed, "size_pilot");
  const std::size_t reps = cfg.pilot_reps == 0 ? cfg.scenario.reps : cfg.pilot_reps;
  if (reps == 0) return;
  const ScenarioGenerator gen(null_spec);
  for (auto& ch : channels) ch.c = std::numeric_limits<double>::infinity();
  RunOptions opt{cfg.window, cfg.max_page_lag, false};
  std::vector<std::vector<double>> maxima(channels.size(), std::vector<double>(reps));
  parallel_for(reps, cfg.workers, [&](std::size_t r) {
    auto eng = make_engine(null_spec.seed, "scenario", r);
    const auto out = run_channels(gen(eng), null_spec.horizon(), cfg.kernels, channels, opt);
    for (std::size_t c = 0; c < channels.size(); ++c) maxima[c][r] = out[c].max_ratio;
  });
  for (std::size_t c = 0; c < channels.size(); ++c) {
    channels[c].c = order_statistic_quantile(maxima[c], 1.0 - cfg.alpha);
  }
}

inline std::vector<DetectorChannel> table_channels(const TableConfig& cfg) {
  std::vector<DetectorChannel> channels;
  for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
    for (Scheme s : cfg.schemes) {
      for (double b : cfg.betas) {
        DetectorChannel ch;
        ch.kernel_index = i;
        ch.scheme = s;
        ch.beta = b;
        channels.push_back(ch);
      }
    }
  }
  for (CusumVariant v : cfg.baselines) {
    for (double b : cfg.betas) {
      DetectorChannel ch;
      ch.kind = DetectorChannel::Kind::Cusum;
      ch.cusum = v;
      ch.beta = b;
      channels.push_back(ch);
    }
  }
  return channels;
}

/// Rejection frequencies and delay summaries for every (kernel, scheme, beta) cell and baseline.
inline ExperimentReport run_table(const TableConfig& cfg) {
  ExperimentReport report;
  report.scenario = cfg.scenario;
  report.alpha = cfg.alpha;
  report.size_adjusted = cfg.size_adjusted;
  cfg.scenario.validate();
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (cfg.scenario.reps == 0) return report;
  if (!cfg.size_adjusted && !cfg.baselines.empty()) {
    throw ConfigError("CUSUM baselines have no limit law here; use size-adjusted mode");
  }

  std::vector<DetectorChannel> channels = table_channels(cfg);
  if (cfg.size_adjusted) {
    calibrate_size_adjusted(cfg, channels);
  } else {
    calibrate_asymptotic(cfg, channels);
  }

  const ScenarioGenerator gen(cfg.scenario);
  const std::size_t reps = cfg.scenario.reps;
  const std::size_t M = cfg.scenario.horizon();
  std::vector<std::vector<std::size_t>> taus(channels.size(), std::vector<std::size_t>(reps, kNeverStopped));
  std::vector<std::size_t> kstars(reps);
  const RunOptions opt{cfg.window, cfg.max_page_lag, true};
  parallel_for(reps, cfg.workers, [&](std::size_t r) {
    auto eng = make_engine(cfg.scenario.seed, "scenario", r);
    const Replication rep = gen(eng);
    kstars[r] = rep.k_star;
    const auto out = run_channels(rep, M, cfg.kernels, channels, opt);
    for (std::size_t c = 0; c < channels.size(); ++c) taus[c][r] = out[c].first_alarm;
  });

  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& ch = channels[c];
    const DelaySummary s = summarize_delays(taus[c], kstars, M);
    CellResult cell;
    if (ch.kind == DetectorChannel::Kind::Kernel) {
      cell.detector = to_string(ch.scheme);
      cell.kernel = kernel_name(cfg.kernels[ch.kernel_index]);
    } else {
      cell.detector = to_string(ch.cusum);
    }
    cell.beta = ch.beta;
    cell.critical_value = ch.c;
    cell.reps = reps;
    cell.alarms = s.alarms;
    cell.rejection_rate = s.power;
    cell.median_delay = s.median;
    cell.q1 = s.q1;
    cell.q3 = s.q3;
    cell.delays = s.delays;
    report.cells.push_back(std::move(cell));
  }
  return report;
}

inline std::string format_number(double v, int precision = 4) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

inline void write_csv(std::ostream& os, const ExperimentReport& r) {
  os << "alternative,strength,m,M,k_star,detector,kernel,beta,critical_value,reps,alarms,rejection_rate,"
        "median_delay,delay_q1,delay_q3\n";
  const std::string ks = r.scenario.k_star ? std::to_string(*r.scenario.k_star) : "random";
  for (const auto& c : r.cells) {
    os << to_string(r.scenario.alternative) << ',' << to_string(r.scenario.strength) << ',' << r.scenario.m << ','
       << r.scenario.horizon() << ',' << ks << ',' << c.detector << ',' << c.kernel << ',' << c.beta << ','
       << format_number(c.critical_value, 8) << ',' << c.reps << ',' << c.alarms << ','
       << format_number(c.rejection_rate, 6) << ',' << format_number(c.median_delay, 6) << ','
       << format_number(c.q1, 6) << ',' << format_number(c.q3, 6) << '\n';
  }
}

inline void write_text_table(std::ostream& os, const ExperimentReport& r) {
  os << "scenario: " << to_string(r.scenario.alternative) << " (" << to_string(r.scenario.strength) << "), m = "
     << r.scenario.m << ", M = " << r.scenario.horizon() << ", reps = " << r.scenario.reps
     << (r.size_adjusted ? ", size-adjusted" : "") << "\n";
  os << std::left << std::setw(12) << "detector" << std::setw(8) << "kernel" << std::setw(6) << "beta" << std::right
     << std::setw(12) << "c" << std::setw(10) << "reject" << std::setw(10) << "median" << std::setw(8) << "q1"
     << std::setw(8) << "q3" << "\n";
  for (const auto& c : r.cells) {
    os << std::left << std::setw(12) << c.detector << std::setw(8) << (c.kernel.empty() ? "-" : c.kernel)
       << std::setw(6) << c.beta << std::right << std::setw(12) << format_number(c.critical_value)
       << std::setw(10) << format_number(c.rejection_rate, 3) << std::setw(10) << format_number(c.median_delay)
       << std::setw(8) << format_number(c.q1) << std::setw(8) << format_number(c.q3) << "\n";
  }
}

}  // namespace ucpd
