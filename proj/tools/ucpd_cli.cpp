// ucpd_cli: critval | monitor | retro | simulate | diagnose
//
// Every option can also come from --config FILE.json (keys are the long option names without
// dashes); options given on the command line win. Randomness derives from --seed and the
// subcommand name.
//
// Exit codes: 0 ok / no alarm, 2 alarm before the horizon (monitor), 1 error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ucpd/diagnostics.hpp"
#include "ucpd/harness.hpp"
#include "ucpd/io.hpp"
#include "ucpd/limits.hpp"
#include "ucpd/monitor.hpp"
#include "ucpd/retro.hpp"
#include "ucpd/spectrum.hpp"

using namespace ucpd;
using json = nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string kernel = "h2";
  std::string training, stream, data;
  std::size_t m = 0;
  double alpha = 0.05;
  std::size_t reps = 1000;
  std::size_t grid = 0;
  unsigned workers = 1;
  std::string out;
};

struct Options {
  Common c;
  // critval / monitor
  std::string scheme = "D1";
  double beta = 0.0;
  std::size_t horizon = 0;  // 0: open-ended
  double cw = 1.0, bw = 0.5;
  std::size_t page_lag = 0;
  std::string spectrum_json, save_spectrum, critval_json;
  std::optional<double> crit;
  std::size_t top_L = 0;
  // retro
  double zeta = 0.0;
  // simulate
  std::string alternative = "null", strength = "strong";
  std::size_t d = 5, sim_m = 200, sim_M = 0, k_star = 0;
  std::vector<std::string> kernels{"h1", "h2", "h3"};
  std::vector<std::string> schemes{"D1", "D2", "D3"};
  std::vector<std::string> baselines;
  std::vector<double> betas{0.0};
  bool size_adjusted = false;
  std::size_t pilot_reps = 0, limit_reps = 1000;
  std::string format = "csv";
  // diagnose
  std::size_t order = 4;
  std::size_t B = 10000;
  std::string mode = "norm";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config; command-line flags override it");
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--kernel", c.kernel, "h1, h2, h3 or a JSON kernel object");
  sub->add_option("--alpha", c.alpha, "nominal level");
  sub->add_option("--reps", c.reps, "Monte Carlo replications");
  sub->add_option("--grid", c.grid, "limit-simulation grid size (0: default)");
  sub->add_option("--workers", c.workers, "worker threads (0: all cores)");
  sub->add_option("--out", c.out, "output file (default stdout)");
}

void add_data(CLI::App* sub, Common& c) {
  sub->add_option("--training", c.training, "training CSV");
  sub->add_option("--stream", c.stream, "monitoring CSV");
  sub->add_option("--data", c.data, "single CSV split by --m");
  sub->add_option("--m", c.m, "training rows taken from --data");
}

// Fills options not given on the command line from the JSON config.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw InputError("config must be a JSON object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    std::string key = it.key();
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw ConfigError("unknown config key '" + it.key() + "'");
    }
    if (opt->count() > 0 || key == "config") continue;
    auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (it->is_array()) {
      std::vector<std::string> vals;
      for (const auto& v : *it) vals.push_back(text(v));
      opt->add_result(vals);
    } else {
      opt->add_result(text(*it));
    }
    opt->run_callback();
  }
}

KernelSpec parse_kernel(const std::string& s) {
  if (s == "h1") return kernels::h1();
  if (s == "h2") return kernels::h2();
  if (s == "h3") return kernels::h3();
  try {
    return kernel_from_json(json::parse(s));
  } catch (const json::parse_error&) {
    throw ConfigError("unknown kernel '" + s + "' (h1, h2, h3 or a JSON kernel object)");
  }
}

struct Split {
  Sample training, stream;
};

Split load_split(const Common& c, bool need_stream) {
  Split s;
  if (!c.data.empty()) {
    if (!c.training.empty() || !c.stream.empty()) throw ConfigError("give either --data or --training/--stream");
    const Sample all = parse_csv_file(c.data);
    if (c.m == 0 || c.m > all.size()) throw ConfigError("--m must lie in [1, rows of --data]");
    s.training = all.slice(0, c.m);
    s.stream = all.slice(c.m, all.size() - c.m);
  } else {
    if (c.training.empty()) throw ConfigError("--training (or --data with --m) is required");
    s.training = parse_csv_file(c.training);
    if (need_stream) {
      if (c.stream.empty()) throw ConfigError("--stream is required");
      s.stream = parse_csv_file(c.stream);
    }
  }
  if (need_stream && !s.stream.empty() && s.stream.dim() != s.training.dim()) {
    throw InputError("training and stream have different dimensions");
  }
  return s;
}

Sample load_single(const Common& c) {
  if (!c.data.empty()) return parse_csv_file(c.data);
  if (!c.training.empty()) return parse_csv_file(c.training);
  throw ConfigError("--data is required");
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("cannot write " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

MonitorConfig monitor_config(const Options& o, double c) {
  MonitorConfig cfg;
  cfg.scheme = scheme_from_string(o.scheme);
  cfg.window = WindowParams{o.cw, o.bw};
  cfg.boundary = BoundaryParams{o.beta};
  if (o.horizon) cfg.horizon = o.horizon;
  cfg.c = c;
  cfg.kernel = parse_kernel(o.c.kernel);
  if (o.page_lag) cfg.max_page_lag = o.page_lag;
  return cfg;
}

// Spectrum -> limit simulation -> critical value; `key` separates the seeds of different subcommands.
json compute_critval(const Options& o, const Sample& training, const std::string& key) {
  const Scheme scheme = scheme_from_string(o.scheme);
  std::vector<double> lambdas;
  if (!o.spectrum_json.empty()) {
    std::ifstream in(o.spectrum_json);
    if (!in) throw InputError("cannot open " + o.spectrum_json);
    lambdas = spectrum_from_json(json::parse(in)).lambdas;
  } else {
    const Kernel h(resolve_kernel(parse_kernel(o.c.kernel), training));
    const SpectrumEstimate est = estimate_spectrum(h, training);
    if (!o.save_spectrum.empty()) {
      std::ofstream sp(o.save_spectrum);
      if (!sp) throw InputError("cannot write " + o.save_spectrum);
      sp << spectrum_to_json(est).dump() << '\n';
    }
    lambdas = est.lambdas;
  }
  const std::optional<std::size_t> M = o.horizon ? std::optional<std::size_t>(o.horizon) : std::nullopt;
  const double u0 = limit_horizon(M, training.size(), BoundaryParams{o.beta});
  LimitSimConfig cfg = limit_config(lambdas, scheme, o.beta, u0, WindowParams{o.cw, o.bw}, o.c.reps,
                                    derive_seed(o.c.seed, key), o.c.grid ? std::optional(o.c.grid) : std::nullopt,
                                    o.c.workers);
  if (o.top_L) cfg.top_L = o.top_L;
  const LimitKind kind = limit_kind_for(scheme);
  const double cv = critical_value(simulate_limit(kind, cfg), o.c.alpha);
  json j = critical_value_json(kind, o.c.alpha, cv, cfg);
  j["scheme"] = to_string(scheme);
  j["beta"] = o.beta;
  j["u0"] = u0;
  j["m"] = training.size();
  return j;
}

int cmd_critval(const Options& o) {
  const Split s = load_split(o.c, false);
  Output out(o.c.out);
  out.os() << compute_critval(o, s.training, "critval").dump() << '\n';
  return 0;
}

int cmd_monitor(const Options& o) {
  const Split s = load_split(o.c, true);
  double c = 0.0;
  if (o.crit) {
    c = *o.crit;
  } else if (!o.critval_json.empty()) {
    std::ifstream in(o.critval_json);
    if (!in) throw InputError("cannot open " + o.critval_json);
    c = json::parse(in).at("critical_value").get<double>();
  } else {
    c = compute_critval(o, s.training, "monitor").at("critical_value").get<double>();
  }
  Output out(o.c.out);
  std::ostream& os = out.os();
  const MonitorRun r = run(monitor_config(o, c), s.training, s.stream,
                           [&](const MonitorEvent& e) { os << event_json(e).dump() << '\n'; });
  if (r.alarm) {
    os << "alarm at k=" << r.stopping_time << '\n';
    return 2;
  }
  os << "no alarm\n";
  return 0;
}

int cmd_retro(const Options& o) {
  const Sample data = load_single(o.c);
  LimitSimConfig sim;
  sim.grid_n = o.c.grid ? o.c.grid : std::max<std::size_t>(100, data.size());
  sim.reps = o.c.reps;
  sim.seed = derive_seed(o.c.seed, "retro");
  sim.workers = o.c.workers;
  if (o.top_L) sim.top_L = o.top_L;
  const RetroResult r = retro_test(parse_kernel(o.c.kernel), data, o.zeta, o.c.alpha, sim);
  Output out(o.c.out);
  json j = retro_json(r);
  j["m"] = data.size();
  out.os() << j.dump() << '\n';
  return 0;
}

int cmd_simulate(const Options& o) {
  TableConfig cfg;
  cfg.scenario.d = o.d;
  cfg.scenario.m = o.sim_m;
  cfg.scenario.M = o.sim_M;
  if (o.k_star) cfg.scenario.k_star = o.k_star;
  cfg.scenario.alternative = alternative_from_string(o.alternative);
  cfg.scenario.strength = strength_from_string(o.strength);
  cfg.scenario.reps = o.c.reps;
  cfg.scenario.seed = derive_seed(o.c.seed, "simulate");
  cfg.kernels.clear();
  for (const auto& k : o.kernels) cfg.kernels.push_back(parse_kernel(k));
  cfg.schemes.clear();
  for (const auto& s : o.schemes) cfg.schemes.push_back(scheme_from_string(s));
  for (const auto& b : o.baselines) {
    if (b == "cusum" || b == "mean") cfg.baselines.push_back(CusumVariant::Mean);
    else if (b == "cusum_vech" || b == "vech") cfg.baselines.push_back(CusumVariant::Vech);
    else throw ConfigError("unknown baseline '" + b + "' (cusum, cusum_vech)");
  }
  cfg.betas = o.betas;
  cfg.alpha = o.c.alpha;
  cfg.window = WindowParams{o.cw, o.bw};
  if (o.page_lag) cfg.max_page_lag = o.page_lag;
  cfg.limit_reps = o.limit_reps;
  if (o.c.grid) cfg.limit_grid = o.c.grid;
  cfg.size_adjusted = o.size_adjusted;
  cfg.pilot_reps = o.pilot_reps;
  cfg.workers = o.c.workers;
  const ExperimentReport r = run_table(cfg);
  Output out(o.c.out);
  if (o.format == "csv") {
    write_csv(out.os(), r);
  } else if (o.format == "text") {
    write_text_table(out.os(), r);
  } else {
    throw ConfigError("--format must be csv or text");
  }
  return 0;
}

int cmd_diagnose(const Options& o) {
  const Sample data = load_single(o.c);
  const std::uint64_t seed = derive_seed(o.c.seed, "diagnose");
  json j;
  if (o.mode == "norm") {
    j = moment_json(moment_test_norm(data, o.order, o.c.alpha, o.B, seed, o.c.workers));
  } else if (o.mode == "coords") {
    j = json::array();
    for (const auto& r : moment_test_coordinates(data, o.order, o.c.alpha, o.B, seed, o.c.workers)) {
      j.push_back(moment_json(r));
    }
  } else {
    throw ConfigError("--mode must be norm or coords");
  }
  Output out(o.c.out);
  out.os() << j.dump() << '\n';
  return 0;
}

void add_monitoring_options(CLI::App* sub, Options& o) {
  sub->add_option("--scheme", o.scheme, "D1 (CUSUM), D2 (Page) or D3 (repurposing)");
  sub->add_option("--beta", o.beta, "boundary exponent in [0, 1)");
  sub->add_option("--horizon", o.horizon, "closed-ended horizon M (0: open-ended)");
  sub->add_option("--cw", o.cw, "D3 window constant c_w");
  sub->add_option("--bw", o.bw, "D3 window slope b_w");
  sub->add_option("--page-lag", o.page_lag, "D2 lag cap (0: default)");
  sub->add_option("--spectrum-json", o.spectrum_json, "use eigenvalues from this file");
  sub->add_option("--top-l", o.top_L, "keep only the leading eigenvalues (0: all)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel U-statistic sequential change-point monitoring"};
  app.require_subcommand(1);
  Options o;

  auto* critval = app.add_subcommand("critval", "critical value from the simulated limit law");
  add_common(critval, o.c);
  add_data(critval, o.c);
  add_monitoring_options(critval, o);
  critval->add_option("--save-spectrum", o.save_spectrum, "write the estimated spectrum as JSON");

  auto* monitor = app.add_subcommand("monitor", "monitor a stream; JSON Lines events on stdout");
  add_common(monitor, o.c);
  add_data(monitor, o.c);
  add_monitoring_options(monitor, o);
  monitor->add_option("--c", o.crit, "critical value (skips calibration)");
  monitor->add_option("--critval-json", o.critval_json, "read the critical value from critval output");

  auto* retro = app.add_subcommand("retro", "test the training sample for an in-sample change");
  add_common(retro, o.c);
  add_data(retro, o.c);
  retro->add_option("--zeta", o.zeta, "weight exponent, < 1");
  retro->add_option("--top-l", o.top_L, "keep only the leading eigenvalues (0: all)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo size / power / delay table");
  add_common(simulate, o.c);
  simulate->add_option("--alternative", o.alternative, "null, location, scale, tail");
  simulate->add_option("--strength", o.strength, "strong or weak");
  simulate->add_option("--d", o.d, "dimension");
  simulate->add_option("--m", o.sim_m, "training size");
  simulate->add_option("--horizon", o.sim_M, "horizon M (0: 10 m)");
  simulate->add_option("--k-star", o.k_star, "change point (0: random over {10, m, 5m})");
  simulate->add_option("--kernels", o.kernels, "kernels")->delimiter(',');
  simulate->add_option("--schemes", o.schemes, "detectors")->delimiter(',');
  simulate->add_option("--baselines", o.baselines, "cusum, cusum_vech")->delimiter(',');
  simulate->add_option("--betas", o.betas, "boundary exponents")->delimiter(',');
  simulate->add_option("--cw", o.cw, "D3 window constant c_w");
  simulate->add_option("--bw", o.bw, "D3 window slope b_w");
  simulate->add_option("--page-lag", o.page_lag, "D2 lag cap (0: unbounded)");
  simulate->add_flag("--size-adjusted", o.size_adjusted, "calibrate c on null pilot runs");
  simulate->add_option("--pilot-reps", o.pilot_reps, "pilot replications (0: --reps)");
  simulate->add_option("--limit-reps", o.limit_reps, "limit-law replications");
  simulate->add_option("--format", o.format, "csv or text");

  auto* diagnose = app.add_subcommand("diagnose", "randomised test of an infinite k-th moment");
  add_common(diagnose, o.c);
  add_data(diagnose, o.c);
  diagnose->add_option("--order", o.order, "moment order k");
  diagnose->add_option("--B", o.B, "auxiliary replications");
  diagnose->add_option("--mode", o.mode, "norm or coords");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_config(sub, o.c.config);
    if (sub == critval) return cmd_critval(o);
    if (sub == monitor) return cmd_monitor(o);
    if (sub == retro) return cmd_retro(o);
    if (sub == simulate) return cmd_simulate(o);
    return cmd_diagnose(o);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
