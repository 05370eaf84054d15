// Monitor one simulated stream with the three detectors. The stream is N(0, I_5) with a mean shift
// of 0.5 per coordinate from observation k* + 1 on.
//
//   demo_stream_monitor [k_star=100] [seed=1]

#include <cstdio>
#include <cstdlib>

#include "ucpd/harness.hpp"
#include "ucpd/monitor.hpp"

using namespace ucpd;

int main(int argc, char** argv) {
  const std::size_t k_star = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 100;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  ScenarioSpec spec;
  spec.m = 200;
  spec.alternative = Alternative::Location;
  spec.k_star = k_star;
  spec.mu = 0.5;
  spec.seed = seed;
  const Replication rep = generate(spec, 0);
  const std::size_t M = spec.horizon();

  const Kernel h(kernels::h2());
  const auto lambdas = estimate_spectrum(h, rep.training).lambdas;
  std::printf("m = %zu, M = %zu, k* = %zu, leading eigenvalues %.3f %.3f %.3f\n", spec.m, M, k_star, lambdas[0],
              lambdas[1], lambdas[2]);

  for (Scheme s : {Scheme::D1, Scheme::D2, Scheme::D3}) {
    const auto lcfg = limit_config(lambdas, s, 0.0, horizon_fraction(10.0), WindowParams{}, 500, seed, 512);
    MonitorConfig cfg;
    cfg.scheme = s;
    cfg.horizon = M;
    cfg.c = detector_critical_value(lcfg, s, 0.05);
    const MonitorRun r = run(cfg, rep.training, rep.stream);
    if (r.alarm) {
      std::printf("%s  c = %.4f  alarm at k = %zu (delay %ld)\n", to_string(s).c_str(), cfg.c, r.stopping_time,
                  static_cast<long>(r.stopping_time) - static_cast<long>(k_star));
    } else {
      std::printf("%s  c = %.4f  no alarm before M\n", to_string(s).c_str(), cfg.c);
    }
  }
}
