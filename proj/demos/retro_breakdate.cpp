// Retrospective test on a sample with a scale change two thirds of the way through, and on a
// clean sample for comparison.

#include <cstdio>

#include <boost/random/normal_distribution.hpp>

#include "ucpd/retro.hpp"

using namespace ucpd;

int main() {
  auto eng = make_engine(5, "demo");
  boost::random::normal_distribution<double> z;
  const std::size_t m = 300, brk = 200;
  Sample broken(3), clean(3);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = i < brk ? 1.0 : 1.8;
    broken.push_back(std::vector<double>{s * z(eng), s * z(eng), s * z(eng)});
    clean.push_back(std::vector<double>{z(eng), z(eng), z(eng)});
  }
  const BridgeBank bank(m, m, 1000, 17);
  for (double zeta : {0.0, 0.5}) {
    const RetroResult a = retro_test(kernels::h2(), broken, zeta, 0.05, bank);
    const RetroResult b = retro_test(kernels::h2(), clean, zeta, 0.05, bank);
    std::printf("zeta = %.1f  break at %zu: stat %.3f cv %.3f reject %d, estimated k %zu\n", zeta, brk, a.statistic,
                a.critical_value, a.reject, a.argmax_k);
    std::printf("           no break:    stat %.3f cv %.3f reject %d\n", b.statistic, b.critical_value, b.reject);
  }
}
