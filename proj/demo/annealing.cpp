// Hybrid simulated annealing on the double well, one run per seed.
#include <cmath>
#include <cstdio>

#include "hybridsa/hybridsa.hpp"

using namespace hybridsa;

int main() {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    AnnealingConfig cfg;
    cfg.seed = seed;
    const Preset p = annealing(cfg);
    const auto r = euler_simulate(p.model, p.x0, StepSchedule::power(0.5, 0.1), p.policy, Horizon{10000});
    const Vector& x = r.states.back();
    std::printf("seed %llu: %s, %d jumps, y = %+.4f, theta = %.3g\n", static_cast<unsigned long long>(seed),
                to_string(r.status).c_str(), r.J(), x[0], cfg.objective.theta({x[0]}));
  }
}
