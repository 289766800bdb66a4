// Euler iterates of the cubic flow with a saturating timer reset.
#include <cstdio>

#include "hybridsa/hybridsa.hpp"

using namespace hybridsa;

int main() {
  const Preset p = cubic_reset(2.0);
  const auto r = euler_simulate(p.model, p.x0, StepSchedule::power(0.75), p.policy, Horizon{10000});
  std::printf("status %s, K = %ld, J = %d\n", to_string(r.status).c_str(), r.K(), r.J());
  for (int j = 0; j < std::min(r.J(), 5); ++j) {
    const auto k = r.kbar[static_cast<std::size_t>(j)];
    std::printf("jump %d at k = %ld: z %.6f -> %.6f\n", j, k, r.at(k, j)[0], r.at(k, j + 1)[0]);
  }
  const auto est = omega_estimate(r);
  std::printf("omega estimate: %zu points, max |z| = %.6f\n", est.points.size(), coordinate_extent(est, 0));
}
