// Chains and chain-recurrent classes of the planar rotation on an annulus.
#include <cstdio>

#include "hybridsa/hybridsa.hpp"

using namespace hybridsa;

int main() {
  const Preset rot = rotation();
  ReachOptions o;
  o.net_radius = 0.2;
  o.eps = 0.45;
  o.tau = 1.0;
  o.extra_length = 7.0;
  o.variants = 1;
  const auto graph = build_reach_graph(rot.system, regions::annulus({0.0, 0.0}, 0.5, 1.5), o);
  const auto rec = chain_recurrent_estimate(graph.adjacency);
  std::printf("%zu net points, %zu recurrent, %zu classes\n", graph.nodes.size(), rec.nodes.size(), rec.classes.size());

  const auto search = find_chain(graph, {1.0, 0.0}, {-1.0, 0.0});
  if (!search.chain) {
    std::printf("no chain found\n");
    return 1;
  }
  const auto v = verify_chain(*search.chain, rot.system, false, 1e-2);
  std::printf("chain with %zu links, %s\n", search.chain->links.size(), v.valid ? "valid" : "invalid");
  return v.valid ? 0 : 1;
}
