// Draws the same budget from a tree-structured space with uniform sampling and
// with the k-DPP Metropolis-Hastings sampler, and compares how close the
// closest pair of configurations is in feature space.
//
//   tree_space_demo [space.json] [k] [seed]

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dppsearch/dppsearch.hpp"

using namespace dppsearch;

static double closest_pair(const SearchSpace& space, const SampleSet& s) {
  double best = INFINITY;
  for (std::size_t i = 0; i < s.points.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      best = std::min(best, (encode(space, s.points[i]) - encode(space, s.points[j])).norm());
  return best;
}

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "demos/tree_space.json";
  const std::size_t k = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 20;
  const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << '\n';
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();
  const SearchSpace space = parse_space(text.str());
  std::cout << "feature width D = " << space.feature_width() << '\n';

  SamplerOptions opt;
  opt.seed = seed;
  const SampleSet uniform = draw("uniform", space, k, opt);
  const SampleSet dpp = draw("kdpp-mcmc", space, k, opt);

  std::cout << "closest pair (uniform):   " << closest_pair(space, uniform) << '\n'
            << "closest pair (kdpp-mcmc): " << closest_pair(space, dpp) << '\n'
            << "mcmc acceptance rate:     " << dpp.diagnostics.at("acceptance_rate") << '\n';
  for (const auto& c : dpp.points) std::cout << to_json(space, c).dump() << '\n';
}
