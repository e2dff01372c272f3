// Shows the reject/accept behavior of the homogeneous halfspace learner
// under a benign shift (same marginal) and an adversarial one (all test
// mass squeezed into a thin band around the decision boundary).

#include <iostream>

#include "tds/tds.hpp"

int main() {
  using namespace tds;
  Rng rng(7);

  std::vector<double> v{0.8, 0.6};
  auto target = scenarios::homogeneous_halfspace_concept(v);
  auto train_pts = scenarios::sample_marginal(scenarios::gaussian(2), 8000, rng.substream(0));
  auto s_train = scenarios::label(target, scenarios::realizable(), train_pts, rng.substream(1));

  auto same = scenarios::sample_marginal(scenarios::gaussian(2), 8000, rng.substream(2));
  auto banded = scenarios::sample_marginal(
      scenarios::band_conditioned(scenarios::gaussian(2), v, 0.01), 2000, rng.substream(3));

  for (const auto& [name, sample] : {std::pair{"matching-marginal", &same}, {"band-adversary", &banded}}) {
    auto outcome = halfspaces::tds_homogeneous_realizable(s_train, *sample, 0.2, rng.substream(4));
    std::cout << name << " -> " << (outcome.accepted() ? "ACCEPT" : "REJECT")
              << " (band fraction " << outcome.diagnostics.at("band_fraction") << ", threshold "
              << outcome.diagnostics.at("reject_threshold") << ")\n";
  }
  return 0;
}
