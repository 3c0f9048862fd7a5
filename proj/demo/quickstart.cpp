// Plants outliers into a small synthetic network, fits the model and prints
// the ten highest-scoring nodes next to their ground truth.

#include <iomanip>
#include <iostream>

#include "one/one.hpp"

int main() {
  one::SynthParams sp;
  sp.seed = 1;
  const one::AttributedNetwork base = one::synth_network(sp);

  one::SeedingPlan plan;
  plan.seed = 1;
  const one::SeededDataset ds = one::seed_outliers(base, plan);

  one::HyperParams hp;
  hp.k = one::default_dimension(ds.network.n_classes());
  hp.seed = 1;
  const one::FitResult fit = one::fit(ds.network, hp);

  std::cout << "loss: " << fit.result.initial_loss;
  for (double l : fit.result.loss_trace) std::cout << " -> " << l;
  std::cout << "\n\nrank  node  score     planted\n";

  std::vector<std::string> kind(ds.network.n_nodes(), "-");
  for (auto type : one::kOutlierTypes)
    for (std::size_t id : ds.outlier_ids[static_cast<std::size_t>(type)]) kind[id] = one::to_string(type);
  const one::RankedList ranked = one::rank_by_score(fit.result.combined);
  for (std::size_t r = 0; r < 10; ++r)
    std::cout << std::setw(4) << r + 1 << "  " << std::setw(4) << ranked[r] << "  " << std::fixed
              << std::setprecision(5) << fit.result.combined[ranked[r]] << "  " << kind[ranked[r]] << '\n';

  const auto truth = ds.all_outliers();
  std::cout << "\nrecall@25%: " << one::recall_at(ranked, truth, 25) << '\n';
}
