// Regenerates the synthetic trial fixtures under data/.
//   make_fixtures <output-dir>

#include <filesystem>
#include <iostream>

#include "degroot/csv.hpp"
#include "degroot/synthetic.hpp"

using namespace degroot::empirical;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 1;
  }
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);

  SyntheticOptions converged;
  converged.experiments = 2;
  converged.groups_per_experiment = 25;
  converged.seed = 11;
  degroot::csv::write_file_atomic(dir / "synthetic_converged.csv", trials_to_csv(make_synthetic_trials(converged)));

  // Two DeGroot steps per trial, four conditions, three questions per group:
  // exercises every analysis, including the accuracy quartiles.
  SyntheticOptions mixed;
  mixed.experiments = 3;
  mixed.groups_per_experiment = 16;
  mixed.questions_per_group = 3;
  mixed.mode = PostMode::steps;
  mixed.steps = 2;
  mixed.mixed_conditions = true;
  mixed.control_noise = 0.5;
  mixed.seed = 23;
  degroot::csv::write_file_atomic(dir / "synthetic_mixed.csv", trials_to_csv(make_synthetic_trials(mixed)));
  return 0;
}
