#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "dpg/study.hpp"

int main(int argc, char ** argv)
{
  CLI::App app{"Ultraweak DPG solvers for A : D^2 u = f under the Cordes condition"};
  app.require_subcommand(1);

  dpg::StudyConfig config;
  std::string out_dir;
  std::string trial = "default";
  bool levels_given = false;

  auto * run = app.add_subcommand("run", "Run a convergence study and write table.csv, meta.txt, meshes and solutions");
  run->add_option("--problem", config.problem, "Benchmark problem")
      ->check(CLI::IsMember({61, 62, 63, 64}))
      ->default_val(61);
  run->add_option("--method", config.method, "Discretization")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, dpg::Method>{{"dpg", dpg::Method::dpg}, {"dpg-lsq", dpg::Method::dpg_lsq}}))
      ->default_str("dpg");
  run->add_option("--refine", config.refinement, "Refinement strategy")
      ->transform(CLI::CheckedTransformer(std::map<std::string, dpg::Refinement>{
          {"uniform", dpg::Refinement::uniform}, {"adaptive", dpg::Refinement::adaptive}}))
      ->default_str("uniform");
  run->add_option("--theta", config.theta, "Doerfler bulk parameter in (0, 1]")
      ->check(CLI::Range(0., 1.))
      ->default_val(0.5);
  auto * levels = run->add_option("--levels", config.levels, "Number of levels (adaptive: upper bound)")
                      ->check(CLI::PositiveNumber);
  run->add_option("--max-dofs", config.max_dofs, "Stop before a level with more unknowns");
  run->add_option("--max-elements", config.max_elements, "Stop before a level with more elements")
      ->default_val(50000);
  run->add_option("--trial", trial, "Trial space for u: std (P^0) or augmented (P^1); defaults to the problem's")
      ->check(CLI::IsMember({"default", "std", "augmented"}));
  run->add_option("--test-degree", config.test_degree, "Scalar test degree p (dpg only)")
      ->check(CLI::Range(0, 6))
      ->default_val(0);
  run->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  levels_given = levels->count() > 0;

  if (trial == "std") {
    config.trial = dpg::TrialKind::standard;
  } else if (trial == "augmented") {
    config.trial = dpg::TrialKind::augmented;
  }
  if (config.theta <= 0.) {
    std::cerr << "error: --theta must lie in (0, 1]\n";
    return 2;
  }
  if (!levels_given && config.refinement == dpg::Refinement::adaptive) {
    config.levels = -1;
  }

  try {
    const dpg::StudyResult result = dpg::run_study_to_directory(config, out_dir);
    dpg::write_table_csv(std::cout, result);
  } catch (const dpg::InvariantViolation & e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 3;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
