#ifndef DPG_ADAPT_HPP
#define DPG_ADAPT_HPP

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dpg/lifting.hpp"
#include "dpg/mesh.hpp"
#include "dpg/problem.hpp"
#include "dpg/solver.hpp"

namespace dpg
{
  /// Squared element indicators eta_T^2 = residual_T + data_T.
  struct Indicators
  {
    Eigen::VectorXd residual; ///< discrete dual norm of the residual on T
    Eigen::VectorXd data;     ///< ||A : M_h - f||_T^2

    size_t size() const { return static_cast<size_t>(residual.size()); }
    double element(size_t t) const { return residual[t] + data[t]; }
    double residual_total() const { return residual.sum(); }
    double data_total() const { return data.sum(); }
    double total() const { return residual_total() + data_total(); }
  };

  /// ||A : M_h - f||_T^2 for every element.
  Eigen::VectorXd data_residuals(const Solution & sol, const ProblemSpec & problem, const Mesh & mesh);

  /// Throws std::invalid_argument when the solution carries no representers for this mesh.
  Indicators estimate(const Solution & sol, const ProblemSpec & problem, const Mesh & mesh);

  /// Smallest greedy set (largest indicators first) carrying a theta-fraction of the total.
  /** Ties are broken by element id. A zero total marks nothing. */
  std::vector<int> doerfler_mark(const Indicators & ind, double theta);

  /// Both residual norms of one discrete solution, for the bound
  /// ||F - B u_h||_{V_h'} <= ||C u_h||_{Q_h'} + ||f - A : M_h||.
  struct ResidualComparison
  {
    double dpg = 0.;  ///< ||F - B u_h||_{V_h'} with scalar test degree p
    double lsq = 0.;  ///< ||C u_h||_{Q_h'}
    double data = 0.; ///< ||f - A : M_h||
  };

  ResidualComparison compare_residuals(const Solution & sol, const ProblemSpec & problem, const Mesh & mesh,
                                       int test_degree = 0);

  struct AdaptiveOptions
  {
    double theta = 0.5;
    int max_elements = 50000; ///< levels whose mesh would exceed this are not solved
    int max_dofs = -1;        ///< same for the DOF count; negative disables
    int max_levels = -1;      ///< negative disables
  };

  struct LevelResult
  {
    int level = 0;
    Mesh mesh;
    Solution solution;
    Indicators indicators;
    std::optional<FieldErrors> errors; ///< only with an exact solution
    std::vector<int> marked;           ///< empty on the last level
  };

  /// Number of unknowns of the global system on `mesh`.
  int count_dofs(const Mesh & mesh, TrialKind trial);

  /// solve -> estimate -> mark -> refine until the budget is reached.
  /** Each level is passed to `on_level` as soon as it is complete (and marked, unless it is the
      last). Throws std::invalid_argument if theta is outside (0, 1] or the initial mesh already
      exceeds the budget. */
  void adaptive_solve(const ProblemSpec & problem, const Mesh & initial, const AdaptiveOptions & adaptive,
                      const DiscretizationOptions & options, const std::function<void(const LevelResult &)> & on_level);

  /// Convenience overload keeping every level in memory.
  std::vector<LevelResult> adaptive_solve(const ProblemSpec & problem, const Mesh & initial,
                                          const AdaptiveOptions & adaptive, const DiscretizationOptions & options);

} // namespace dpg

#endif
