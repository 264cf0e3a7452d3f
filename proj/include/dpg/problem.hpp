#ifndef DPG_PROBLEM_HPP
#define DPG_PROBLEM_HPP

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dpg/forms.hpp"

namespace dpg
{
  using GradientFunction = std::function<Eigen::Vector2d(const Point &)>;

  struct ExactSolution
  {
    ScalarFunction u;
    GradientFunction gradient;
    MatrixFunction hessian;
  };

  enum class BoundaryKind
  {
    homogeneous,    ///< u = 0 on the boundary
    lift_from_exact ///< boundary traces interpolated from the exact solution
  };

  /// Data of A : D^2 u = f on the domain of the mesh.
  struct ProblemSpec
  {
    std::string name;
    CoefficientField coefficient;
    ScalarFunction f;
    std::optional<ExactSolution> exact;
    BoundaryKind boundary = BoundaryKind::homogeneous;
    TrialKind trial = TrialKind::standard; ///< trial space the benchmark is meant to run with
    std::string notes;
  };

} // namespace dpg

#endif
