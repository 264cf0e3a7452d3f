#ifndef DPG_PROBLEMS_HPP
#define DPG_PROBLEMS_HPP

#include <string>

#include "dpg/problem.hpp"

namespace dpg
{
  /// Strict sign: sign(0) = 0.
  double sign(double x);

  /// phi(t) = t e^{1-|t|} - t and its first two derivatives.
  double smooth_factor(double t);
  double smooth_factor_d1(double t);
  double smooth_factor_d2(double t);

  /// A = [[2, sign(xy)], [sign(xy), 2]] (piecewise constant on the four quadrants).
  CoefficientField quadrant_coefficient();

  /// Smooth solution phi(x) phi(y) on (-1,1)^2, homogeneous boundary data.
  ProblemSpec problem_61();
  /// u = (x^2 + y^2)^{5/6}, boundary data lifted from u.
  ProblemSpec problem_62();
  /// f = 1, off-diagonal g(r) sign(xy) with rings at r = 1/3 and r = 2/3; no exact solution.
  ProblemSpec problem_63();
  /// problem_61 solved with the augmented trial space (u in P^1).
  ProblemSpec problem_64();

  /// Throws std::invalid_argument for ids other than 61, 62, 63, 64.
  ProblemSpec problem_by_id(int id);

  /// Ring function of problem_63: 1 for r < 1/3, -1 for 1/3 <= r < 2/3, 0 otherwise.
  double ring_function(double r);

} // namespace dpg

#endif
