#ifndef DPG_LIFTING_HPP
#define DPG_LIFTING_HPP

#include <Eigen/Dense>

#include "dpg/mesh.hpp"
#include "dpg/problem.hpp"
#include "dpg/spaces.hpp"

namespace dpg
{
  /// Prescribed trace slots for inhomogeneous boundary data.
  /** Constrained slots receive (u(z), t . grad u(z)) at straight vertices and
      (u(z), grad u(z)) at corners; free slots are zero. The assembled system moves the lifted
      contribution to the right-hand side (GlobalSystem::lift_correction). Throws
      std::domain_error on non-finite boundary data. */
  Eigen::VectorXd lift_boundary_data(const ScalarFunction & u, const GradientFunction & grad, const Mesh & mesh,
                                     const TraceSpace & space);

} // namespace dpg

#endif
