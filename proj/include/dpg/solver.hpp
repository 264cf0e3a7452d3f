#ifndef DPG_SOLVER_HPP
#define DPG_SOLVER_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dpg/mesh.hpp"
#include "dpg/problem.hpp"
#include "dpg/spaces.hpp"

namespace dpg
{
  enum class Method
  {
    dpg,    ///< optimal test functions in P^p x Q_h
    dpg_lsq ///< optimal test functions in Q_h plus the explicit (A:M - f) least-squares term
  };

  std::string to_string(Method m);

  struct DiscretizationOptions
  {
    Method method = Method::dpg;
    TrialKind trial = TrialKind::standard;
    int test_degree = 0; ///< scalar test degree p (DPG only)
  };

  /// Normal-equation contribution of one element.
  struct ElementSchur
  {
    Eigen::MatrixXd stiffness; ///< B' G^{-1} B
    Eigen::VectorXd load;      ///< B' G^{-1} F
    Eigen::LLT<Eigen::MatrixXd> gram_factor;
  };

  /// Throws std::runtime_error when G is not positive definite.
  ElementSchur element_schur(const Eigen::MatrixXd & b, const Eigen::MatrixXd & g, const Eigen::VectorXd & f);

  /// Assembled normal equations over the free trial DOFs.
  /** DOFs: element fields first (element-major, [u..., M11, M12, M22]), free trace slots last. */
  struct GlobalSystem
  {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd load;           ///< includes the boundary lift correction
    Eigen::VectorXd lift_correction; ///< -K_{free,fixed} * fixed
    Eigen::VectorXd fixed_slots;     ///< prescribed trace slot values (zero on free slots)
    int num_field_dofs = 0;
    int num_trace_dofs = 0;

    int size() const { return num_field_dofs + num_trace_dofs; }
  };

  GlobalSystem assemble_system(const ProblemSpec & problem, const Mesh & mesh, const DiscretizationOptions & options);

  struct Solution
  {
    Method method = Method::dpg;
    TrialLayout trial;
    TestLayout test;
    Eigen::MatrixXd u;     ///< num_u x num_elements, coefficients in the scaled monomial basis
    Eigen::MatrixXd m;     ///< 3 x num_elements: (M11, M12, M22)
    Eigen::VectorXd trace; ///< Cartesian vertex DOFs (value, d_x, d_y), lift included
    /// Per element r_T with G_T r_T = F_T - B_T x_T (DPG) or G_T r_T = -C_T x_T (DPG-LSQ).
    std::vector<Eigen::VectorXd> representers;
    Eigen::VectorXd residual_energy; ///< r_T' G_T r_T
    int num_dofs = 0;
    bool cholesky_ok = false;
    double relative_residual = 0.; ///< ||DKDy - Db|| / ||Db|| with D = diag(K)^{-1/2}
    std::string linear_solver;

    LocalTraceDofs local_trace(const Mesh & mesh, int t) const;
    /// u_h evaluated at x inside element t.
    double u_at(const Mesh & mesh, int t, const Point & x) const;
  };

  Solution solve(const ProblemSpec & problem, const Mesh & mesh, const DiscretizationOptions & options);

  inline Solution solve_dpg(const ProblemSpec & problem, const Mesh & mesh, TrialKind trial, int test_degree = 0)
  {
    return solve(problem, mesh, {Method::dpg, trial, test_degree});
  }

  inline Solution solve_dpg_lsq(const ProblemSpec & problem, const Mesh & mesh, TrialKind trial)
  {
    return solve(problem, mesh, {Method::dpg_lsq, trial, 0});
  }

  struct FieldErrors
  {
    double u = 0.; ///< ||u - u_h||
    double m = 0.; ///< ||D^2 u - M_h|| (Frobenius)

    double total() const;
  };

  FieldErrors field_errors(const Solution & sol, const Mesh & mesh, const ScalarFunction & u,
                           const MatrixFunction & hessian);

  /// Solution dump: `element,id,u...,M11,M12,M22` and `vertex,id,value,grad_x,grad_y` rows.
  /** For P^1 fields the three u entries are the values at the element corners. */
  void write_solution_csv(std::ostream & os, const Solution & sol, const Mesh & mesh);

} // namespace dpg

#endif
