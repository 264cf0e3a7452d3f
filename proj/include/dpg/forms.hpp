#ifndef DPG_FORMS_HPP
#define DPG_FORMS_HPP

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dpg/mesh.hpp"
#include "dpg/polyspace.hpp"
#include "dpg/spaces.hpp"

namespace dpg
{
  using ScalarFunction = std::function<double(const Point &)>;
  using MatrixFunction = std::function<Eigen::Matrix2d(const Point &)>;

  /// Symmetric coefficient field A(x) of the operator A : D^2 u.
  struct CoefficientField
  {
    MatrixFunction A;
    /// Set when A is a polynomial of this degree on every element of a mesh aligned with its
    /// discontinuities. Empty for coefficients that jump inside elements.
    std::optional<int> piecewise_polynomial_degree;
  };

  /// Weights w with A : M = w . (M11, M12, M22) for symmetric M.
  inline Eigen::Vector3d frobenius_weights(const Eigen::Matrix2d & a)
  {
    return {a(0, 0), a(0, 1) + a(1, 0), a(1, 1)};
  }

  /// Element-local matrices of the ultraweak form.
  /** Test rows are ordered (scalar block, matrix block); trial columns follow TrialLayout.
      Basis values are evaluated once at the quadrature points on construction. */
  class ElementForms
  {
  public:
    ElementForms(const std::array<Point, 3> & corners, TrialLayout trial, TestLayout test,
                 const QuadratureRule & rule = default_triangle_rule());

    const ElementFrame & frame() const { return m_frame; }
    const TrialLayout & trial() const { return m_trial; }
    const TestLayout & test() const { return m_test; }

    size_t num_points() const { return m_points.size(); }
    const Point & point(size_t q) const { return m_points[q]; }
    /// Quadrature weight including the Jacobian.
    double weight(size_t q) const { return m_weights[q]; }

    /// V-norm Gram: [L2 scalar | L2 matrix + div Div] (block diagonal).
    Eigen::MatrixXd gram() const;
    /// H(divDiv) Gram of the matrix block only.
    Eigen::MatrixXd matrix_gram() const;

    /// b restricted to the element: num test x num trial.
    Eigen::MatrixXd b(const CoefficientField & a) const;
    /// c restricted to the element: num matrix tests x num trial.
    Eigen::MatrixXd c() const;
    /// Trace pairing <u_hat, Q>_{dT} of the 9 local trace DOFs against the matrix tests.
    const Eigen::MatrixXd & trace_block() const { return m_trace_block; }

    /// F(v) = (f, v) for every test function (zero on the matrix block).
    Eigen::VectorXd load(const ScalarFunction & f) const;

    /// (A:Z, A:M) on the 3 matrix-field trial DOFs.
    Eigen::Matrix3d lsq_coupling(const CoefficientField & a) const;
    /// (f, A:Z) on the 3 matrix-field trial DOFs.
    Eigen::Vector3d lsq_load(const CoefficientField & a, const ScalarFunction & f) const;

    /// ||A:M_h - f||^2 on the element for constant M_h = (M11, M12, M22).
    double data_residual(const CoefficientField & a, const ScalarFunction & f, const Eigen::Vector3d & m) const;

    /// Field u_h at a point from its local coefficients.
    double u_value(const Eigen::VectorXd & u_coeffs, const Point & x) const;

  private:
    ElementFrame m_frame;
    TrialLayout m_trial;
    TestLayout m_test;
    std::vector<Point> m_points;
    std::vector<double> m_weights;
    Eigen::MatrixXd m_scalar;  ///< num_scalar x nq
    Eigen::MatrixXd m_u;       ///< num_u x nq
    Eigen::MatrixXd m_q11, m_q12, m_q22; ///< 45 x nq each
    Eigen::MatrixXd m_divdiv;  ///< 45 x nq
    Eigen::MatrixXd m_trace_block; ///< 45 x 9
  };

  /// Scalar-test and coefficient-dependent parts of the element forms.
  /** Cheap counterpart of ElementForms for everything that involves A, f or the scalar tests;
      the matrix-test block depends only on the element geometry. */
  class ScalarForms
  {
  public:
    ScalarForms(const std::array<Point, 3> & corners, int scalar_degree,
                const QuadratureRule & rule = default_triangle_rule());

    int num_scalar() const { return static_cast<int>(m_scalar.rows()); }
    /// L2 Gram of the scalar tests.
    Eigen::MatrixXd gram() const;
    /// (A:M, v) on the 3 matrix-field trial DOFs: num_scalar x 3.
    Eigen::MatrixXd coupling(const CoefficientField & a) const;
    /// (f, v).
    Eigen::VectorXd load(const ScalarFunction & f) const;
    Eigen::Matrix3d lsq_coupling(const CoefficientField & a) const;
    Eigen::Vector3d lsq_load(const CoefficientField & a, const ScalarFunction & f) const;

  private:
    std::vector<Point> m_points;
    std::vector<double> m_weights;
    Eigen::MatrixXd m_scalar; ///< num_scalar x nq
  };

  /// Trace pairing of an rHCT trace (9 DOFs) with a polynomial matrix field.
  /** Evaluates  sum_E int_E (n . Div Q) v - (n . Q n) d_n v - (t . Q n) d_t v  ds
      edge by edge from the Hermite edge traces. */
  double trace_pairing_element(const LocalTraceDofs & dofs, const SymMatPoly & q, const std::array<Point, 3> & corners);

  /// Same boundary formula with the exact traces of a smooth u.
  double boundary_pairing(const ScalarFunction & u, const std::function<Eigen::Vector2d(const Point &)> & grad,
                          const SymMatPoly & q, const std::array<Point, 3> & corners);

  /// Volume form (div Div Q, u)_T - (Q, D^2 u)_T of the pairing for polynomial u.
  double volume_pairing(const Polynomial & u, const SymMatPoly & q, const std::array<Point, 3> & corners);

  Eigen::MatrixXd local_b(const ElementForms & forms, const CoefficientField & a);
  Eigen::MatrixXd local_c(const ElementForms & forms);
  Eigen::MatrixXd local_gram(const ElementForms & forms);

  //------------------------------------------------------------------------------
  // Cordes condition
  //------------------------------------------------------------------------------

  class CordesViolation : public std::domain_error
  {
  public:
    using std::domain_error::domain_error;
  };

  struct CordesReport
  {
    double epsilon = 1.;
    bool ellipticity_ok = true;
    double lambda_min = 0.;
    double lambda_max = 0.;
    Point worst_point = Point::Zero();
  };

  /// epsilon = min_x (tr A)^2 / |A|_F^2 - 1 over the samples; throws CordesViolation if <= 0.
  CordesReport cordes_epsilon(const MatrixFunction & a, std::span<const Point> samples);

  /// Quadrature points of every element (the natural sample set for cordes_epsilon).
  std::vector<Point> quadrature_samples(const Mesh & mesh, const QuadratureRule & rule = default_triangle_rule());

  //------------------------------------------------------------------------------
  // Fortin moment check
  //------------------------------------------------------------------------------

  struct FortinCheck
  {
    Eigen::VectorXd projection;   ///< coefficients of Pi Q in the SymMatBasis of the triangle
    Eigen::VectorXd residuals;    ///< 9 trace + 3 matrix + 6 div Div moments
    double max_residual = 0.;     ///< max |residual| / max(1, max |moment|)
    double bound_ratio = 0.;      ///< ||Pi Q||_{divDiv,T} / ||Q||_{divDiv,T}
    int constraint_rank = 0;
  };

  /// Best H(divDiv,T) approximation of Q in P^4_sym(T) subject to the trace, P^0 and
  /// div Div / P^2 moment conditions. Throws std::runtime_error when the moments cannot be met.
  FortinCheck verify_fortin_moments(const std::array<Point, 3> & corners, const SymMatPoly & q);

} // namespace dpg

#endif
