#ifndef DPG_POLYSPACE_HPP
#define DPG_POLYSPACE_HPP

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dpg/mesh.hpp"

namespace dpg
{
  //------------------------------------------------------------------------------
  // Quadrature
  //------------------------------------------------------------------------------

  /// Gauss-Legendre rule on [0,1].
  struct LineRule
  {
    std::vector<double> points;
    std::vector<double> weights;
  };

  LineRule gauss_legendre(int n_points);

  /// Rule on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
  /** Points are stored as barycentric coordinates (l0, l1, l2); weights sum to 1/2. */
  struct QuadratureRule
  {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int exactness_degree = 0;

    size_t size() const { return weights.size(); }
  };

  /// Collapsed (Duffy) Gauss product rule that integrates all polynomials of total degree
  /// `degree` exactly. Every point lies strictly inside the triangle.
  QuadratureRule triangle_rule(int degree);

  /// Default rule for element integrals (exactness 14).
  const QuadratureRule & default_triangle_rule();

  /// Number of Gauss points used on edges (exact to degree 11).
  inline constexpr int default_edge_points = 6;

  Point map_to_triangle(const std::array<Point, 3> & corners, const std::array<double, 3> & bary);

  double integrate_triangle(const std::function<double(const Point &)> & f,
                            const std::array<Point, 3> & corners,
                            const QuadratureRule & rule = default_triangle_rule());

  /// Integral over the segment [a,b] with respect to arclength.
  double integrate_edge(const std::function<double(const Point &)> & f, const Point & a, const Point & b,
                        int n_points = default_edge_points);

  //------------------------------------------------------------------------------
  // Polynomials in global coordinates
  //------------------------------------------------------------------------------

  /// Bivariate polynomial sum_{i,j} c(i,j) x^i y^j.
  class Polynomial
  {
  public:
    Polynomial() : m_coeffs(Eigen::MatrixXd::Zero(1, 1)) {}
    explicit Polynomial(Eigen::MatrixXd coeffs) : m_coeffs(std::move(coeffs)) {}

    static Polynomial constant(double c);
    /// c * x^i y^j
    static Polynomial monomial(int i, int j, double c = 1.);

    const Eigen::MatrixXd & coeffs() const { return m_coeffs; }
    int degree() const;

    double operator()(const Point & p) const;
    Eigen::Vector2d gradient(const Point & p) const;
    Eigen::Matrix2d hessian(const Point & p) const;

    Polynomial dx() const;
    Polynomial dy() const;

    Polynomial operator+(const Polynomial & o) const;
    Polynomial operator-(const Polynomial & o) const;
    Polynomial operator*(const Polynomial & o) const;
    Polynomial operator*(double s) const;

    bool is_zero(double tol = 0.) const;

  private:
    Eigen::MatrixXd m_coeffs;
  };

  /// Symmetric matrix polynomial [[xx, xy], [xy, yy]].
  struct SymMatPoly
  {
    Polynomial xx, xy, yy;

    Eigen::Matrix2d operator()(const Point & p) const;
    /// Row-wise divergence Div Q.
    Eigen::Vector2d div(const Point & p) const;
    int degree() const;
  };

  /// Exact second derivatives of `p` at `x`.
  Eigen::Matrix2d eval_hessian(const Polynomial & p, const Point & x);

  /// div Div Q = d_xx Q11 + 2 d_xy Q12 + d_yy Q22.
  Polynomial divdiv(const SymMatPoly & q);

  //------------------------------------------------------------------------------
  // Element bases
  //------------------------------------------------------------------------------

  /// Affine frame of a triangle: centroid, diameter and area.
  struct ElementFrame
  {
    std::array<Point, 3> corners;
    Point centroid;
    double scale = 1.; ///< diameter
    double area = 0.;

    explicit ElementFrame(const std::array<Point, 3> & c);

    /// Scaled coordinates (x - centroid) / diameter.
    Point local(const Point & x) const { return (x - centroid) / scale; }
  };

  inline int scalar_dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }

  /// Exponents of the monomials of total degree <= p, ordered by total degree then by
  /// decreasing power of x.
  std::vector<std::array<int, 2>> monomial_exponents(int degree);

  /// Monomials in scaled coordinates ((x - xc)/h)^i ((y - yc)/h)^j.
  class ScalarBasis
  {
  public:
    ScalarBasis(const ElementFrame & frame, int degree);

    int degree() const { return m_degree; }
    int size() const { return static_cast<int>(m_exponents.size()); }

    void values(const Point & x, Eigen::Ref<Eigen::VectorXd> out) const;
    /// Rows: d/dx, d/dy.
    void gradients(const Point & x, Eigen::Ref<Eigen::MatrixXd> out) const;
    /// Rows: d_xx, d_xy, d_yy.
    void hessians(const Point & x, Eigen::Ref<Eigen::MatrixXd> out) const;

    /// Global-coordinate polynomial of basis function k.
    Polynomial polynomial(int k) const;

  private:
    ElementFrame m_frame;
    int m_degree;
    std::vector<std::array<int, 2>> m_exponents;
  };

  /// Symmetric matrix fields with P^4 components.
  /** The raw fields phi_k S_c (S_0 = E11, S_1 = E12 + E21, S_2 = E22) are combined with a fixed
      orthogonal change of basis that separates the kernel of div Div (39 functions) from a
      complement (6 functions). This keeps the H(divDiv) Gram matrix well scaled independently
      of the element size. */
  class SymMatBasis
  {
  public:
    static constexpr int component_degree = 4;
    static constexpr int dimension = 45;
    static constexpr int kernel_dimension = 39;

    explicit SymMatBasis(const ElementFrame & frame);

    int size() const { return dimension; }

    /// Components (Q11, Q12, Q22) of every basis function: 3 x 45.
    void values(const Point & x, Eigen::Ref<Eigen::MatrixXd> out) const;
    /// div Div of every basis function.
    void divdiv(const Point & x, Eigen::Ref<Eigen::VectorXd> out) const;
    /// Row-wise divergence: 2 x 45.
    void divergence(const Point & x, Eigen::Ref<Eigen::MatrixXd> out) const;

    SymMatPoly polynomial(int k) const;

    /// Orthogonal 45 x 45 matrix mapping combined coefficients to raw coefficients.
    static const Eigen::MatrixXd & change_of_basis();

  private:
    ScalarBasis m_scalar;
  };

} // namespace dpg

#endif
