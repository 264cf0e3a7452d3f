#include "dpg/polyspace.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dpg
{
  //------------------------------------------------------------------------------
  // Quadrature
  //------------------------------------------------------------------------------

  LineRule gauss_legendre(int n)
  {
    if (n < 1) {
      throw std::invalid_argument("gauss_legendre: need at least one point");
    }
    LineRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      // Newton iteration on P_n starting from the Chebyshev-like guess
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2. * k - 1.) * x * p1 - (k - 1.) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) {
          p0 = 1.;
          p1 = x;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) {
          break;
        }
      }
      // recompute derivative at the converged root
      double p0 = 1.;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2. * k - 1.) * x * p1 - (k - 1.) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.);
      const double w = 2. / ((1. - x * x) * dp * dp);
      // map [-1,1] -> [0,1], ascending order
      rule.points[n - 1 - i] = 0.5 * (x + 1.);
      rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
  }

  QuadratureRule triangle_rule(int degree)
  {
    if (degree < 0) {
      throw std::invalid_argument("triangle_rule: negative degree");
    }
    // x = u, y = (1-u) v, Jacobian (1-u): degree+1 in u, degree in v
    const int nu = (degree + 3) / 2;
    const int nv = (degree + 2) / 2;
    const LineRule ru = gauss_legendre(nu);
    const LineRule rv = gauss_legendre(nv);
    QuadratureRule rule;
    rule.exactness_degree = degree;
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < nv; ++j) {
        const double x = ru.points[i];
        const double y = (1. - x) * rv.points[j];
        rule.points.push_back({1. - x - y, x, y});
        rule.weights.push_back(ru.weights[i] * rv.weights[j] * (1. - x));
      }
    }
    return rule;
  }

  const QuadratureRule & default_triangle_rule()
  {
    static const QuadratureRule rule = triangle_rule(14);
    return rule;
  }

  Point map_to_triangle(const std::array<Point, 3> & c, const std::array<double, 3> & b)
  {
    return b[0] * c[0] + b[1] * c[1] + b[2] * c[2];
  }

  double integrate_triangle(const std::function<double(const Point &)> & f, const std::array<Point, 3> & c,
                            const QuadratureRule & rule)
  {
    const double jac = (c[1] - c[0]).x() * (c[2] - c[0]).y() - (c[1] - c[0]).y() * (c[2] - c[0]).x();
    if (std::abs(jac) <= 0.) {
      throw std::invalid_argument("integrate_triangle: degenerate triangle");
    }
    double sum = 0.;
    for (size_t q = 0; q < rule.size(); ++q) {
      sum += rule.weights[q] * f(map_to_triangle(c, rule.points[q]));
    }
    return sum * std::abs(jac);
  }

  double integrate_edge(const std::function<double(const Point &)> & f, const Point & a, const Point & b,
                        int n_points)
  {
    const double len = (b - a).norm();
    if (len <= 0.) {
      throw std::invalid_argument("integrate_edge: zero-length edge");
    }
    const LineRule rule = gauss_legendre(n_points);
    double sum = 0.;
    for (int q = 0; q < n_points; ++q) {
      sum += rule.weights[q] * f(a + rule.points[q] * (b - a));
    }
    return sum * len;
  }

  //------------------------------------------------------------------------------
  // Polynomial
  //------------------------------------------------------------------------------

  Polynomial Polynomial::constant(double c)
  {
    return Polynomial(Eigen::MatrixXd::Constant(1, 1, c));
  }

  Polynomial Polynomial::monomial(int i, int j, double c)
  {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(i + 1, j + 1);
    m(i, j) = c;
    return Polynomial(std::move(m));
  }

  int Polynomial::degree() const
  {
    int d = -1;
    for (Eigen::Index i = 0; i < m_coeffs.rows(); ++i) {
      for (Eigen::Index j = 0; j < m_coeffs.cols(); ++j) {
        if (m_coeffs(i, j) != 0.) {
          d = std::max(d, static_cast<int>(i + j));
        }
      }
    }
    return d;
  }

  double Polynomial::operator()(const Point & p) const
  {
    // Horner in y for each power of x, then Horner in x
    double result = 0.;
    for (Eigen::Index i = m_coeffs.rows() - 1; i >= 0; --i) {
      double row = 0.;
      for (Eigen::Index j = m_coeffs.cols() - 1; j >= 0; --j) {
        row = row * p.y() + m_coeffs(i, j);
      }
      result = result * p.x() + row;
    }
    return result;
  }

  Polynomial Polynomial::dx() const
  {
    if (m_coeffs.rows() <= 1) {
      return Polynomial::constant(0.);
    }
    Eigen::MatrixXd d(m_coeffs.rows() - 1, m_coeffs.cols());
    for (Eigen::Index i = 1; i < m_coeffs.rows(); ++i) {
      d.row(i - 1) = static_cast<double>(i) * m_coeffs.row(i);
    }
    return Polynomial(std::move(d));
  }

  Polynomial Polynomial::dy() const
  {
    if (m_coeffs.cols() <= 1) {
      return Polynomial::constant(0.);
    }
    Eigen::MatrixXd d(m_coeffs.rows(), m_coeffs.cols() - 1);
    for (Eigen::Index j = 1; j < m_coeffs.cols(); ++j) {
      d.col(j - 1) = static_cast<double>(j) * m_coeffs.col(j);
    }
    return Polynomial(std::move(d));
  }

  Eigen::Vector2d Polynomial::gradient(const Point & p) const
  {
    return {dx()(p), dy()(p)};
  }

  Eigen::Matrix2d Polynomial::hessian(const Point & p) const
  {
    const Polynomial px = dx();
    const double xy = px.dy()(p);
    Eigen::Matrix2d h;
    h << px.dx()(p), xy, xy, dy().dy()(p);
    return h;
  }

  Polynomial Polynomial::operator+(const Polynomial & o) const
  {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(std::max(m_coeffs.rows(), o.m_coeffs.rows()),
                                              std::max(m_coeffs.cols(), o.m_coeffs.cols()));
    c.topLeftCorner(m_coeffs.rows(), m_coeffs.cols()) += m_coeffs;
    c.topLeftCorner(o.m_coeffs.rows(), o.m_coeffs.cols()) += o.m_coeffs;
    return Polynomial(std::move(c));
  }

  Polynomial Polynomial::operator-(const Polynomial & o) const { return *this + o * (-1.); }

  Polynomial Polynomial::operator*(const Polynomial & o) const
  {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m_coeffs.rows() + o.m_coeffs.rows() - 1,
                                              m_coeffs.cols() + o.m_coeffs.cols() - 1);
    for (Eigen::Index i = 0; i < m_coeffs.rows(); ++i) {
      for (Eigen::Index j = 0; j < m_coeffs.cols(); ++j) {
        if (m_coeffs(i, j) != 0.) {
          c.block(i, j, o.m_coeffs.rows(), o.m_coeffs.cols()) += m_coeffs(i, j) * o.m_coeffs;
        }
      }
    }
    return Polynomial(std::move(c));
  }

  Polynomial Polynomial::operator*(double s) const { return Polynomial(m_coeffs * s); }

  bool Polynomial::is_zero(double tol) const { return m_coeffs.cwiseAbs().maxCoeff() <= tol; }

  Eigen::Matrix2d SymMatPoly::operator()(const Point & p) const
  {
    const double o = xy(p);
    Eigen::Matrix2d m;
    m << xx(p), o, o, yy(p);
    return m;
  }

  Eigen::Vector2d SymMatPoly::div(const Point & p) const
  {
    return {xx.dx()(p) + xy.dy()(p), xy.dx()(p) + yy.dy()(p)};
  }

  int SymMatPoly::degree() const { return std::max({xx.degree(), xy.degree(), yy.degree()}); }

  Eigen::Matrix2d eval_hessian(const Polynomial & p, const Point & x) { return p.hessian(x); }

  Polynomial divdiv(const SymMatPoly & q)
  {
    return q.xx.dx().dx() + q.xy.dx().dy() * 2. + q.yy.dy().dy();
  }

  //------------------------------------------------------------------------------
  // Bases
  //------------------------------------------------------------------------------

  ElementFrame::ElementFrame(const std::array<Point, 3> & c) : corners(c)
  {
    centroid = (c[0] + c[1] + c[2]) / 3.;
    scale = std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
    area = 0.5 * std::abs((c[1] - c[0]).x() * (c[2] - c[0]).y() - (c[1] - c[0]).y() * (c[2] - c[0]).x());
    if (area <= 0.) {
      throw std::invalid_argument("ElementFrame: degenerate triangle");
    }
  }

  std::vector<std::array<int, 2>> monomial_exponents(int degree)
  {
    std::vector<std::array<int, 2>> e;
    for (int d = 0; d <= degree; ++d) {
      for (int i = d; i >= 0; --i) {
        e.push_back({i, d - i});
      }
    }
    return e;
  }

  namespace
  {
    /// Powers t^0..t^n.
    template <std::size_t N>
    void powers(double t, int n, std::array<double, N> & out)
    {
      out[0] = 1.;
      for (int k = 1; k <= n; ++k) {
        out[k] = out[k - 1] * t;
      }
    }
  } // namespace

  ScalarBasis::ScalarBasis(const ElementFrame & frame, int degree)
      : m_frame(frame), m_degree(degree), m_exponents(monomial_exponents(degree))
  {
    if (degree < 0 || degree > 10) {
      throw std::invalid_argument("ScalarBasis: degree out of range");
    }
  }

  void ScalarBasis::values(const Point & x, Eigen::Ref<Eigen::VectorXd> out) const
  {
    const Point s = m_frame.local(x);
    std::array<double, 12> px{}, py{};
    powers(s.x(), m_degree, px);
    powers(s.y(), m_degree, py);
    for (size_t k = 0; k < m_exponents.size(); ++k) {
      out[k] = px[m_exponents[k][0]] * py[m_exponents[k][1]];
    }
  }

  void ScalarBasis::gradients(const Point & x, Eigen::Ref<Eigen::MatrixXd> out) const
  {
    const Point s = m_frame.local(x);
    std::array<double, 12> px{}, py{};
    powers(s.x(), m_degree, px);
    powers(s.y(), m_degree, py);
    const double inv = 1. / m_frame.scale;
    for (size_t k = 0; k < m_exponents.size(); ++k) {
      const auto [i, j] = m_exponents[k];
      out(0, k) = i > 0 ? i * px[i - 1] * py[j] * inv : 0.;
      out(1, k) = j > 0 ? j * px[i] * py[j - 1] * inv : 0.;
    }
  }

  void ScalarBasis::hessians(const Point & x, Eigen::Ref<Eigen::MatrixXd> out) const
  {
    const Point s = m_frame.local(x);
    std::array<double, 12> px{}, py{};
    powers(s.x(), m_degree, px);
    powers(s.y(), m_degree, py);
    const double inv2 = 1. / (m_frame.scale * m_frame.scale);
    for (size_t k = 0; k < m_exponents.size(); ++k) {
      const auto [i, j] = m_exponents[k];
      out(0, k) = i > 1 ? i * (i - 1) * px[i - 2] * py[j] * inv2 : 0.;
      out(1, k) = (i > 0 && j > 0) ? i * j * px[i - 1] * py[j - 1] * inv2 : 0.;
      out(2, k) = j > 1 ? j * (j - 1) * px[i] * py[j - 2] * inv2 : 0.;
    }
  }

  Polynomial ScalarBasis::polynomial(int k) const
  {
    const auto [i, j] = m_exponents[k];
    const double inv = 1. / m_frame.scale;
    const Polynomial sx = Polynomial(Eigen::Matrix<double, 2, 1>(-m_frame.centroid.x() * inv, inv));
    const Polynomial sy = Polynomial(Eigen::Matrix<double, 1, 2>(-m_frame.centroid.y() * inv, inv));
    Polynomial p = Polynomial::constant(1.);
    for (int a = 0; a < i; ++a) {
      p = p * sx;
    }
    for (int b = 0; b < j; ++b) {
      p = p * sy;
    }
    return p;
  }

  const Eigen::MatrixXd & SymMatBasis::change_of_basis()
  {
    static const Eigen::MatrixXd v = [] {
      // div Div of the raw fields in scaled coordinates, expressed in the P^2 monomials
      const auto exps4 = monomial_exponents(component_degree);
      const auto exps2 = monomial_exponents(2);
      auto index2 = [&](int i, int j) {
        for (size_t k = 0; k < exps2.size(); ++k) {
          if (exps2[k][0] == i && exps2[k][1] == j) {
            return static_cast<int>(k);
          }
        }
        return -1;
      };
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<int>(exps2.size()), dimension);
      for (size_t k = 0; k < exps4.size(); ++k) {
        const auto [i, j] = exps4[k];
        if (i >= 2) {
          d(index2(i - 2, j), 3 * k + 0) += i * (i - 1);
        }
        if (i >= 1 && j >= 1) {
          d(index2(i - 1, j - 1), 3 * k + 1) += 2. * i * j;
        }
        if (j >= 2) {
          d(index2(i, j - 2), 3 * k + 2) += j * (j - 1);
        }
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(d, Eigen::ComputeFullV);
      Eigen::MatrixXd basis = svd.matrixV();
      // columns 0..5 span the row space of d; the remaining 39 its kernel
      Eigen::MatrixXd reordered(dimension, dimension);
      reordered.leftCols(kernel_dimension) = basis.rightCols(kernel_dimension);
      reordered.rightCols(dimension - kernel_dimension) = basis.leftCols(dimension - kernel_dimension);
      return reordered;
    }();
    return v;
  }

  SymMatBasis::SymMatBasis(const ElementFrame & frame) : m_scalar(frame, component_degree) {}

  void SymMatBasis::values(const Point & x, Eigen::Ref<Eigen::MatrixXd> out) const
  {
    Eigen::Matrix<double, 15, 1> phi;
    m_scalar.values(x, phi);
    // raw coefficient r = 3k + c has value phi_k in component c
    const Eigen::MatrixXd & v = change_of_basis();
    for (int c = 0; c < 3; ++c) {
      Eigen::Matrix<double, 1, 45> row;
      for (int j = 0; j < dimension; ++j) {
        double s = 0.;
        for (int k = 0; k < 15; ++k) {
          s += phi[k] * v(3 * k + c, j);
        }
        row[j] = s;
      }
      out.row(c) = row;
    }
  }

  void SymMatBasis::divdiv(const Point & x, Eigen::Ref<Eigen::VectorXd> out) const
  {
    Eigen::Matrix<double, 3, 15> h;
    m_scalar.hessians(x, h);
    Eigen::Matrix<double, 1, 45> raw;
    for (int k = 0; k < 15; ++k) {
      raw[3 * k + 0] = h(0, k);
      raw[3 * k + 1] = 2. * h(1, k);
      raw[3 * k + 2] = h(2, k);
    }
    out = (raw * change_of_basis()).transpose();
  }

  void SymMatBasis::divergence(const Point & x, Eigen::Ref<Eigen::MatrixXd> out) const
  {
    Eigen::Matrix<double, 2, 15> g;
    m_scalar.gradients(x, g);
    // Div Q = (d_x Q11 + d_y Q12, d_x Q12 + d_y Q22)
    Eigen::Matrix<double, 2, 45> raw = Eigen::Matrix<double, 2, 45>::Zero();
    for (int k = 0; k < 15; ++k) {
      raw(0, 3 * k + 0) = g(0, k);
      raw(0, 3 * k + 1) = g(1, k);
      raw(1, 3 * k + 1) = g(0, k);
      raw(1, 3 * k + 2) = g(1, k);
    }
    out = raw * change_of_basis();
  }

  SymMatPoly SymMatBasis::polynomial(int j) const
  {
    const Eigen::MatrixXd & v = change_of_basis();
    SymMatPoly q{Polynomial::constant(0.), Polynomial::constant(0.), Polynomial::constant(0.)};
    for (int k = 0; k < 15; ++k) {
      const Polynomial phi = m_scalar.polynomial(k);
      q.xx = q.xx + phi * v(3 * k + 0, j);
      q.xy = q.xy + phi * v(3 * k + 1, j);
      q.yy = q.yy + phi * v(3 * k + 2, j);
    }
    return q;
  }

} // namespace dpg
