#include "dpg/forms.hpp"

#include <cmath>
#include <limits>

namespace dpg
{
  namespace
  {
    double jacobian(const std::array<Point, 3> & c)
    {
      return std::abs((c[1] - c[0]).x() * (c[2] - c[0]).y() - (c[1] - c[0]).y() * (c[2] - c[0]).x());
    }

    struct EdgeGeometry
    {
      Point a, b;
      double length;
      Eigen::Vector2d t, n;
    };

    EdgeGeometry edge_geometry(const std::array<Point, 3> & c, int e)
    {
      EdgeGeometry g;
      g.a = c[e];
      g.b = c[(e + 1) % 3];
      g.length = (g.b - g.a).norm();
      g.t = (g.b - g.a) / g.length;
      g.n = Eigen::Vector2d(g.t.y(), -g.t.x());
      return g;
    }

    /// (n.Div Q, n.Q n, t.Q n) for a polynomial field at x.
    Eigen::Vector3d normal_components(const SymMatPoly & q, const Point & x, const EdgeGeometry & g)
    {
      const Eigen::Matrix2d m = q(x);
      return {g.n.dot(q.div(x)), g.n.dot(m * g.n), g.t.dot(m * g.n)};
    }
  } // namespace

  ElementForms::ElementForms(const std::array<Point, 3> & corners, TrialLayout trial, TestLayout test,
                             const QuadratureRule & rule)
      : m_frame(corners), m_trial(trial), m_test(test)
  {
    const double jac = jacobian(corners);
    const int nq = static_cast<int>(rule.size());
    m_points.reserve(nq);
    m_weights.reserve(nq);
    for (int q = 0; q < nq; ++q) {
      m_points.push_back(map_to_triangle(corners, rule.points[q]));
      m_weights.push_back(rule.weights[q] * jac);
    }

    const ScalarBasis scalar(m_frame, test.scalar_degree);
    const ScalarBasis ubasis(m_frame, trial.num_u() == 1 ? 0 : 1);
    const SymMatBasis matrix(m_frame);
    m_scalar.resize(scalar.size(), nq);
    m_u.resize(ubasis.size(), nq);
    m_q11.resize(45, nq);
    m_q12.resize(45, nq);
    m_q22.resize(45, nq);
    m_divdiv.resize(45, nq);
    Eigen::Matrix<double, 3, 45> vals;
    Eigen::Matrix<double, 45, 1> dd;
    for (int q = 0; q < nq; ++q) {
      scalar.values(m_points[q], m_scalar.col(q));
      ubasis.values(m_points[q], m_u.col(q));
      matrix.values(m_points[q], vals);
      matrix.divdiv(m_points[q], dd);
      m_q11.col(q) = vals.row(0).transpose();
      m_q12.col(q) = vals.row(1).transpose();
      m_q22.col(q) = vals.row(2).transpose();
      m_divdiv.col(q) = dd;
    }

    // boundary pairing against the 9 local trace DOFs
    m_trace_block = Eigen::MatrixXd::Zero(45, 9);
    const LineRule line = gauss_legendre(default_edge_points);
    Eigen::Matrix<double, 2, 45> div;
    for (int e = 0; e < 3; ++e) {
      const EdgeGeometry g = edge_geometry(corners, e);
      const double n1 = g.n.x(), n2 = g.n.y(), t1 = g.t.x(), t2 = g.t.y();
      for (size_t k = 0; k < line.points.size(); ++k) {
        const double s = line.points[k] * g.length;
        const double w = line.weights[k] * g.length;
        const Point x = g.a + s * g.t;
        const Eigen::Matrix<double, 3, 9> rows = edge_trace_rows(corners, e, s);
        matrix.values(x, vals);
        matrix.divergence(x, div);
        const Eigen::Matrix<double, 1, 45> ndiv = n1 * div.row(0) + n2 * div.row(1);
        const Eigen::Matrix<double, 1, 45> nqn = n1 * n1 * vals.row(0) + 2. * n1 * n2 * vals.row(1) + n2 * n2 * vals.row(2);
        const Eigen::Matrix<double, 1, 45> tqn = t1 * n1 * vals.row(0) + (t1 * n2 + t2 * n1) * vals.row(1) + t2 * n2 * vals.row(2);
        m_trace_block.noalias() += w * (ndiv.transpose() * rows.row(0) - nqn.transpose() * rows.row(1) - tqn.transpose() * rows.row(2));
      }
    }
  }

  Eigen::MatrixXd ElementForms::matrix_gram() const
  {
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(m_weights.data(), m_weights.size());
    const auto wd = w.asDiagonal();
    Eigen::MatrixXd g = m_q11 * wd * m_q11.transpose();
    g.noalias() += 2. * (m_q12 * wd * m_q12.transpose());
    g.noalias() += m_q22 * wd * m_q22.transpose();
    g.noalias() += m_divdiv * wd * m_divdiv.transpose();
    return 0.5 * (g + g.transpose());
  }

  Eigen::MatrixXd ElementForms::gram() const
  {
    const int ns = m_test.num_scalar();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m_test.size(), m_test.size());
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(m_weights.data(), m_weights.size());
    g.topLeftCorner(ns, ns) = m_scalar * w.asDiagonal() * m_scalar.transpose();
    g.bottomRightCorner(45, 45) = matrix_gram();
    return 0.5 * (g + g.transpose());
  }

  Eigen::MatrixXd ElementForms::c() const
  {
    const int nu = m_trial.num_u();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(45, m_trial.size());
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(m_weights.data(), m_weights.size());
    // -(u, div Div Q)
    c.leftCols(nu) = -(m_divdiv * w.asDiagonal() * m_u.transpose());
    // (M, Q) with M = m1 E11 + m2 (E12 + E21) + m3 E22
    c.col(nu + 0) = m_q11 * w;
    c.col(nu + 1) = 2. * (m_q12 * w);
    c.col(nu + 2) = m_q22 * w;
    c.rightCols(9) = m_trace_block;
    return c;
  }

  Eigen::MatrixXd ElementForms::b(const CoefficientField & a) const
  {
    const int ns = m_test.num_scalar();
    const int nu = m_trial.num_u();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_test.size(), m_trial.size());
    // (M, A v)
    for (size_t q = 0; q < m_points.size(); ++q) {
      const Eigen::Vector3d aw = frobenius_weights(a.A(m_points[q])) * m_weights[q];
      b.block(0, nu, ns, 3).noalias() += m_scalar.col(q) * aw.transpose();
    }
    b.bottomRows(45) = c();
    return b;
  }

  Eigen::VectorXd ElementForms::load(const ScalarFunction & f) const
  {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m_test.size());
    for (size_t q = 0; q < m_points.size(); ++q) {
      out.head(m_test.num_scalar()) += (m_weights[q] * f(m_points[q])) * m_scalar.col(q);
    }
    return out;
  }

  Eigen::Matrix3d ElementForms::lsq_coupling(const CoefficientField & a) const
  {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (size_t q = 0; q < m_points.size(); ++q) {
      const Eigen::Vector3d aw = frobenius_weights(a.A(m_points[q]));
      m.noalias() += m_weights[q] * aw * aw.transpose();
    }
    return m;
  }

  Eigen::Vector3d ElementForms::lsq_load(const CoefficientField & a, const ScalarFunction & f) const
  {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (size_t q = 0; q < m_points.size(); ++q) {
      v += (m_weights[q] * f(m_points[q])) * frobenius_weights(a.A(m_points[q]));
    }
    return v;
  }

  double ElementForms::data_residual(const CoefficientField & a, const ScalarFunction & f,
                                     const Eigen::Vector3d & m) const
  {
    double sum = 0.;
    for (size_t q = 0; q < m_points.size(); ++q) {
      const double r = frobenius_weights(a.A(m_points[q])).dot(m) - f(m_points[q]);
      sum += m_weights[q] * r * r;
    }
    return sum;
  }

  double ElementForms::u_value(const Eigen::VectorXd & u_coeffs, const Point & x) const
  {
    const ScalarBasis ubasis(m_frame, m_trial.num_u() == 1 ? 0 : 1);
    Eigen::VectorXd phi(ubasis.size());
    ubasis.values(x, phi);
    return phi.dot(u_coeffs);
  }

  ScalarForms::ScalarForms(const std::array<Point, 3> & corners, int scalar_degree, const QuadratureRule & rule)
  {
    const double jac = jacobian(corners);
    const ScalarBasis scalar(ElementFrame(corners), scalar_degree);
    const int nq = static_cast<int>(rule.size());
    m_points.reserve(nq);
    m_weights.reserve(nq);
    m_scalar.resize(scalar.size(), nq);
    for (int q = 0; q < nq; ++q) {
      m_points.push_back(map_to_triangle(corners, rule.points[q]));
      m_weights.push_back(rule.weights[q] * jac);
      scalar.values(m_points[q], m_scalar.col(q));
    }
  }

  Eigen::MatrixXd ScalarForms::gram() const
  {
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(m_weights.data(), m_weights.size());
    const Eigen::MatrixXd g = m_scalar * w.asDiagonal() * m_scalar.transpose();
    return 0.5 * (g + g.transpose());
  }

  Eigen::MatrixXd ScalarForms::coupling(const CoefficientField & a) const
  {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(num_scalar(), 3);
    for (size_t q = 0; q < m_points.size(); ++q) {
      const Eigen::Vector3d aw = frobenius_weights(a.A(m_points[q])) * m_weights[q];
      b.noalias() += m_scalar.col(q) * aw.transpose();
    }
    return b;
  }

  Eigen::VectorXd ScalarForms::load(const ScalarFunction & f) const
  {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_scalar());
    for (size_t q = 0; q < m_points.size(); ++q) {
      out += (m_weights[q] * f(m_points[q])) * m_scalar.col(q);
    }
    return out;
  }

  Eigen::Matrix3d ScalarForms::lsq_coupling(const CoefficientField & a) const
  {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (size_t q = 0; q < m_points.size(); ++q) {
      const Eigen::Vector3d aw = frobenius_weights(a.A(m_points[q]));
      m.noalias() += m_weights[q] * aw * aw.transpose();
    }
    return m;
  }

  Eigen::Vector3d ScalarForms::lsq_load(const CoefficientField & a, const ScalarFunction & f) const
  {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (size_t q = 0; q < m_points.size(); ++q) {
      v += (m_weights[q] * f(m_points[q])) * frobenius_weights(a.A(m_points[q]));
    }
    return v;
  }

  double trace_pairing_element(const LocalTraceDofs & dofs, const SymMatPoly & q, const std::array<Point, 3> & corners)
  {
    const Eigen::Map<const Eigen::Matrix<double, 9, 1>> x(dofs.data());
    const LineRule line = gauss_legendre(default_edge_points);
    double sum = 0.;
    for (int e = 0; e < 3; ++e) {
      const EdgeGeometry g = edge_geometry(corners, e);
      for (size_t k = 0; k < line.points.size(); ++k) {
        const double s = line.points[k] * g.length;
        const Point p = g.a + s * g.t;
        const Eigen::Vector3d tr = edge_trace_rows(corners, e, s) * x;
        const Eigen::Vector3d qn = normal_components(q, p, g);
        sum += line.weights[k] * g.length * (qn[0] * tr[0] - qn[1] * tr[1] - qn[2] * tr[2]);
      }
    }
    return sum;
  }

  double boundary_pairing(const ScalarFunction & u, const std::function<Eigen::Vector2d(const Point &)> & grad,
                          const SymMatPoly & q, const std::array<Point, 3> & corners)
  {
    double sum = 0.;
    for (int e = 0; e < 3; ++e) {
      const EdgeGeometry g = edge_geometry(corners, e);
      sum += integrate_edge(
          [&](const Point & p) {
            const Eigen::Vector3d qn = normal_components(q, p, g);
            const Eigen::Vector2d du = grad(p);
            return qn[0] * u(p) - qn[1] * g.n.dot(du) - qn[2] * g.t.dot(du);
          },
          g.a, g.b, 8);
    }
    return sum;
  }

  double volume_pairing(const Polynomial & u, const SymMatPoly & q, const std::array<Point, 3> & corners)
  {
    const Polynomial dd = divdiv(q);
    const Polynomial uxx = u.dx().dx(), uxy = u.dx().dy(), uyy = u.dy().dy();
    return integrate_triangle(
        [&](const Point & p) {
          return dd(p) * u(p) - (q.xx(p) * uxx(p) + 2. * q.xy(p) * uxy(p) + q.yy(p) * uyy(p));
        },
        corners, triangle_rule(2 * std::max(q.degree(), u.degree()) + 2));
  }

  Eigen::MatrixXd local_b(const ElementForms & forms, const CoefficientField & a) { return forms.b(a); }
  Eigen::MatrixXd local_c(const ElementForms & forms) { return forms.c(); }
  Eigen::MatrixXd local_gram(const ElementForms & forms) { return forms.gram(); }

  CordesReport cordes_epsilon(const MatrixFunction & a, std::span<const Point> samples)
  {
    CordesReport report;
    report.epsilon = std::numeric_limits<double>::infinity();
    report.lambda_min = std::numeric_limits<double>::infinity();
    report.lambda_max = -std::numeric_limits<double>::infinity();
    for (const Point & x : samples) {
      const Eigen::Matrix2d m = a(x);
      const double tr = m.trace();
      const double fro2 = m.squaredNorm();
      const double eps = tr * tr / fro2 - 1.;
      if (eps < report.epsilon) {
        report.epsilon = eps;
        report.worst_point = x;
      }
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
      report.lambda_min = std::min(report.lambda_min, es.eigenvalues()[0]);
      report.lambda_max = std::max(report.lambda_max, es.eigenvalues()[1]);
    }
    report.ellipticity_ok = report.lambda_min > 0. && std::isfinite(report.lambda_max);
    if (!(report.epsilon > 0.)) {
      throw CordesViolation("Cordes condition violated: epsilon = " + std::to_string(report.epsilon));
    }
    report.epsilon = std::min(report.epsilon, 1.);
    return report;
  }

  std::vector<Point> quadrature_samples(const Mesh & mesh, const QuadratureRule & rule)
  {
    std::vector<Point> pts;
    pts.reserve(mesh.num_triangles() * rule.size());
    for (size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto c = mesh.corners(static_cast<int>(t));
      for (const auto & b : rule.points) {
        pts.push_back(map_to_triangle(c, b));
      }
    }
    return pts;
  }

  FortinCheck verify_fortin_moments(const std::array<Point, 3> & corners, const SymMatPoly & q)
  {
    const ElementForms forms(corners, TrialLayout{}, TestLayout{0});
    const ElementFrame & frame = forms.frame();
    const SymMatBasis basis(frame);
    const ScalarBasis p2(frame, 2);
    const Polynomial qdd = divdiv(q);
    const size_t nq = forms.num_points();

    // constraint rows on the 45 coefficients and the moments of Q
    Eigen::MatrixXd cons = Eigen::MatrixXd::Zero(18, 45);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(18);
    cons.topRows(9) = forms.trace_block().transpose();
    for (int i = 0; i < 9; ++i) {
      LocalTraceDofs unit{};
      unit[i] = 1.;
      rhs[i] = trace_pairing_element(unit, q, corners);
    }

    // inner products evaluated at the quadrature points
    Eigen::MatrixXd vals(3, 45);
    Eigen::VectorXd dd(45);
    Eigen::VectorXd w2(6);
    Eigen::VectorXd cross = Eigen::VectorXd::Zero(45); // <P_j, Q>_{H(divDiv)}
    double q_norm2 = 0.;
    for (size_t k = 0; k < nq; ++k) {
      const Point & x = forms.point(k);
      const double w = forms.weight(k);
      basis.values(x, vals);
      basis.divdiv(x, dd);
      p2.values(x, w2);
      const Eigen::Matrix2d qx = q(x);
      const double qdx = qdd(x);
      // (M, P) for M in {E11, E12 + E21, E22}
      cons.row(9) += w * vals.row(0);
      cons.row(10) += w * 2. * vals.row(1);
      cons.row(11) += w * vals.row(2);
      rhs[9] += w * qx(0, 0);
      rhs[10] += w * 2. * qx(0, 1);
      rhs[11] += w * qx(1, 1);
      // (u, div Div P) for u in P^2
      cons.bottomRows(6).noalias() += w * w2 * dd.transpose();
      rhs.tail(6) += (w * qdx) * w2;
      cross += w * (qx(0, 0) * vals.row(0).transpose() + 2. * qx(0, 1) * vals.row(1).transpose() +
                    qx(1, 1) * vals.row(2).transpose() + qdx * dd);
      q_norm2 += w * (qx.squaredNorm() + qdx * qdx);
    }

    // minimise ||P - Q||^2 = x'Gx - 2 x'cross + const subject to cons x = rhs
    const Eigen::MatrixXd gram = forms.matrix_gram();
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("verify_fortin_moments: Gram matrix not positive definite");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    // y = L' x, K = cons L^{-T}
    const Eigen::MatrixXd k = lower.triangularView<Eigen::Lower>().solve(cons.transpose()).transpose();
    const Eigen::VectorXd y0 = lower.triangularView<Eigen::Lower>().solve(cross);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-9);
    const Eigen::VectorXd y = y0 + svd.solve(rhs - k * y0);
    const Eigen::VectorXd x = lower.transpose().triangularView<Eigen::Upper>().solve(y);

    FortinCheck out;
    out.projection = x;
    out.residuals = cons * x - rhs;
    out.constraint_rank = static_cast<int>(svd.rank());
    out.max_residual = out.residuals.cwiseAbs().maxCoeff() / std::max(1., rhs.cwiseAbs().maxCoeff());
    if (out.max_residual > 1e-8) {
      throw std::runtime_error("verify_fortin_moments: moment conditions cannot be satisfied (residual " +
                               std::to_string(out.max_residual) + ")");
    }
    const double p_norm2 = x.dot(gram * x);
    out.bound_ratio = q_norm2 > 0. ? std::sqrt(p_norm2 / q_norm2) : 0.;
    return out;
  }

} // namespace dpg
