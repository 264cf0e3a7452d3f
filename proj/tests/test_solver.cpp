#include <doctest.h>

#include <random>
#include <sstream>

#include "dpg/adapt.hpp"
#include "dpg/problems.hpp"
#include "dpg/solver.hpp"
#include "support.hpp"

using namespace dpg;

namespace
{
  ProblemSpec zero_problem()
  {
    ProblemSpec p = problem_61();
    p.name = "zero";
    p.f = [](const Point &) { return 0.; };
    p.exact.reset();
    return p;
  }

  /// u = 1 + 2x - y: exact solution lies in the augmented trial space.
  ProblemSpec affine_problem()
  {
    ProblemSpec p;
    p.name = "affine";
    p.coefficient = {[](const Point &) { return (Eigen::Matrix2d() << 2., 0.5, 0.5, 1.).finished(); }, 0};
    p.f = [](const Point &) { return 0.; };
    ExactSolution e;
    e.u = [](const Point & x) { return 1. + 2. * x.x() - x.y(); };
    e.gradient = [](const Point &) { return Eigen::Vector2d(2., -1.); };
    e.hessian = [](const Point &) { return Eigen::Matrix2d::Zero().eval(); };
    p.exact = e;
    p.boundary = BoundaryKind::lift_from_exact;
    p.trial = TrialKind::augmented;
    return p;
  }

  double max_rel(const Eigen::MatrixXd & a, const Eigen::MatrixXd & b)
  {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  }
} // namespace

TEST_SUITE("solver")
{
  TEST_CASE("element Schur complement")
  {
    const ElementSchur toy = element_schur(Eigen::MatrixXd::Constant(1, 1, 2.), Eigen::MatrixXd::Constant(1, 1, 4.),
                                           Eigen::VectorXd::Constant(1, 8.));
    CHECK(toy.stiffness(0, 0) == doctest::Approx(1.));
    CHECK(toy.load[0] == doctest::Approx(4.));

    std::mt19937 rng(1);
    std::uniform_real_distribution<double> d(-1., 1.);
    Eigen::MatrixXd b(6, 4), r(6, 6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        r(i, j) = d(rng);
        if (j < 4) {
          b(i, j) = d(rng);
        }
      }
    }
    const Eigen::MatrixXd g = r * r.transpose() + Eigen::MatrixXd::Identity(6, 6);
    const ElementSchur s = element_schur(b, g, Eigen::VectorXd::Zero(6));
    CHECK(s.load.norm() == 0.);
    CHECK((s.stiffness - s.stiffness.transpose()).norm() <= 1e-12 * s.stiffness.norm());
    CHECK((s.stiffness - b.transpose() * g.inverse() * b).norm() <= 1e-12 * s.stiffness.norm());
    CHECK_THROWS_AS(element_schur(b, -g, Eigen::VectorXd::Zero(6)), std::runtime_error);
  }

  TEST_CASE("zero data gives the zero solution")
  {
    const Mesh m = uniform_refine(initial_square_mesh());
    for (Method method : {Method::dpg, Method::dpg_lsq}) {
      const Solution s = solve(zero_problem(), m, {method, TrialKind::standard, 0});
      CHECK(s.cholesky_ok);
      CHECK(s.u.norm() == 0.);
      CHECK(s.m.norm() == 0.);
      CHECK(s.trace.norm() == 0.);
      const Indicators ind = estimate(s, zero_problem(), m);
      CHECK(ind.total() == 0.);
    }
  }

  TEST_CASE("discrete exact solution is reproduced")
  {
    const ProblemSpec p = affine_problem();
    Mesh m = initial_square_mesh();
    const std::vector<int> marked{0, 5};
    m = refine_nvb(m, marked);
    const Eigen::VectorXd exact_trace = interpolate_trace(p.exact->u, p.exact->gradient, m);
    for (Method method : {Method::dpg, Method::dpg_lsq}) {
      const Solution s = solve(p, m, {method, TrialKind::augmented, 0});
      CHECK(s.m.cwiseAbs().maxCoeff() < 1e-10);
      CHECK((s.trace - exact_trace).cwiseAbs().maxCoeff() < 1e-10);
      for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
        for (const Point & x : m.corners(t)) {
          CHECK(s.u_at(m, t, x) == doctest::Approx(p.exact->u(x)).epsilon(1e-10));
        }
      }
      const FieldErrors err = field_errors(s, m, p.exact->u, p.exact->hessian);
      CHECK(err.total() < 1e-10);
      CHECK(estimate(s, p, m).total() < 1e-18);
    }
  }

  TEST_CASE("quadratic manufactured solution converges")
  {
    ProblemSpec p = affine_problem();
    p.exact->u = [](const Point & x) { return x.x() * x.x() + 3. * x.x() * x.y() - 2. * x.y() * x.y(); };
    p.exact->gradient = [](const Point & x) { return Eigen::Vector2d(2. * x.x() + 3. * x.y(), 3. * x.x() - 4. * x.y()); };
    p.exact->hessian = [](const Point &) { return (Eigen::Matrix2d() << 2., 3., 3., -4.).finished(); };
    p.coefficient = {[](const Point &) { return Eigen::Matrix2d::Identity().eval(); }, 0};
    p.f = [](const Point &) { return -2.; };
    Mesh m = initial_square_mesh();
    double previous = 1e300;
    for (int level = 0; level < 3; ++level) {
      const Solution s = solve(p, m, {Method::dpg, TrialKind::standard, 0});
      const FieldErrors err = field_errors(s, m, p.exact->u, p.exact->hessian);
      CHECK(err.total() < previous);
      previous = err.total();
      m = uniform_refine(m);
    }
  }

  TEST_CASE("representers solve the local residual equations")
  {
    const ProblemSpec p = problem_61();
    const Mesh m = uniform_refine(initial_square_mesh());
    for (Method method : {Method::dpg, Method::dpg_lsq}) {
      const int degree = method == Method::dpg ? 1 : 0;
      const Solution s = solve(p, m, {method, TrialKind::standard, degree});
      CHECK(s.relative_residual <= 1e-10);
      for (int t = 0; t < static_cast<int>(m.num_triangles()); t += 5) {
        const ElementForms forms(m.corners(t), s.trial, TestLayout{degree});
        Eigen::VectorXd x(13);
        x[0] = s.u(0, t);
        x.segment<3>(1) = s.m.col(t);
        const LocalTraceDofs d = s.local_trace(m, t);
        x.tail(9) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(d.data());
        if (method == Method::dpg) {
          const Eigen::VectorXd res = forms.load(p.f) - forms.b(p.coefficient) * x;
          CHECK((forms.gram() * s.representers[t] - res).norm() <= 1e-10 * std::max(1., res.norm()));
          CHECK(s.residual_energy[t] == doctest::Approx(res.dot(s.representers[t])).epsilon(1e-10));
        } else {
          const Eigen::VectorXd res = -(forms.c() * x);
          CHECK((forms.matrix_gram() * s.representers[t] - res).norm() <= 1e-10 * std::max(1., res.norm()));
        }
      }
    }
  }

  TEST_CASE("homogeneous boundary constraints hold for the solution")
  {
    const Mesh m = uniform_refine(initial_square_mesh());
    const Solution s = solve_dpg(problem_61(), m, TrialKind::standard);
    const TraceSpace space(m);
    for (const auto & [v, row] : space.constraint_rows()) {
      CHECK(std::abs(row.dot(s.trace.segment<3>(3 * v))) < 1e-14);
    }
  }

  TEST_CASE("equivalence of DPG and DPG-LSQ for aligned piecewise constant A")
  {
    const ProblemSpec p = problem_61();
    Mesh m = initial_square_mesh();
    for (int level = 0; level < 3; ++level) {
      const GlobalSystem a = assemble_system(p, m, {Method::dpg, TrialKind::standard, 0});
      const GlobalSystem b = assemble_system(p, m, {Method::dpg_lsq, TrialKind::standard, 0});
      const Eigen::MatrixXd ka(a.stiffness), kb(b.stiffness);
      CHECK(max_rel(ka, kb) <= 1e-11);
      const Solution sa = solve_dpg(p, m, TrialKind::standard);
      const Solution sb = solve_dpg_lsq(p, m, TrialKind::standard);
      CHECK(max_rel(sa.u, sb.u) <= 1e-8);
      CHECK(max_rel(sa.m, sb.m) <= 1e-8);
      CHECK(max_rel(sa.trace, sb.trace) <= 1e-8);
      m = uniform_refine(m);
    }
  }

  TEST_CASE("methods differ for the non-aligned coefficient")
  {
    const ProblemSpec p = problem_63();
    const Mesh m = initial_square_mesh();
    const Solution sa = solve_dpg(p, m, TrialKind::standard);
    const Solution sb = solve_dpg_lsq(p, m, TrialKind::standard);
    const double diff = (sa.m - sb.m).norm() / sa.m.norm();
    MESSAGE("relative difference of M on the initial mesh: " << diff);
    CHECK(diff > 1e-3);
  }

  TEST_CASE("field errors")
  {
    const Mesh m = uniform_refine(initial_square_mesh());
    Solution s = solve(zero_problem(), m, {});
    const FieldErrors e = field_errors(
        s, m, [](const Point & x) { return x.x() * x.x(); },
        [](const Point &) { return (Eigen::Matrix2d() << 2., 0., 0., 0.).finished(); });
    CHECK(e.u == doctest::Approx(std::sqrt(4. / 5.)).epsilon(1e-13));
    CHECK(e.m == doctest::Approx(4.).epsilon(1e-13));
    s.u.setConstant(3.);
    s.m.row(0).setConstant(1.);
    const FieldErrors z = field_errors(
        s, m, [](const Point &) { return 3.; }, [](const Point &) { return (Eigen::Matrix2d() << 1., 0., 0., 0.).finished(); });
    CHECK(z.u == 0.);
    CHECK(z.m == 0.);
  }

  TEST_CASE("errors decrease under uniform refinement")
  {
    const ProblemSpec p = problem_61();
    Mesh m = initial_square_mesh();
    double eu = 1e300, em = 1e300;
    for (int level = 0; level < 3; ++level) {
      const Solution s = solve_dpg(p, m, TrialKind::standard);
      const FieldErrors e = field_errors(s, m, p.exact->u, p.exact->hessian);
      CHECK(std::isfinite(e.u));
      CHECK(e.u < eu);
      CHECK(e.m < em);
      eu = e.u;
      em = e.m;
      m = uniform_refine(m);
    }
  }

  TEST_CASE("higher scalar test degree")
  {
    const ProblemSpec p = problem_61();
    const Mesh m = uniform_refine(initial_square_mesh());
    const Solution s0 = solve_dpg(p, m, TrialKind::standard, 0);
    const Solution s2 = solve_dpg(p, m, TrialKind::standard, 2);
    CHECK(s2.cholesky_ok);
    CHECK(s2.representers[0].size() == 6 + 45);
    // A is constant per element: p = 0 already gives the optimal scalar test functions
    CHECK(max_rel(s0.m, s2.m) <= 1e-8);
    CHECK_THROWS_AS(solve_dpg(p, m, TrialKind::standard, 7), std::invalid_argument);
  }

  TEST_CASE("boundary lifting")
  {
    const Mesh m = uniform_refine(initial_square_mesh());
    const TraceSpace space(m);
    const ProblemSpec p61 = problem_61();
    const Eigen::VectorXd zero = lift_boundary_data(p61.exact->u, p61.exact->gradient, m, space);
    CHECK(zero.cwiseAbs().maxCoeff() < 1e-15);

    const ProblemSpec p62 = problem_62();
    const Eigen::VectorXd lift = lift_boundary_data(p62.exact->u, p62.exact->gradient, m, space);
    const Eigen::VectorXd cart = space.to_cartesian(lift);
    // edge of the boundary from (1, 0) to (1, 0.5) on this mesh: endpoint values and tangential derivatives
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
      const auto c = m.corners(t);
      for (int e = 0; e < 3; ++e) {
        const Point a = c[e], b = c[(e + 1) % 3];
        if (a.x() != 1. || b.x() != 1.) {
          continue;
        }
        LocalTraceDofs d{};
        for (int k = 0; k < 3; ++k) {
          for (int j = 0; j < 3; ++j) {
            d[3 * k + j] = cart[3 * m.triangles()[t].vertices[k] + j];
          }
        }
        const double L = (b - a).norm();
        const Eigen::Vector2d tt = (b - a) / L;
        const EdgeTrace ta = trace_edge_values(d, c, e, 0.);
        const EdgeTrace tb = trace_edge_values(d, c, e, L);
        CHECK(ta.value == doctest::Approx(p62.exact->u(a)).epsilon(1e-14));
        CHECK(tb.value == doctest::Approx(p62.exact->u(b)).epsilon(1e-14));
        CHECK(ta.tangential_derivative == doctest::Approx(p62.exact->gradient(a).dot(tt)).epsilon(1e-13));
        CHECK(tb.tangential_derivative == doctest::Approx(p62.exact->gradient(b).dot(tt)).epsilon(1e-13));
      }
    }
    for (int s = 0; s < space.num_slots(); ++s) {
      if (space.is_free(s)) {
        CHECK(lift[s] == 0.);
      }
    }
    const ScalarFunction bad = [](const Point & x) { return x.x() > 0.99 ? std::nan("") : 0.; };
    CHECK_THROWS_AS(lift_boundary_data(bad, p61.exact->gradient, m, space), std::domain_error);
  }

  TEST_CASE("solution dump")
  {
    const Mesh m = initial_square_mesh();
    const Solution s = solve_dpg(problem_61(), m, TrialKind::standard);
    std::ostringstream os;
    write_solution_csv(os, s, m);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    int elements = 0, vertices = 0;
    while (std::getline(is, line)) {
      const auto fields = std::count(line.begin(), line.end(), ',') + 1;
      if (line.rfind("element,", 0) == 0) {
        CHECK(fields == 2 + 1 + 3);
        ++elements;
      } else if (line.rfind("vertex,", 0) == 0) {
        CHECK(fields == 2 + 3);
        ++vertices;
      }
    }
    CHECK(elements == 16);
    CHECK(vertices == 13);
    const Solution aug = solve_dpg(problem_64(), m, TrialKind::augmented);
    std::ostringstream os2;
    write_solution_csv(os2, aug, m);
    CHECK(os2.str().find("element,0,") != std::string::npos);
    std::istringstream is2(os2.str());
    std::getline(is2, line);
    std::getline(is2, line);
    CHECK(std::count(line.begin(), line.end(), ',') + 1 == 2 + 3 + 3);
  }
}
