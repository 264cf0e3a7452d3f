#include "dpg/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dpg
{
  Eigen::VectorXd data_residuals(const Solution & sol, const ProblemSpec & problem, const Mesh & mesh)
  {
    const QuadratureRule & rule = default_triangle_rule();
    const int ne = static_cast<int>(mesh.num_triangles());
    Eigen::VectorXd out(ne);
    for (int t = 0; t < ne; ++t) {
      const auto c = mesh.corners(t);
      const double jac = 2. * mesh.area(t);
      double sum = 0.;
      for (size_t q = 0; q < rule.size(); ++q) {
        const Point x = map_to_triangle(c, rule.points[q]);
        const double r = frobenius_weights(problem.coefficient.A(x)).dot(sol.m.col(t)) - problem.f(x);
        sum += rule.weights[q] * r * r;
      }
      out[t] = jac * sum;
    }
    return out;
  }

  Indicators estimate(const Solution & sol, const ProblemSpec & problem, const Mesh & mesh)
  {
    const auto ne = static_cast<Eigen::Index>(mesh.num_triangles());
    if (sol.residual_energy.size() != ne || sol.representers.size() != static_cast<size_t>(ne)) {
      throw std::invalid_argument("estimate: solution carries no residual representers for this mesh");
    }
    return {sol.residual_energy, data_residuals(sol, problem, mesh)};
  }

  std::vector<int> doerfler_mark(const Indicators & ind, double theta)
  {
    if (!(theta > 0. && theta <= 1.)) {
      throw std::invalid_argument("doerfler_mark: theta must lie in (0, 1]");
    }
    const int n = static_cast<int>(ind.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ind.element(a) > ind.element(b); });
    const double total = ind.total();
    std::vector<int> marked;
    if (theta == 1.) {
      return order;
    }
    if (!(total > 0.)) {
      return marked;
    }
    double sum = 0.;
    for (int t : order) {
      if (sum >= theta * total) {
        break;
      }
      marked.push_back(t);
      sum += ind.element(t);
    }
    return marked;
  }

  ResidualComparison compare_residuals(const Solution & sol, const ProblemSpec & problem, const Mesh & mesh,
                                       int test_degree)
  {
    const TrialLayout & trial = sol.trial;
    const int nu = trial.num_u();
    double dpg2 = 0.;
    double lsq2 = 0.;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
      const ElementForms forms(mesh.corners(t), trial, TestLayout{test_degree});
      Eigen::VectorXd x(trial.size());
      x.head(nu) = sol.u.col(t);
      x.segment(nu, 3) = sol.m.col(t);
      const LocalTraceDofs tr = sol.local_trace(mesh, t);
      x.tail(9) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(tr.data());

      const Eigen::VectorXd rd = forms.load(problem.f) - forms.b(problem.coefficient) * x;
      dpg2 += std::max(0., rd.dot(Eigen::LLT<Eigen::MatrixXd>(forms.gram()).solve(rd)));
      const Eigen::VectorXd rl = -(forms.c() * x);
      lsq2 += std::max(0., rl.dot(Eigen::LLT<Eigen::MatrixXd>(forms.matrix_gram()).solve(rl)));
    }
    return {std::sqrt(dpg2), std::sqrt(lsq2), std::sqrt(data_residuals(sol, problem, mesh).sum())};
  }

  int count_dofs(const Mesh & mesh, TrialKind trial)
  {
    return static_cast<int>(mesh.num_triangles()) * TrialLayout{trial}.num_fields() + TraceSpace(mesh).num_free();
  }

  namespace
  {
    bool within_budget(const Mesh & mesh, const AdaptiveOptions & a, TrialKind trial)
    {
      if (static_cast<int>(mesh.num_triangles()) > a.max_elements) {
        return false;
      }
      return a.max_dofs < 0 || count_dofs(mesh, trial) <= a.max_dofs;
    }
  } // namespace

  void adaptive_solve(const ProblemSpec & problem, const Mesh & initial, const AdaptiveOptions & adaptive,
                      const DiscretizationOptions & options, const std::function<void(const LevelResult &)> & on_level)
  {
    if (!(adaptive.theta > 0. && adaptive.theta <= 1.)) {
      throw std::invalid_argument("adaptive_solve: theta must lie in (0, 1]");
    }
    if (!within_budget(initial, adaptive, options.trial)) {
      throw std::invalid_argument("adaptive_solve: the initial mesh already exceeds the budget");
    }
    Mesh mesh = initial;
    for (int level = 0;; ++level) {
      LevelResult r;
      r.level = level;
      r.solution = solve(problem, mesh, options);
      r.indicators = estimate(r.solution, problem, mesh);
      if (problem.exact) {
        r.errors = field_errors(r.solution, mesh, problem.exact->u, problem.exact->hessian);
      }
      const bool last_by_level = adaptive.max_levels >= 0 && level + 1 >= adaptive.max_levels;
      std::optional<Mesh> next;
      if (!last_by_level) {
        r.marked = doerfler_mark(r.indicators, adaptive.theta);
        if (!r.marked.empty()) {
          next = refine_nvb(mesh, r.marked);
          if (!within_budget(*next, adaptive, options.trial)) {
            next.reset();
          }
        }
        if (!next) {
          r.marked.clear();
        }
      }
      r.mesh = std::move(mesh);
      on_level(r);
      if (!next) {
        return;
      }
      mesh = std::move(*next);
    }
  }

  std::vector<LevelResult> adaptive_solve(const ProblemSpec & problem, const Mesh & initial,
                                          const AdaptiveOptions & adaptive, const DiscretizationOptions & options)
  {
    std::vector<LevelResult> out;
    adaptive_solve(problem, initial, adaptive, options, [&](const LevelResult & r) { out.push_back(r); });
    return out;
  }

} // namespace dpg
