#include "dpg/study.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

namespace dpg
{
  std::string to_string(Refinement r) { return r == Refinement::uniform ? "uniform" : "adaptive"; }

  double StudyRow::err_total() const { return std::sqrt(err_u * err_u + err_m * err_m); }

  namespace
  {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    std::string fmt(double x)
    {
      if (!std::isfinite(x)) {
        return "nan";
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10e", x);
      return buf;
    }

    std::string trial_name(TrialKind k) { return k == TrialKind::standard ? "std" : "augmented"; }

    TrialKind trial_of(const StudyConfig & c, const ProblemSpec & p) { return c.trial.value_or(p.trial); }

    StudyRow make_row(const LevelResult & r)
    {
      StudyRow row;
      row.level = r.level;
      row.nelem = static_cast<int>(r.mesh.num_triangles());
      row.ndof = r.solution.num_dofs;
      row.hmax = r.mesh.max_diameter();
      row.err_u = r.errors ? r.errors->u : nan;
      row.err_m = r.errors ? r.errors->m : nan;
      row.eta_res = std::sqrt(r.indicators.residual_total());
      row.eta_data = std::sqrt(r.indicators.data_total());
      row.eta_total = std::sqrt(r.indicators.total());
      row.marked = static_cast<int>(r.marked.size());
      row.cholesky_ok = r.solution.cholesky_ok;
      row.relative_residual = r.solution.relative_residual;
      return row;
    }

    void check_level(const LevelResult & r, const StudyRow * previous)
    {
      std::string reason;
      if (!r.mesh.is_conforming(&reason)) {
        throw InvariantViolation("level " + std::to_string(r.level) + ": mesh not conforming: " + reason);
      }
      if (!(r.solution.relative_residual <= 1e-10)) {
        throw InvariantViolation("level " + std::to_string(r.level) + ": linear solve relative residual " +
                                 fmt(r.solution.relative_residual));
      }
      if (previous && r.solution.num_dofs <= previous->ndof) {
        throw InvariantViolation("level " + std::to_string(r.level) + ": DOF count did not grow");
      }
      for (Eigen::Index t = 0; t < r.indicators.residual.size(); ++t) {
        if (!(r.indicators.residual[t] >= 0.) || !(r.indicators.data[t] >= 0.)) {
          throw InvariantViolation("level " + std::to_string(r.level) + ": negative or non-finite indicator");
        }
      }
    }
  } // namespace

  std::vector<double> eoc(const std::vector<StudyRow> & rows, double (*error)(const StudyRow &), bool wrt_h)
  {
    std::vector<double> out(rows.size(), nan);
    for (size_t k = 1; k < rows.size(); ++k) {
      const double e0 = error(rows[k - 1]);
      const double e1 = error(rows[k]);
      const double s = wrt_h ? std::log(rows[k - 1].hmax / rows[k].hmax)
                             : 0.5 * std::log(static_cast<double>(rows[k].ndof) / rows[k - 1].ndof);
      if (e0 > 0. && e1 > 0. && s != 0.) {
        out[k] = std::log(e0 / e1) / s;
      }
    }
    return out;
  }

  double mean_tail(const std::vector<double> & values, int count)
  {
    double sum = 0.;
    int n = 0;
    for (auto it = values.rbegin(); it != values.rend() && n < count; ++it) {
      if (std::isfinite(*it)) {
        sum += *it;
        ++n;
      }
    }
    return n > 0 ? sum / n : nan;
  }

  StudyResult run_convergence(const StudyConfig & config, const std::function<void(const LevelResult &)> & on_level)
  {
    const ProblemSpec problem = problem_by_id(config.problem);
    const DiscretizationOptions options{config.method, trial_of(config, problem), config.test_degree};
    StudyResult result;
    result.config = config;
    result.problem_name = problem.name;

    auto record = [&](const LevelResult & r) {
      check_level(r, result.rows.empty() ? nullptr : &result.rows.back());
      result.rows.push_back(make_row(r));
      if (on_level) {
        on_level(r);
      }
    };

    if (config.refinement == Refinement::uniform) {
      if (config.levels < 1) {
        throw std::invalid_argument("uniform refinement needs at least one level");
      }
      Mesh mesh = initial_square_mesh();
      for (int level = 0; level < config.levels; ++level) {
        if (level > 0) {
          mesh = uniform_refine(mesh);
        }
        if (static_cast<int>(mesh.num_triangles()) > config.max_elements ||
            (config.max_dofs >= 0 && count_dofs(mesh, options.trial) > config.max_dofs)) {
          break;
        }
        LevelResult r;
        r.level = level;
        r.solution = solve(problem, mesh, options);
        r.indicators = estimate(r.solution, problem, mesh);
        if (problem.exact) {
          r.errors = field_errors(r.solution, mesh, problem.exact->u, problem.exact->hessian);
        }
        r.mesh = mesh;
        record(r);
      }
    } else {
      AdaptiveOptions a;
      a.theta = config.theta;
      a.max_elements = config.max_elements;
      a.max_dofs = config.max_dofs;
      a.max_levels = config.levels;
      adaptive_solve(problem, initial_square_mesh(), a, options, record);
    }
    return result;
  }

  namespace
  {
    double get_u(const StudyRow & r) { return r.err_u; }
    double get_m(const StudyRow & r) { return r.err_m; }
    double get_total(const StudyRow & r) { return r.err_total(); }
    double get_eta(const StudyRow & r) { return r.eta_total; }
  } // namespace

  void write_table_csv(std::ostream & os, const StudyResult & result)
  {
    const auto & rows = result.rows;
    const std::vector<std::vector<double>> cols = {
        eoc(rows, get_u, false),     eoc(rows, get_m, false), eoc(rows, get_total, false),
        eoc(rows, get_eta, false),   eoc(rows, get_u, true),  eoc(rows, get_m, true),
        eoc(rows, get_total, true),
    };
    os << "level,nelem,ndof,err_u,err_M,eta_res,eta_data,eta_total,theta,method,hmax,marked,"
          "eoc_u_ndof,eoc_M_ndof,eoc_total_ndof,eoc_eta_ndof,eoc_u_h,eoc_M_h,eoc_total_h\n";
    const double theta = result.config.refinement == Refinement::adaptive ? result.config.theta : 1.;
    for (size_t k = 0; k < rows.size(); ++k) {
      const StudyRow & r = rows[k];
      os << r.level << ',' << r.nelem << ',' << r.ndof << ',' << fmt(r.err_u) << ',' << fmt(r.err_m) << ','
         << fmt(r.eta_res) << ',' << fmt(r.eta_data) << ',' << fmt(r.eta_total) << ',' << fmt(theta) << ','
         << to_string(result.config.method) << ',' << fmt(r.hmax) << ',' << r.marked;
      for (const auto & c : cols) {
        os << ',' << fmt(c[k]);
      }
      os << '\n';
    }
  }

  void write_metadata(std::ostream & os, const StudyResult & result)
  {
    const StudyConfig & c = result.config;
    const ProblemSpec problem = problem_by_id(c.problem);
    const Mesh sample_mesh = uniform_refine(uniform_refine(initial_square_mesh()));
    const std::vector<Point> samples = quadrature_samples(sample_mesh);
    const CordesReport cordes = cordes_epsilon(problem.coefficient.A, samples);
    bool all_cholesky = true;
    for (const auto & r : result.rows) {
      all_cholesky = all_cholesky && r.cholesky_ok;
    }
    os << "problem=" << problem.name << '\n'
       << "method=" << to_string(c.method) << '\n'
       << "trial=" << trial_name(trial_of(c, problem)) << '\n'
       << "test_degree=" << (c.method == Method::dpg ? c.test_degree : 0) << '\n'
       << "refinement=" << to_string(c.refinement) << '\n'
       << "theta=" << fmt(c.refinement == Refinement::adaptive ? c.theta : 1.) << '\n'
       << "theta_source=default 0.5, not stated for the reference runs\n"
       << "levels_requested=" << c.levels << '\n'
       << "levels_computed=" << result.rows.size() << '\n'
       << "max_elements=" << c.max_elements << '\n'
       << "max_dofs=" << c.max_dofs << '\n'
       << "stopping_rule=stop before solving a mesh that exceeds max_elements or max_dofs\n"
       << "boundary=" << (problem.boundary == BoundaryKind::homogeneous ? "homogeneous" : "lift_from_exact") << '\n'
       << "exact_solution=" << (problem.exact ? "yes" : "no") << '\n'
       << "coefficient_mesh_aligned=" << (problem.coefficient.piecewise_polynomial_degree ? "yes" : "no") << '\n'
       << "cordes_epsilon=" << fmt(cordes.epsilon) << '\n'
       << "cordes_lambda_min=" << fmt(cordes.lambda_min) << '\n'
       << "cordes_lambda_max=" << fmt(cordes.lambda_max) << '\n'
       << "quadrature_degree=" << default_triangle_rule().exactness_degree << '\n'
       << "quadrature=collapsed Gauss product rule, fixed, no subcell resolution of coefficient jumps\n"
       << "all_cholesky_ok=" << (all_cholesky ? "yes" : "no") << '\n'
       << "notes=" << problem.notes << '\n';
  }

  StudyResult run_study_to_directory(const StudyConfig & config, const std::filesystem::path & dir)
  {
    std::filesystem::create_directories(dir);
    auto open = [](const std::filesystem::path & p) {
      std::ofstream os(p);
      if (!os) {
        throw std::runtime_error("cannot write " + p.string());
      }
      return os;
    };
    const StudyResult result = run_convergence(config, [&](const LevelResult & r) {
      const std::string suffix = std::to_string(r.level);
      std::ofstream mesh_os = open(dir / ("mesh_" + suffix + ".txt"));
      r.mesh.write(mesh_os);
      std::ofstream sol_os = open(dir / ("solution_" + suffix + ".csv"));
      write_solution_csv(sol_os, r.solution, r.mesh);
    });
    std::ofstream table = open(dir / "table.csv");
    write_table_csv(table, result);
    std::ofstream meta = open(dir / "meta.txt");
    write_metadata(meta, result);
    return result;
  }

} // namespace dpg
