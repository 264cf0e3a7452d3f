#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dpg/adapt.hpp"
#include "dpg/forms.hpp"
#include "dpg/problems.hpp"
#include "dpg/study.hpp"
#include "support.hpp"

using namespace dpg;

namespace
{
  int failures = 0;

  void report(int id, const char * name, bool ok, const std::string & detail)
  {
    std::printf("%s %2d %-22s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }

  std::string format(const char * fmt, auto... args)
  {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
  }

  double seconds_since(std::chrono::steady_clock::time_point t0)
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  struct Run
  {
    int problem = 0;
    Method method = Method::dpg;
    Refinement refinement = Refinement::uniform;
    StudyResult result;
    std::vector<double> marked_near_origin; ///< fraction per level (NaN without marking)
  };

  Run run(int problem, Method method, Refinement refinement, int levels, std::optional<TrialKind> trial = {})
  {
    StudyConfig c;
    c.problem = problem;
    c.method = method;
    c.refinement = refinement;
    c.levels = levels;
    c.trial = trial;
    c.max_elements = 50000;
    Run r{problem, method, refinement, {}, {}};
    r.result = run_convergence(c, [&](const LevelResult & level) {
      if (level.marked.empty()) {
        r.marked_near_origin.push_back(std::numeric_limits<double>::quiet_NaN());
        return;
      }
      int near = 0;
      for (int t : level.marked) {
        const auto c3 = level.mesh.corners(t);
        if (((c3[0] + c3[1] + c3[2]) / 3.).norm() < 0.25) {
          ++near;
        }
      }
      r.marked_near_origin.push_back(static_cast<double>(near) / level.marked.size());
    });
    return r;
  }

  double get_total(const StudyRow & r) { return r.err_total(); }
  double get_u(const StudyRow & r) { return r.err_u; }
  double get_m(const StudyRow & r) { return r.err_m; }

  Eigen::VectorXd coefficients(const Solution & s)
  {
    Eigen::VectorXd x(s.u.size() + s.m.size() + s.trace.size());
    x << s.u.reshaped(), s.m.reshaped(), s.trace;
    return x;
  }

  std::string run_name(const Run & r)
  {
    return std::to_string(r.problem) + "/" + to_string(r.method) + "/" + to_string(r.refinement);
  }

  ProblemSpec zero_load_problem()
  {
    ProblemSpec p = problem_61();
    p.name = "zero";
    p.f = [](const Point &) { return 0.; };
    p.exact.reset();
    return p;
  }
} // namespace

int main()
{
  const auto start = std::chrono::steady_clock::now();

  // 1. Cordes constant
  {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<Point> samples = quadrature_samples(uniform_refine(uniform_refine(initial_square_mesh())));
    const CordesReport r = cordes_epsilon(problem_61().coefficient.A, samples);
    const double elapsed = seconds_since(t0);
    report(1, "cordes", std::abs(r.epsilon - 0.6) <= 1e-12 && elapsed < 1.,
           format("epsilon=%.15f |eps-0.6|=%.2e time=%.3fs", r.epsilon, std::abs(r.epsilon - 0.6), elapsed));
  }

  // shared runs: all problems, both methods, uniform levels 0-5 and adaptive to 5e4 elements
  std::vector<Run> runs;
  for (int problem : {61, 62, 63, 64}) {
    for (Method method : {Method::dpg, Method::dpg_lsq}) {
      runs.push_back(run(problem, method, Refinement::uniform, 6));
      runs.push_back(run(problem, method, Refinement::adaptive, -1));
    }
  }

  // 2. Cholesky on every system
  {
    int systems = 0, ok = 0, max_elements = 0;
    for (const Run & r : runs) {
      for (const StudyRow & row : r.result.rows) {
        ++systems;
        ok += row.cholesky_ok ? 1 : 0;
        max_elements = std::max(max_elements, row.nelem);
      }
    }
    report(2, "cholesky", ok == systems && systems > 0,
           format("%d/%d systems factorised, largest mesh %d elements, %.1fs", ok, systems, max_elements,
                  seconds_since(start)));
  }

  // 3. smooth rates
  {
    bool ok = true;
    std::string detail;
    for (Method method : {Method::dpg, Method::dpg_lsq}) {
      const Run r = run(61, method, Refinement::uniform, 5);
      const double rate = mean_tail(eoc(r.result.rows, get_total, true), 3);
      ok = ok && rate >= 0.85 && rate <= 1.15;
      detail += format("%s eoc_h=%.4f ", to_string(method).c_str(), rate);
    }
    report(3, "smooth-rates", ok, detail + "(range [0.85, 1.15])");
  }

  // 4. DPG and DPG-LSQ coincide for mesh-aligned piecewise-constant A
  {
    double worst_coeff = 0., worst_entry = 0.;
    for (int problem : {61, 62, 64}) {
      const ProblemSpec p = problem_by_id(problem);
      Mesh mesh = initial_square_mesh();
      for (int level = 0; level < 5; ++level) {
        if (level > 0) {
          mesh = uniform_refine(mesh);
        }
        const Solution a = solve(p, mesh, {Method::dpg, p.trial, 0});
        const Solution b = solve(p, mesh, {Method::dpg_lsq, p.trial, 0});
        const Eigen::VectorXd xa = coefficients(a), xb = coefficients(b);
        worst_coeff = std::max(worst_coeff, (xa - xb).norm() / xa.norm());
        if (level < 4) {
          const GlobalSystem ga = assemble_system(p, mesh, {Method::dpg, p.trial, 0});
          const GlobalSystem gb = assemble_system(p, mesh, {Method::dpg_lsq, p.trial, 0});
          const Eigen::SparseMatrix<double> d = ga.stiffness - gb.stiffness;
          double diff = 0., scale = 0.;
          for (int k = 0; k < d.nonZeros(); ++k) {
            diff = std::max(diff, std::abs(d.valuePtr()[k]));
          }
          for (int k = 0; k < ga.stiffness.nonZeros(); ++k) {
            scale = std::max(scale, std::abs(ga.stiffness.valuePtr()[k]));
          }
          worst_entry = std::max(worst_entry, diff / scale);
        }
      }
    }
    report(4, "method-equivalence", worst_coeff <= 1e-8 && worst_entry <= 1e-11,
           format("max rel coefficient diff=%.2e (tol 1e-8), max entrywise stiffness diff/max entry=%.2e (tol 1e-11)",
                  worst_coeff, worst_entry));
  }

  // 5. estimator equivalence
  {
    double worst = 0.;
    std::string worst_run;
    for (const Run & r : runs) {
      if (r.problem != 61 && r.problem != 62) {
        continue;
      }
      double lo = std::numeric_limits<double>::infinity(), hi = 0.;
      for (const StudyRow & row : r.result.rows) {
        const double q = row.eta_total / row.err_total();
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
      if (hi / lo > worst) {
        worst = hi / lo;
        worst_run = run_name(r) + format(" eta/err in [%.3f, %.3f]", lo, hi);
      }
    }
    report(5, "estimator-equivalence", worst <= 4.,
           format("worst max/min=%.3f on %s (tol 4)", worst, worst_run.c_str()));
  }

  // 6. singular problem
  {
    bool ok = true;
    std::string detail;
    for (const Run & r : runs) {
      if (r.problem != 62) {
        continue;
      }
      if (r.refinement == Refinement::uniform) {
        const double rate = mean_tail(eoc(r.result.rows, get_m, true), 3);
        ok = ok && rate >= 0.55 && rate <= 0.80;
        detail += format("%s uniform eoc_M_h=%.3f; ", to_string(r.method).c_str(), rate);
      } else {
        const double rate = mean_tail(eoc(r.result.rows, get_total, false), 3);
        double near = 1.;
        for (size_t l = 3; l < r.marked_near_origin.size(); ++l) {
          if (std::isfinite(r.marked_near_origin[l])) {
            near = std::min(near, r.marked_near_origin[l]);
          }
        }
        ok = ok && rate >= 0.85 && near >= 0.5;
        detail += format("%s adaptive eoc_ndof=%.3f min marked-near-origin=%.2f; ", to_string(r.method).c_str(),
                         rate, near);
      }
    }
    report(6, "singular-problem", ok, detail + "(uniform [0.55, 0.80], adaptive >= 0.85, fraction >= 0.5)");
  }

  // 7. Fortin moments
  {
    std::mt19937 rng(2024);
    double worst = 0., ratio = 0.;
    int failed = 0;
    for (int t = 0; t < 20; ++t) {
      const auto tri = test::random_triangle(rng);
      for (int k = 0; k < 50; ++k) {
        try {
          const FortinCheck c = verify_fortin_moments(tri, test::random_symmat(rng, 6));
          worst = std::max(worst, c.max_residual);
          ratio = std::max(ratio, c.bound_ratio);
        } catch (const std::exception &) {
          ++failed;
        }
      }
    }
    report(7, "fortin-moments", failed == 0 && worst <= 1e-10 && std::isfinite(ratio),
           format("1000 projections, infeasible=%d, max residual=%.2e (tol 1e-10), max bound ratio=%.3f", failed,
                  worst, ratio));
  }

  // 8. trace machinery
  {
    std::mt19937 rng(77);
    double worst = 0.;
    for (int k = 0; k < 100; ++k) {
      const auto tri = test::random_triangle(rng);
      const Polynomial u = test::random_polynomial(rng, 1 + k % 4);
      const SymMatPoly q = test::random_symmat(rng, 1 + (k / 4) % 4);
      const double b = boundary_pairing([&](const Point & x) { return u(x); },
                                        [&](const Point & x) { return u.gradient(x); }, q, tri);
      const double v = volume_pairing(u, q, tri);
      worst = std::max(worst, std::abs(b - v) / std::max({1., std::abs(b), std::abs(v)}));
    }
    const Polynomial bubble = (Polynomial::constant(1.) - Polynomial::monomial(2, 0)) *
                              (Polynomial::constant(1.) - Polynomial::monomial(0, 2));
    const SymMatPoly q{bubble, Polynomial(), bubble};
    double annihilation = 0.;
    Mesh mesh = initial_square_mesh();
    for (int level = 0; level < 4; ++level) {
      if (level > 0) {
        mesh = uniform_refine(mesh);
      }
      Eigen::VectorXd global = Eigen::VectorXd::Zero(3 * mesh.num_vertices());
      for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const auto c = mesh.corners(t);
        for (int i = 0; i < 9; ++i) {
          LocalTraceDofs d{};
          d[i] = 1.;
          global[3 * mesh.triangles()[t].vertices[i / 3] + i % 3] += trace_pairing_element(d, q, c);
        }
      }
      const TraceSpace space(mesh);
      for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
        const Eigen::Vector3d slot = space.frame(v).transpose() * global.segment<3>(3 * v);
        for (int i = 0; i < 3; ++i) {
          if (space.is_free(3 * v + i)) {
            annihilation = std::max(annihilation, std::abs(slot[i]));
          }
        }
      }
    }
    report(8, "trace-machinery", worst <= 1e-12 && annihilation <= 1e-11,
           format("boundary vs volume max rel diff=%.2e (tol 1e-12), annihilation max=%.2e (tol 1e-11)", worst,
                  annihilation));
  }

  // 9. augmented trial space
  {
    const Run standard = run(61, Method::dpg, Refinement::uniform, 5, TrialKind::standard);
    const Run augmented = run(61, Method::dpg, Refinement::uniform, 5, TrialKind::augmented);
    const double rs = mean_tail(eoc(standard.result.rows, get_u, true), 3);
    const double ra = mean_tail(eoc(augmented.result.rows, get_u, true), 3);
    report(9, "augmented-space", ra >= rs + 0.5,
           format("eoc_u_h standard=%.3f augmented=%.3f gain=%.3f (tol 0.5)", rs, ra, ra - rs));
  }

  // 10. trivial cases
  {
    const ProblemSpec zero = zero_load_problem();
    const Mesh mesh = uniform_refine(initial_square_mesh());
    double field = 0., eta = 0.;
    for (Method method : {Method::dpg, Method::dpg_lsq}) {
      const Solution s = solve(zero, mesh, {method, TrialKind::standard, 0});
      field = std::max(field, coefficients(s).cwiseAbs().maxCoeff());
      eta = std::max(eta, estimate(s, zero, mesh).total());
    }
    const Mesh same = refine_nvb(mesh, std::vector<int>{});
    bool identical = same.num_triangles() == mesh.num_triangles() && same.num_vertices() == mesh.num_vertices();
    for (size_t v = 0; identical && v < mesh.num_vertices(); ++v) {
      identical = same.point(static_cast<int>(v)) == mesh.point(static_cast<int>(v));
    }
    for (size_t t = 0; identical && t < mesh.num_triangles(); ++t) {
      identical = same.triangles()[t].vertices == mesh.triangles()[t].vertices &&
                  same.triangles()[t].refinement_edge == mesh.triangles()[t].refinement_edge;
    }
    const Solution s = solve(problem_62(), mesh, {});
    const Indicators ind = estimate(s, problem_62(), mesh);
    const size_t all = doerfler_mark(ind, 1.).size();
    report(10, "trivial-cases", field == 0. && eta == 0. && identical && all == mesh.num_triangles(),
           format("f=0: max |coefficient|=%.1e eta^2=%.1e; empty marking identical=%s; theta=1 marks %zu/%zu", field,
                  eta, identical ? "yes" : "no", all, mesh.num_triangles()));
  }

  std::printf("%d of 10 criteria failed, %.1fs\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
