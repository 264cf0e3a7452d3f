#include "dpg/solver.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "dpg/lifting.hpp"

namespace dpg
{
  std::string to_string(Method m) { return m == Method::dpg ? "dpg" : "dpg-lsq"; }

  ElementSchur element_schur(const Eigen::MatrixXd & b, const Eigen::MatrixXd & g, const Eigen::VectorXd & f)
  {
    ElementSchur out;
    out.gram_factor.compute(g);
    if (out.gram_factor.info() != Eigen::Success) {
      throw std::runtime_error("element_schur: test Gram matrix is not positive definite");
    }
    const auto lower = out.gram_factor.matrixL();
    const Eigen::MatrixXd w = lower.solve(b);
    const Eigen::VectorXd z = lower.solve(f);
    out.stiffness.noalias() = w.transpose() * w;
    out.load.noalias() = w.transpose() * z;
    return out;
  }

  namespace
  {
    /// Geometry-only part of an element: the matrix-test block of the form.
    struct MatrixBlock
    {
      Eigen::MatrixXd c;         ///< 45 x trial
      Eigen::MatrixXd stiffness; ///< c' G^{-1} c
      Eigen::LLT<Eigen::MatrixXd> gram;
    };

    /// MatrixBlocks keyed by the exact edge vectors of the element (translation invariance of the
    /// centred, scaled bases). Bisection meshes repeat a handful of shapes per level.
    class MatrixBlockCache
    {
    public:
      explicit MatrixBlockCache(TrialLayout trial) : m_trial(trial) {}

      std::shared_ptr<const MatrixBlock> get(const std::array<Point, 3> & c)
      {
        const std::array<double, 4> key{c[1].x() - c[0].x(), c[1].y() - c[0].y(), c[2].x() - c[0].x(),
                                        c[2].y() - c[0].y()};
        if (auto it = m_blocks.find(key); it != m_blocks.end()) {
          return it->second;
        }
        auto block = std::make_shared<MatrixBlock>();
        const ElementForms forms(c, m_trial, TestLayout{0});
        block->c = forms.c();
        ElementSchur schur = element_schur(block->c, forms.matrix_gram(), Eigen::VectorXd::Zero(SymMatBasis::dimension));
        block->stiffness = std::move(schur.stiffness);
        block->gram = std::move(schur.gram_factor);
        if (m_blocks.size() < max_entries) {
          m_blocks.emplace(key, block);
        }
        return block;
      }

    private:
      static constexpr size_t max_entries = 2000;
      TrialLayout m_trial;
      std::map<std::array<double, 4>, std::shared_ptr<const MatrixBlock>> m_blocks;
    };

    struct LocalSystem
    {
      Eigen::MatrixXd stiffness;
      Eigen::VectorXd load;
    };

    LocalSystem local_system(const ProblemSpec & problem, const std::array<Point, 3> & corners,
                             const DiscretizationOptions & options, const TrialLayout & trial,
                             const MatrixBlock & block)
    {
      LocalSystem out{block.stiffness, Eigen::VectorXd::Zero(trial.size())};
      const int mo = trial.m_offset();
      if (options.method == Method::dpg) {
        const ScalarForms sf(corners, options.test_degree);
        const Eigen::LLT<Eigen::MatrixXd> gs(sf.gram());
        const Eigen::MatrixXd bs = sf.coupling(problem.coefficient);
        out.stiffness.block(mo, mo, 3, 3) += bs.transpose() * gs.solve(bs);
        out.load.segment(mo, 3) = bs.transpose() * gs.solve(sf.load(problem.f));
      } else {
        const ScalarForms sf(corners, 0);
        out.stiffness.block(mo, mo, 3, 3) += sf.lsq_coupling(problem.coefficient);
        out.load.segment(mo, 3) = sf.lsq_load(problem.coefficient, problem.f);
      }
      return out;
    }

    /// Local trial -> slot frame: identity on fields, vertex frames on the trace block.
    Eigen::MatrixXd slot_transform(const TrialLayout & trial, const TraceSpace & space, const Triangle & tri)
    {
      Eigen::MatrixXd p = Eigen::MatrixXd::Identity(trial.size(), trial.size());
      for (int k = 0; k < 3; ++k) {
        p.block<3, 3>(trial.trace_offset() + 3 * k, trial.trace_offset() + 3 * k) = space.frame(tri.vertices[k]);
      }
      return p;
    }

    void check_options(const DiscretizationOptions & options)
    {
      if (options.test_degree < 0 || options.test_degree > 6) {
        throw std::invalid_argument("test degree must be in [0, 6]");
      }
    }

    Eigen::VectorXd fixed_slots_for(const ProblemSpec & problem, const Mesh & mesh, const TraceSpace & space)
    {
      if (problem.boundary == BoundaryKind::lift_from_exact) {
        if (!problem.exact) {
          throw std::invalid_argument("problem " + problem.name + ": lifted boundary data needs an exact solution");
        }
        return lift_boundary_data(problem.exact->u, problem.exact->gradient, mesh, space);
      }
      return Eigen::VectorXd::Zero(space.num_slots());
    }
  } // namespace

  Eigen::VectorXd lift_boundary_data(const ScalarFunction & u, const GradientFunction & grad, const Mesh & mesh,
                                     const TraceSpace & space)
  {
    Eigen::VectorXd cart = Eigen::VectorXd::Zero(space.num_slots());
    for (size_t v = 0; v < mesh.num_vertices(); ++v) {
      if (mesh.vertices()[v].boundary_class == BoundaryClass::interior) {
        continue;
      }
      const Point & p = mesh.point(static_cast<int>(v));
      const Eigen::Vector2d g = grad(p);
      cart.segment<3>(3 * v) << u(p), g.x(), g.y();
      if (!cart.segment<3>(3 * v).allFinite()) {
        throw std::domain_error("lift_boundary_data: non-finite boundary data");
      }
    }
    Eigen::VectorXd slots = space.to_slots(cart);
    for (int s = 0; s < space.num_slots(); ++s) {
      if (space.is_free(s)) {
        slots[s] = 0.;
      }
    }
    return slots;
  }

  GlobalSystem assemble_system(const ProblemSpec & problem, const Mesh & mesh, const DiscretizationOptions & options)
  {
    check_options(options);
    const TraceSpace space(mesh);
    const TrialLayout trial{options.trial};
    const int nf = trial.num_fields();
    const int ne = static_cast<int>(mesh.num_triangles());
    MatrixBlockCache cache(trial);

    GlobalSystem sys;
    sys.num_field_dofs = nf * ne;
    sys.num_trace_dofs = space.num_free();
    sys.fixed_slots = fixed_slots_for(problem, mesh, space);
    sys.load = Eigen::VectorXd::Zero(sys.size());
    sys.lift_correction = Eigen::VectorXd::Zero(sys.size());

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(ne) * trial.size() * trial.size());
    std::vector<int> global(trial.size());
    std::vector<int> slot(trial.size());

    for (int t = 0; t < ne; ++t) {
      const Triangle & tri = mesh.triangles()[t];
      const auto corners = mesh.corners(t);
      const LocalSystem local = local_system(problem, corners, options, trial, *cache.get(corners));
      const Eigen::MatrixXd p = slot_transform(trial, space, tri);
      Eigen::MatrixXd s = p.transpose() * local.stiffness * p;
      s = 0.5 * (s + s.transpose());
      const Eigen::VectorXd g = p.transpose() * local.load;

      for (int i = 0; i < trial.size(); ++i) {
        if (i < nf) {
          global[i] = t * nf + i;
          slot[i] = -1;
        } else {
          const int k = (i - nf) / 3;
          slot[i] = 3 * tri.vertices[k] + (i - nf) % 3;
          const int fi = space.free_index(slot[i]);
          global[i] = fi >= 0 ? sys.num_field_dofs + fi : -1;
        }
      }
      for (int i = 0; i < trial.size(); ++i) {
        if (global[i] < 0) {
          continue;
        }
        sys.load[global[i]] += g[i];
        for (int j = 0; j < trial.size(); ++j) {
          if (global[j] >= 0) {
            triplets.emplace_back(global[i], global[j], s(i, j));
          } else {
            sys.lift_correction[global[i]] -= s(i, j) * sys.fixed_slots[slot[j]];
          }
        }
      }
    }
    sys.load += sys.lift_correction;
    sys.stiffness.resize(sys.size(), sys.size());
    sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    return sys;
  }

  Solution solve(const ProblemSpec & problem, const Mesh & mesh, const DiscretizationOptions & options)
  {
    const GlobalSystem sys = assemble_system(problem, mesh, options);
    const TraceSpace space(mesh);

    Solution sol;
    sol.method = options.method;
    sol.trial = TrialLayout{options.trial};
    sol.test = TestLayout{options.method == Method::dpg ? options.test_degree : 0};
    sol.num_dofs = sys.size();

    // symmetric Jacobi equilibration: D K D y = D b, x = D y
    const Eigen::VectorXd scale =
        sys.stiffness.diagonal().unaryExpr([](double d) { return d > 0. ? 1. / std::sqrt(d) : 1.; });
    const Eigen::SparseMatrix<double> k = scale.asDiagonal() * sys.stiffness * scale.asDiagonal();
    const Eigen::VectorXd b = scale.cwiseProduct(sys.load);

    Eigen::VectorXd y;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt(k);
    if (llt.info() == Eigen::Success) {
      y = llt.solve(b);
      for (int step = 0; step < 2; ++step) {
        y += llt.solve(b - k * y);
      }
      sol.cholesky_ok = true;
      sol.linear_solver = "sparse-cholesky";
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(k);
      cg.setTolerance(1e-12);
      cg.setMaxIterations(20 * sys.size());
      y = cg.solve(b);
      sol.cholesky_ok = false;
      sol.linear_solver = "cg-jacobi";
      if (cg.info() != Eigen::Success) {
        throw std::runtime_error("solve: stiffness matrix is not positive definite (" + std::to_string(sys.size()) +
                                 " DOFs, " + std::to_string(mesh.num_triangles()) +
                                 " elements) and CG did not converge");
      }
    }
    const double bnorm = b.norm();
    sol.relative_residual = bnorm > 0. ? (k * y - b).norm() / bnorm : (k * y).norm();
    const Eigen::VectorXd x = scale.cwiseProduct(y);

    const int ne = static_cast<int>(mesh.num_triangles());
    const TrialLayout & trial = sol.trial;
    const int nf = trial.num_fields();
    sol.u.resize(trial.num_u(), ne);
    sol.m.resize(3, ne);
    for (int t = 0; t < ne; ++t) {
      sol.u.col(t) = x.segment(t * nf, trial.num_u());
      sol.m.col(t) = x.segment(t * nf + trial.m_offset(), 3);
    }
    sol.trace = space.to_cartesian(space.combine(x.tail(sys.num_trace_dofs), sys.fixed_slots));

    // residual representers
    sol.representers.resize(ne);
    sol.residual_energy.resize(ne);
    MatrixBlockCache cache(trial);
    for (int t = 0; t < ne; ++t) {
      const auto corners = mesh.corners(t);
      const MatrixBlock & block = *cache.get(corners);
      Eigen::VectorXd xt(trial.size());
      xt.head(nf) = x.segment(t * nf, nf);
      const LocalTraceDofs tr = sol.local_trace(mesh, t);
      xt.tail(9) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(tr.data());
      const Eigen::VectorXd res_q = -(block.c * xt);
      const Eigen::VectorXd rep_q = block.gram.solve(res_q);
      double energy = res_q.dot(rep_q);
      if (options.method == Method::dpg) {
        const ScalarForms sf(corners, options.test_degree);
        const Eigen::VectorXd res_s =
            sf.load(problem.f) - sf.coupling(problem.coefficient) * xt.segment(trial.m_offset(), 3);
        const Eigen::VectorXd rep_s = Eigen::LLT<Eigen::MatrixXd>(sf.gram()).solve(res_s);
        energy += res_s.dot(rep_s);
        sol.representers[t].resize(rep_s.size() + rep_q.size());
        sol.representers[t] << rep_s, rep_q;
      } else {
        sol.representers[t] = rep_q;
      }
      sol.residual_energy[t] = std::max(0., energy);
    }
    return sol;
  }

  LocalTraceDofs Solution::local_trace(const Mesh & mesh, int t) const
  {
    LocalTraceDofs d{};
    const auto & v = mesh.triangles()[t].vertices;
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 3; ++j) {
        d[3 * k + j] = trace[3 * v[k] + j];
      }
    }
    return d;
  }

  double Solution::u_at(const Mesh & mesh, int t, const Point & x) const
  {
    const ScalarBasis basis(ElementFrame(mesh.corners(t)), trial.num_u() == 1 ? 0 : 1);
    Eigen::VectorXd phi(basis.size());
    basis.values(x, phi);
    return phi.dot(u.col(t));
  }

  double FieldErrors::total() const { return std::sqrt(u * u + m * m); }

  FieldErrors field_errors(const Solution & sol, const Mesh & mesh, const ScalarFunction & u,
                           const MatrixFunction & hessian)
  {
    const QuadratureRule & rule = default_triangle_rule();
    double eu = 0.;
    double em = 0.;
    for (size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto c = mesh.corners(static_cast<int>(t));
      const ElementFrame frame(c);
      const ScalarBasis basis(frame, sol.trial.num_u() == 1 ? 0 : 1);
      Eigen::VectorXd phi(basis.size());
      Eigen::Matrix2d mh;
      mh << sol.m(0, t), sol.m(1, t), sol.m(1, t), sol.m(2, t);
      const double jac = 2. * frame.area;
      for (size_t q = 0; q < rule.size(); ++q) {
        const Point x = map_to_triangle(c, rule.points[q]);
        basis.values(x, phi);
        const double du = u(x) - phi.dot(sol.u.col(t));
        eu += rule.weights[q] * jac * du * du;
        em += rule.weights[q] * jac * (hessian(x) - mh).squaredNorm();
      }
    }
    return {std::sqrt(eu), std::sqrt(em)};
  }

  void write_solution_csv(std::ostream & os, const Solution & sol, const Mesh & mesh)
  {
    const auto flags = os.flags();
    os << std::setprecision(17);
    os << "kind,id,values\n";
    for (size_t t = 0; t < mesh.num_triangles(); ++t) {
      os << "element," << t;
      if (sol.trial.num_u() == 1) {
        os << ',' << sol.u(0, t);
      } else {
        for (const Point & p : mesh.corners(static_cast<int>(t))) {
          os << ',' << sol.u_at(mesh, static_cast<int>(t), p);
        }
      }
      os << ',' << sol.m(0, t) << ',' << sol.m(1, t) << ',' << sol.m(2, t) << '\n';
    }
    for (size_t v = 0; v < mesh.num_vertices(); ++v) {
      os << "vertex," << v << ',' << sol.trace[3 * v] << ',' << sol.trace[3 * v + 1] << ',' << sol.trace[3 * v + 2]
         << '\n';
    }
    os.flags(flags);
  }

} // namespace dpg
