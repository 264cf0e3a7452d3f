#include "dpg/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace dpg
{
  double sign(double x) { return x > 0. ? 1. : (x < 0. ? -1. : 0.); }

  double smooth_factor(double t) { return t * std::exp(1. - std::abs(t)) - t; }

  double smooth_factor_d1(double t) { return std::exp(1. - std::abs(t)) * (1. - std::abs(t)) - 1.; }

  double smooth_factor_d2(double t) { return sign(t) * std::exp(1. - std::abs(t)) * (std::abs(t) - 2.); }

  CoefficientField quadrant_coefficient()
  {
    return {[](const Point & p) {
              const double s = sign(p.x() * p.y());
              Eigen::Matrix2d a;
              a << 2., s, s, 2.;
              return a;
            },
            0};
  }

  namespace
  {
    ScalarFunction manufactured_load(const CoefficientField & a, const MatrixFunction & hessian)
    {
      return [a, hessian](const Point & p) { return (a.A(p).array() * hessian(p).array()).sum(); };
    }
  } // namespace

  ProblemSpec problem_61()
  {
    ExactSolution exact;
    exact.u = [](const Point & p) { return smooth_factor(p.x()) * smooth_factor(p.y()); };
    exact.gradient = [](const Point & p) {
      return Eigen::Vector2d(smooth_factor_d1(p.x()) * smooth_factor(p.y()),
                             smooth_factor(p.x()) * smooth_factor_d1(p.y()));
    };
    exact.hessian = [](const Point & p) {
      const double xy = smooth_factor_d1(p.x()) * smooth_factor_d1(p.y());
      Eigen::Matrix2d h;
      h << smooth_factor_d2(p.x()) * smooth_factor(p.y()), xy, xy, smooth_factor(p.x()) * smooth_factor_d2(p.y());
      return h;
    };
    ProblemSpec spec;
    spec.name = "61";
    spec.coefficient = quadrant_coefficient();
    spec.f = manufactured_load(spec.coefficient, exact.hessian);
    spec.exact = exact;
    spec.boundary = BoundaryKind::homogeneous;
    spec.trial = TrialKind::standard;
    spec.notes = "smooth solution; A piecewise constant and aligned with the mesh";
    return spec;
  }

  ProblemSpec problem_62()
  {
    ExactSolution exact;
    exact.u = [](const Point & p) { return std::pow(p.squaredNorm(), 5. / 6.); };
    exact.gradient = [](const Point & p) -> Eigen::Vector2d {
      const double r2 = p.squaredNorm();
      if (r2 == 0.) {
        return Eigen::Vector2d::Zero();
      }
      return (5. / 3.) * std::pow(r2, -1. / 6.) * p;
    };
    exact.hessian = [](const Point & p) {
      const double r2 = p.squaredNorm();
      const double a = (5. / 3.) * std::pow(r2, -1. / 6.);
      const double b = -(5. / 9.) * std::pow(r2, -7. / 6.);
      Eigen::Matrix2d h = a * Eigen::Matrix2d::Identity() + b * p * p.transpose();
      return h;
    };
    ProblemSpec spec;
    spec.name = "62";
    spec.coefficient = quadrant_coefficient();
    spec.f = manufactured_load(spec.coefficient, exact.hessian);
    spec.exact = exact;
    spec.boundary = BoundaryKind::lift_from_exact;
    spec.trial = TrialKind::standard;
    spec.notes = "u in H^{8/3-delta}; singular Hessian at the origin; inhomogeneous boundary data";
    return spec;
  }

  double ring_function(double r)
  {
    if (r < 1. / 3.) {
      return 1.;
    }
    return r < 2. / 3. ? -1. : 0.;
  }

  ProblemSpec problem_63()
  {
    ProblemSpec spec;
    spec.name = "63";
    spec.coefficient = {[](const Point & p) {
                          const double off = ring_function(p.norm()) * sign(p.x() * p.y());
                          Eigen::Matrix2d a;
                          a << 2., off, off, 2.;
                          return a;
                        },
                        std::nullopt};
    spec.f = [](const Point &) { return 1.; };
    spec.boundary = BoundaryKind::homogeneous;
    spec.trial = TrialKind::standard;
    spec.notes = "no exact solution; coefficient rings at r = 1/3 and r = 2/3 are not aligned with the mesh";
    return spec;
  }

  ProblemSpec problem_64()
  {
    ProblemSpec spec = problem_61();
    spec.name = "64";
    spec.trial = TrialKind::augmented;
    spec.notes = "data of problem 61 with the augmented trial space (u in P^1)";
    return spec;
  }

  ProblemSpec problem_by_id(int id)
  {
    switch (id) {
    case 61: return problem_61();
    case 62: return problem_62();
    case 63: return problem_63();
    case 64: return problem_64();
    default: throw std::invalid_argument("unknown problem id " + std::to_string(id) + " (expected 61, 62, 63 or 64)");
    }
  }

} // namespace dpg
