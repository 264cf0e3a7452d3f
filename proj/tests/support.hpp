#ifndef DPG_TEST_SUPPORT_HPP
#define DPG_TEST_SUPPORT_HPP

#include <array>
#include <cmath>
#include <random>

#include "dpg/mesh.hpp"
#include "dpg/polyspace.hpp"

namespace dpg::test
{
  inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1., std::max(std::abs(a), std::abs(b))); }

  inline Polynomial random_polynomial(std::mt19937 & rng, int degree)
  {
    std::uniform_real_distribution<double> d(-1., 1.);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
    for (int i = 0; i <= degree; ++i) {
      for (int j = 0; i + j <= degree; ++j) {
        c(i, j) = d(rng);
      }
    }
    return Polynomial(c);
  }

  inline SymMatPoly random_symmat(std::mt19937 & rng, int degree)
  {
    return {random_polynomial(rng, degree), random_polynomial(rng, degree), random_polynomial(rng, degree)};
  }

  /// Triangle with minimum angle at least ~20 degrees inside [-1, 1]^2, counter-clockwise.
  inline std::array<Point, 3> random_triangle(std::mt19937 & rng)
  {
    std::uniform_real_distribution<double> d(-1., 1.);
    for (;;) {
      std::array<Point, 3> c{Point(d(rng), d(rng)), Point(d(rng), d(rng)), Point(d(rng), d(rng))};
      const double cross = (c[1] - c[0]).x() * (c[2] - c[0]).y() - (c[1] - c[0]).y() * (c[2] - c[0]).x();
      if (cross < 0.) {
        std::swap(c[1], c[2]);
      }
      double min_angle = M_PI;
      for (int k = 0; k < 3; ++k) {
        const Eigen::Vector2d a = c[(k + 1) % 3] - c[k];
        const Eigen::Vector2d b = c[(k + 2) % 3] - c[k];
        min_angle = std::min(min_angle, std::acos(a.dot(b) / (a.norm() * b.norm())));
      }
      if (min_angle > 20. * M_PI / 180. && std::abs(cross) > 0.05) {
        return c;
      }
    }
  }

  inline std::array<Point, 3> reference_triangle() { return {Point(0., 0.), Point(1., 0.), Point(0., 1.)}; }

} // namespace dpg::test

#endif
