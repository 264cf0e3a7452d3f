#include "dpg/spaces.hpp"

#include <stdexcept>

namespace dpg
{
  Eigen::Matrix<double, 3, 9> edge_trace_rows(const std::array<Point, 3> & corners, int edge, double s)
  {
    const int ia = edge;
    const int ib = (edge + 1) % 3;
    const Point & a = corners[ia];
    const Point & b = corners[ib];
    const double len = (b - a).norm();
    if (s < -1e-12 * len || s > len * (1. + 1e-12)) {
      throw std::out_of_range("edge_trace_rows: arclength outside the edge");
    }
    const Eigen::Vector2d t = (b - a) / len;
    const Eigen::Vector2d n(t.y(), -t.x());
    const double x = s / len;

    // cubic Hermite on [0, len]
    const double h00 = 2 * x * x * x - 3 * x * x + 1;
    const double h10 = (x * x * x - 2 * x * x + x) * len;
    const double h01 = -2 * x * x * x + 3 * x * x;
    const double h11 = (x * x * x - x * x) * len;
    // d/ds
    const double d00 = (6 * x * x - 6 * x) / len;
    const double d10 = 3 * x * x - 4 * x + 1;
    const double d01 = (-6 * x * x + 6 * x) / len;
    const double d11 = 3 * x * x - 2 * x;

    Eigen::Matrix<double, 3, 9> rows = Eigen::Matrix<double, 3, 9>::Zero();
    // value
    rows(0, 3 * ia) = h00;
    rows(0, 3 * ia + 1) = h10 * t.x();
    rows(0, 3 * ia + 2) = h10 * t.y();
    rows(0, 3 * ib) = h01;
    rows(0, 3 * ib + 1) = h11 * t.x();
    rows(0, 3 * ib + 2) = h11 * t.y();
    // normal derivative
    rows(1, 3 * ia + 1) = (1. - x) * n.x();
    rows(1, 3 * ia + 2) = (1. - x) * n.y();
    rows(1, 3 * ib + 1) = x * n.x();
    rows(1, 3 * ib + 2) = x * n.y();
    // tangential derivative
    rows(2, 3 * ia) = d00;
    rows(2, 3 * ia + 1) = d10 * t.x();
    rows(2, 3 * ia + 2) = d10 * t.y();
    rows(2, 3 * ib) = d01;
    rows(2, 3 * ib + 1) = d11 * t.x();
    rows(2, 3 * ib + 2) = d11 * t.y();
    return rows;
  }

  EdgeTrace trace_edge_values(const LocalTraceDofs & dofs, const std::array<Point, 3> & corners, int edge,
                              double s)
  {
    const Eigen::Map<const Eigen::Matrix<double, 9, 1>> x(dofs.data());
    const Eigen::Vector3d r = edge_trace_rows(corners, edge, s) * x;
    return {r[0], r[1], r[2]};
  }

  Eigen::VectorXd interpolate_trace(const std::function<double(const Point &)> & u,
                                    const std::function<Eigen::Vector2d(const Point &)> & grad,
                                    const Mesh & mesh)
  {
    Eigen::VectorXd x(3 * mesh.num_vertices());
    for (size_t v = 0; v < mesh.num_vertices(); ++v) {
      const Point & p = mesh.point(static_cast<int>(v));
      const Eigen::Vector2d g = grad(p);
      x[3 * v] = u(p);
      x[3 * v + 1] = g.x();
      x[3 * v + 2] = g.y();
    }
    return x;
  }

  TraceSpace::TraceSpace(const Mesh & mesh)
  {
    const size_t nv = mesh.num_vertices();
    m_frames.assign(nv, Eigen::Matrix3d::Identity());
    m_free_index.assign(3 * nv, -1);

    // boundary tangent of straight vertices, oriented counter-clockwise around the domain
    std::vector<Eigen::Vector2d> tangent(nv, Eigen::Vector2d::Zero());
    const auto & tris = mesh.triangles();
    for (size_t t = 0; t < tris.size(); ++t) {
      const auto & te = mesh.triangle_edges(static_cast<int>(t));
      for (int k = 0; k < 3; ++k) {
        if (!mesh.edges()[te[k]].on_boundary()) {
          continue;
        }
        const int a = tris[t].vertices[(k + 1) % 3];
        const int b = tris[t].vertices[(k + 2) % 3];
        const Eigen::Vector2d dir = (mesh.point(b) - mesh.point(a)).normalized();
        tangent[a] = dir;
        tangent[b] = dir;
      }
    }

    std::vector<char> free_slot(3 * nv, 0);
    for (size_t v = 0; v < nv; ++v) {
      switch (mesh.vertices()[v].boundary_class) {
      case BoundaryClass::interior:
        free_slot[3 * v] = free_slot[3 * v + 1] = free_slot[3 * v + 2] = 1;
        break;
      case BoundaryClass::straight: {
        const Eigen::Vector2d t = tangent[v];
        if (t.squaredNorm() == 0.) {
          throw std::logic_error("TraceSpace: straight vertex without boundary tangent");
        }
        const Eigen::Vector2d n(t.y(), -t.x());
        Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
        r(0, 0) = 1.;
        r.block<2, 1>(1, 1) = t;
        r.block<2, 1>(1, 2) = n;
        m_frames[v] = r;
        free_slot[3 * v + 2] = 1;
        break;
      }
      case BoundaryClass::corner:
        break;
      }
    }
    for (size_t s = 0; s < free_slot.size(); ++s) {
      if (free_slot[s]) {
        m_free_index[s] = m_num_free++;
      }
    }
  }

  Eigen::VectorXd TraceSpace::to_cartesian(const Eigen::VectorXd & slots) const
  {
    Eigen::VectorXd out(slots.size());
    for (size_t v = 0; v < m_frames.size(); ++v) {
      out.segment<3>(3 * v) = m_frames[v] * slots.segment<3>(3 * v);
    }
    return out;
  }

  Eigen::VectorXd TraceSpace::to_slots(const Eigen::VectorXd & cartesian) const
  {
    Eigen::VectorXd out(cartesian.size());
    for (size_t v = 0; v < m_frames.size(); ++v) {
      out.segment<3>(3 * v) = m_frames[v].transpose() * cartesian.segment<3>(3 * v);
    }
    return out;
  }

  Eigen::VectorXd TraceSpace::combine(const Eigen::VectorXd & free, const Eigen::VectorXd & fixed_slots) const
  {
    Eigen::VectorXd out = fixed_slots;
    for (int s = 0; s < num_slots(); ++s) {
      if (m_free_index[s] >= 0) {
        out[s] = free[m_free_index[s]];
      }
    }
    return out;
  }

  std::vector<std::pair<int, Eigen::Vector3d>> TraceSpace::constraint_rows() const
  {
    std::vector<std::pair<int, Eigen::Vector3d>> rows;
    for (size_t v = 0; v < m_frames.size(); ++v) {
      for (int k = 0; k < 3; ++k) {
        if (m_free_index[3 * v + k] < 0) {
          // slot k of vertex v, as a functional on the Cartesian DOFs
          rows.emplace_back(static_cast<int>(v), m_frames[v].col(k));
        }
      }
    }
    return rows;
  }

} // namespace dpg
