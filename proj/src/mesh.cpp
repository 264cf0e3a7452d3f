#include "dpg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace dpg
{
  namespace
  {
    constexpr double collinear_tolerance = 1e-12;

    double cross(const Point & a, const Point & b) { return a.x() * b.y() - a.y() * b.x(); }

    double signed_area(const Point & a, const Point & b, const Point & c)
    {
      return 0.5 * cross(b - a, c - a);
    }

    std::uint64_t edge_key(int a, int b)
    {
      const auto lo = static_cast<std::uint64_t>(std::min(a, b));
      const auto hi = static_cast<std::uint64_t>(std::max(a, b));
      return (lo << 32) | hi;
    }

    /// Rotates (a,b,c) so that (v0,v1) is the longest edge.
    std::array<int, 3> longest_edge_first(const std::vector<Point> & coords, std::array<int, 3> v)
    {
      int best = 2; // local edge opposite vertex k
      double best_len = -1.;
      for (int k = 0; k < 3; ++k) {
        const double len = (coords[v[(k + 1) % 3]] - coords[v[(k + 2) % 3]]).norm();
        if (len > best_len * (1. + 1e-12)) {
          best_len = len;
          best = k;
        }
      }
      // edge opposite `best` must become (v0, v1), i.e. `best` moves to position 2
      const int shift = (best + 1) % 3;
      return {v[shift], v[(shift + 1) % 3], v[(shift + 2) % 3]};
    }
  } // namespace

  std::string to_string(BoundaryClass c)
  {
    switch (c) {
    case BoundaryClass::interior:
      return "interior";
    case BoundaryClass::corner:
      return "corner";
    case BoundaryClass::straight:
      return "straight";
    }
    return "unknown";
  }

  Mesh::Mesh(std::vector<Point> coords, const std::vector<std::array<int, 3>> & triangles)
  {
    std::vector<Triangle> normalized;
    normalized.reserve(triangles.size());
    for (auto v : triangles) {
      for (int k = 0; k < 3; ++k) {
        if (v[k] < 0 || static_cast<size_t>(v[k]) >= coords.size()) {
          throw std::invalid_argument("Mesh: triangle references unknown vertex");
        }
      }
      const double a = signed_area(coords[v[0]], coords[v[1]], coords[v[2]]);
      if (std::abs(a) <= 0.) {
        throw std::invalid_argument("Mesh: degenerate triangle");
      }
      if (a < 0.) {
        std::swap(v[1], v[2]);
      }
      normalized.push_back(Triangle{longest_edge_first(coords, v), 2, 0});
    }
    *this = from_normalized(std::move(coords), std::move(normalized));
  }

  Mesh Mesh::from_normalized(std::vector<Point> coords, std::vector<Triangle> triangles)
  {
    Mesh mesh;
    mesh.m_vertices.reserve(coords.size());
    for (auto & p : coords) {
      mesh.m_vertices.push_back(Vertex{p, BoundaryClass::interior});
    }
    mesh.m_triangles = std::move(triangles);
    mesh.build_edges();
    mesh.classify_boundary();
    return mesh;
  }

  void Mesh::build_edges()
  {
    std::unordered_map<std::uint64_t, int> index;
    index.reserve(3 * m_triangles.size());
    m_edges.clear();
    m_triangle_edges.assign(m_triangles.size(), {-1, -1, -1});
    for (size_t t = 0; t < m_triangles.size(); ++t) {
      const auto & v = m_triangles[t].vertices;
      for (int k = 0; k < 3; ++k) {
        const int a = v[(k + 1) % 3];
        const int b = v[(k + 2) % 3];
        auto [it, inserted] = index.try_emplace(edge_key(a, b), static_cast<int>(m_edges.size()));
        if (inserted) {
          Edge e;
          e.vertices = {std::min(a, b), std::max(a, b)};
          e.triangles = {static_cast<int>(t), -1};
          m_edges.push_back(e);
        } else {
          Edge & e = m_edges[it->second];
          if (e.triangles[1] >= 0) {
            throw std::invalid_argument("Mesh: edge shared by more than two triangles");
          }
          e.triangles[1] = static_cast<int>(t);
        }
        m_triangle_edges[t][k] = it->second;
      }
    }
  }

  void Mesh::classify_boundary()
  {
    // boundary neighbours of every boundary vertex
    std::vector<std::array<int, 2>> nbr(m_vertices.size(), {-1, -1});
    for (const auto & e : m_edges) {
      if (!e.on_boundary()) {
        continue;
      }
      for (int s = 0; s < 2; ++s) {
        auto & slot = nbr[e.vertices[s]];
        (slot[0] < 0 ? slot[0] : slot[1]) = e.vertices[1 - s];
      }
    }
    for (size_t v = 0; v < m_vertices.size(); ++v) {
      if (nbr[v][0] < 0) {
        m_vertices[v].boundary_class = BoundaryClass::interior;
        continue;
      }
      const Point d1 = m_vertices[nbr[v][0]].coords - m_vertices[v].coords;
      const Point d2 = m_vertices[nbr[v][1]].coords - m_vertices[v].coords;
      const double sine = cross(d1, d2) / (d1.norm() * d2.norm());
      const bool straight = std::abs(sine) <= collinear_tolerance && d1.dot(d2) < 0.;
      m_vertices[v].boundary_class = straight ? BoundaryClass::straight : BoundaryClass::corner;
    }
  }

  std::array<Point, 3> Mesh::corners(int t) const
  {
    const auto & v = m_triangles[t].vertices;
    return {point(v[0]), point(v[1]), point(v[2])};
  }

  double Mesh::area(int t) const
  {
    const auto c = corners(t);
    return signed_area(c[0], c[1], c[2]);
  }

  double Mesh::diameter(int t) const
  {
    const auto c = corners(t);
    return std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
  }

  double Mesh::max_diameter() const
  {
    double h = 0.;
    for (size_t t = 0; t < m_triangles.size(); ++t) {
      h = std::max(h, diameter(static_cast<int>(t)));
    }
    return h;
  }

  double Mesh::total_area() const
  {
    double a = 0.;
    for (size_t t = 0; t < m_triangles.size(); ++t) {
      a += area(static_cast<int>(t));
    }
    return a;
  }

  double Mesh::min_angle() const
  {
    double angle = std::numbers::pi;
    for (size_t t = 0; t < m_triangles.size(); ++t) {
      const auto c = corners(static_cast<int>(t));
      for (int k = 0; k < 3; ++k) {
        const Point a = c[(k + 1) % 3] - c[k];
        const Point b = c[(k + 2) % 3] - c[k];
        angle = std::min(angle, std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1., 1.)));
      }
    }
    return angle;
  }

  bool Mesh::is_conforming(std::string * reason) const
  {
    auto fail = [reason](std::string why) {
      if (reason) {
        *reason = std::move(why);
      }
      return false;
    };
    for (size_t t = 0; t < m_triangles.size(); ++t) {
      if (area(static_cast<int>(t)) <= 0.) {
        return fail("triangle " + std::to_string(t) + " is not positively oriented");
      }
    }
    // every directed edge of a triangle must be matched by the reverse edge of the neighbour
    std::map<std::pair<int, int>, int> directed;
    for (size_t t = 0; t < m_triangles.size(); ++t) {
      const auto & v = m_triangles[t].vertices;
      for (int k = 0; k < 3; ++k) {
        if (!directed.emplace(std::make_pair(v[k], v[(k + 1) % 3]), static_cast<int>(t)).second) {
          return fail("directed edge used twice");
        }
      }
    }
    // boundary edges must form closed loops: every vertex has in-degree == out-degree
    std::vector<int> balance(m_vertices.size(), 0);
    for (const auto & [e, t] : directed) {
      if (directed.count({e.second, e.first}) == 0) {
        ++balance[e.first];
        --balance[e.second];
      }
    }
    for (size_t v = 0; v < balance.size(); ++v) {
      if (balance[v] != 0) {
        return fail("boundary does not close at vertex " + std::to_string(v));
      }
    }
    // no vertex may lie in the interior of a boundary edge (hanging node)
    std::vector<int> degree(m_vertices.size(), 0);
    for (const auto & tri : m_triangles) {
      for (int v : tri.vertices) {
        ++degree[v];
      }
    }
    for (size_t v = 0; v < m_vertices.size(); ++v) {
      if (degree[v] == 0) {
        return fail("vertex " + std::to_string(v) + " is not used");
      }
    }
    for (const auto & e : m_edges) {
      if (!e.on_boundary()) {
        continue;
      }
      const Point & a = point(e.vertices[0]);
      const Point & b = point(e.vertices[1]);
      for (const auto & f : m_edges) {
        if (!f.on_boundary()) {
          continue;
        }
        for (int s = 0; s < 2; ++s) {
          const int w = f.vertices[s];
          if (w == e.vertices[0] || w == e.vertices[1]) {
            continue;
          }
          const Point & p = point(w);
          const double len = (b - a).norm();
          const double tpar = (p - a).dot(b - a) / (len * len);
          if (tpar > 1e-12 && tpar < 1. - 1e-12 && std::abs(cross(b - a, p - a)) <= 1e-12 * len * len) {
            return fail("hanging node " + std::to_string(w));
          }
        }
      }
    }
    return true;
  }

  void Mesh::write(std::ostream & os) const
  {
    const auto old_precision = os.precision(17);
    for (const auto & v : m_vertices) {
      os << "v " << v.coords.x() << ' ' << v.coords.y() << ' ' << to_string(v.boundary_class) << '\n';
    }
    for (const auto & t : m_triangles) {
      os << "t " << t.vertices[0] << ' ' << t.vertices[1] << ' ' << t.vertices[2] << ' '
         << t.refinement_edge << '\n';
    }
    os.precision(old_precision);
  }

  Mesh initial_square_mesh()
  {
    std::vector<Point> coords;
    // 3x3 grid of square corners, then the 4 square centres
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 3; ++i) {
        coords.emplace_back(-1. + i, -1. + j);
      }
    }
    std::vector<std::array<int, 3>> triangles;
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i) {
        const int c = static_cast<int>(coords.size());
        coords.emplace_back(-0.5 + i, -0.5 + j);
        const int ll = 3 * j + i;
        const int lr = ll + 1;
        const int ur = ll + 4;
        const int ul = ll + 3;
        triangles.push_back({ll, lr, c});
        triangles.push_back({lr, ur, c});
        triangles.push_back({ur, ul, c});
        triangles.push_back({ul, ll, c});
      }
    }
    return Mesh(std::move(coords), triangles);
  }

  Mesh refine_nvb(const Mesh & mesh, std::span<const int> marked)
  {
    const auto & tris = mesh.triangles();
    const auto & edges = mesh.edges();
    std::vector<char> edge_marked(edges.size(), 0);
    for (int t : marked) {
      if (t < 0 || static_cast<size_t>(t) >= tris.size()) {
        throw std::out_of_range("refine_nvb: unknown triangle id " + std::to_string(t));
      }
      for (int e : mesh.triangle_edges(t)) {
        edge_marked[e] = 1;
      }
    }
    if (marked.empty()) {
      return mesh;
    }

    // closure: a triangle with any marked edge needs its refinement edge marked
    for (bool changed = true; changed;) {
      changed = false;
      for (size_t t = 0; t < tris.size(); ++t) {
        const auto & te = mesh.triangle_edges(static_cast<int>(t));
        const int ref = te[2];
        if (!edge_marked[ref] && (edge_marked[te[0]] || edge_marked[te[1]])) {
          edge_marked[ref] = 1;
          changed = true;
        }
      }
    }

    std::vector<Point> coords;
    coords.reserve(mesh.num_vertices() + edges.size());
    for (const auto & v : mesh.vertices()) {
      coords.push_back(v.coords);
    }
    // midpoints, created in triangle/edge order so numbering is reproducible
    std::vector<int> midpoint(edges.size(), -1);
    for (size_t t = 0; t < tris.size(); ++t) {
      for (int k : {2, 1, 0}) {
        const int e = mesh.triangle_edges(static_cast<int>(t))[k];
        if (edge_marked[e] && midpoint[e] < 0) {
          midpoint[e] = static_cast<int>(coords.size());
          coords.push_back(0.5 * (coords[edges[e].vertices[0]] + coords[edges[e].vertices[1]]));
        }
      }
    }

    std::unordered_map<std::uint64_t, int> edge_index;
    edge_index.reserve(edges.size());
    for (size_t e = 0; e < edges.size(); ++e) {
      edge_index.emplace(edge_key(edges[e].vertices[0], edges[e].vertices[1]), static_cast<int>(e));
    }
    auto mid_of = [&](int a, int b) -> int {
      auto it = edge_index.find(edge_key(a, b));
      return it == edge_index.end() ? -1 : midpoint[it->second];
    };

    std::vector<Triangle> out;
    out.reserve(tris.size() + 4 * marked.size());
    // children of (a,b,c) with refinement edge (a,b): (c,a,m) and (b,c,m)
    auto bisect = [&](auto && self, const Triangle & tri) -> void {
      const auto [a, b, c] = tri.vertices;
      const int m = mid_of(a, b);
      if (m < 0) {
        out.push_back(tri);
        return;
      }
      self(self, Triangle{{c, a, m}, 2, tri.generation + 1});
      self(self, Triangle{{b, c, m}, 2, tri.generation + 1});
    };
    for (const auto & tri : tris) {
      bisect(bisect, tri);
    }
    return Mesh::from_normalized(std::move(coords), std::move(out));
  }

  Mesh uniform_refine(const Mesh & mesh)
  {
    std::vector<int> all(mesh.num_triangles());
    for (size_t t = 0; t < all.size(); ++t) {
      all[t] = static_cast<int>(t);
    }
    return refine_nvb(mesh, all);
  }

} // namespace dpg
