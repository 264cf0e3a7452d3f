#ifndef DPG_MESH_HPP
#define DPG_MESH_HPP

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dpg
{
  using Point = Eigen::Vector2d;

  /// Position of a vertex relative to the domain boundary.
  enum class BoundaryClass
  {
    interior,
    corner,   ///< boundary vertex whose adjacent boundary edges are not collinear
    straight  ///< boundary vertex on a straight piece of the boundary
  };

  std::string to_string(BoundaryClass c);

  struct Vertex
  {
    Point coords;
    BoundaryClass boundary_class = BoundaryClass::interior;
  };

  /// Triangle in newest-vertex-bisection normal form.
  /** Vertices are counter-clockwise. Local edge k is the edge opposite vertex k, so the
      refinement edge (v0, v1) has local index 2 and v2 is the newest vertex. */
  struct Triangle
  {
    std::array<int, 3> vertices{};
    int refinement_edge = 2;
    int generation = 0;
  };

  struct Edge
  {
    std::array<int, 2> vertices{};      ///< sorted ascending
    std::array<int, 2> triangles{-1, -1}; ///< second entry is -1 on the boundary

    bool on_boundary() const { return triangles[1] < 0; }
  };

  /// Conforming triangulation of a polygon.
  class Mesh
  {
  public:
    Mesh() = default;

    /// Builds a mesh from raw connectivity. Orientation is fixed to counter-clockwise and the
    /// refinement edge of every triangle is set to its longest edge.
    Mesh(std::vector<Point> coords, const std::vector<std::array<int, 3>> & triangles);

    /// Builds a mesh from triangles that are already in normal form (used by refinement).
    static Mesh from_normalized(std::vector<Point> coords, std::vector<Triangle> triangles);

    const std::vector<Vertex> & vertices() const { return m_vertices; }
    const std::vector<Triangle> & triangles() const { return m_triangles; }
    const std::vector<Edge> & edges() const { return m_edges; }

    size_t num_vertices() const { return m_vertices.size(); }
    size_t num_triangles() const { return m_triangles.size(); }

    const Point & point(int v) const { return m_vertices[v].coords; }
    std::array<Point, 3> corners(int t) const;
    double area(int t) const;
    double diameter(int t) const;
    double max_diameter() const;
    double total_area() const;
    /// Smallest interior angle over all triangles, in radians.
    double min_angle() const;

    /// Global edge indices of the three local edges (edge k opposite vertex k).
    const std::array<int, 3> & triangle_edges(int t) const { return m_triangle_edges[t]; }

    /// Edge-incidence audit: every edge has one or two neighbours, boundary edges close up,
    /// orientation is positive and interior edges are traversed in opposite directions.
    bool is_conforming(std::string * reason = nullptr) const;

    /// Plain-text dump: `v x y class` per vertex, `t i j k refedge` per triangle.
    void write(std::ostream & os) const;

  private:
    void build_edges();
    void classify_boundary();

    std::vector<Vertex> m_vertices;
    std::vector<Triangle> m_triangles;
    std::vector<Edge> m_edges;
    std::vector<std::array<int, 3>> m_triangle_edges;
  };

  /// Mesh of (-1,1)^2: a 2x2 grid of unit squares, each split by both diagonals (16 triangles).
  Mesh initial_square_mesh();

  /// Newest-vertex bisection. Every marked triangle is split into four (all three edges
  /// bisected); the closure adds refinement-edge bisections until the mesh is conforming.
  Mesh refine_nvb(const Mesh & mesh, std::span<const int> marked);

  /// Marks every triangle: each element is split into four children.
  Mesh uniform_refine(const Mesh & mesh);

} // namespace dpg

#endif
