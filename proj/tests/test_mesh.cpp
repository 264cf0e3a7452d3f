#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "dpg/mesh.hpp"
#include "support.hpp"

using namespace dpg;

namespace
{
  int count_class(const Mesh & m, BoundaryClass c)
  {
    int n = 0;
    for (const auto & v : m.vertices()) {
      n += v.boundary_class == c;
    }
    return n;
  }

  double signed_area(const Mesh & m, int t)
  {
    const auto c = m.corners(t);
    return 0.5 * ((c[1] - c[0]).x() * (c[2] - c[0]).y() - (c[1] - c[0]).y() * (c[2] - c[0]).x());
  }
} // namespace

TEST_SUITE("mesh")
{
  TEST_CASE("initial mesh counts")
  {
    const Mesh m = initial_square_mesh();
    CHECK(m.num_triangles() == 16);
    CHECK(m.num_vertices() == 13);
    CHECK(count_class(m, BoundaryClass::corner) == 4);
    CHECK(count_class(m, BoundaryClass::straight) == 4);
    CHECK(count_class(m, BoundaryClass::interior) == 5);
    CHECK(m.total_area() == doctest::Approx(4.).epsilon(1e-15));
    CHECK(m.is_conforming());
    for (const Point & c : {Point(-1, -1), Point(1, -1), Point(1, 1), Point(-1, 1)}) {
      bool found = false;
      for (const auto & v : m.vertices()) {
        if ((v.coords - c).norm() == 0.) {
          found = true;
          CHECK(v.boundary_class == BoundaryClass::corner);
        }
      }
      CHECK(found);
    }
  }

  TEST_CASE("axis lines are unions of edges")
  {
    const Mesh m = uniform_refine(initial_square_mesh());
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
      const auto c = m.corners(t);
      const Point g = (c[0] + c[1] + c[2]) / 3.;
      for (const Point & p : c) {
        // no triangle straddles x = 0 or y = 0
        CHECK(p.x() * g.x() >= 0.);
        CHECK(p.y() * g.y() >= 0.);
      }
    }
  }

  TEST_CASE("orientation and refinement edge")
  {
    const Mesh m = initial_square_mesh();
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
      CHECK(signed_area(m, t) > 0.);
      const auto c = m.corners(t);
      const double ref = (c[1] - c[0]).norm();
      CHECK(ref >= (c[2] - c[1]).norm());
      CHECK(ref >= (c[0] - c[2]).norm());
      CHECK(m.triangles()[t].refinement_edge == 2);
    }
  }

  TEST_CASE("empty marking keeps the mesh")
  {
    const Mesh m = initial_square_mesh();
    const Mesh r = refine_nvb(m, {});
    REQUIRE(r.num_triangles() == m.num_triangles());
    REQUIRE(r.num_vertices() == m.num_vertices());
    for (size_t t = 0; t < m.num_triangles(); ++t) {
      CHECK(r.triangles()[t].vertices == m.triangles()[t].vertices);
    }
    for (size_t v = 0; v < m.num_vertices(); ++v) {
      CHECK(r.point(static_cast<int>(v)) == m.point(static_cast<int>(v)));
    }
  }

  TEST_CASE("marking everything refines uniformly")
  {
    const Mesh m = initial_square_mesh();
    std::vector<int> all(m.num_triangles());
    for (size_t t = 0; t < all.size(); ++t) {
      all[t] = static_cast<int>(t);
    }
    const Mesh r = refine_nvb(m, all);
    CHECK(r.num_triangles() == 64);
    const Mesh u1 = uniform_refine(m);
    CHECK(u1.num_triangles() == 64);
    const Mesh u2 = uniform_refine(u1);
    CHECK(u2.num_triangles() == 256);
    CHECK(u2.total_area() == doctest::Approx(4.).epsilon(1e-14));
    CHECK(u2.is_conforming());
    CHECK(r.num_vertices() == u1.num_vertices());
  }

  TEST_CASE("unknown triangle id")
  {
    const Mesh m = initial_square_mesh();
    const std::vector<int> bad{16};
    CHECK_THROWS_AS(refine_nvb(m, bad), std::out_of_range);
    const std::vector<int> negative{-1};
    CHECK_THROWS_AS(refine_nvb(m, negative), std::out_of_range);
  }

  TEST_CASE("random refinement sequences stay conforming and shape regular")
  {
    const Mesh initial = initial_square_mesh();
    const double angle0 = initial.min_angle();
    std::mt19937 rng(20261016);
    for (int run = 0; run < 10; ++run) {
      Mesh m = initial;
      for (int step = 0; step < 8; ++step) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(m.num_triangles()) - 1);
        const std::vector<int> marked{pick(rng)};
        const Mesh r = refine_nvb(m, marked);
        std::string reason;
        REQUIRE_MESSAGE(r.is_conforming(&reason), reason);
        CHECK(r.num_triangles() > m.num_triangles());
        CHECK(r.min_angle() >= angle0 - 1e-12);
        CHECK(r.total_area() == doctest::Approx(4.).epsilon(1e-13));
        for (int t = 0; t < static_cast<int>(r.num_triangles()); ++t) {
          CHECK(signed_area(r, t) > 0.);
          // every bisection halves the area: |T| 2^generation is the initial area 1/4
          CHECK(r.area(t) * std::ldexp(1., r.triangles()[t].generation) == doctest::Approx(0.25).epsilon(1e-13));
        }
        m = r;
      }
    }
  }

  TEST_CASE("boundary refinement creates straight vertices only")
  {
    Mesh m = initial_square_mesh();
    for (int k = 0; k < 3; ++k) {
      m = uniform_refine(m);
    }
    CHECK(count_class(m, BoundaryClass::corner) == 4);
    for (const auto & v : m.vertices()) {
      const bool on_boundary = std::abs(std::abs(v.coords.x()) - 1.) < 1e-14 || std::abs(std::abs(v.coords.y()) - 1.) < 1e-14;
      const bool is_corner = std::abs(std::abs(v.coords.x()) - 1.) < 1e-14 && std::abs(std::abs(v.coords.y()) - 1.) < 1e-14;
      if (is_corner) {
        CHECK(v.boundary_class == BoundaryClass::corner);
      } else if (on_boundary) {
        CHECK(v.boundary_class == BoundaryClass::straight);
      } else {
        CHECK(v.boundary_class == BoundaryClass::interior);
      }
    }
  }

  TEST_CASE("edges")
  {
    const Mesh m = initial_square_mesh();
    // Euler: E = V + T - 1
    CHECK(m.edges().size() == m.num_vertices() + m.num_triangles() - 1);
    int boundary = 0;
    for (const Edge & e : m.edges()) {
      boundary += e.on_boundary();
      CHECK(e.vertices[0] < e.vertices[1]);
    }
    CHECK(boundary == 8);
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
      const auto & tri = m.triangles()[t];
      for (int k = 0; k < 3; ++k) {
        const Edge & e = m.edges()[m.triangle_edges(t)[k]];
        const std::set<int> expected{tri.vertices[(k + 1) % 3], tri.vertices[(k + 2) % 3]};
        CHECK(std::set<int>(e.vertices.begin(), e.vertices.end()) == expected);
      }
    }
  }

  TEST_CASE("text dump")
  {
    const Mesh m = initial_square_mesh();
    std::ostringstream os;
    m.write(os);
    std::istringstream is(os.str());
    std::string tag;
    int nv = 0, nt = 0;
    std::string line;
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      ls >> tag;
      if (tag == "v") {
        double x, y;
        std::string cls;
        ls >> x >> y >> cls;
        CHECK(x == m.point(nv).x());
        CHECK(y == m.point(nv).y());
        CHECK(cls == to_string(m.vertices()[nv].boundary_class));
        ++nv;
      } else if (tag == "t") {
        int i, j, k, r;
        ls >> i >> j >> k >> r;
        CHECK(std::array<int, 3>{i, j, k} == m.triangles()[nt].vertices);
        CHECK(r == 2);
        ++nt;
      }
    }
    CHECK(nv == 13);
    CHECK(nt == 16);
  }

  TEST_CASE("non-conforming input is detected")
  {
    // hanging node at (0.5, 0) on the edge of the big triangle
    const std::vector<Point> coords{Point(0, 0), Point(1, 0), Point(0, 1), Point(0.5, 0), Point(0.5, -1)};
    const Mesh m(coords, {{0, 1, 2}, {0, 4, 3}, {3, 4, 1}});
    std::string reason;
    CHECK_FALSE(m.is_conforming(&reason));
    CHECK_FALSE(reason.empty());
  }
}
