#ifndef DPG_SPACES_HPP
#define DPG_SPACES_HPP

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dpg/mesh.hpp"
#include "dpg/polyspace.hpp"

namespace dpg
{
  /// Edge traces of an rHCT function at one point of a triangle edge.
  struct EdgeTrace
  {
    double value = 0.;
    double normal_derivative = 0.;
    double tangential_derivative = 0.;
  };

  /// Local trace DOFs of a triangle: (v, d_x v, d_y v) at each of the three corners.
  using LocalTraceDofs = std::array<double, 9>;

  /// Linear maps from the 9 local DOFs to (value, d_n, d_t) at arclength `s` on local edge
  /// `edge`, which runs from corner `edge` to corner `edge + 1` (counter-clockwise, so the
  /// outward normal is the tangent rotated clockwise).
  /** The value is the cubic Hermite interpolant of the endpoint values and tangential
      derivatives; the normal derivative is the linear interpolant of the endpoint normal
      derivatives. */
  Eigen::Matrix<double, 3, 9> edge_trace_rows(const std::array<Point, 3> & corners, int edge, double s);

  EdgeTrace trace_edge_values(const LocalTraceDofs & dofs, const std::array<Point, 3> & corners, int edge,
                              double s);

  /// Cartesian vertex DOFs (u(z), grad u(z)) for every vertex; layout 3*v + {0,1,2}.
  Eigen::VectorXd interpolate_trace(const std::function<double(const Point &)> & u,
                                    const std::function<Eigen::Vector2d(const Point &)> & grad,
                                    const Mesh & mesh);

  /// Global rHCT trace space with the homogeneous boundary conditions built in.
  /** Every vertex carries three slots. Interior vertices use the Cartesian frame
      (value, d_x, d_y). Straight boundary vertices use (value, d_t, d_n) with the boundary
      tangent t and outward normal n; value and d_t are constrained. At corners every slot is
      constrained. Free slots are numbered consecutively in vertex order. */
  class TraceSpace
  {
  public:
    explicit TraceSpace(const Mesh & mesh);

    int num_slots() const { return static_cast<int>(m_free_index.size()); }
    int num_free() const { return m_num_free; }
    int num_fixed() const { return num_slots() - m_num_free; }

    /// Index among free DOFs, or -1 if the slot is constrained.
    int free_index(int slot) const { return m_free_index[slot]; }
    bool is_free(int slot) const { return m_free_index[slot] >= 0; }

    /// Orthogonal map from slot values of vertex v to its Cartesian DOFs.
    const Eigen::Matrix3d & frame(int v) const { return m_frames[v]; }

    /// Slot values -> Cartesian DOFs (both of length 3 * num_vertices).
    Eigen::VectorXd to_cartesian(const Eigen::VectorXd & slots) const;
    Eigen::VectorXd to_slots(const Eigen::VectorXd & cartesian) const;

    /// Scatter free values into a slot vector whose constrained entries are `fixed_slots`.
    Eigen::VectorXd combine(const Eigen::VectorXd & free, const Eigen::VectorXd & fixed_slots) const;

    /// Rows of the homogeneous constraints, each a linear functional on Cartesian DOFs.
    /** v(z) = 0 on the boundary, t . grad v(z) = 0 on straight vertices, grad v(z) = 0 on corners. */
    std::vector<std::pair<int, Eigen::Vector3d>> constraint_rows() const;

  private:
    int m_num_free = 0;
    std::vector<int> m_free_index;
    std::vector<Eigen::Matrix3d> m_frames;
  };

  /// Trial space family for the field variables.
  enum class TrialKind
  {
    standard, ///< u in P^0
    augmented ///< u in P^1
  };

  inline int field_u_dimension(TrialKind kind) { return kind == TrialKind::standard ? 1 : 3; }

  /// Local trial layout: [u (1 or 3), M11, M12, M22, 9 trace DOFs].
  struct TrialLayout
  {
    TrialKind kind = TrialKind::standard;

    int num_u() const { return field_u_dimension(kind); }
    int num_fields() const { return num_u() + 3; }
    int size() const { return num_fields() + 9; }
    int m_offset() const { return num_u(); }
    int trace_offset() const { return num_fields(); }
  };

  /// Broken test space P^p x (P^4 symmetric matrices) on one element.
  struct TestLayout
  {
    int scalar_degree = 0;

    int num_scalar() const { return scalar_dimension(scalar_degree); }
    int num_matrix() const { return SymMatBasis::dimension; }
    int size() const { return num_scalar() + num_matrix(); }
  };

} // namespace dpg

#endif
