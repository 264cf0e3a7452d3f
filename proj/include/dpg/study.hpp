#ifndef DPG_STUDY_HPP
#define DPG_STUDY_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpg/adapt.hpp"
#include "dpg/problems.hpp"

namespace dpg
{
  /// Raised when a run violates a checked invariant (conformity, DOF growth, solve accuracy).
  class InvariantViolation : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };

  enum class Refinement
  {
    uniform,
    adaptive
  };

  std::string to_string(Refinement r);

  struct StudyConfig
  {
    int problem = 61;
    Method method = Method::dpg;
    std::optional<TrialKind> trial; ///< defaults to the problem's trial space
    int test_degree = 0;
    Refinement refinement = Refinement::uniform;
    double theta = 0.5;
    int levels = 5;           ///< uniform: levels 0..levels-1; adaptive: upper bound (negative = none)
    int max_dofs = -1;        ///< negative disables
    int max_elements = 50000;
  };

  struct StudyRow
  {
    int level = 0;
    int nelem = 0;
    int ndof = 0;
    double hmax = 0.;
    double err_u = 0.; ///< NaN without an exact solution
    double err_m = 0.;
    double eta_res = 0.;  ///< sqrt of the summed residual indicators
    double eta_data = 0.; ///< ||A : M_h - f||
    double eta_total = 0.;
    int marked = 0;
    bool cholesky_ok = false;
    double relative_residual = 0.;

    double err_total() const;
  };

  struct StudyResult
  {
    StudyConfig config;
    std::string problem_name;
    std::vector<StudyRow> rows;
  };

  /// Experimental order of convergence between consecutive rows.
  /** `wrt_h` uses hmax, otherwise ndof^{-1/2}. The first entry is NaN. */
  std::vector<double> eoc(const std::vector<StudyRow> & rows, double (*error)(const StudyRow &), bool wrt_h);

  /// Mean of the last `count` EOC entries (NaN entries skipped).
  double mean_tail(const std::vector<double> & values, int count);

  /// Runs the study; `on_level` sees every level's mesh and solution.
  StudyResult run_convergence(const StudyConfig & config,
                              const std::function<void(const LevelResult &)> & on_level = {});

  /// `level,nelem,ndof,err_u,err_M,eta_res,eta_data,eta_total,theta,method` followed by
  /// hmax, marked and EOC columns.
  void write_table_csv(std::ostream & os, const StudyResult & result);

  /// Flat key=value run metadata.
  void write_metadata(std::ostream & os, const StudyResult & result);

  /// Writes table.csv, meta.txt, mesh_L.txt and solution_L.csv into `dir`.
  StudyResult run_study_to_directory(const StudyConfig & config, const std::filesystem::path & dir);

} // namespace dpg

#endif
