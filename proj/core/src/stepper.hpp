#pragma once

#include <memory>
#include <vector>

#include "switchgrid/grid/solver.hpp"

namespace switchgrid::detail {

/// Backward step over a fixed geometry. Line layout and intervention
/// candidates are built once; coefficients are evaluated per step.
class Stepper {
 public:
  Stepper(const ProblemSpec& spec, const GridConfig& grid, std::shared_ptr<const GridGeometry> geometry,
          double epsilon);

  void step(const FieldSlice& next, FieldSlice& out, int n, StepStats* stats) const;

 private:
  enum class Side : unsigned char { kNone, kDirichlet };

  struct Line {
    int z = 0;
    int k = 0;        ///< j = k + z m i
    int i_begin = 0;  ///< first unknown node
    int i_end = 0;    ///< last unknown node
    Side left = Side::kNone;
    Side right = Side::kNone;
    double h_left = 0.0;   ///< distance to the Dirichlet neighbour, in dx
    double h_right = 0.0;
    double g_left = 0.0;   ///< Dirichlet neighbour values
    double g_right = 0.0;
  };

  struct Candidate {
    int target = 0;
    double jf = 0.0;
  };

  struct Coefficients {
    std::vector<double> cl;
    std::vector<double> cr;
    std::vector<double> absorb;
  };

  void build_lines();
  void build_candidates();
  void line_coefficients(const Line& line, double t, Coefficients& c, const std::vector<double>& b,
                         const std::vector<double>& a) const;
  void solve_line_implicit(const Line& line, const Coefficients& c, const FieldSlice& next,
                           FieldSlice& out) const;
  int explicit_substeps(const std::vector<Coefficients>& coeffs) const;
  void advance_line_explicit(const Line& line, const Coefficients& c, int substeps,
                             const FieldSlice& next, FieldSlice& out) const;
  int intervene(FieldSlice& slice, int n) const;
  void pin_dirichlet(FieldSlice& slice) const;

  const ProblemSpec& spec_;
  GridConfig grid_;
  std::shared_ptr<const GridGeometry> geo_;
  double epsilon_;
  std::vector<Line> lines_;
  /// candidates_[z index][j - j_lo]
  std::vector<std::vector<std::vector<Candidate>>> candidates_;
  bool any_candidates_ = false;
};

}  // namespace switchgrid::detail
