#pragma once

// Discrete counterparts of the lower-bound and rigidity arguments:
// sublevel-set perimeters and the coarea bound, Ambrosio's modification,
// slice jump counts, rigid segmentation and the quantitative-rigidity probe.

#include "rigidfield/grid.hpp"

#include <json.hpp>

#include <vector>

namespace rigidfield {

/// Length of the marching-squares contour {v = s} inside the domain (2D),
/// or the number of crossings of s along the line (1D).
double sublevel_perimeter(const StructuredGrid& g, const std::vector<double>& v, double s);

struct CoareaReport {
  std::vector<double> levels;
  std::vector<double> perimeter;
  double lambda = 0.0;  // discrete mean-value level
  double bound = 0.0;   // 2 int_delta^{1-delta} sqrt(V(s)) Per({v < s}) ds
  double mean_perimeter = 0.0;
};

/// Trapezoidal integration over s_count levels spanning [delta, 1 - delta].
/// lambda is the smallest interior level whose perimeter does not exceed the
/// sqrt(V)-weighted mean perimeter.
CoareaReport coarea_lower_bound(const StructuredGrid& g, const std::vector<double>& v, const ScalarFn& potential,
                                double delta, int s_count = 32);

struct ModifiedField {
  std::vector<double> u;
  std::vector<char> mask;  // nodes replaced by A x + b
  double jump_proxy = 0.0;  // length of the lambda-contour
};

/// Replaces u by A x + b on the nodes where v < lambda.
ModifiedField ambrosio_modification(const StructuredGrid& g, const std::vector<double>& u, int components,
                                    const std::vector<double>& v, double lambda, const RigidMotion& motion,
                                    const WellSpec& well);

/// int dist^2(grad u, well) over the cells none of whose nodes is masked.
double well_defect_outside(const StructuredGrid& g, const std::vector<double>& u, int components,
                           const std::vector<char>& node_mask, const WellSpec& well);

enum class SliceField { Displacement, PhaseField };

struct SliceCounts {
  std::vector<int> counts;  // per grid line parallel to the axis
  double integral = 0.0;    // trapezoidal integral of the counts across lines
};

/// axis 0 slices along x (one count per horizontal grid line), axis 1 along y.
/// Displacement: runs of consecutive edges with |du| > threshold count once.
/// Phase field: runs of v < threshold flanked on both sides by v > 1 - threshold.
SliceCounts slice_jump_counts(const StructuredGrid& g, const std::vector<double>& field, int components, int axis,
                              double threshold, SliceField kind);

struct SegmentComponent {
  std::vector<std::size_t> cells;
  double area = 0.0;
  bool fitted = false;  // false for components with fewer than 3 cells
  RigidMotion motion;
  double residual = 0.0;  // RMS of A x + b - u over the component's nodes
};

struct SegmentationResult {
  std::vector<int> labels;  // per cell; -1 where v <= threshold on some node
  std::vector<SegmentComponent> components;

  std::size_t fitted_count() const;
};

/// 4-connected components of the cells whose nodal v all exceed
/// v_threshold, each fitted with a well motion (Kabsch for rotations, least
/// squares for the skew and finite wells).
SegmentationResult segment_rigid(const StructuredGrid& g, const std::vector<double>& u, int components,
                                 const std::vector<double>& v, double v_threshold, const WellSpec& well);

struct RigidityRatio {
  double lhs = 0.0;    // min over the well of ||grad u - A||_p
  double rhs = 0.0;    // ||dist(grad u, well)||_p
  double ratio = 0.0;  // 0 when both vanish
};

RigidityRatio rigidity_ratio(const StructuredGrid& g, const std::vector<double>& u, int components,
                             const WellSpec& well, double p);

void to_json(nlohmann::json& j, const CoareaReport& r);
/// Labels are omitted; they go to a `.pfld` dump.
void to_json(nlohmann::json& j, const SegmentationResult& r);

}  // namespace rigidfield
