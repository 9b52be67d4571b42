#pragma once

#include <vector>

#include "ym2/planar_loops.hpp"

namespace ym2::mf {

struct MasterFieldQuery {
  loops::LoopDiagram diagram;
  std::vector<double> face_areas;  // per face of build_map(diagram)
  int unbounded_face = -1;
  double tolerance = 1e-6;
};

// Large-N limit of the Wilson loop expectation of the diagram (product over
// loops), evaluated by the loop-equation recursion on self-crossing count
// with the outer-face rule, integrating from the zero-area configuration.
double phi_plane(const MasterFieldQuery& query);

double phi_plane(const loops::ParsedLoopFile& file, double tolerance = 1e-6);

// The solved per-face derivative vector (entry 0 at the unbounded face).
std::vector<double> phi_gradient(const MasterFieldQuery& query);

}  // namespace ym2::mf
