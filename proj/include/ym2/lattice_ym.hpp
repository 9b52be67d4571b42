#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ym2/planar_loops.hpp"
#include "ym2/rng.hpp"
#include "ym2/unitary_bm.hpp"

namespace ym2::lat {

// A graph on a surface: oriented edge representatives, faces with positively
// oriented boundary words and areas.  Signed edge ids: +(e+1) forward,
// -(e+1) reversed.
struct SurfaceGraph {
  bool sphere = false;
  double total_area = 0.0;
  int n_vertices = 0;
  struct Edge {
    int tail, head;
  };
  std::vector<Edge> edges;
  struct Face {
    std::vector<int> boundary;
    double area;
  };
  std::vector<Face> faces;
  int unbounded_face = -1;  // plane only
  std::vector<std::vector<int>> loops;  // marked loops as signed-edge paths

  int num_edges() const { return static_cast<int>(edges.size()); }
  void validate() const;
};

SurfaceGraph from_loop_file(const loops::ParsedLoopFile& file);

// Refinements: subdivide an edge into two, or split a face along a chord
// between two corners of its boundary (area fraction frac goes to the first
// part).  Marked loops are carried over.
SurfaceGraph split_edge(const SurfaceGraph& g, int edge);
SurfaceGraph add_chord(const SurfaceGraph& g, int face, int pos1, int pos2, double frac);

// One group element per edge representative; the value on the reversed edge
// is the adjoint.
using Config = std::vector<Eigen::MatrixXcd>;

Eigen::MatrixXcd holonomy(const SurfaceGraph& g, const Config& cfg, const std::vector<int>& path);

Config gauge_act(const SurfaceGraph& g, const Config& cfg,
                 const std::vector<Eigen::MatrixXcd>& vertex_elements);

// Exact sampler of the Driver-Sengupta measure on a plane graph: tree edges
// gauge-fixed to the identity, one heat-kernel variable per bounded face.
Config sample_plane_config(const SurfaceGraph& g, int N, double step, RandomStream& rng);

// Winding numbers of a loop path over the faces (exact cycle-space solve);
// plane: relative to the unbounded face, sphere: up to a common shift.
std::vector<long long> face_windings(const SurfaceGraph& g, const std::vector<int>& path);

// Exact U(1) expectation of prod_j tr(h_{loop_j}).
double u1_exact_wilson(const SurfaceGraph& g, const std::vector<std::vector<int>>& loop_paths,
                       double* tail_bound = nullptr);

// Direct numerical integration of the Driver-Sengupta formula for U(1)
// (small graphs only): Wilson value and partition function.
double u1_quadrature_wilson(const SurfaceGraph& g, const std::vector<std::vector<int>>& loop_paths,
                            int grid_points);
double u1_quadrature_partition(const SurfaceGraph& g, int grid_points);

struct SubdivisionReport {
  double u1_coarse = 0.0, u1_fine = 0.0, u1_deviation = 0.0;
  bool mc_checked = false;
  ubm::McEstimate mc_coarse, mc_fine;
  bool mc_within_4se = true;
};

struct McParams {
  int N = 3;
  std::size_t samples = 20000;
  double step = 1e-3;
  std::uint64_t seed = 1;
};

// The refined graph must carry the same marked loops (as paths in itself).
SubdivisionReport subdivision_check(const SurfaceGraph& coarse, const SurfaceGraph& fine,
                                    const std::optional<McParams>& mc = std::nullopt);

// Monte Carlo mean of (tr h_loop)^power under the plane sampler.
ubm::McEstimate mc_wilson(const SurfaceGraph& g, int loop_index, int trace_power,
                          const McParams& params);

}  // namespace ym2::lat
