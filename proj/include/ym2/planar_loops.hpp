#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ym2/exact.hpp"

namespace ym2::loops {

struct Visit {
  int crossing;
  int occurrence;  // 0 = first visit in traversal order, 1 = second
  bool operator==(const Visit& o) const {
    return crossing == o.crossing && occurrence == o.occurrence;
  }
};

// Gauss-code presentation of a family of closed curves in generic position:
// each crossing id appears exactly twice across all loops, and carries the
// sign of det(first-visit tangent, second-visit tangent).
struct LoopDiagram {
  std::vector<std::vector<Visit>> loops;  // an empty visit list is a simple circle
  std::map<int, int> handedness;          // crossing -> +1 / -1

  int num_crossings() const { return static_cast<int>(handedness.size()); }
};

// Normalizes raw crossing-id sequences into a LoopDiagram (assigns
// occurrence flags, checks that each id appears exactly twice).
LoopDiagram make_diagram(const std::vector<std::vector<int>>& codes,
                         const std::map<int, int>& handedness);

// Half-edge combinatorial map induced by a diagram.  Segment s of the
// traversal owns directed half-edges 2s (forward) and 2s+1 (backward);
// face_of[h] is the face on the left of h.
struct CombinatorialMap {
  LoopDiagram diagram;
  int n_vertices = 0;
  int n_segments = 0;

  std::vector<int> seg_loop;                 // owning loop per segment
  std::vector<int> he_tail;                  // tail vertex per directed half-edge
  std::vector<int> rot_next, rot_prev;       // ccw rotation and its inverse
  std::vector<int> face_of;                  // face index per directed half-edge
  std::vector<std::vector<int>> faces;       // canonical order, cycles starting at min he

  struct CrossingInfo {
    int vertex;
    std::array<int, 2> out;   // outgoing stub per visit (forward half-edge)
    std::array<int, 2> in;    // incoming stub per visit (backward half-edge)
    std::array<int, 2> loop;  // loop index per visit
    std::array<int, 2> pos;   // visit position within the loop
    int sign;
  };
  std::map<int, CrossingInfo> crossings;

  int num_faces() const { return static_cast<int>(faces.size()); }
  int num_loops() const { return static_cast<int>(diagram.loops.size()); }
  int num_crossings() const { return static_cast<int>(crossings.size()); }
  int euler() const { return n_vertices - n_segments + num_faces(); }
  int rev(int he) const { return he ^ 1; }
  int min_he_of_face(int f) const { return faces[f].front(); }
  // boundary of face f as signed segment ids (+s forward, -(s+1) backward)
  std::vector<int> face_boundary_segments(int f) const;
  bool face_adjacent(int f, int g) const;
};

// Builds the map; throws a realizability error unless the rotation system is
// planar (Euler characteristic 2) and the diagram is connected.
CombinatorialMap build_map(const LoopDiagram& diagram);

// Winding numbers of loop `loop_index` over every face, normalized to 0 on
// base_face.
std::vector<int> winding_vector(const CombinatorialMap& map, int loop_index, int base_face);

// Alternating Makeenko-Migdal combination at a crossing, one coefficient per
// face (+1 on the two wedges flanked by equal-role stubs, -1 on the mixed
// wedges, repeated faces accumulated).
std::vector<long long> mm_vector_full(const CombinatorialMap& map, int crossing);

// Same with the unbounded face's coordinate dropped (plane convention).
std::vector<long long> mm_vector(const CombinatorialMap& map, int crossing, int unbounded_face);

// A standalone sub-diagram: one loop of a bigger picture with every other
// strand erased and the faces merged across the erased edges.
struct StandalonePiece {
  LoopDiagram diagram;
  CombinatorialMap map;
  int unbounded_face = -1;
  std::vector<double> areas;                   // per face of `map` (0 on unbounded)
  std::vector<std::vector<int>> merged_from;   // original face ids per face of `map`
};

StandalonePiece standalone_loop(const CombinatorialMap& map, const std::vector<double>& face_areas,
                                int unbounded_face, int loop_index);

struct Desingularization {
  bool case_one = false;                 // true: self-crossing split into two loops
  std::vector<StandalonePiece> pieces;   // two pieces (case I) or one (case II)
};

// Reconnects the strands at `crossing` the orientation-consistent other way
// and returns the resulting standalone loops with merged areas.
Desingularization desingularize(const CombinatorialMap& map, const std::vector<double>& face_areas,
                                int unbounded_face, int crossing);

struct MmSpan {
  int dimension = 0;
  std::vector<std::vector<Int>> basis;  // reduced row basis of the span
  int expected = 0;                     // r - 1 - n
  bool windings_independent = false;
};

// Exact rank of the span of all MM combinations; unbounded_face = -1 treats
// the map as spherical (no coordinate dropped).
MmSpan mm_span(const CombinatorialMap& map, int unbounded_face);

// Word over per-face lasso generators (face id, exponent), obtained by
// triangular elimination over the dual spanning tree.
struct LassoWord {
  std::vector<std::pair<int, int>> letters;
};

struct LassoBasis {
  std::vector<char> in_tree;                                // per segment
  std::map<int, int> nontree_face;                          // non-tree segment -> bounded face
  std::map<int, std::vector<std::pair<int, int>>> expr;     // segment -> lasso word
  std::vector<int> elimination_order;                       // faces, deepest first
  std::vector<int> dual_parent_seg;                         // per face, -1 at root
};

LassoBasis lasso_basis(const CombinatorialMap& map, int unbounded_face);

LassoWord lasso_decomposition(const CombinatorialMap& map, int unbounded_face, int loop_index);

// Test helpers: the free-group word of a loop / lasso word over non-tree
// segment generators (signed segment ids, reduced).
std::vector<int> loop_gamma_word(const CombinatorialMap& map, const LassoBasis& basis,
                                 int loop_index);
std::vector<int> expand_lasso_word(const CombinatorialMap& map, const LassoBasis& basis,
                                   const LassoWord& word);

// Parsed loop/graph file.
struct ParsedLoopFile {
  LoopDiagram diagram;
  CombinatorialMap map;
  std::vector<double> face_areas;  // all faces; unbounded entry = 0 on the plane
  int unbounded_face = -1;         // -1 iff sphere
  bool sphere = false;
  double total_area = 0.0;
};

ParsedLoopFile parse_loop_file(const std::string& text);
std::string serialize_loop_file(const ParsedLoopFile& f);

// Canonical (rotation-minimal, relabelled) serialization of a single-loop
// diagram together with areas remapped to the canonical face order; used as
// a memo key.  Multi-loop diagrams fall back to the identity presentation.
std::string canonical_key(const CombinatorialMap& map, const std::vector<double>& face_areas,
                          int unbounded_face);

}  // namespace ym2::loops
