#include "ym2/planar_loops.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <deque>
#include <numeric>
#include <sstream>

#include "ym2/errors.hpp"

namespace ym2::loops {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

void free_reduce(std::vector<std::pair<int, int>>& word) {
  std::vector<std::pair<int, int>> out;
  for (const auto& l : word) {
    if (!out.empty() && out.back().first == l.first && out.back().second == -l.second)
      out.pop_back();
    else
      out.push_back(l);
  }
  word = std::move(out);
}

}  // namespace

LoopDiagram make_diagram(const std::vector<std::vector<int>>& codes,
                         const std::map<int, int>& handedness) {
  LoopDiagram d;
  d.handedness = handedness;
  std::map<int, int> seen;
  for (const auto& code : codes) {
    std::vector<Visit> vs;
    for (int c : code) {
      int& n = seen[c];
      if (n >= 2)
        fail(ErrorCategory::syntax, "crossing " + std::to_string(c) + " visited more than twice");
      vs.push_back(Visit{c, n});
      ++n;
    }
    d.loops.push_back(std::move(vs));
  }
  for (const auto& [c, n] : seen) {
    if (n != 2)
      fail(ErrorCategory::syntax, "crossing " + std::to_string(c) + " visited only once");
    if (!d.handedness.count(c))
      fail(ErrorCategory::syntax, "missing handedness sign for crossing " + std::to_string(c));
  }
  for (const auto& [c, s] : d.handedness) {
    if (!seen.count(c))
      fail(ErrorCategory::syntax, "sign given for unknown crossing " + std::to_string(c));
    if (s != 1 && s != -1)
      fail(ErrorCategory::syntax, "handedness must be +1 or -1");
  }
  return d;
}

std::vector<int> CombinatorialMap::face_boundary_segments(int f) const {
  std::vector<int> out;
  for (int he : faces[f]) out.push_back(he % 2 == 0 ? he / 2 + 1 : -(he / 2 + 1));
  return out;
}

bool CombinatorialMap::face_adjacent(int f, int g) const {
  for (int he : faces[f])
    if (face_of[rev(he)] == g) return true;
  return false;
}

CombinatorialMap build_map(const LoopDiagram& diagram) {
  CombinatorialMap m;
  m.diagram = diagram;

  // Global segment ids, one per visit (or one for an empty loop).
  const int L = static_cast<int>(diagram.loops.size());
  if (L == 0) fail(ErrorCategory::argument, "diagram has no loops");
  std::vector<int> seg_offset(L, 0);
  int nseg = 0;
  for (int l = 0; l < L; ++l) {
    seg_offset[l] = nseg;
    nseg += diagram.loops[l].empty() ? 1 : static_cast<int>(diagram.loops[l].size());
  }
  m.n_segments = nseg;
  m.seg_loop.resize(nseg);

  // Vertices: one per crossing id (sorted), then one dummy per empty loop.
  std::map<int, int> vertex_of_crossing;
  for (const auto& [c, s] : diagram.handedness) {
    int id = static_cast<int>(vertex_of_crossing.size());
    vertex_of_crossing[c] = id;
  }
  int nvert = static_cast<int>(vertex_of_crossing.size());

  m.he_tail.assign(2 * nseg, -1);
  std::map<int, CombinatorialMap::CrossingInfo> cinfo;
  for (const auto& [c, s] : diagram.handedness) {
    CombinatorialMap::CrossingInfo ci;
    ci.vertex = vertex_of_crossing[c];
    ci.sign = s;
    ci.out = {-1, -1};
    ci.in = {-1, -1};
    cinfo[c] = ci;
  }

  for (int l = 0; l < L; ++l) {
    const auto& vs = diagram.loops[l];
    const int k = static_cast<int>(vs.size());
    if (k == 0) {
      const int s = seg_offset[l];
      m.seg_loop[s] = l;
      const int dummy = nvert++;
      m.he_tail[2 * s] = dummy;
      m.he_tail[2 * s + 1] = dummy;
      continue;
    }
    for (int i = 0; i < k; ++i) {
      const int s = seg_offset[l] + i;
      m.seg_loop[s] = l;
      const Visit& v = vs[i];
      auto it = cinfo.find(v.crossing);
      if (it == cinfo.end())
        fail(ErrorCategory::syntax, "crossing " + std::to_string(v.crossing) + " has no sign");
      auto& ci = it->second;
      const int sprev = seg_offset[l] + (i + k - 1) % k;
      ci.out[v.occurrence] = 2 * s;        // forward half-edge leaving this visit
      ci.in[v.occurrence] = 2 * sprev + 1; // backward stub of the arriving segment
      ci.loop[v.occurrence] = l;
      ci.pos[v.occurrence] = i;
      m.he_tail[2 * s] = ci.vertex;
      m.he_tail[2 * sprev + 1] = ci.vertex;
    }
  }
  m.n_vertices = nvert;

  // Rotation system (ccw): a positive crossing has the second strand's
  // tangent at +90 degrees from the first's.
  m.rot_next.assign(2 * nseg, -1);
  m.rot_prev.assign(2 * nseg, -1);
  auto set_cycle = [&](const std::vector<int>& cyc) {
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      m.rot_next[cyc[i]] = cyc[(i + 1) % cyc.size()];
      m.rot_prev[cyc[(i + 1) % cyc.size()]] = cyc[i];
    }
  };
  for (auto& [c, ci] : cinfo) {
    if (ci.out[0] < 0 || ci.out[1] < 0)
      fail(ErrorCategory::syntax, "crossing " + std::to_string(c) + " not visited twice");
    if (ci.sign == 1)
      set_cycle({ci.out[0], ci.out[1], ci.in[0], ci.in[1]});
    else
      set_cycle({ci.out[0], ci.in[1], ci.in[0], ci.out[1]});
  }
  for (int l = 0; l < L; ++l) {
    if (!diagram.loops[l].empty()) continue;
    const int s = seg_offset[l];
    set_cycle({2 * s, 2 * s + 1});
  }
  m.crossings = std::move(cinfo);

  // Faces on the left: orbits of h -> rot_prev[rev(h)].
  m.face_of.assign(2 * nseg, -1);
  for (int h = 0; h < 2 * nseg; ++h) {
    if (m.face_of[h] >= 0) continue;
    const int f = static_cast<int>(m.faces.size());
    std::vector<int> cyc;
    int cur = h;
    do {
      m.face_of[cur] = f;
      cyc.push_back(cur);
      cur = m.rot_prev[m.rev(cur)];
    } while (cur != h);
    m.faces.push_back(std::move(cyc));
  }

  // Connectivity: a mixed diagram with mutually disjoint pieces has an
  // ambiguous nesting and is not accepted as a single picture.
  {
    std::vector<char> seen(nvert, 0);
    std::deque<int> q{m.he_tail[0]};
    seen[m.he_tail[0]] = 1;
    int cnt = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int s = 0; s < nseg; ++s)
        for (int h : {2 * s, 2 * s + 1}) {
          if (m.he_tail[h] == v) {
            int w = m.he_tail[m.rev(h)];
            if (!seen[w]) {
              seen[w] = 1;
              ++cnt;
              q.push_back(w);
            }
          }
        }
    }
    if (cnt != nvert)
      fail(ErrorCategory::realizability, "diagram is disconnected; split it into separate files");
  }

  if (m.euler() != 2)
    fail(ErrorCategory::realizability,
         "Gauss code not realizable in the plane (Euler characteristic " +
             std::to_string(m.euler()) + ")");
  return m;
}

std::vector<int> winding_vector(const CombinatorialMap& map, int loop_index, int base_face) {
  const int F = map.num_faces();
  if (base_face < 0 || base_face >= F) fail(ErrorCategory::argument, "bad base face");
  if (loop_index < 0 || loop_index >= map.num_loops())
    fail(ErrorCategory::argument, "bad loop index");
  std::vector<int> w(F, 0);
  std::vector<char> seen(F, 0);
  seen[base_face] = 1;
  std::deque<int> q{base_face};
  while (!q.empty()) {
    int f = q.front();
    q.pop_front();
    for (int he : map.faces[f]) {
      const int g = map.face_of[map.rev(he)];
      const int s = he / 2;
      // face_of[2s] sits on the left of the forward orientation; winding
      // steps by +1 from right to left across the owning loop.
      int delta = 0;
      if (map.seg_loop[s] == loop_index) delta = (he % 2 == 0) ? -1 : 1;
      if (!seen[g]) {
        seen[g] = 1;
        w[g] = w[f] + delta;
        q.push_back(g);
      }
    }
  }
  // Planarity makes the labelling consistent; check it.
  for (int s = 0; s < map.n_segments; ++s) {
    const int L = map.face_of[2 * s], R = map.face_of[2 * s + 1];
    const int delta = map.seg_loop[s] == loop_index ? 1 : 0;
    if (w[L] - w[R] != delta)
      fail(ErrorCategory::realizability, "inconsistent winding labelling");
  }
  return w;
}

std::vector<long long> mm_vector_full(const CombinatorialMap& map, int crossing) {
  auto it = map.crossings.find(crossing);
  if (it == map.crossings.end()) fail(ErrorCategory::argument, "no such crossing");
  const auto& ci = it->second;
  std::vector<long long> coeff(map.num_faces(), 0);
  auto role_out = [&](int stub) { return stub == ci.out[0] || stub == ci.out[1]; };
  for (int stub : {ci.out[0], ci.out[1], ci.in[0], ci.in[1]}) {
    const bool same = role_out(stub) == role_out(map.rot_next[stub]);
    coeff[map.face_of[stub]] += same ? 1 : -1;
  }
  return coeff;
}

std::vector<long long> mm_vector(const CombinatorialMap& map, int crossing, int unbounded_face) {
  auto full = mm_vector_full(map, crossing);
  std::vector<long long> out;
  for (int f = 0; f < static_cast<int>(full.size()); ++f)
    if (f != unbounded_face) out.push_back(full[f]);
  return out;
}

namespace {

// A chain is a cyclic alternation of stations (retained crossing visits) and
// gaps (runs of original segments between them).  An empty station list is a
// plain circle.
struct Chain {
  std::vector<Visit> stations;
  std::vector<std::vector<int>> gaps;  // gaps[j] follows stations[j]
};

// Walk the diagram's segments with the successor of `crossing` rewired the
// other orientation-consistent way (crossing < 0: no rewiring).
std::vector<Chain> walk_chains(const CombinatorialMap& map, int crossing) {
  const auto& d = map.diagram;
  const int L = static_cast<int>(d.loops.size());
  std::vector<int> seg_offset(L, 0);
  int nseg = 0;
  for (int l = 0; l < L; ++l) {
    seg_offset[l] = nseg;
    nseg += d.loops[l].empty() ? 1 : static_cast<int>(d.loops[l].size());
  }
  // succ[s]: next segment; station_after[s]: visit between s and succ[s]
  std::vector<int> succ(nseg);
  std::vector<int> station_after(nseg, -1);  // encodes (loop, pos) as global visit slot
  std::vector<Visit> visit_at(nseg, Visit{-1, -1});
  for (int l = 0; l < L; ++l) {
    const int k = static_cast<int>(d.loops[l].size());
    if (k == 0) {
      succ[seg_offset[l]] = seg_offset[l];
      continue;
    }
    for (int i = 0; i < k; ++i) {
      const int s = seg_offset[l] + i;
      const int nxt = seg_offset[l] + (i + 1) % k;
      succ[s] = nxt;
      station_after[s] = nxt;
      visit_at[nxt] = d.loops[l][(i + 1) % k];
    }
  }
  if (crossing >= 0) {
    const auto& ci = map.crossings.at(crossing);
    // segment arriving into visit v: in[v] is the backward stub 2*sprev+1
    const int arrive0 = ci.in[0] / 2, arrive1 = ci.in[1] / 2;
    const int leave0 = ci.out[0] / 2, leave1 = ci.out[1] / 2;
    succ[arrive0] = leave1;
    station_after[arrive0] = -1;
    succ[arrive1] = leave0;
    station_after[arrive1] = -1;
  }
  std::vector<Chain> chains;
  std::vector<char> used(nseg, 0);
  for (int start = 0; start < nseg; ++start) {
    if (used[start]) continue;
    std::vector<int> cyc;
    int s = start;
    do {
      cyc.push_back(s);
      used[s] = 1;
      s = succ[s];
    } while (s != start);

    Chain ch;
    int anchor = -1;
    for (std::size_t i = 0; i < cyc.size(); ++i)
      if (station_after[cyc[i]] >= 0) {
        anchor = static_cast<int>(i);
        break;
      }
    if (anchor < 0) {
      ch.gaps.push_back(cyc);
      chains.push_back(std::move(ch));
      continue;
    }
    // Walk once around starting right after the anchor's station; gaps[j]
    // is then the run following stations[j].
    ch.stations.push_back(visit_at[station_after[cyc[anchor]]]);
    std::vector<int> gap;
    const int n = static_cast<int>(cyc.size());
    for (int t = 1; t <= n; ++t) {
      const int s2 = cyc[(anchor + t) % n];
      gap.push_back(s2);
      if (station_after[s2] >= 0) {
        ch.gaps.push_back(gap);
        gap.clear();
        if (t != n) ch.stations.push_back(visit_at[station_after[s2]]);
      }
    }
    if (!gap.empty() || ch.gaps.size() != ch.stations.size())
      fail(ErrorCategory::realizability, "internal: chain walk out of sync");
    chains.push_back(std::move(ch));
  }
  return chains;
}

StandalonePiece build_piece(const CombinatorialMap& orig, const std::vector<double>& areas,
                            int unbounded_face, Chain chain) {
  // Retain only crossings with both visits inside the chain; dropped
  // stations concatenate their neighbouring gaps.
  std::map<int, int> count;
  for (const auto& v : chain.stations) count[v.crossing]++;
  std::vector<Visit> stations;
  std::vector<std::vector<int>> gaps;
  const int m = static_cast<int>(chain.stations.size());
  int first_keep = -1;
  for (int i = 0; i < m; ++i)
    if (count[chain.stations[i].crossing] == 2) {
      first_keep = i;
      break;
    }
  if (first_keep < 0) {
    std::vector<int> all;
    for (const auto& g : chain.gaps) all.insert(all.end(), g.begin(), g.end());
    gaps.assign(1, all);
  } else {
    std::vector<int> gap;
    for (int t = 0; t < m; ++t) {
      const int i = (first_keep + t) % m;
      if (count[chain.stations[i].crossing] == 2) {
        if (t > 0) {
          gaps.push_back(gap);
          gap.clear();
        }
        stations.push_back(chain.stations[i]);
      }
      gap.insert(gap.end(), chain.gaps[i].begin(), chain.gaps[i].end());
    }
    gaps.push_back(gap);
  }
  if (!stations.empty() && gaps.size() != stations.size())
    fail(ErrorCategory::realizability, "internal: gap/station mismatch");

  StandalonePiece piece;
  // Handedness: flipped when the chain meets the original second visit first.
  std::map<int, int> signs;
  std::map<int, int> first_occ_seen;
  std::vector<int> code;
  for (const auto& v : stations) {
    code.push_back(v.crossing);
    if (!first_occ_seen.count(v.crossing)) first_occ_seen[v.crossing] = v.occurrence;
  }
  for (const auto& [c, occ] : first_occ_seen) {
    int s = orig.diagram.handedness.at(c);
    signs[c] = occ == 0 ? s : -s;
  }
  piece.diagram = make_diagram({code}, signs);
  piece.map = build_map(piece.diagram);

  // Merge original faces across every segment the chain does not use.
  std::vector<char> in_chain(orig.n_segments, 0);
  for (const auto& g : gaps)
    for (int s : g) in_chain[s] = 1;
  UnionFind uf(orig.num_faces());
  for (int s = 0; s < orig.n_segments; ++s)
    if (!in_chain[s]) uf.unite(orig.face_of[2 * s], orig.face_of[2 * s + 1]);

  // Correspondence new face -> class via representative original segments.
  const int newF = piece.map.num_faces();
  std::vector<int> face_class(newF, -1);
  const int nsegs_new = piece.map.n_segments;
  for (int j = 0; j < nsegs_new; ++j) {
    const int rep = gaps[j].front();
    for (int dir = 0; dir < 2; ++dir) {
      const int nf = piece.map.face_of[2 * j + dir];
      const int cls = uf.find(orig.face_of[2 * rep + dir]);
      if (face_class[nf] == -1)
        face_class[nf] = cls;
      else if (face_class[nf] != cls)
        fail(ErrorCategory::realizability, "internal: face merge mismatch");
    }
  }
  piece.areas.assign(newF, 0.0);
  piece.merged_from.assign(newF, {});
  piece.unbounded_face = -1;
  for (int of = 0; of < orig.num_faces(); ++of) {
    const int cls = uf.find(of);
    const auto it = std::find(face_class.begin(), face_class.end(), cls);
    if (it == face_class.end())
      fail(ErrorCategory::realizability, "internal: lost a face class");
    const int nf = static_cast<int>(it - face_class.begin());
    piece.merged_from[nf].push_back(of);
    if (of == unbounded_face)
      piece.unbounded_face = nf;
    else
      piece.areas[nf] += areas[of];
  }
  if (unbounded_face >= 0 && piece.unbounded_face < 0)
    fail(ErrorCategory::realizability, "internal: unbounded face vanished");
  if (piece.unbounded_face >= 0) piece.areas[piece.unbounded_face] = 0.0;
  return piece;
}

}  // namespace

StandalonePiece standalone_loop(const CombinatorialMap& map, const std::vector<double>& face_areas,
                                int unbounded_face, int loop_index) {
  if (loop_index < 0 || loop_index >= map.num_loops())
    fail(ErrorCategory::argument, "bad loop index");
  auto chains = walk_chains(map, -1);
  // chains are discovered in segment order; chain of loop l is the one whose
  // segments belong to l.
  for (auto& ch : chains) {
    const int seg0 = ch.gaps.front().front();
    if (map.seg_loop[seg0] == loop_index)
      return build_piece(map, face_areas, unbounded_face, std::move(ch));
  }
  fail(ErrorCategory::argument, "loop not found");
}

Desingularization desingularize(const CombinatorialMap& map,
                                const std::vector<double>& face_areas, int unbounded_face,
                                int crossing) {
  auto it = map.crossings.find(crossing);
  if (it == map.crossings.end()) fail(ErrorCategory::argument, "no such crossing");
  const auto& ci = it->second;
  Desingularization out;
  out.case_one = ci.loop[0] == ci.loop[1];
  auto chains = walk_chains(map, crossing);
  // Keep the chains that contain a segment of the loops meeting `crossing`.
  for (auto& ch : chains) {
    const int seg0 = ch.gaps.front().front();
    const int l = map.seg_loop[seg0];
    if (l == ci.loop[0] || l == ci.loop[1])
      out.pieces.push_back(build_piece(map, face_areas, unbounded_face, std::move(ch)));
  }
  const std::size_t expect = out.case_one ? 2 : 1;
  if (out.pieces.size() != expect)
    fail(ErrorCategory::realizability, "internal: unexpected desingularization pieces");
  return out;
}

namespace {

int rank_of_rows(std::vector<std::vector<Rat>> rows, std::vector<std::vector<Int>>* basis) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t piv = r;
    while (piv < rows.size() && rows[piv][c] == Rat(0)) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[r], rows[piv]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == Rat(0)) continue;
      Rat f = rows[i][c] / rows[r][c];
      for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    ++r;
  }
  if (basis) {
    basis->clear();
    for (std::size_t i = 0; i < r; ++i) {
      Int mult = 1;
      for (const auto& q : rows[i])
        if (q != Rat(0)) mult = boost::multiprecision::lcm(mult, q.denominator());
      std::vector<Int> row;
      for (const auto& q : rows[i]) row.push_back(q.numerator() * (mult / q.denominator()));
      basis->push_back(std::move(row));
    }
  }
  return static_cast<int>(r);
}

}  // namespace

MmSpan mm_span(const CombinatorialMap& map, int unbounded_face) {
  MmSpan out;
  const int F = map.num_faces();
  std::vector<std::vector<Rat>> rows;
  for (const auto& [c, ci] : map.crossings) {
    auto full = mm_vector_full(map, c);
    std::vector<Rat> row;
    for (int f = 0; f < F; ++f)
      if (f != unbounded_face) row.emplace_back(Int(full[f]));
    rows.push_back(std::move(row));
  }
  out.dimension = rank_of_rows(rows, &out.basis);
  const int n = map.num_loops();
  out.expected = F - 1 - n;

  // independence of {1, winding vectors} over all faces
  std::vector<std::vector<Rat>> wrows;
  wrows.emplace_back(F, Rat(1));
  for (int l = 0; l < n; ++l) {
    auto w = winding_vector(map, l, 0);
    std::vector<Rat> row;
    for (int f = 0; f < F; ++f) row.emplace_back(Int(w[f]));
    wrows.push_back(std::move(row));
  }
  out.windings_independent = rank_of_rows(wrows, nullptr) == n + 1;
  if (out.windings_independent && out.dimension != out.expected)
    fail(ErrorCategory::realizability, "MM span dimension " + std::to_string(out.dimension) +
                                           " != r-1-n = " + std::to_string(out.expected));
  return out;
}

LassoBasis lasso_basis(const CombinatorialMap& map, int unbounded_face) {
  const int F = map.num_faces();
  if (unbounded_face < 0 || unbounded_face >= F)
    fail(ErrorCategory::unsupported, "lasso basis requires a plane map with an unbounded face");
  LassoBasis basis;
  basis.in_tree.assign(map.n_segments, 0);

  // Minimal-id spanning tree of the vertex graph.
  UnionFind uf(map.n_vertices);
  for (int s = 0; s < map.n_segments; ++s) {
    const int a = map.he_tail[2 * s], b = map.he_tail[2 * s + 1];
    if (uf.find(a) != uf.find(b)) {
      uf.unite(a, b);
      basis.in_tree[s] = 1;
    }
  }

  // The duals of the non-tree segments form a spanning tree of the faces;
  // root it at the unbounded face.
  std::vector<std::vector<std::pair<int, int>>> adj(F);  // (face, via segment)
  for (int s = 0; s < map.n_segments; ++s) {
    if (basis.in_tree[s]) continue;
    const int fa = map.face_of[2 * s], fb = map.face_of[2 * s + 1];
    if (fa == fb) fail(ErrorCategory::realizability, "internal: non-tree bridge");
    adj[fa].push_back({fb, s});
    adj[fb].push_back({fa, s});
  }
  basis.dual_parent_seg.assign(F, -1);
  std::vector<int> depth(F, -1);
  std::deque<int> q{unbounded_face};
  depth[unbounded_face] = 0;
  std::vector<int> order;
  while (!q.empty()) {
    int f = q.front();
    q.pop_front();
    order.push_back(f);
    for (auto [g, s] : adj[f]) {
      if (depth[g] >= 0) continue;
      depth[g] = depth[f] + 1;
      basis.dual_parent_seg[g] = s;
      basis.nontree_face[s] = g;
      q.push_back(g);
    }
  }
  if (static_cast<int>(order.size()) != F)
    fail(ErrorCategory::realizability, "internal: dual tree does not span");

  // Deepest-first elimination: in each face word the parent generator occurs
  // exactly once; every other generator belongs to an already-processed child.
  std::vector<int> faces_by_depth(order.rbegin(), order.rend());
  auto substitute = [&](const std::vector<std::pair<int, int>>& letters) {
    std::vector<std::pair<int, int>> out;
    for (auto [s, e] : letters) {
      auto it = basis.expr.find(s);
      if (it == basis.expr.end())
        fail(ErrorCategory::realizability, "internal: unresolved generator in elimination");
      if (e == 1)
        out.insert(out.end(), it->second.begin(), it->second.end());
      else
        for (auto r = it->second.rbegin(); r != it->second.rend(); ++r)
          out.push_back({r->first, -r->second});
    }
    free_reduce(out);
    return out;
  };
  for (int f : faces_by_depth) {
    if (f == unbounded_face) continue;
    basis.elimination_order.push_back(f);
    const int ef = basis.dual_parent_seg[f];
    // face word in non-tree generators
    std::vector<std::pair<int, int>> letters;
    for (int he : map.faces[f]) {
      const int s = he / 2;
      if (basis.in_tree[s]) continue;
      letters.push_back({s, he % 2 == 0 ? 1 : -1});
    }
    int idx = -1, eps = 0;
    for (std::size_t i = 0; i < letters.size(); ++i)
      if (letters[i].first == ef) {
        if (idx >= 0) fail(ErrorCategory::realizability, "internal: parent generator repeated");
        idx = static_cast<int>(i);
        eps = letters[i].second;
      }
    if (idx < 0) fail(ErrorCategory::realizability, "internal: parent generator missing");
    std::vector<std::pair<int, int>> A(letters.begin(), letters.begin() + idx);
    std::vector<std::pair<int, int>> B(letters.begin() + idx + 1, letters.end());
    auto sA = substitute(A);
    auto sB = substitute(B);
    std::vector<std::pair<int, int>> e;
    if (eps == 1) {
      // gamma = A^{-1} lambda_f B^{-1}
      for (auto r = sA.rbegin(); r != sA.rend(); ++r) e.push_back({r->first, -r->second});
      e.push_back({f, 1});
      for (auto r = sB.rbegin(); r != sB.rend(); ++r) e.push_back({r->first, -r->second});
    } else {
      // gamma = B lambda_f^{-1} A
      e.insert(e.end(), sB.begin(), sB.end());
      e.push_back({f, -1});
      e.insert(e.end(), sA.begin(), sA.end());
    }
    free_reduce(e);
    basis.expr[ef] = std::move(e);
  }
  return basis;
}

LassoWord lasso_decomposition(const CombinatorialMap& map, int unbounded_face, int loop_index) {
  auto basis = lasso_basis(map, unbounded_face);
  if (loop_index < 0 || loop_index >= map.num_loops())
    fail(ErrorCategory::argument, "bad loop index");
  LassoWord w;
  // traverse the loop's segments in order
  std::vector<int> segs;
  {
    int offset = 0;
    for (int l = 0; l < loop_index; ++l)
      offset += std::max<std::size_t>(1, map.diagram.loops[l].size());
    const int k = std::max<std::size_t>(1, map.diagram.loops[loop_index].size());
    for (int i = 0; i < k; ++i) segs.push_back(offset + i);
  }
  std::vector<std::pair<int, int>> letters;
  for (int s : segs) {
    if (basis.in_tree[s]) continue;
    const auto& e = basis.expr.at(s);
    letters.insert(letters.end(), e.begin(), e.end());
  }
  free_reduce(letters);
  w.letters = std::move(letters);
  return w;
}

std::vector<int> loop_gamma_word(const CombinatorialMap& map, const LassoBasis& basis,
                                 int loop_index) {
  std::vector<int> word;
  int offset = 0;
  for (int l = 0; l < loop_index; ++l)
    offset += std::max<std::size_t>(1, map.diagram.loops[l].size());
  const int k = std::max<std::size_t>(1, map.diagram.loops[loop_index].size());
  for (int i = 0; i < k; ++i) {
    const int s = offset + i;
    if (!basis.in_tree[s]) word.push_back(s + 1);
  }
  return word;
}

std::vector<int> expand_lasso_word(const CombinatorialMap& map, const LassoBasis& basis,
                                   const LassoWord& word) {
  std::vector<int> out;
  auto push = [&](int v) {
    if (!out.empty() && out.back() == -v)
      out.pop_back();
    else
      out.push_back(v);
  };
  for (auto [f, e] : word.letters) {
    std::vector<int> fw;
    for (int he : map.faces[f]) {
      const int s = he / 2;
      if (basis.in_tree[s]) continue;
      fw.push_back(he % 2 == 0 ? s + 1 : -(s + 1));
    }
    if (e == 1)
      for (int v : fw) push(v);
    else
      for (auto r = fw.rbegin(); r != fw.rend(); ++r) push(-*r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// loop files

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

ParsedLoopFile parse_loop_file(const std::string& text) {
  std::vector<std::vector<int>> codes;
  std::map<int, int> signs;
  std::vector<std::pair<std::string, double>> areas;  // (face name, value)
  bool sphere = false;
  double total_area = 0.0;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      fail(ErrorCategory::syntax, "line " + std::to_string(lineno) + ": expected 'key: ...'");
    const std::string key = trim(line.substr(0, colon));
    const std::string rest = trim(line.substr(colon + 1));
    std::istringstream toks(rest);
    if (key == "loop") {
      std::vector<int> code;
      int c;
      while (toks >> c) code.push_back(c);
      if (!toks.eof())
        fail(ErrorCategory::syntax, "line " + std::to_string(lineno) + ": bad crossing id");
      codes.push_back(code);
    } else if (key == "sign") {
      std::string tok;
      while (toks >> tok) {
        auto sep = tok.find(':');
        if (sep == std::string::npos)
          fail(ErrorCategory::syntax,
               "line " + std::to_string(lineno) + ": signs look like '1:+'");
        int c = 0;
        try {
          c = std::stoi(tok.substr(0, sep));
        } catch (...) {
          fail(ErrorCategory::syntax, "line " + std::to_string(lineno) + ": bad crossing id");
        }
        const std::string sv = tok.substr(sep + 1);
        if (sv != "+" && sv != "-")
          fail(ErrorCategory::syntax, "line " + std::to_string(lineno) + ": sign must be + or -");
        signs[c] = sv == "+" ? 1 : -1;
      }
    } else if (key == "area") {
      std::string tok;
      while (toks >> tok) {
        auto sep = tok.find('=');
        if (sep == std::string::npos)
          fail(ErrorCategory::syntax,
               "line " + std::to_string(lineno) + ": areas look like 'F1=0.5'");
        const std::string name = tok.substr(0, sep);
        double v = 0;
        try {
          v = std::stod(tok.substr(sep + 1));
        } catch (...) {
          fail(ErrorCategory::syntax, "line " + std::to_string(lineno) + ": bad area value");
        }
        if (v < 0)
          fail(ErrorCategory::semantic,
               "line " + std::to_string(lineno) + ": areas must be nonnegative");
        areas.push_back({name, v});
      }
    } else if (key == "surface") {
      std::string tag;
      toks >> tag;
      if (tag != "sphere")
        fail(ErrorCategory::unsupported,
             "line " + std::to_string(lineno) + ": only 'surface: sphere T=<area>' is supported");
      std::string tpart;
      toks >> tpart;
      if (tpart.rfind("T=", 0) != 0)
        fail(ErrorCategory::syntax, "line " + std::to_string(lineno) + ": expected T=<area>");
      sphere = true;
      total_area = std::stod(tpart.substr(2));
      if (total_area <= 0)
        fail(ErrorCategory::semantic, "line " + std::to_string(lineno) + ": T must be positive");
    } else {
      fail(ErrorCategory::syntax, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (codes.empty()) fail(ErrorCategory::syntax, "no 'loop:' line");

  ParsedLoopFile f;
  f.diagram = make_diagram(codes, signs);
  f.map = build_map(f.diagram);
  f.sphere = sphere;
  f.total_area = total_area;

  const int F = f.map.num_faces();
  auto face_index = [&](const std::string& name) {
    if (name.size() < 2 || name[0] != 'F')
      fail(ErrorCategory::semantic, "unknown face name '" + name + "'");
    int idx = 0;
    try {
      idx = std::stoi(name.substr(1));
    } catch (...) {
      fail(ErrorCategory::semantic, "unknown face name '" + name + "'");
    }
    if (idx < 1 || idx > F) fail(ErrorCategory::semantic, "unknown face name '" + name + "'");
    return idx - 1;
  };
  f.face_areas.assign(F, -1.0);
  for (const auto& [name, v] : areas) {
    const int idx = face_index(name);
    if (f.face_areas[idx] >= 0)
      fail(ErrorCategory::semantic, "face " + name + " given twice");
    f.face_areas[idx] = v;
  }
  std::vector<int> missing;
  for (int i = 0; i < F; ++i)
    if (f.face_areas[i] < 0) missing.push_back(i);
  if (sphere) {
    f.unbounded_face = -1;
    double sum = 0;
    for (int i = 0; i < F; ++i)
      if (f.face_areas[i] >= 0) sum += f.face_areas[i];
    if (missing.size() > 1)
      fail(ErrorCategory::semantic, "sphere file may omit at most one face area");
    if (missing.size() == 1) {
      const double rem = total_area - sum;
      if (rem < -1e-9)
        fail(ErrorCategory::semantic, "face areas exceed the total sphere area");
      f.face_areas[missing[0]] = std::max(0.0, rem);
    } else if (std::abs(sum - total_area) > 1e-9) {
      fail(ErrorCategory::semantic, "face areas must sum to the total sphere area");
    }
  } else {
    if (missing.empty())
      fail(ErrorCategory::semantic,
           "area given for every face; omit the unbounded face");
    if (missing.size() > 1)
      fail(ErrorCategory::semantic, "exactly one face (the unbounded one) may lack an area");
    f.unbounded_face = missing[0];
    f.face_areas[f.unbounded_face] = 0.0;
  }
  return f;
}

std::string serialize_loop_file(const ParsedLoopFile& f) {
  std::ostringstream out;
  if (f.sphere) out << "surface: sphere T=" << f.total_area << "\n";
  for (const auto& loop : f.diagram.loops) {
    out << "loop:";
    for (const auto& v : loop) out << " " << v.crossing;
    out << "\n";
  }
  if (!f.diagram.handedness.empty()) {
    out << "sign:";
    for (const auto& [c, s] : f.diagram.handedness) out << " " << c << (s > 0 ? ":+" : ":-");
    out << "\n";
  }
  out << "area:";
  for (int i = 0; i < f.map.num_faces(); ++i) {
    if (i == f.unbounded_face) continue;
    if (f.sphere && i == f.map.num_faces() - 1) continue;  // derivable from T
    out << " F" << (i + 1) << "=" << f.face_areas[i];
  }
  out << "\n";
  return out.str();
}

namespace {

std::string hex_double(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  std::ostringstream o;
  o << std::hex << bits;
  return o.str();
}

}  // namespace

std::string canonical_key(const CombinatorialMap& map, const std::vector<double>& face_areas,
                          int unbounded_face) {
  auto present = [&](const LoopDiagram& d, const CombinatorialMap& m,
                     const std::vector<double>& areas, int unb) {
    std::ostringstream o;
    for (const auto& loop : d.loops) {
      o << "L";
      std::map<int, int> relabel;
      for (const auto& v : loop) {
        auto it = relabel.find(v.crossing);
        int id = it == relabel.end()
                     ? relabel.emplace(v.crossing, static_cast<int>(relabel.size())).first->second
                     : it->second;
        o << " " << id;
      }
      o << " S";
      for (const auto& [c, id] : relabel) o << " " << id << ":" << d.handedness.at(c);
      o << ";";
    }
    o << "U" << unb << "|A";
    for (double a : areas) o << " " << hex_double(a);
    return o.str();
  };

  if (map.num_loops() != 1 || map.diagram.loops[0].empty())
    return present(map.diagram, map, face_areas, unbounded_face);

  const auto& visits = map.diagram.loops[0];
  const int k = static_cast<int>(visits.size());
  std::string best;
  for (int r = 0; r < k; ++r) {
    // rotate so visit r comes first
    std::vector<Visit> rot(visits.begin() + r, visits.end());
    rot.insert(rot.end(), visits.begin(), visits.begin() + r);
    std::vector<int> code;
    std::map<int, int> first_occ;
    for (const auto& v : rot) {
      code.push_back(v.crossing);
      if (!first_occ.count(v.crossing)) first_occ[v.crossing] = v.occurrence;
    }
    std::map<int, int> signs;
    for (const auto& [c, occ] : first_occ) {
      int s = map.diagram.handedness.at(c);
      signs[c] = occ == 0 ? s : -s;
    }
    LoopDiagram rd = make_diagram({code}, signs);
    CombinatorialMap rm = build_map(rd);
    // rotated segment j corresponds to original segment (r + j) % k
    std::vector<double> rareas(rm.num_faces(), 0.0);
    std::vector<int> fmap(rm.num_faces(), -1);
    for (int j = 0; j < k; ++j) {
      const int os = (r + j) % k;
      for (int dir = 0; dir < 2; ++dir) {
        const int nf = rm.face_of[2 * j + dir];
        const int of = map.face_of[2 * os + dir];
        if (fmap[nf] == -1)
          fmap[nf] = of;
        else if (fmap[nf] != of)
          fail(ErrorCategory::realizability, "internal: rotation face mismatch");
      }
    }
    int runb = -1;
    for (int nf = 0; nf < rm.num_faces(); ++nf) {
      rareas[nf] = face_areas[fmap[nf]];
      if (fmap[nf] == unbounded_face) runb = nf;
    }
    std::string cand = present(rd, rm, rareas, runb);
    if (best.empty() || cand < best) best = cand;
  }
  return best;
}

}  // namespace ym2::loops
