#include "ym2/lattice_ym.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "ym2/errors.hpp"
#include "ym2/exact.hpp"
#include "ym2/util.hpp"

namespace ym2::lat {

using Matrix = Eigen::MatrixXcd;

void SurfaceGraph::validate() const {
  for (const auto& f : faces) {
    if (f.boundary.empty()) fail(ErrorCategory::argument, "face with empty boundary");
    int at = -1;
    for (int se : f.boundary) {
      const int e = std::abs(se) - 1;
      if (e < 0 || e >= num_edges()) fail(ErrorCategory::argument, "face boundary edge id");
      const int from = se > 0 ? edges[e].tail : edges[e].head;
      const int to = se > 0 ? edges[e].head : edges[e].tail;
      if (at >= 0 && from != at) fail(ErrorCategory::argument, "face boundary not a closed walk");
      at = to;
    }
    const int se0 = f.boundary.front();
    const int start = se0 > 0 ? edges[std::abs(se0) - 1].tail : edges[std::abs(se0) - 1].head;
    if (at != start) fail(ErrorCategory::argument, "face boundary not closed");
    if (f.area < 0) fail(ErrorCategory::argument, "face areas must be nonnegative");
  }
  const int chi = n_vertices - num_edges() + static_cast<int>(faces.size());
  if (chi != 2) fail(ErrorCategory::argument, "graph Euler characteristic must be 2");
  if (!sphere && (unbounded_face < 0 || unbounded_face >= static_cast<int>(faces.size())))
    fail(ErrorCategory::argument, "plane graph needs an unbounded face");
  if (sphere && total_area <= 0) fail(ErrorCategory::argument, "sphere graph needs T > 0");
}

SurfaceGraph from_loop_file(const loops::ParsedLoopFile& file) {
  SurfaceGraph g;
  g.sphere = file.sphere;
  g.total_area = file.total_area;
  g.unbounded_face = file.unbounded_face;
  const auto& m = file.map;
  g.n_vertices = m.n_vertices;
  for (int s = 0; s < m.n_segments; ++s)
    g.edges.push_back({m.he_tail[2 * s], m.he_tail[2 * s + 1]});
  for (int f = 0; f < m.num_faces(); ++f)
    g.faces.push_back({m.face_boundary_segments(f), file.face_areas[f]});
  int offset = 0;
  for (const auto& loop : m.diagram.loops) {
    const int k = std::max<std::size_t>(1, loop.size());
    std::vector<int> path;
    for (int i = 0; i < k; ++i) path.push_back(offset + i + 1);
    g.loops.push_back(path);
    offset += k;
  }
  g.validate();
  return g;
}

SurfaceGraph split_edge(const SurfaceGraph& g, int edge) {
  if (edge < 0 || edge >= g.num_edges()) fail(ErrorCategory::argument, "bad edge id");
  SurfaceGraph h = g;
  const int w = h.n_vertices++;
  const int e1 = edge;                // tail -> w
  const int e2 = h.num_edges();       // w -> head
  h.edges.push_back({w, g.edges[edge].head});
  h.edges[e1].head = w;
  auto rewrite = [&](std::vector<int>& word) {
    std::vector<int> out;
    for (int se : word) {
      if (se == edge + 1) {
        out.push_back(e1 + 1);
        out.push_back(e2 + 1);
      } else if (se == -(edge + 1)) {
        out.push_back(-(e2 + 1));
        out.push_back(-(e1 + 1));
      } else {
        out.push_back(se);
      }
    }
    word = std::move(out);
  };
  for (auto& f : h.faces) rewrite(f.boundary);
  for (auto& l : h.loops) rewrite(l);
  h.validate();
  return h;
}

SurfaceGraph add_chord(const SurfaceGraph& g, int face, int pos1, int pos2, double frac) {
  if (face < 0 || face >= static_cast<int>(g.faces.size()))
    fail(ErrorCategory::argument, "bad face id");
  if (!g.sphere && face == g.unbounded_face)
    fail(ErrorCategory::argument, "cannot chord the unbounded face");
  const auto& b = g.faces[face].boundary;
  const int m = static_cast<int>(b.size());
  if (pos1 == pos2 || pos1 < 0 || pos2 < 0 || pos1 >= m || pos2 >= m)
    fail(ErrorCategory::argument, "chord endpoints must be distinct boundary corners");
  if (pos1 > pos2) std::swap(pos1, pos2);
  if (!(frac > 0 && frac < 1)) fail(ErrorCategory::argument, "area fraction must be in (0,1)");

  auto corner_vertex = [&](int pos) {
    const int se = b[pos];
    const int e = std::abs(se) - 1;
    return se > 0 ? g.edges[e].tail : g.edges[e].head;  // walk start of b[pos]
  };
  SurfaceGraph h = g;
  const int c = h.num_edges();
  const int v1 = corner_vertex(pos1), v2 = corner_vertex(pos2);
  h.edges.push_back({v2, v1});  // chord from v2 back to v1

  // F1 = b[pos1..pos2) + chord,  F2 = b[pos2..) + b[..pos1) + chord^{-1}
  std::vector<int> b1(b.begin() + pos1, b.begin() + pos2);
  b1.push_back(c + 1);
  std::vector<int> b2(b.begin() + pos2, b.end());
  b2.insert(b2.end(), b.begin(), b.begin() + pos1);
  b2.push_back(-(c + 1));

  const double area = g.faces[face].area;
  h.faces[face] = {b1, frac * area};
  h.faces.push_back({b2, (1 - frac) * area});
  h.validate();
  return h;
}

Matrix holonomy(const SurfaceGraph& g, const Config& cfg, const std::vector<int>& path) {
  if (cfg.size() != static_cast<std::size_t>(g.num_edges()))
    fail(ErrorCategory::argument, "configuration size mismatch");
  const int N = static_cast<int>(cfg.empty() ? 1 : cfg[0].rows());
  Matrix h = Matrix::Identity(N, N);
  int at = -1;
  for (int se : path) {
    const int e = std::abs(se) - 1;
    if (e < 0 || e >= g.num_edges()) fail(ErrorCategory::argument, "path edge not in graph");
    const int from = se > 0 ? g.edges[e].tail : g.edges[e].head;
    const int to = se > 0 ? g.edges[e].head : g.edges[e].tail;
    if (at >= 0 && from != at) fail(ErrorCategory::argument, "path edges not concatenable");
    at = to;
    // order-reversing: h_{e_n ... e_1} = g_{e_n} ... g_{e_1}
    h = (se > 0 ? cfg[e] : Matrix(cfg[e].adjoint())) * h;
  }
  return h;
}

Config gauge_act(const SurfaceGraph& g, const Config& cfg,
                 const std::vector<Eigen::MatrixXcd>& j) {
  if (j.size() != static_cast<std::size_t>(g.n_vertices))
    fail(ErrorCategory::argument, "need one group element per vertex");
  Config out = cfg;
  for (int e = 0; e < g.num_edges(); ++e)
    out[e] = j[g.edges[e].head].adjoint() * cfg[e] * j[g.edges[e].tail];
  return out;
}

namespace {

struct UF {
  std::vector<int> p;
  explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[a] = b;
    return true;
  }
};

struct DualTree {
  std::vector<char> in_tree;        // primal spanning tree membership
  std::vector<int> parent_edge;     // per face, -1 at root
  std::vector<int> order;           // faces by decreasing depth
};

// Primal minimal-id spanning tree + dual tree over the non-tree edges.
DualTree build_dual_tree(const SurfaceGraph& g, int root_face) {
  DualTree dt;
  dt.in_tree.assign(g.num_edges(), 0);
  UF uf(g.n_vertices);
  for (int e = 0; e < g.num_edges(); ++e)
    if (uf.unite(g.edges[e].tail, g.edges[e].head)) dt.in_tree[e] = 1;

  const int F = static_cast<int>(g.faces.size());
  std::vector<std::vector<std::pair<int, int>>> adj(F);
  std::vector<std::pair<int, int>> side(g.num_edges(), {-1, -1});
  for (int f = 0; f < F; ++f)
    for (int se : g.faces[f].boundary) {
      const int e = std::abs(se) - 1;
      if (se > 0) side[e].first = f;
      else side[e].second = f;
    }
  for (int e = 0; e < g.num_edges(); ++e) {
    if (dt.in_tree[e]) continue;
    const auto [fa, fb] = side[e];
    if (fa < 0 || fb < 0 || fa == fb)
      fail(ErrorCategory::argument, "face boundaries do not cover both edge sides");
    adj[fa].push_back({fb, e});
    adj[fb].push_back({fa, e});
  }
  dt.parent_edge.assign(F, -1);
  std::vector<int> depth(F, -1);
  std::deque<int> q{root_face};
  depth[root_face] = 0;
  std::vector<int> bfs;
  while (!q.empty()) {
    const int f = q.front();
    q.pop_front();
    bfs.push_back(f);
    for (auto [gf, e] : adj[f]) {
      if (depth[gf] >= 0) continue;
      depth[gf] = depth[f] + 1;
      dt.parent_edge[gf] = e;
      q.push_back(gf);
    }
  }
  if (static_cast<int>(bfs.size()) != F)
    fail(ErrorCategory::argument, "dual graph of non-tree edges does not span the faces");
  dt.order.assign(bfs.rbegin(), bfs.rend());
  return dt;
}

}  // namespace

Config sample_plane_config(const SurfaceGraph& g, int N, double step, RandomStream& rng) {
  if (g.sphere)
    fail(ErrorCategory::unsupported, "exact sampling is available on the plane only");
  g.validate();
  DualTree dt = build_dual_tree(g, g.unbounded_face);
  Config cfg(g.num_edges(), Matrix::Identity(N, N));
  std::vector<char> assigned(g.num_edges(), 0);
  for (int e = 0; e < g.num_edges(); ++e)
    if (dt.in_tree[e]) assigned[e] = 1;

  for (int f : dt.order) {
    if (f == g.unbounded_face) continue;
    const Matrix X = ubm::sample_unitary_bm(N, g.faces[f].area, step, rng);
    // solve for the one unassigned boundary edge: holonomy(boundary) = X
    const auto& b = g.faces[f].boundary;
    int idx = -1;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const int e = std::abs(b[i]) - 1;
      if (!assigned[e]) {
        if (e != dt.parent_edge[f])
          fail(ErrorCategory::argument, "internal: unexpected free edge on face boundary");
        if (idx >= 0) fail(ErrorCategory::argument, "internal: two free edges on face boundary");
        idx = static_cast<int>(i);
      }
    }
    if (idx < 0) fail(ErrorCategory::argument, "internal: no free edge on face boundary");
    // holonomy = R * v_idx * L with L, R over assigned edges
    Matrix L = Matrix::Identity(N, N), R = Matrix::Identity(N, N);
    for (int i = 0; i < idx; ++i) {
      const int e = std::abs(b[i]) - 1;
      L = (b[i] > 0 ? cfg[e] : Matrix(cfg[e].adjoint())) * L;
    }
    for (std::size_t i = idx + 1; i < b.size(); ++i) {
      const int e = std::abs(b[i]) - 1;
      R = (b[i] > 0 ? cfg[e] : Matrix(cfg[e].adjoint())) * R;
    }
    const int e = std::abs(b[idx]) - 1;
    const Matrix v = R.adjoint() * X * L.adjoint();
    cfg[e] = b[idx] > 0 ? v : Matrix(v.adjoint());
    assigned[e] = 1;
  }
  return cfg;
}

std::vector<long long> face_windings(const SurfaceGraph& g, const std::vector<int>& path) {
  const int E = g.num_edges();
  const int F = static_cast<int>(g.faces.size());
  // abelianized path vector
  std::vector<long long> x(E, 0);
  for (int se : path) x[std::abs(se) - 1] += se > 0 ? 1 : -1;

  // Solve x = sum_F n_F * chi(dF) with one face pinned to 0 (the unbounded
  // face on the plane, the last face on the sphere).
  const int pinned = g.sphere ? F - 1 : g.unbounded_face;
  std::vector<int> cols;
  for (int f = 0; f < F; ++f)
    if (f != pinned) cols.push_back(f);
  std::vector<std::vector<Rat>> A(E, std::vector<Rat>(cols.size() + 1, Rat(0)));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (int se : g.faces[cols[j]].boundary) {
      const int e = std::abs(se) - 1;
      A[e][j] += Rat(Int(se > 0 ? 1 : -1));
    }
  for (int e = 0; e < E; ++e) A[e][cols.size()] = Rat(Int(x[e]));

  // Gaussian elimination with the augmented column.
  const std::size_t nc = cols.size();
  std::size_t row = 0;
  std::vector<int> pivot_col(nc, -1);
  for (std::size_t c = 0; c < nc && row < A.size(); ++c) {
    std::size_t piv = row;
    while (piv < A.size() && A[piv][c] == Rat(0)) ++piv;
    if (piv == A.size()) continue;
    std::swap(A[row], A[piv]);
    for (std::size_t i = 0; i < A.size(); ++i) {
      if (i == row || A[i][c] == Rat(0)) continue;
      Rat f = A[i][c] / A[row][c];
      for (std::size_t j = c; j <= nc; ++j) A[i][j] -= f * A[row][j];
    }
    pivot_col[c] = static_cast<int>(row);
    ++row;
  }
  std::vector<long long> n(F, 0);
  for (std::size_t c = 0; c < nc; ++c) {
    if (pivot_col[c] < 0) fail(ErrorCategory::argument, "face system rank-deficient");
    Rat v = A[pivot_col[c]][nc] / A[pivot_col[c]][c];
    if (v.denominator() != 1)
      fail(ErrorCategory::argument, "path is not a cycle of the face lattice");
    n[cols[c]] = v.numerator().convert_to<long long>();
  }
  // consistency: any remaining rows must be zero = zero
  for (std::size_t i = row; i < A.size(); ++i)
    if (A[i][nc] != Rat(0))
      fail(ErrorCategory::argument, "path vector outside the face-cycle space");
  return n;
}

double u1_exact_wilson(const SurfaceGraph& g, const std::vector<std::vector<int>>& loop_paths,
                       double* tail_bound) {
  g.validate();
  const int F = static_cast<int>(g.faces.size());
  std::vector<long long> n(F, 0);
  for (const auto& p : loop_paths) {
    auto w = face_windings(g, p);
    for (int f = 0; f < F; ++f) n[f] += w[f];
  }
  if (!g.sphere) {
    double expo = 0.0;
    for (int f = 0; f < F; ++f) {
      if (f == g.unbounded_face) continue;
      expo += static_cast<double>(n[f]) * n[f] * g.faces[f].area;
    }
    if (tail_bound) *tail_bound = 0.0;
    return std::exp(-0.5 * expo);
  }
  // sphere: ratio of theta-type sums over the integer shift
  auto term_num = [&](long long k) {
    double expo = 0.0;
    for (int f = 0; f < F; ++f)
      expo += 0.5 * (n[f] + k) * (n[f] + k) * g.faces[f].area;
    return std::exp(-expo);
  };
  auto term_den = [&](long long k) { return std::exp(-0.5 * k * k * g.total_area); };
  double num = 0.0, den = 0.0, tail = 0.0;
  const long long K = 64 + static_cast<long long>(std::ceil(std::sqrt(80.0 / g.total_area)));
  for (long long k = -K; k <= K; ++k) {
    num += term_num(k);
    den += term_den(k);
  }
  tail = term_num(K + 1) + term_num(-K - 1) + term_den(K + 1) + term_den(-K - 1);
  if (tail_bound) *tail_bound = tail;
  if (tail > 1e-13 * den)
    fail(ErrorCategory::cutoff, "theta-series cutoff insufficient");
  return num / den;
}

namespace {

double theta_density(double t, double angle) {
  // p_t(e^{i a}) = 1 + 2 sum_{k>=1} e^{-k^2 t/2} cos(k a)
  double acc = 1.0;
  for (int k = 1;; ++k) {
    const double w = std::exp(-0.5 * k * k * t);
    if (w < 1e-17) break;
    acc += 2.0 * w * std::cos(k * angle);
  }
  return acc;
}

template <typename Fn>
void grid_scan(int dims, int g, std::vector<double>& theta, const Fn& fn, int at = 0) {
  if (at == dims) {
    fn(theta);
    return;
  }
  for (int i = 0; i < g; ++i) {
    theta[at] = 2.0 * M_PI * i / g;
    grid_scan(dims, g, theta, fn, at + 1);
  }
}

}  // namespace

double u1_quadrature_wilson(const SurfaceGraph& g, const std::vector<std::vector<int>>& loop_paths,
                            int grid_points) {
  if (g.num_edges() > 4)
    fail(ErrorCategory::resource, "quadrature oracle limited to graphs with <= 4 edges");
  double num = 0.0, den = 0.0;
  std::vector<double> theta(g.num_edges());
  grid_scan(g.num_edges(), grid_points, theta, [&](const std::vector<double>& th) {
    double w = 1.0;
    for (int f = 0; f < static_cast<int>(g.faces.size()); ++f) {
      if (!g.sphere && f == g.unbounded_face) continue;
      double a = 0.0;
      for (int se : g.faces[f].boundary) a += se > 0 ? th[se - 1] : -th[-se - 1];
      w *= theta_density(g.sphere ? g.faces[f].area : g.faces[f].area, a);
    }
    double phase = 0.0;
    for (const auto& p : loop_paths)
      for (int se : p) phase += se > 0 ? th[se - 1] : -th[-se - 1];
    num += w * std::cos(phase);
    den += w;
  });
  return num / den;
}

double u1_quadrature_partition(const SurfaceGraph& g, int grid_points) {
  if (g.num_edges() > 4)
    fail(ErrorCategory::resource, "quadrature oracle limited to graphs with <= 4 edges");
  double den = 0.0;
  std::vector<double> theta(g.num_edges());
  grid_scan(g.num_edges(), grid_points, theta, [&](const std::vector<double>& th) {
    double w = 1.0;
    for (int f = 0; f < static_cast<int>(g.faces.size()); ++f) {
      if (!g.sphere && f == g.unbounded_face) continue;
      double a = 0.0;
      for (int se : g.faces[f].boundary) a += se > 0 ? th[se - 1] : -th[-se - 1];
      w *= theta_density(g.faces[f].area, a);
    }
    den += w;
  });
  const double cell = 1.0 / grid_points;  // normalized Haar per edge
  return den * std::pow(cell, g.num_edges());
}

ubm::McEstimate mc_wilson(const SurfaceGraph& g, int loop_index, int trace_power,
                          const McParams& params) {
  if (loop_index < 0 || loop_index >= static_cast<int>(g.loops.size()))
    fail(ErrorCategory::argument, "bad loop index");
  if (trace_power < 1) fail(ErrorCategory::argument, "trace power must be >= 1");
  std::vector<double> vals(params.samples);
  parallel_for(params.samples, [&](std::size_t s) {
    RandomStream rng(params.seed, s);
    Config cfg = sample_plane_config(g, params.N, params.step, rng);
    const Matrix h = holonomy(g, cfg, g.loops[loop_index]);
    const std::complex<double> tr = h.trace() / double(params.N);
    std::complex<double> v = 1.0;
    for (int p = 0; p < trace_power; ++p) v *= tr;
    vals[s] = v.real();
  });
  const double mean = ubm::pairwise_sum(vals) / double(params.samples);
  std::vector<double> sq(params.samples);
  for (std::size_t i = 0; i < params.samples; ++i) sq[i] = (vals[i] - mean) * (vals[i] - mean);
  const double var =
      params.samples > 1 ? ubm::pairwise_sum(sq) / double(params.samples - 1) : 0.0;
  ubm::McEstimate est;
  est.mean = mean;
  est.stderror = std::sqrt(var / double(params.samples));
  est.samples = params.samples;
  est.seed = params.seed;
  est.step = params.step;
  return est;
}

SubdivisionReport subdivision_check(const SurfaceGraph& coarse, const SurfaceGraph& fine,
                                    const std::optional<McParams>& mc) {
  if (coarse.loops.size() != fine.loops.size())
    fail(ErrorCategory::argument, "graphs must carry the same marked loops");
  SubdivisionReport rep;
  rep.u1_coarse = u1_exact_wilson(coarse, coarse.loops);
  rep.u1_fine = u1_exact_wilson(fine, fine.loops);
  rep.u1_deviation = std::abs(rep.u1_coarse - rep.u1_fine);
  if (mc) {
    rep.mc_checked = true;
    rep.mc_coarse = mc_wilson(coarse, 0, 1, *mc);
    rep.mc_fine = mc_wilson(fine, 0, 1, *mc);
    const double se =
        std::sqrt(rep.mc_coarse.stderror * rep.mc_coarse.stderror +
                  rep.mc_fine.stderror * rep.mc_fine.stderror);
    rep.mc_within_4se = std::abs(rep.mc_coarse.mean - rep.mc_fine.mean) <= 4.0 * se;
  }
  return rep;
}

}  // namespace ym2::lat
