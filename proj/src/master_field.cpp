#include "ym2/master_field.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <string>

#include "ym2/errors.hpp"
#include "ym2/ode.hpp"

namespace ym2::mf {

using loops::CombinatorialMap;
using loops::LoopDiagram;

namespace {

// Reference to a recursion child: either a crossing-free loop (closed form
// e^{-a s/2}) or another ODE state.
struct ChildRef {
  bool analytic = false;
  double area = 0.0;  // analytic case: enclosed area at s = 1
  int node = -1;
};

struct Row {
  Eigen::VectorXd coeff;  // over the node's bounded-face unknowns
  ChildRef a, b;          // right-hand side Phi(a) * Phi(b)
  bool outer = false;     // outer rule row: rhs = -Phi/2
};

struct Node {
  CombinatorialMap map;
  std::vector<double> areas;  // per face at s = 1
  int unbounded = -1;
  std::vector<int> bounded;        // face ids in unknown order
  Eigen::VectorXd direction;       // d(areas)/ds per unknown
  std::vector<Row> rows;
  Eigen::MatrixXd A;               // stacked row coefficients (constant in s)
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;

  void finalize() {
    const int d = static_cast<int>(bounded.size());
    const int m = static_cast<int>(rows.size());
    A.resize(m, d);
    for (int r = 0; r < m; ++r) A.row(r) = rows[r].coeff;
    qr.compute(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < d)
      fail(ErrorCategory::underdetermined,
           "gradient system underdetermined by MM + outer rule (rank " +
               std::to_string(qr.rank()) + " of " + std::to_string(d) + ")");
  }

  Eigen::VectorXd rhs(double s, const Eigen::VectorXd& y, double value) const;
};

struct Registry {
  std::vector<Node> nodes;
  std::map<std::string, int> index;

  ChildRef enter(const CombinatorialMap& map, const std::vector<double>& areas, int unbounded);
};

double bounded_area_total(const CombinatorialMap& map, const std::vector<double>& areas,
                          int unbounded) {
  double a = 0.0;
  for (int f = 0; f < map.num_faces(); ++f)
    if (f != unbounded) a += areas[f];
  return a;
}

ChildRef Registry::enter(const CombinatorialMap& map, const std::vector<double>& areas,
                         int unbounded) {
  if (map.num_loops() != 1)
    fail(ErrorCategory::argument, "recursion nodes must be single loops");
  if (map.diagram.loops[0].empty()) {
    ChildRef c;
    c.analytic = true;
    c.area = bounded_area_total(map, areas, unbounded);
    return c;
  }
  const std::string key = loops::canonical_key(map, areas, unbounded);
  auto it = index.find(key);
  if (it != index.end()) return ChildRef{false, 0.0, it->second};

  const int id = static_cast<int>(nodes.size());
  index[key] = id;
  nodes.push_back({});  // reserve slot; fill after recursion (children first)
  Node node;
  node.map = map;
  node.areas = areas;
  node.unbounded = unbounded;
  for (int f = 0; f < map.num_faces(); ++f)
    if (f != unbounded) node.bounded.push_back(f);
  const int d = static_cast<int>(node.bounded.size());
  node.direction.resize(d);
  for (int i = 0; i < d; ++i) node.direction[i] = areas[node.bounded[i]];

  for (const auto& [c, ci] : map.crossings) {
    auto mm = loops::mm_vector_full(map, c);
    Row row;
    row.coeff.resize(d);
    for (int i = 0; i < d; ++i) row.coeff[i] = static_cast<double>(mm[node.bounded[i]]);
    auto des = loops::desingularize(map, areas, unbounded, c);
    if (!des.case_one)
      fail(ErrorCategory::argument, "internal: single-loop node with a two-loop crossing");
    row.a = enter(des.pieces[0].map, des.pieces[0].areas, des.pieces[0].unbounded_face);
    row.b = enter(des.pieces[1].map, des.pieces[1].areas, des.pieces[1].unbounded_face);
    node.rows.push_back(std::move(row));
  }
  for (int i = 0; i < d; ++i) {
    if (map.face_adjacent(node.bounded[i], unbounded)) {
      Row row;
      row.coeff = Eigen::VectorXd::Zero(d);
      row.coeff[i] = 1.0;
      row.outer = true;
      node.rows.push_back(std::move(row));
    }
  }
  node.finalize();
  nodes[id] = std::move(node);
  return ChildRef{false, 0.0, id};
}

double child_value(const ChildRef& c, double s, const Eigen::VectorXd& y) {
  return c.analytic ? std::exp(-0.5 * s * c.area) : y[c.node];
}

Eigen::VectorXd Node::rhs(double s, const Eigen::VectorXd& y, double value) const {
  const int m = static_cast<int>(rows.size());
  Eigen::VectorXd b(m);
  for (int r = 0; r < m; ++r)
    b[r] = rows[r].outer ? -0.5 * value
                         : child_value(rows[r].a, s, y) * child_value(rows[r].b, s, y);
  return b;
}

double solve_single_loop(const CombinatorialMap& map, const std::vector<double>& areas,
                         int unbounded, double tolerance) {
  if (map.diagram.loops[0].empty() || map.crossings.empty())
    return std::exp(-0.5 * bounded_area_total(map, areas, unbounded));

  Registry reg;
  ChildRef root = reg.enter(map, areas, unbounded);
  const int n = static_cast<int>(reg.nodes.size());
  Eigen::VectorXd y = Eigen::VectorXd::Ones(n);

  auto f = [&](double s, const Eigen::VectorXd& state, Eigen::VectorXd& dy) {
    for (int i = 0; i < n; ++i) {
      const Node& node = reg.nodes[i];
      const Eigen::VectorXd g = node.qr.solve(node.rhs(s, state, state[i]));
      dy[i] = node.direction.dot(g);
    }
  };
  OdeOptions opt;
  opt.atol = std::min(tolerance / 10.0, 1e-10);
  opt.rtol = opt.atol;
  integrate_dp5(f, y, 0.0, 1.0, opt);

  // Over-determined systems must close at the converged solution; a residual
  // here means MM plus the outer rule do not cohere on this diagram.
  const double gate = 1e-8;
  for (int i = 0; i < n; ++i) {
    const Node& node = reg.nodes[i];
    const Eigen::VectorXd b = node.rhs(1.0, y, y[i]);
    const Eigen::VectorXd g = node.qr.solve(b);
    const double resid = (node.A * g - b).cwiseAbs().maxCoeff();
    if (resid > gate * std::max(1.0, b.cwiseAbs().maxCoeff()))
      fail(ErrorCategory::underdetermined,
           "gradient system inconsistent (residual " + std::to_string(resid) + ")");
  }
  return y[root.node];
}

}  // namespace

double phi_plane(const MasterFieldQuery& query) {
  if (query.tolerance <= 0) fail(ErrorCategory::argument, "tolerance must be positive");
  CombinatorialMap map = loops::build_map(query.diagram);
  if (query.unbounded_face < 0 || query.unbounded_face >= map.num_faces())
    fail(ErrorCategory::unsupported, "master field evaluation requires a plane diagram");
  if (static_cast<int>(query.face_areas.size()) != map.num_faces())
    fail(ErrorCategory::argument, "area vector size mismatch");
  for (double a : query.face_areas)
    if (!(a >= 0) || !std::isfinite(a))
      fail(ErrorCategory::argument, "face areas must be finite and nonnegative");

  if (map.num_loops() == 1)
    return solve_single_loop(map, query.face_areas, query.unbounded_face, query.tolerance);

  // Wilson expectations factorize over loops in the large-N limit.
  double prod = 1.0;
  for (int l = 0; l < map.num_loops(); ++l) {
    auto piece = loops::standalone_loop(map, query.face_areas, query.unbounded_face, l);
    prod *= solve_single_loop(piece.map, piece.areas, piece.unbounded_face, query.tolerance);
  }
  return prod;
}

double phi_plane(const loops::ParsedLoopFile& file, double tolerance) {
  if (file.sphere)
    fail(ErrorCategory::unsupported, "master field evaluation is plane-only");
  MasterFieldQuery q;
  q.diagram = file.diagram;
  q.face_areas = file.face_areas;
  q.unbounded_face = file.unbounded_face;
  q.tolerance = tolerance;
  return phi_plane(q);
}

std::vector<double> phi_gradient(const MasterFieldQuery& query) {
  CombinatorialMap map = loops::build_map(query.diagram);
  if (map.num_loops() != 1)
    fail(ErrorCategory::unsupported, "gradient exposed for single-loop diagrams");
  if (map.crossings.empty()) {
    // single bounded face, outer rule alone
    std::vector<double> g(map.num_faces(), 0.0);
    const double phi = phi_plane(query);
    for (int f = 0; f < map.num_faces(); ++f)
      if (f != query.unbounded_face) g[f] = -0.5 * phi;
    return g;
  }

  const double phi = phi_plane(query);
  std::vector<int> bounded;
  for (int f = 0; f < map.num_faces(); ++f)
    if (f != query.unbounded_face) bounded.push_back(f);
  const int d = static_cast<int>(bounded.size());

  std::vector<Eigen::VectorXd> coeffs;
  std::vector<double> rhs;
  for (const auto& [c, ci] : map.crossings) {
    auto mm = loops::mm_vector_full(map, c);
    Eigen::VectorXd row(d);
    for (int i = 0; i < d; ++i) row[i] = static_cast<double>(mm[bounded[i]]);
    auto des = loops::desingularize(map, query.face_areas, query.unbounded_face, c);
    double prod = 1.0;
    for (const auto& p : des.pieces) {
      MasterFieldQuery sub;
      sub.diagram = p.diagram;
      sub.face_areas = p.areas;
      sub.unbounded_face = p.unbounded_face;
      sub.tolerance = query.tolerance;
      prod *= phi_plane(sub);
    }
    coeffs.push_back(row);
    rhs.push_back(prod);
  }
  for (int i = 0; i < d; ++i) {
    if (map.face_adjacent(bounded[i], query.unbounded_face)) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(d);
      row[i] = 1.0;
      coeffs.push_back(row);
      rhs.push_back(-0.5 * phi);
    }
  }
  const int m = static_cast<int>(coeffs.size());
  Eigen::MatrixXd A(m, d);
  Eigen::VectorXd b(m);
  for (int r = 0; r < m; ++r) {
    A.row(r) = coeffs[r];
    b[r] = rhs[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < d)
    fail(ErrorCategory::underdetermined, "gradient system underdetermined by MM + outer rule");
  Eigen::VectorXd g = qr.solve(b);
  const double resid = (A * g - b).cwiseAbs().maxCoeff();
  if (resid > 1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff()))
    fail(ErrorCategory::underdetermined, "gradient system inconsistent");
  std::vector<double> out(map.num_faces(), 0.0);
  for (int i = 0; i < d; ++i) out[bounded[i]] = g[i];
  return out;
}

}  // namespace ym2::mf
