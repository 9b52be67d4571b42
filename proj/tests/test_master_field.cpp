#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ym2/errors.hpp"
#include "ym2/master_field.hpp"
#include "ym2/unitary_bm.hpp"

using namespace ym2;
using namespace ym2::loops;
using namespace ym2::mf;

namespace {

ParsedLoopFile fixture(const std::string& name) {
  std::ifstream in(std::string(YM2_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_loop_file(ss.str());
}

double phi_with_areas(const ParsedLoopFile& f, const std::map<int, double>& areas, double tol) {
  MasterFieldQuery q;
  q.diagram = f.diagram;
  q.face_areas = f.face_areas;
  for (const auto& [face, a] : areas) q.face_areas[face] = a;
  q.unbounded_face = f.unbounded_face;
  q.tolerance = tol;
  return phi_plane(q);
}

// closed forms of the recursion targets
double heart_value(double s, double t) { return std::exp(-0.5 * s - t) * (1.0 - t); }
double eight_value(double s, double t, double u, double v) {
  return std::exp(-0.5 * (s + t)) * (std::exp(-u) + std::exp(-v) - std::exp(-(u + v)));
}
// worked five-face example; the quadratic coefficient is pinned by the third
// free moment at collapsed outer faces (see the dedicated check below)
double five_face_value(double s1, double s2, double t1, double t2, double u) {
  return std::exp(-0.5 * (s1 + s2) - (t1 + t2) - 1.5 * u) *
         (1.5 * u * u + (t1 + t2 - 3.0) * u + (1.0 - t1) * (1.0 - t2));
}

}  // namespace

TEST_SUITE_BEGIN("master_field");

TEST_CASE("simple loop") {
  auto f = fixture("simple.loop");
  CHECK(phi_plane(f, 1e-9) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));  // area 2
  CHECK(phi_with_areas(f, {{0, 0.25}}, 1e-9) ==
        doctest::Approx(std::exp(-0.125)).epsilon(1e-9));
}

TEST_CASE("heart diagram matches its closed form") {
  auto f = fixture("heart.loop");
  for (double s : {0.2, 0.8, 1.5}) {
    for (double t : {0.2, 0.8, 1.5}) {
      const double got = phi_with_areas(f, {{0, s}, {2, t}}, 1e-8);
      CHECK(got == doctest::Approx(heart_value(s, t)).epsilon(1e-7));
    }
  }
}

TEST_CASE("eight diagram matches its closed form") {
  auto f = fixture("eight.loop");
  // v=F1, s=F2, t=F3, u=F5
  for (double s : {0.2, 1.5}) {
    for (double u : {0.3, 0.9}) {
      const double got = phi_with_areas(f, {{1, s}, {2, 0.7}, {4, u}, {0, 0.4}}, 1e-8);
      CHECK(got == doctest::Approx(eight_value(s, 0.7, u, 0.4)).epsilon(1e-6));
    }
  }
}

TEST_CASE("two pendant windings") {
  auto f = fixture("pendant2.loop");
  // s=F1, t1=F2, t2=F4
  for (double t1 : {0.3, 1.1}) {
    const double got = phi_with_areas(f, {{0, 0.6}, {1, t1}, {3, 0.9}}, 1e-8);
    const double expect = std::exp(-0.3 - t1 - 0.9) * (1 - t1) * (1 - 0.9);
    CHECK(got == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("figure eight with opposite windings") {
  auto f = fixture("infinity.loop");
  // independent lobes: e^{-(a+b)/2}, positive
  const double got = phi_plane(f, 1e-8);
  CHECK(got == doctest::Approx(std::exp(-0.5 * (0.8 + 0.6))).epsilon(1e-7));
}

TEST_CASE("triple winding spiral") {
  auto f = fixture("spiral3.loop");
  // rings a=F2 (once), b=F1 (twice), c=F3 (three times)
  auto value = [&](double a, double b, double c) {
    return phi_with_areas(f, {{1, a}, {0, b}, {2, c}}, 1e-9);
  };
  // with outer rings shrunk, this is the third moment of the free unitary BM
  for (double c : {0.3, 0.8, 2.0})
    CHECK(value(0, 0, c) == doctest::Approx(ubm::biane_rains_moment(3, c)).epsilon(1e-7));
  // with the core shrunk, it reduces to the double winding (heart)
  CHECK(value(0.5, 0.7, 0) == doctest::Approx(heart_value(0.5, 0.7)).epsilon(1e-7));
  // general closed form solved from the loop equations
  for (double b : {0.4, 1.2}) {
    for (double c : {0.5, 1.0}) {
      const double expect =
          std::exp(-0.25 - b - 1.5 * c) * (1 - 3 * c + 1.5 * c * c - b * (1 - c));
      CHECK(value(0.5, b, c) == doctest::Approx(expect).epsilon(1e-7));
    }
  }
}

TEST_CASE("five-face worked example") {
  auto f = fixture("fig11.loop");
  // t1=F1, s1=F2, s2=F3, t2=F5, u=F6
  auto value = [&](double s1, double s2, double t1, double t2, double u) {
    return phi_with_areas(f, {{0, t1}, {1, s1}, {2, s2}, {4, t2}, {5, u}}, 1e-9);
  };
  // collapsing everything but the lens leaves the triple winding
  for (double u : {0.4, 1.0})
    CHECK(value(0, 0, 0, 0, u) ==
          doctest::Approx(ubm::biane_rains_moment(3, u)).epsilon(1e-7));
  // u -> 0 disentangles into the two-pendant picture
  CHECK(value(0.3, 0.2, 0.7, 0.9, 0) ==
        doctest::Approx(std::exp(-0.25 - 1.6) * (1 - 0.7) * (1 - 0.9)).epsilon(1e-7));
  // full closed form
  for (double t1 : {0.3, 1.2}) {
    for (double u : {0.4, 1.3}) {
      CHECK(value(0.5, 0.8, t1, 0.6, u) ==
            doctest::Approx(five_face_value(0.5, 0.8, t1, 0.6, u)).epsilon(1e-6));
    }
  }
}

TEST_CASE("multi-loop diagrams factorize") {
  auto f = fixture("fig10.loop");
  // plane reading of the two-loop picture with face 1 unbounded
  MasterFieldQuery q{f.diagram, f.face_areas, 1, 1e-8};
  const double whole = phi_plane(q);
  auto p0 = standalone_loop(f.map, f.face_areas, 1, 0);
  auto p1 = standalone_loop(f.map, f.face_areas, 1, 1);
  MasterFieldQuery q0{p0.diagram, p0.areas, p0.unbounded_face, 1e-8};
  MasterFieldQuery q1{p1.diagram, p1.areas, p1.unbounded_face, 1e-8};
  CHECK(whole == doctest::Approx(phi_plane(q0) * phi_plane(q1)).epsilon(1e-9));
}

TEST_CASE("orientation reversal leaves the value unchanged") {
  for (const char* name : {"heart.loop", "spiral3.loop", "eight.loop", "fig11.loop"}) {
    auto f = fixture(name);
    const double base = phi_plane(f, 1e-8);

    // reverse the traversal: reversed visit order and flipped signs; the
    // reversed segment j retraces original segment k-2-j (mod k)
    const auto& loop = f.diagram.loops[0];
    const int k = static_cast<int>(loop.size());
    std::vector<int> code;
    for (int j = k - 1; j >= 0; --j) code.push_back(loop[j].crossing);
    std::map<int, int> signs;
    for (const auto& [c, s] : f.diagram.handedness) signs[c] = -s;
    auto rd = make_diagram({code}, signs);
    auto rm = build_map(rd);
    REQUIRE(rm.num_faces() == f.map.num_faces());
    std::vector<double> rareas(rm.num_faces(), 0.0);
    std::vector<int> fmap(rm.num_faces(), -1);
    bool matched = true;
    for (int j = 0; j < k; ++j) {
      const int orig_seg = ((k - 2 - j) % k + k) % k;
      for (int dir = 0; dir < 2; ++dir) {
        const int nf = rm.face_of[2 * j + dir];
        const int of = f.map.face_of[2 * orig_seg + (1 - dir)];
        if (fmap[nf] == -1)
          fmap[nf] = of;
        else if (fmap[nf] != of)
          matched = false;
      }
    }
    REQUIRE(matched);
    int runb = -1;
    for (int nf = 0; nf < rm.num_faces(); ++nf) {
      rareas[nf] = f.face_areas[fmap[nf]];
      if (fmap[nf] == f.unbounded_face) runb = nf;
    }
    REQUIRE(runb >= 0);
    MasterFieldQuery q{rd, rareas, runb, 1e-8};
    CHECK(phi_plane(q) == doctest::Approx(base).epsilon(1e-7));
  }
}

TEST_CASE("mirror reflection leaves the value unchanged") {
  for (const char* name : {"heart.loop", "spiral3.loop", "eight.loop", "fig11.loop"}) {
    auto f = fixture(name);
    const double base = phi_plane(f, 1e-8);
    std::map<int, int> signs;
    for (const auto& [c, s] : f.diagram.handedness) signs[c] = -s;
    LoopDiagram md{f.diagram.loops, signs};
    auto mm = build_map(md);
    REQUIRE(mm.num_faces() == f.map.num_faces());
    // mirrored faces carry the same segment sets
    auto seg_set = [](const CombinatorialMap& m, int face) {
      std::multiset<int> s;
      for (int se : m.face_boundary_segments(face)) s.insert(std::abs(se));
      return s;
    };
    std::vector<double> mareas(mm.num_faces(), 0.0);
    int munb = -1;
    for (int nf = 0; nf < mm.num_faces(); ++nf) {
      const auto key = seg_set(mm, nf);
      int match = -1;
      for (int of = 0; of < f.map.num_faces(); ++of)
        if (seg_set(f.map, of) == key) {
          REQUIRE(match == -1);  // unique in these fixtures
          match = of;
        }
      REQUIRE(match >= 0);
      mareas[nf] = f.face_areas[match];
      if (match == f.unbounded_face) munb = nf;
    }
    REQUIRE(munb >= 0);
    MasterFieldQuery q{md, mareas, munb, 1e-8};
    CHECK(phi_plane(q) == doctest::Approx(base).epsilon(1e-7));
  }
}

TEST_CASE("values stay in [-1, 1]") {
  for (const char* name :
       {"simple.loop", "heart.loop", "infinity.loop", "spiral3.loop", "pendant2.loop",
        "eight.loop", "fig11.loop"}) {
    auto f = fixture(name);
    CHECK(std::abs(phi_plane(f, 1e-8)) <= 1.0 + 1e-9);
  }
}

TEST_CASE("gradient of the simple loop and the heart") {
  auto fs = fixture("simple.loop");
  MasterFieldQuery qs{fs.diagram, fs.face_areas, fs.unbounded_face, 1e-9};
  auto gs = phi_gradient(qs);
  CHECK(gs[0] == doctest::Approx(-0.5 * std::exp(-1.0)).epsilon(1e-8));

  auto fh = fixture("heart.loop");
  MasterFieldQuery qh{fh.diagram, fh.face_areas, fh.unbounded_face, 1e-9};
  auto gh = phi_gradient(qh);
  const double s = 0.5, t = 0.7;
  // (2 d_s - d_t) Phi = e^{-(s+t)/2} e^{-t/2}
  CHECK(2 * gh[0] - gh[2] ==
        doctest::Approx(std::exp(-0.5 * (s + t)) * std::exp(-0.5 * t)).epsilon(1e-7));
  // outer rule
  CHECK(gh[0] == doctest::Approx(-0.5 * heart_value(s, t)).epsilon(1e-7));
}

TEST_CASE("gradient of the eight loop") {
  auto f = fixture("eight.loop");
  MasterFieldQuery q{f.diagram, f.face_areas, f.unbounded_face, 1e-9};
  auto g = phi_gradient(q);
  const double s = 0.3, t = 0.5, u = 0.6, v = 0.4;
  // (d_u + d_v - d_s - d_t) Phi = e^{-(s+t)/2} e^{-(u+v)}
  CHECK(g[4] + g[0] - g[1] - g[2] ==
        doctest::Approx(std::exp(-0.5 * (s + t)) * std::exp(-(u + v))).epsilon(1e-7));
}

TEST_CASE("finite differences along MM combinations match split products") {
  for (const char* name : {"heart.loop", "spiral3.loop", "eight.loop", "fig11.loop"}) {
    auto f = fixture(name);
    const double eps = 1e-4;
    for (const auto& [c, ci] : f.map.crossings) {
      auto mm = mm_vector_full(f.map, c);
      auto value_at = [&](double sign) {
        MasterFieldQuery q{f.diagram, f.face_areas, f.unbounded_face, 1e-10};
        for (int fi = 0; fi < f.map.num_faces(); ++fi)
          if (fi != f.unbounded_face) q.face_areas[fi] += sign * eps * mm[fi];
        return phi_plane(q);
      };
      const double fd = (value_at(1.0) - value_at(-1.0)) / (2 * eps);
      auto des = desingularize(f.map, f.face_areas, f.unbounded_face, c);
      double prod = 1.0;
      for (const auto& p : des.pieces) {
        MasterFieldQuery q{p.diagram, p.areas, p.unbounded_face, 1e-10};
        prod *= phi_plane(q);
      }
      CHECK(fd == doctest::Approx(prod).epsilon(1e-4));
    }
  }
}

TEST_CASE("crossings between distinct loops drop out in the limit") {
  auto f = fixture("fig10.loop");
  // plane reading of the two-loop diagram, unbounded = face 1
  const int unb = 1;
  const double eps = 1e-4;
  int checked = 0;
  for (const auto& [c, ci] : f.map.crossings) {
    if (ci.loop[0] == ci.loop[1]) continue;
    auto mm = mm_vector_full(f.map, c);
    auto value_at = [&](double sign) {
      MasterFieldQuery q{f.diagram, f.face_areas, unb, 1e-10};
      for (int fi = 0; fi < f.map.num_faces(); ++fi)
        if (fi != unb) q.face_areas[fi] += sign * eps * mm[fi];
      return phi_plane(q);
    };
    const double fd = (value_at(1.0) - value_at(-1.0)) / (2 * eps);
    CHECK(std::abs(fd) < 1e-8);
    ++checked;
  }
  CHECK(checked == 2);
}

TEST_CASE("continuity as a face collapses") {
  auto f = fixture("heart.loop");
  const double tiny = 1e-6;
  const double collapsed = std::exp(-0.5 * 0.5);  // heart with t=0 is a circle of area s
  CHECK(std::abs(phi_with_areas(f, {{2, tiny}}, 1e-10) - collapsed) < 1e-5);
}

TEST_CASE("argument checks") {
  auto f = fixture("heart.loop");
  MasterFieldQuery q{f.diagram, f.face_areas, f.unbounded_face, -1.0};
  CHECK_THROWS_AS(phi_plane(q), Error);
  MasterFieldQuery q2{f.diagram, {0.1}, f.unbounded_face, 1e-6};
  CHECK_THROWS_AS(phi_plane(q2), Error);
  CHECK_THROWS_AS(phi_plane(fixture("heart_sphere.loop"), 1e-6), Error);
}

TEST_SUITE_END();
