#include "ramify/builtins.hpp"

#include <cmath>
#include <map>

namespace ramify {

namespace {
GluingTarget P(int i) { return {GluingTarget::Kind::Parent, i}; }
GluingTarget J(int i) { return {GluingTarget::Kind::Junction, i}; }
GluingTarget F() { return {GluingTarget::Kind::Free, 0}; }
}  // namespace

ReplacementSystem make_sierpinski_system() {
  CellType t;
  t.id = "tri";
  t.children = {"tri", "tri", "tri"};
  t.boundary_arity = 3;   // the three corners
  t.junction_count = 3;   // edge midpoints: 0={0,1}, 1={0,2}, 2={1,2}
  t.gluing = {
      {P(0), J(0), J(1)},
      {J(0), P(1), J(2)},
      {J(1), J(2), P(2)},
  };
  ReplacementSystem sys;
  sys.types = {t};
  sys.root_type = "tri";
  return sys;
}

ReplacementSystem make_rauzy_system() {
  ReplacementSystem sys = make_sierpinski_system();
  sys.types[0].id = "rauzy";
  sys.types[0].children = {"rauzy", "rauzy", "rauzy"};
  sys.root_type = "rauzy";
  return sys;
}

ReplacementSystem make_vicsek_system() {
  // children: 0=BL, 1=BR, 2=center, 3=TL, 4=TR; slots: 0=BL, 1=BR, 2=TL, 3=TR
  // junctions = center-square corners; the eight outward child corners that
  // never meet another cell are Free.
  CellType t;
  t.id = "rect";
  t.children = {"rect", "rect", "rect", "rect", "rect"};
  t.boundary_arity = 4;
  t.junction_count = 4;  // 0=center BL, 1=center BR, 2=center TL, 3=center TR
  t.gluing = {
      {P(0), F(), F(), J(0)},   // BL child
      {F(), P(1), J(1), F()},   // BR child
      {J(0), J(1), J(2), J(3)}, // center child
      {F(), J(2), P(2), F()},   // TL child
      {J(3), F(), F(), P(3)},   // TR child
  };
  ReplacementSystem sys;
  sys.types = {t};
  sys.root_type = "rect";
  return sys;
}

ReplacementSystem make_weird_interval_system() {
  CellType t;
  t.id = "iv";
  t.children = {"iv", "iv", "iv"};  // lengths 1/4, 1/2, 1/4
  t.boundary_arity = 2;             // 0 = left, 1 = right endpoint
  t.junction_count = 2;
  t.gluing = {
      {P(0), J(0)},
      {J(0), J(1)},
      {J(1), P(1)},
  };
  ReplacementSystem sys;
  sys.types = {t};
  sys.root_type = "iv";
  return sys;
}

// ---- geometry --------------------------------------------------------------

double CellGeometry::diameter() const {
  if (kind == Kind::Polygon) return max_pairwise_dist(corners);
  std::vector<Vec2> pts;
  for (const auto& s : segments) {
    pts.push_back(s[0]);
    pts.push_back(s[1]);
  }
  return max_pairwise_dist(pts);
}

std::vector<Vec2> CellGeometry::corner_points() const {
  if (kind == Kind::Polygon) return corners;
  std::vector<Vec2> pts;
  for (const auto& s : segments) {
    pts.push_back(s[0]);
    pts.push_back(s[1]);
  }
  return pts;
}

namespace {
std::vector<Segment> boundary_segments(const CellGeometry& g) {
  if (g.kind == CellGeometry::Kind::Segments) return g.segments;
  std::vector<Segment> segs;
  size_t n = g.corners.size();
  for (size_t i = 0; i < n; ++i) segs.push_back({g.corners[i], g.corners[(i + 1) % n]});
  return segs;
}
}  // namespace

double CellGeometry::distance_to(const CellGeometry& other) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sa : boundary_segments(*this))
    for (const auto& sb : boundary_segments(other)) best = std::min(best, segment_segment_dist(sa, sb));
  return best;
}

namespace {

struct Affine {  // x' = ax*x + bx, y' = ay*y + by (axis-aligned, all builtins need no rotation)
  double ax = 1, bx = 0, ay = 1, by = 0;
  Vec2 operator()(Vec2 p) const { return {ax * p.x + bx, ay * p.y + by}; }
  Affine then(const Affine& inner) const {  // this ∘ inner
    return {ax * inner.ax, ax * inner.bx + bx, ay * inner.ay, ay * inner.by + by};
  }
};

// General 2D affine map for the Sierpinski triangle (uniform scaling + offset).
struct Sim {
  double s = 1;
  Vec2 t{0, 0};
  Vec2 operator()(Vec2 p) const { return {s * p.x + t.x, s * p.y + t.y}; }
  Sim then(const Sim& inner) const { return {s * inner.s, {s * inner.t.x + t.x, s * inner.t.y + t.y}}; }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

const Mat3 kRauzy[3] = {
    {{{1, 1, 1}, {0, 1, 0}, {0, 0, 1}}},
    {{{1, 0, 0}, {1, 1, 1}, {0, 0, 1}}},
    {{{1, 0, 0}, {0, 1, 0}, {1, 1, 1}}},
};

const Vec2 kTriA{0, 0}, kTriB{1, 0}, kTriC{0.5, std::sqrt(3.0) / 2};

Vec2 simplex_to_plane(double s0, double s1, double s2) {
  return kTriA * s0 + kTriB * s1 + kTriC * s2;
}

std::array<Vec2, 3> rauzy_triangle(const Mat3& m) {
  std::array<Vec2, 3> out;
  for (int col = 0; col < 3; ++col) {
    double v0 = m[0][col], v1 = m[1][col], v2 = m[2][col];
    double sum = v0 + v1 + v2;
    out[size_t(col)] = simplex_to_plane(v0 / sum, v1 / sum, v2 / sum);
  }
  return out;
}

}  // namespace

std::array<Vec2, 3> rauzy_power_triangle(int map_index, int n) {
  Mat3 m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int i = 0; i < n; ++i) m = mat_mul(m, kRauzy[map_index]);
  return rauzy_triangle(m);
}

std::pair<std::vector<int>, std::vector<int>> vicsek_witness_addresses(int n) {
  std::vector<int> small{0}, big{2};
  for (int i = 1; i < n; ++i) small.push_back(4);  // BL then TR-chain: side a*c^(n-1)
  for (int i = 1; i < n; ++i) big.push_back(0);    // center then BL-chain: side b*a^(n-1)
  return {small, big};
}

BuiltinGeometry builtin_geometry(const std::string& name, const CellComplex& cx,
                                 const VicsekParams& params) {
  BuiltinGeometry out;
  out.cell_geom.resize(cx.cells.size());
  out.vertex_pos.assign(cx.vertex_count(), Vec2{});
  std::vector<char> vertex_set(cx.vertex_count(), 0);

  auto assign_vertices = [&](CellId c, const std::vector<Vec2>& slot_pos) {
    const Cell& cell = cx.cells[size_t(c)];
    for (size_t s = 0; s < cell.vertices.size(); ++s) {
      VertexId v = cell.vertices[s];
      if (!vertex_set[size_t(v)]) {
        vertex_set[size_t(v)] = 1;
        out.vertex_pos[size_t(v)] = slot_pos[s];
      }
    }
  };

  if (name == "sierpinski") {
    const Vec2 corner[3] = {kTriA, kTriB, kTriC};
    std::vector<Sim> maps(cx.cells.size());
    maps[0] = Sim{};
    for (size_t c = 0; c < cx.cells.size(); ++c) {
      const Cell& cell = cx.cells[c];
      if (cell.parent >= 0) {
        Sim step{0.5, {corner[cell.child_index].x * 0.5, corner[cell.child_index].y * 0.5}};
        maps[c] = maps[size_t(cell.parent)].then(step);
      }
      CellGeometry g;
      g.kind = CellGeometry::Kind::Polygon;
      g.corners = {maps[c](corner[0]), maps[c](corner[1]), maps[c](corner[2])};
      out.cell_geom[c] = g;
      assign_vertices(CellId(c), g.corners);
    }
    out.exact_distances = true;
    return out;
  }

  if (name == "vicsek") {
    double a = params.a, b = params.b, c = params.c;
    // slot order BL, BR, TL, TR
    auto rect_corners = [&](const Affine& m) {
      return std::vector<Vec2>{m({0, 0}), m({1, 0}), m({0, 1}), m({1, 1})};
    };
    const Affine steps[5] = {
        {a, 0, a, 0},              // BL
        {c, a + b, a, 0},          // BR
        {b, a, b, a},              // center
        {a, 0, c, a + b},          // TL
        {c, a + b, c, a + b},      // TR
    };
    std::vector<Affine> maps(cx.cells.size());
    maps[0] = Affine{};
    for (size_t ci = 0; ci < cx.cells.size(); ++ci) {
      const Cell& cell = cx.cells[ci];
      if (cell.parent >= 0) maps[ci] = maps[size_t(cell.parent)].then(steps[cell.child_index]);
      CellGeometry g;
      g.kind = CellGeometry::Kind::Polygon;
      auto cs = rect_corners(maps[ci]);
      g.corners = {cs[0], cs[1], cs[3], cs[2]};  // CCW polygon BL,BR,TR,TL
      g.edges_in_set = false;                    // fractal meets the rectangle only in a Cantor set
      out.cell_geom[ci] = g;
      assign_vertices(CellId(ci), {cs[0], cs[1], cs[2], cs[3]});  // slot order BL,BR,TL,TR
    }
    out.exact_distances = false;  // rectangle distances are certified lower bounds
    return out;
  }

  if (name == "weird-interval") {
    struct Iv {
      double lo = 0, len = 1;
    };
    std::vector<Iv> ivs(cx.cells.size());
    for (size_t c = 0; c < cx.cells.size(); ++c) {
      const Cell& cell = cx.cells[c];
      if (cell.parent >= 0) {
        Iv p = ivs[size_t(cell.parent)];
        switch (cell.child_index) {
          case 0: ivs[c] = {p.lo, p.len / 4}; break;
          case 1: ivs[c] = {p.lo + p.len / 4, p.len / 2}; break;
          default: ivs[c] = {p.lo + 3 * p.len / 4, p.len / 4}; break;
        }
      }
      CellGeometry g;
      g.kind = CellGeometry::Kind::Segments;
      g.segments = {Segment{Vec2{ivs[c].lo, 0}, Vec2{ivs[c].lo + ivs[c].len, 0}}};
      out.cell_geom[c] = g;
      assign_vertices(CellId(c), {Vec2{ivs[c].lo, 0}, Vec2{ivs[c].lo + ivs[c].len, 0}});
    }
    out.exact_distances = true;
    return out;
  }

  if (name == "rauzy") {
    std::vector<Mat3> mats(cx.cells.size());
    mats[0] = Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (size_t c = 0; c < cx.cells.size(); ++c) {
      const Cell& cell = cx.cells[c];
      if (cell.parent >= 0) mats[c] = mat_mul(mats[size_t(cell.parent)], kRauzy[cell.child_index]);
      CellGeometry g;
      g.kind = CellGeometry::Kind::Polygon;
      auto tri = rauzy_triangle(mats[c]);
      g.corners = {tri[0], tri[1], tri[2]};
      out.cell_geom[c] = g;
      assign_vertices(CellId(c), g.corners);
    }
    out.exact_distances = true;
    return out;
  }

  if (name == "plus-example") return plus_example_geometry(cx);

  raise(ErrorCode::UnknownBuiltin, "no geometric builtin named '" + name + "'");
}

// ---- plus-example (explicit enumeration) -----------------------------------

namespace {

// Coordinates are integer multiples of 2^-depth; everything stays exact.
struct PlusCellKey {
  // kind 0: horizontal interval [x0,x1]x{0}; kind 1: vertical {0}x[y0,y1];
  // kind 2: origin cross [-d,d]x{0} union {0}x[0,h]
  int kind;
  int64_t a, b;
  bool operator<(const PlusCellKey& o) const {
    return std::tie(kind, a, b) < std::tie(o.kind, o.a, o.b);
  }
};

int64_t delta_units(int n, int depth) {
  // delta_n = 2^-floor(log2 n), in units of 2^-depth
  int f = 0;
  while ((1 << (f + 1)) <= n) ++f;
  return int64_t(1) << (depth - f);
}

}  // namespace

namespace {

CellComplex build_plus_example(int depth, int64_t cell_cap, BuiltinGeometry* geom_out) {
  if (depth < 0) raise(ErrorCode::BadInput, "negative depth");
  if (depth > 0) {
    int64_t projected = int64_t(6) << depth;  // ~3*2^n cells per level n
    if (projected > cell_cap) raise(ErrorCode::DepthOverflow, "plus-example depth too large for cap");
  }

  CellComplex cx;
  cx.depth = depth;
  cx.levels.assign(size_t(depth) + 1, {});
  cx.type_names = {"cross", "h-seg", "v-seg"};

  const int64_t U = int64_t(1) << depth;  // one unit = 2^-depth; X spans [-U, U] and [0, U]

  // vertex ids keyed by exact grid coordinates (x,y) in units
  std::map<std::pair<int64_t, int64_t>, VertexId> vid;
  auto vertex_for = [&](int64_t x, int64_t y, int birth) {
    auto it = vid.find({x, y});
    if (it != vid.end()) return it->second;
    VertexId v = VertexId(cx.vtable.size());
    vid[{x, y}] = v;
    cx.vtable.emplace_back(size_t(depth) + 1);
    cx.vertex_birth.push_back(birth);
    return v;
  };

  const double unit = 1.0 / double(U);
  std::map<PlusCellKey, CellId> by_key[2];  // previous / current level
  auto add_cell = [&](int level, const PlusCellKey& key, std::vector<VertexId> verts, CellId parent) {
    Cell cell;
    cell.level = level;
    cell.parent = parent;
    cell.type = key.kind == 2 ? 0 : (key.kind == 0 ? 1 : 2);
    cell.vertices = std::move(verts);
    CellId id = CellId(cx.cells.size());
    if (parent >= 0) {
      cell.child_index = int(cx.cells[size_t(parent)].children.size());
      cx.cells[size_t(parent)].children.push_back(id);
    }
    cx.cells.push_back(std::move(cell));
    cx.levels[size_t(level)].push_back(id);
    by_key[level % 2][key] = id;
    for (VertexId v : cx.cells[size_t(id)].vertices) {
      auto& lst = cx.vtable[size_t(v)][size_t(level)];
      lst.push_back(id);
    }
    if (geom_out) {
      CellGeometry g;
      g.kind = CellGeometry::Kind::Segments;
      if (key.kind == 0) {
        g.segments = {Segment{Vec2{double(key.a) * unit, 0}, Vec2{double(key.b) * unit, 0}}};
      } else if (key.kind == 1) {
        g.segments = {Segment{Vec2{0, double(key.a) * unit}, Vec2{0, double(key.b) * unit}}};
      } else {
        g.segments = {Segment{Vec2{-double(key.a) * unit, 0}, Vec2{double(key.a) * unit, 0}},
                      Segment{Vec2{0, 0}, Vec2{0, double(key.b) * unit}}};
      }
      geom_out->cell_geom.push_back(g);
    }
    return id;
  };

  // level 0: the whole space
  add_cell(0, {2, U, U}, {}, -1);

  for (int n = 1; n <= depth; ++n) {
    by_key[n % 2].clear();
    const int64_t step = int64_t(1) << (depth - n);  // grid spacing 2^-n in units
    const int64_t dn = delta_units(n, depth);        // delta_n in units
    auto parent_of = [&](const PlusCellKey& key) -> CellId {
      if (n == 1) return 0;
      // locate the previous-level cell containing this one
      const auto& prev = by_key[(n - 1) % 2];
      const int64_t pstep = step * 2;
      const int64_t pdn = delta_units(n - 1, depth);
      if (key.kind == 2) {
        auto it = prev.find({2, pdn, pstep});
        return it->second;
      }
      if (key.kind == 0) {
        int64_t l = key.a, r = key.b;
        // inside the previous cross?
        if (l >= -pdn && r <= pdn) return prev.at({2, pdn, pstep});
        int64_t pl = l >= pdn ? pdn + ((l - pdn) / pstep) * pstep : l;
        if (l >= pdn) {
          auto it = prev.find({0, pl, pl + pstep});
          if (it != prev.end()) return it->second;
        }
        if (r <= -pdn) {
          int64_t pr = -pdn - ((-pdn - r) / pstep) * pstep;
          auto it = prev.find({0, pr - pstep, pr});
          if (it != prev.end()) return it->second;
        }
        raise(ErrorCode::BadInput, "plus-example: lost parent (h)");
      }
      // vertical
      int64_t lo = key.a, hi = key.b;
      if (hi <= pstep) return prev.at({2, pdn, pstep});
      int64_t pl = pstep + ((lo - pstep) / pstep) * pstep;
      auto it = prev.find({1, pl, pl + pstep});
      if (it != prev.end()) return it->second;
      raise(ErrorCode::BadInput, "plus-example: lost parent (v)");
    };

    // origin cross: [-dn, dn] x {0} plus {0} x [0, step]
    {
      PlusCellKey key{2, dn, step};
      std::vector<VertexId> verts{vertex_for(-dn, 0, n), vertex_for(dn, 0, n), vertex_for(0, step, n)};
      add_cell(n, key, std::move(verts), parent_of(key));
    }
    // horizontal cells on both sides
    for (int64_t x = dn; x < U; x += step) {
      PlusCellKey key{0, x, x + step};
      add_cell(n, key, {vertex_for(x, 0, n), vertex_for(x + step, 0, n)}, parent_of(key));
      PlusCellKey keyl{0, -x - step, -x};
      add_cell(n, keyl, {vertex_for(-x - step, 0, n), vertex_for(-x, 0, n)}, parent_of(keyl));
    }
    // vertical cells above the cross
    for (int64_t y = step; y < U; y += step) {
      PlusCellKey key{1, y, y + step};
      add_cell(n, key, {vertex_for(0, y, n), vertex_for(0, y + step, n)}, parent_of(key));
    }
  }

  // birth levels recorded on first sighting may postdate actual membership in
  // V_n (a grid point enters V_n once |x| >= delta_n); containment before the
  // first sighting is through the unique ancestor chain.
  for (size_t v = 0; v < cx.vtable.size(); ++v) {
    int b = -1;
    for (int l = 0; l <= depth; ++l)
      if (!cx.vtable[v][size_t(l)].empty()) {
        b = l;
        break;
      }
    cx.vertex_birth[v] = b;
    if (b <= 0) continue;
    CellId c = cx.vtable[v][size_t(b)].front();
    for (int l = b - 1; l >= 0; --l) {
      c = cx.cells[size_t(c)].parent;
      cx.vtable[v][size_t(l)].push_back(c);
    }
  }
  for (auto& per_vertex : cx.vtable)
    for (auto& lst : per_vertex) {
      std::sort(lst.begin(), lst.end());
      lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }
  if (geom_out) {
    geom_out->exact_distances = true;
    geom_out->vertex_pos.assign(cx.vertex_count(), Vec2{});
    for (const auto& [coord, v] : vid)
      geom_out->vertex_pos[size_t(v)] = Vec2{double(coord.first) * unit, double(coord.second) * unit};
  }
  return cx;
}

}  // namespace

CellComplex enumerate_explicit(const std::string& name, int depth, int64_t cell_cap) {
  if (name != "plus-example") raise(ErrorCode::UnknownBuiltin, "no explicit builtin named '" + name + "'");
  return build_plus_example(depth, cell_cap, nullptr);
}

BuiltinGeometry plus_example_geometry(const CellComplex& cx) {
  BuiltinGeometry geom;
  CellComplex rebuilt = build_plus_example(cx.depth, kDefaultCellCap, &geom);
  if (rebuilt.cells.size() != cx.cells.size())
    raise(ErrorCode::BadInput, "complex does not match the plus-example builder");
  return geom;
}

}  // namespace ramify
