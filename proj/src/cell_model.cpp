#include "ramify/cell_model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ramify {

int ReplacementSystem::type_index(const std::string& id) const {
  for (size_t i = 0; i < types.size(); ++i)
    if (types[i].id == id) return int(i);
  return -1;
}

ValidationReport validate_system(const ReplacementSystem& sys) {
  ValidationReport rep;
  auto fail = [&](const std::string& msg) {
    rep.well_formed = false;
    rep.violations.push_back(msg);
  };
  if (sys.type_index(sys.root_type) < 0) fail("root type '" + sys.root_type + "' not defined");
  for (const auto& t : sys.types) {
    for (const auto& c : t.children)
      if (sys.type_index(c) < 0) fail("type '" + t.id + "' references unknown child type '" + c + "'");
    if (t.gluing.size() != t.children.size()) {
      fail("type '" + t.id + "' has gluing for " + std::to_string(t.gluing.size()) + " of " +
           std::to_string(t.children.size()) + " children");
      continue;
    }
    std::vector<std::vector<int>> junction_children(size_t(t.junction_count));
    std::vector<int> parent_slot_hits(size_t(t.boundary_arity), 0);
    for (size_t ci = 0; ci < t.children.size(); ++ci) {
      int cti = sys.type_index(t.children[ci]);
      if (cti < 0) continue;
      int arity = sys.types[size_t(cti)].boundary_arity;
      if (int(t.gluing[ci].size()) != arity) {
        fail("type '" + t.id + "' child " + std::to_string(ci) + " has " +
             std::to_string(t.gluing[ci].size()) + " gluing entries for arity " + std::to_string(arity));
        continue;
      }
      for (int s = 0; s < arity; ++s) {
        const GluingTarget& g = t.gluing[ci][size_t(s)];
        switch (g.kind) {
          case GluingTarget::Kind::Parent:
            if (g.index < 0 || g.index >= t.boundary_arity)
              raise(ErrorCode::MalformedGluing, "type '" + t.id + "' child " + std::to_string(ci) +
                                                    " slot " + std::to_string(s) +
                                                    " targets parent vertex " + std::to_string(g.index) +
                                                    " outside arity " + std::to_string(t.boundary_arity));
            parent_slot_hits[size_t(g.index)]++;
            break;
          case GluingTarget::Kind::Junction:
            if (g.index < 0 || g.index >= t.junction_count)
              raise(ErrorCode::MalformedGluing, "type '" + t.id + "' child " + std::to_string(ci) +
                                                    " slot " + std::to_string(s) + " targets junction " +
                                                    std::to_string(g.index) + " outside count " +
                                                    std::to_string(t.junction_count));
            junction_children[size_t(g.index)].push_back(int(ci));
            break;
          case GluingTarget::Kind::Free:
            break;
        }
      }
    }
    for (int s = 0; s < t.boundary_arity; ++s)
      if (parent_slot_hits[size_t(s)] == 0)
        fail("type '" + t.id + "' parent vertex " + std::to_string(s) + " survives in no child");
    for (int j = 0; j < t.junction_count; ++j) {
      auto& ch = junction_children[size_t(j)];
      std::sort(ch.begin(), ch.end());
      ch.erase(std::unique(ch.begin(), ch.end()), ch.end());
      if (ch.size() < 2)
        fail("type '" + t.id + "' junction " + std::to_string(j) + " is met by " +
             std::to_string(ch.size()) + " distinct children (needs >= 2)");
    }
  }
  return rep;
}

namespace {

int64_t projected_cells(const ReplacementSystem& sys, int depth) {
  // counts per type at each level, saturating
  std::vector<int64_t> count(sys.types.size(), 0);
  count[size_t(sys.type_index(sys.root_type))] = 1;
  int64_t total = 1;
  for (int l = 0; l < depth; ++l) {
    std::vector<int64_t> next(sys.types.size(), 0);
    for (size_t t = 0; t < sys.types.size(); ++t) {
      if (count[t] == 0) continue;
      for (const auto& cid : sys.types[t].children) {
        size_t ct = size_t(sys.type_index(cid));
        next[ct] += count[t];
        if (next[ct] > kDefaultCellCap * 4) return INT64_MAX;
      }
    }
    count = next;
    int64_t lvl = 0;
    for (int64_t c : count) lvl += c;
    total += lvl;
    if (total > kDefaultCellCap * 4) return INT64_MAX;
  }
  return total;
}

}  // namespace

CellComplex expand(const ReplacementSystem& sys, int depth, int64_t cell_cap) {
  ValidationReport val = validate_system(sys);
  if (!val.well_formed)
    raise(ErrorCode::BadInput, "system fails validation: " + val.violations.front());
  int64_t projected = projected_cells(sys, depth);
  if (projected > cell_cap)
    raise(ErrorCode::DepthOverflow, "projected cell count exceeds cap of " + std::to_string(cell_cap));

  CellComplex cx;
  cx.sys = &sys;
  cx.depth = depth;
  cx.levels.assign(size_t(depth) + 1, {});

  auto new_vertex = [&](int birth) {
    VertexId v = VertexId(cx.vtable.size());
    cx.vtable.emplace_back(size_t(depth) + 1);
    cx.vertex_birth.push_back(birth);
    return v;
  };

  // root
  {
    Cell root;
    root.level = 0;
    root.type = sys.type_index(sys.root_type);
    const CellType& rt = sys.type(root.type);
    for (int s = 0; s < rt.boundary_arity; ++s) root.vertices.push_back(new_vertex(0));
    cx.cells.push_back(std::move(root));
    cx.levels[0].push_back(0);
    for (VertexId v : cx.cells[0].vertices) cx.vtable[size_t(v)][0].push_back(0);
  }

  for (int l = 0; l < depth; ++l) {
    for (CellId pid : cx.levels[size_t(l)]) {
      const CellType& pt = sys.type(cx.cells[size_t(pid)].type);
      // junction ids are shared across this parent's children
      std::vector<VertexId> junction_ids(size_t(pt.junction_count), -1);
      for (size_t ci = 0; ci < pt.children.size(); ++ci) {
        Cell child;
        child.level = l + 1;
        child.parent = pid;
        child.child_index = int(ci);
        child.type = sys.type_index(pt.children[ci]);
        const CellType& ct = sys.type(child.type);
        child.vertices.resize(size_t(ct.boundary_arity));
        for (int s = 0; s < ct.boundary_arity; ++s) {
          const GluingTarget& g = pt.gluing[ci][size_t(s)];
          VertexId v;
          switch (g.kind) {
            case GluingTarget::Kind::Parent:
              v = cx.cells[size_t(pid)].vertices[size_t(g.index)];
              break;
            case GluingTarget::Kind::Junction:
              if (junction_ids[size_t(g.index)] < 0) junction_ids[size_t(g.index)] = new_vertex(l + 1);
              v = junction_ids[size_t(g.index)];
              break;
            case GluingTarget::Kind::Free:
              v = new_vertex(l + 1);
              break;
          }
          child.vertices[size_t(s)] = v;
        }
        CellId cid = CellId(cx.cells.size());
        cx.cells.push_back(std::move(child));
        cx.cells[size_t(pid)].children.push_back(cid);
        cx.levels[size_t(l) + 1].push_back(cid);
        for (VertexId v : cx.cells[size_t(cid)].vertices) {
          auto& lst = cx.vtable[size_t(v)][size_t(l) + 1];
          if (lst.empty() || lst.back() != cid) lst.push_back(cid);
        }
      }
    }
  }

  // Levels above a vertex's birth: the unique ancestor chain of its birth cells.
  for (size_t v = 0; v < cx.vtable.size(); ++v) {
    int b = cx.vertex_birth[v];
    if (b == 0 || cx.vtable[v][size_t(b)].empty()) continue;
    CellId c = cx.vtable[v][size_t(b)].front();
    for (int l = b - 1; l >= 0; --l) {
      c = cx.cells[size_t(c)].parent;
      cx.vtable[v][size_t(l)].push_back(c);
    }
  }
  for (auto& per_vertex : cx.vtable)
    for (auto& lst : per_vertex) std::sort(lst.begin(), lst.end());
  return cx;
}

const std::vector<CellId>& CellComplex::cells_with_vertex(VertexId v, int level) const {
  static const std::vector<CellId> empty;
  if (v < 0 || size_t(v) >= vtable.size() || level < 0 || level > depth) return empty;
  return vtable[size_t(v)][size_t(level)];
}

std::vector<int> CellComplex::address(CellId c) const {
  std::vector<int> addr;
  while (c > 0) {
    addr.push_back(cells[size_t(c)].child_index);
    c = cells[size_t(c)].parent;
  }
  std::reverse(addr.begin(), addr.end());
  return addr;
}

CellId CellComplex::cell_at(const std::vector<int>& addr) const {
  CellId c = 0;
  for (int i : addr) {
    const auto& ch = cells[size_t(c)].children;
    if (i < 0 || size_t(i) >= ch.size()) return -1;
    c = ch[size_t(i)];
  }
  return c;
}

CellId CellComplex::ancestor_at(CellId c, int level) const {
  while (cells[size_t(c)].level > level) c = cells[size_t(c)].parent;
  return c;
}

bool CellComplex::contains_vertex(CellId c, VertexId v) const {
  const auto& lst = cells_with_vertex(v, cells[size_t(c)].level);
  return std::binary_search(lst.begin(), lst.end(), c);
}

bool CellComplex::same_level_intersect(CellId a, CellId b) const {
  if (a == b) return true;
  const Cell& ca = cells[size_t(a)];
  for (VertexId v : ca.vertices)
    if (contains_vertex(b, v)) return true;
  return false;
}

bool CellComplex::cells_intersect(CellId a, CellId b) const {
  if (cells[size_t(a)].level > cells[size_t(b)].level) std::swap(a, b);
  int la = cells[size_t(a)].level;
  if (ancestor_at(b, la) == a) return true;
  for (VertexId v : cells[size_t(b)].vertices) {
    const auto& lst = cells_with_vertex(v, la);
    if (std::binary_search(lst.begin(), lst.end(), a)) return true;
  }
  return false;
}

std::vector<VertexId> CellComplex::shared_vertices(CellId a, CellId b) const {
  std::vector<VertexId> out;
  for (VertexId v : cells[size_t(a)].vertices)
    if (contains_vertex(b, v) && contains_vertex(a, v)) out.push_back(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string CellComplex::type_name(int type) const {
  if (sys) return sys->types[size_t(type)].id;
  if (type >= 0 && size_t(type) < type_names.size()) return type_names[size_t(type)];
  return std::to_string(type);
}

std::vector<AdjacencyEntry> same_level_adjacency(const CellComplex& cx, int level) {
  if (level < 0 || level > cx.depth)
    raise(ErrorCode::LevelOutOfRange, "level " + std::to_string(level) + " exceeds depth " +
                                          std::to_string(cx.depth));
  std::map<std::pair<CellId, CellId>, std::vector<VertexId>> pairs;
  for (size_t v = 0; v < cx.vtable.size(); ++v) {
    const auto& lst = cx.vtable[v][size_t(level)];
    for (size_t i = 0; i < lst.size(); ++i)
      for (size_t j = i + 1; j < lst.size(); ++j) pairs[{lst[i], lst[j]}].push_back(VertexId(v));
  }
  std::vector<AdjacencyEntry> out;
  out.reserve(pairs.size());
  for (auto& [key, shared] : pairs) {
    std::sort(shared.begin(), shared.end());
    out.push_back({key.first, key.second, std::move(shared)});
  }
  return out;
}

// ---- point resolution ------------------------------------------------------

namespace {

std::vector<CellId> chain_of(const CellComplex& cx, const PointAddress& p, bool* certified_vertex,
                             VertexId* vertex_out) {
  *certified_vertex = false;
  *vertex_out = -1;
  std::vector<CellId> chain;
  CellId c = 0;
  chain.push_back(c);
  size_t pos = 0;
  auto next_index = [&](size_t i) -> int {
    if (i < p.head.size()) return p.head[i];
    if (p.period.empty()) return -1;
    return p.period[(i - p.head.size()) % p.period.size()];
  };
  while (cx.cells[size_t(c)].level < cx.depth) {
    int idx = next_index(pos++);
    if (idx < 0) break;
    const auto& ch = cx.cells[size_t(c)].children;
    if (idx >= int(ch.size()))
      raise(ErrorCode::BadInput, "address step " + std::to_string(idx) + " out of range");
    c = ch[size_t(idx)];
    chain.push_back(c);
  }
  if (p.vertex) {
    *vertex_out = *p.vertex;
    *certified_vertex = true;
    return chain;
  }
  if (p.period.empty()) return chain;  // finite head: treated as the deepest cell's subtree anchor

  // Detect a periodic tail converging onto a vertex: a vertex contained in
  // every chain cell, whose (type, slot) data repeats after one period.
  std::set<VertexId> candidates(cx.cells[size_t(chain.back())].vertices.begin(),
                                cx.cells[size_t(chain.back())].vertices.end());
  for (const CellId cc : chain) {
    if (candidates.empty()) break;
    std::set<VertexId> keep;
    for (VertexId v : candidates)
      if (cx.contains_vertex(cc, v)) keep.insert(v);
    candidates = std::move(keep);
  }
  if (candidates.size() == 1) {
    size_t T = p.period.size();
    if (chain.size() > T + p.head.size()) {
      VertexId v = *candidates.begin();
      // slot position must recur one period apart in cells of equal type
      CellId deep = chain.back();
      CellId above = chain[chain.size() - 1 - T];
      const Cell& cd = cx.cells[size_t(deep)];
      const Cell& ca = cx.cells[size_t(above)];
      if (cd.type == ca.type) {
        int sd = -1, sa = -1;
        for (size_t s = 0; s < cd.vertices.size(); ++s)
          if (cd.vertices[s] == v) sd = int(s);
        for (size_t s = 0; s < ca.vertices.size(); ++s)
          if (ca.vertices[s] == v) sa = int(s);
        if (sd >= 0 && sd == sa) {
          *certified_vertex = true;
          *vertex_out = v;
        }
      }
    }
    if (!*certified_vertex)
      raise(ErrorCode::DepthInsufficient, "periodic tail not separable from a vertex at this depth");
  } else if (candidates.size() > 1) {
    raise(ErrorCode::DepthInsufficient, "point address ambiguous at depth " + std::to_string(cx.depth));
  }
  return chain;
}

}  // namespace

std::vector<std::vector<CellId>> resolve_point(const CellComplex& cx, const PointAddress& p) {
  bool is_vertex = false;
  VertexId v = -1;
  std::vector<CellId> chain = chain_of(cx, p, &is_vertex, &v);
  std::vector<std::vector<CellId>> out(size_t(cx.depth) + 1);
  if (is_vertex) {
    if (v < 0 || size_t(v) >= cx.vtable.size()) raise(ErrorCode::BadInput, "unknown vertex id");
    for (int l = 0; l <= cx.depth; ++l) out[size_t(l)] = cx.cells_with_vertex(v, l);
    return out;
  }
  for (size_t i = 0; i < chain.size(); ++i) out[i] = {chain[i]};
  for (size_t l = chain.size(); l <= size_t(cx.depth); ++l) out[l] = {};  // beyond resolution
  return out;
}

bool points_equal(const CellComplex& cx, const PointAddress& p, const PointAddress& q) {
  bool vp = false, vq = false;
  VertexId idp = -1, idq = -1;
  std::vector<CellId> cp = chain_of(cx, p, &vp, &idp);
  std::vector<CellId> cq = chain_of(cx, q, &vq, &idq);
  if (vp != vq) return false;
  if (vp) return idp == idq;
  // interior points: equal iff the containing chains coincide at every level
  if (cp.size() != cq.size()) raise(ErrorCode::DepthInsufficient, "points not resolved to equal depth");
  return cp == cq;
}

CoveringResult covering_level(const CellComplex& cx, const PointAddress& p, const PointAddress& q) {
  if (points_equal(cx, p, q))
    raise(ErrorCode::DistinctPointsRequired, "covering level requires distinct points");
  auto P = resolve_point(cx, p);
  auto Q = resolve_point(cx, q);
  int best = -1;
  std::vector<std::pair<CellId, CellId>> pairs;
  for (int l = cx.depth; l >= 0; --l) {
    if (P[size_t(l)].empty() || Q[size_t(l)].empty()) continue;
    for (CellId a : P[size_t(l)])
      for (CellId b : Q[size_t(l)])
        if (cx.same_level_intersect(a, b)) {
          if (best < 0) best = l;
          if (l == best) pairs.emplace_back(a, b);
        }
    if (best >= 0) break;
  }
  if (best < 0) raise(ErrorCode::DepthInsufficient, "no intersecting covering pair within depth");
  if (best == cx.depth)
    raise(ErrorCode::DepthInsufficient, "covering level not witnessed below depth " +
                                            std::to_string(cx.depth));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return {best, best + 1, std::move(pairs)};
}

// ---- admissibility ---------------------------------------------------------

namespace {

void descendants_at(const CellComplex& cx, CellId c, int level, std::vector<CellId>& out) {
  const Cell& cell = cx.cells[size_t(c)];
  if (cell.level == level) {
    out.push_back(c);
    return;
  }
  for (CellId ch : cell.children) descendants_at(cx, ch, level, out);
}

}  // namespace

AdmissibilityReport check_admissibility(const CellComplex& cx, int k) {
  if (k < 1) raise(ErrorCode::BadInput, "k must be >= 1");
  if (cx.depth < k + 1)
    raise(ErrorCode::InsufficientDepth, "depth " + std::to_string(cx.depth) +
                                            " insufficient for k=" + std::to_string(k));
  AdmissibilityReport rep;
  rep.k = k;
  rep.max_n = cx.depth - k;
  for (int n = 0; n <= cx.depth - k; ++n) {
    // (1) every n-cell contains two disjoint (n+k)-cells
    for (CellId c : cx.levels[size_t(n)]) {
      std::vector<CellId> desc;
      descendants_at(cx, c, n + k, desc);
      bool found = false;
      for (size_t i = 0; i < desc.size() && !found; ++i)
        for (size_t j = i + 1; j < desc.size() && !found; ++j)
          if (!cx.same_level_intersect(desc[i], desc[j])) found = true;
      if (!found) {
        rep.condition1 = false;
        AdmissibilityWitness w;
        w.n = n;
        w.cell = c;
        rep.failures1.push_back(w);
      }
    }
    // (2) no two disjoint n-cells intersect a common (n+k)-cell
    for (CellId deep : cx.levels[size_t(n + k)]) {
      std::vector<CellId> touching;
      touching.push_back(cx.ancestor_at(deep, n));
      for (VertexId v : cx.cells[size_t(deep)].vertices) {
        // only vertices the deep cell actually contains reach level n cells
        for (CellId up : cx.cells_with_vertex(v, n)) touching.push_back(up);
      }
      std::sort(touching.begin(), touching.end());
      touching.erase(std::unique(touching.begin(), touching.end()), touching.end());
      bool done = false;
      for (size_t i = 0; i < touching.size() && !done; ++i)
        for (size_t j = i + 1; j < touching.size() && !done; ++j)
          if (!cx.same_level_intersect(touching[i], touching[j])) {
            rep.condition2 = false;
            AdmissibilityWitness w;
            w.n = n;
            w.deep_cell = deep;
            w.first = touching[i];
            w.second = touching[j];
            rep.failures2.push_back(w);
            done = true;  // one witness per deep cell
          }
    }
  }
  return rep;
}

// ---- JSON ------------------------------------------------------------------

std::string ReplacementSystem::to_json() const {
  nlohmann::json j;
  j["root"] = root_type;
  j["types"] = nlohmann::json::array();
  for (const auto& t : types) {
    nlohmann::json jt;
    jt["id"] = t.id;
    jt["children"] = t.children;
    jt["boundary_arity"] = t.boundary_arity;
    jt["junctions"] = t.junction_count;
    nlohmann::json entries = nlohmann::json::array();
    for (size_t ci = 0; ci < t.gluing.size(); ++ci)
      for (size_t s = 0; s < t.gluing[ci].size(); ++s) {
        const GluingTarget& g = t.gluing[ci][s];
        const char* kind = g.kind == GluingTarget::Kind::Parent    ? "P"
                           : g.kind == GluingTarget::Kind::Junction ? "J"
                                                                    : "F";
        entries.push_back({int(ci), int(s), kind, g.index});
      }
    jt["gluing"] = entries;
    j["types"].push_back(jt);
  }
  return j.dump(2);
}

ReplacementSystem ReplacementSystem::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ReplacementSystem sys;
  sys.root_type = j.at("root").get<std::string>();
  for (const auto& jt : j.at("types")) {
    CellType t;
    t.id = jt.at("id").get<std::string>();
    t.children = jt.at("children").get<std::vector<std::string>>();
    t.boundary_arity = jt.at("boundary_arity").get<int>();
    t.junction_count = jt.at("junctions").get<int>();
    t.gluing.resize(t.children.size());
    sys.types.push_back(t);
  }
  // second pass: arities known, fill gluing tables
  for (size_t ti = 0; ti < sys.types.size(); ++ti) {
    const auto& jt = j.at("types")[ti];
    CellType& t = sys.types[ti];
    for (size_t ci = 0; ci < t.children.size(); ++ci) {
      int cti = sys.type_index(t.children[ci]);
      if (cti < 0) raise(ErrorCode::BadInput, "unknown child type " + t.children[ci]);
      t.gluing[ci].resize(size_t(sys.types[size_t(cti)].boundary_arity));
    }
    for (const auto& e : jt.at("gluing")) {
      int ci = e.at(0).get<int>();
      int s = e.at(1).get<int>();
      std::string kind = e.at(2).get<std::string>();
      int idx = e.at(3).get<int>();
      if (ci < 0 || size_t(ci) >= t.gluing.size() || s < 0 || size_t(s) >= t.gluing[size_t(ci)].size())
        raise(ErrorCode::MalformedGluing, "gluing entry addresses missing child slot");
      GluingTarget g;
      g.kind = kind == "P"   ? GluingTarget::Kind::Parent
               : kind == "J" ? GluingTarget::Kind::Junction
                             : GluingTarget::Kind::Free;
      g.index = idx;
      t.gluing[size_t(ci)][size_t(s)] = g;
    }
  }
  return sys;
}

std::string CellComplex::export_json() const {
  nlohmann::json j;
  j["depth"] = depth;
  j["cells"] = nlohmann::json::array();
  for (size_t c = 0; c < cells.size(); ++c) {
    nlohmann::json jc;
    jc["address"] = address(CellId(c));
    jc["level"] = cells[c].level;
    jc["type"] = type_name(cells[c].type);
    jc["vertices"] = cells[c].vertices;
    j["cells"].push_back(jc);
  }
  j["vertex_table"] = nlohmann::json::array();
  for (size_t v = 0; v < vtable.size(); ++v) {
    nlohmann::json jv;
    jv["id"] = int(v);
    jv["birth"] = vertex_birth[v];
    jv["cells_per_level"] = vtable[v];
    j["vertex_table"].push_back(jv);
  }
  return j.dump();
}

}  // namespace ramify
