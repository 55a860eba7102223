#include <cmath>
#include <queue>

#include "ramify/metrics.hpp"

namespace ramify {

DistanceOracle intrinsic_metric(const CellComplex& cx, int k, double alpha, int L) {
  double alpha_max = std::pow(1.5, 1.0 / double(k));
  if (!(alpha > 1.0 && alpha <= alpha_max + 1e-15))
    raise(ErrorCode::AlphaRange, "alpha must lie in (1, (3/2)^(1/k)]");
  if (L > cx.depth) raise(ErrorCode::InsufficientDepth, "complex not expanded to level L");
  AdmissibilityReport adm = check_admissibility(cx, k);
  if (!adm.admissible())
    raise(ErrorCode::AdmissibilityRequired,
          "complex fails the two admissibility conditions for k=" + std::to_string(k));

  DistanceOracle oracle;
  oracle.cx = &cx;
  oracle.alpha = alpha;
  oracle.k = k;
  oracle.L = L;
  oracle.node_weight.assign(cx.cells.size(), 0.0);
  oracle.graph.assign(cx.cells.size(), {});

  auto add_edge = [&](CellId a, CellId b) {
    if (a == b) return;
    oracle.graph[size_t(a)].push_back(b);
    oracle.graph[size_t(b)].push_back(a);
  };

  for (size_t c = 0; c < cx.cells.size(); ++c) {
    if (cx.cells[c].level > L) continue;
    oracle.node_weight[c] = std::pow(alpha, -double(cx.cells[c].level));
    // ancestors intersect (containment)
    CellId anc = cx.cells[c].parent;
    while (anc >= 0) {
      add_edge(CellId(c), anc);
      anc = cx.cells[size_t(anc)].parent;
    }
  }
  // vertex-sharing intersections across all level pairs <= L
  for (size_t v = 0; v < cx.vtable.size(); ++v) {
    std::vector<CellId> all;
    for (int l = cx.vertex_birth[v]; l <= L; ++l)
      for (CellId c : cx.cells_with_vertex(VertexId(v), l)) all.push_back(c);
    for (size_t i = 0; i < all.size(); ++i)
      for (size_t j = i + 1; j < all.size(); ++j) add_edge(all[i], all[j]);
  }
  for (auto& nbrs : oracle.graph) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return oracle;
}

double DistanceOracle::cell_diam_upper(CellId c) const {
  return std::pow(alpha, -double(cx->cells[size_t(c)].level));
}

namespace {

std::vector<CellId> start_cells(const CellComplex& cx, const PointAddress& p, int L) {
  auto per_level = resolve_point(cx, p);
  std::vector<CellId> out;
  for (int l = 0; l <= L; ++l)
    for (CellId c : per_level[size_t(l)]) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double DistanceOracle::distance(const PointAddress& p, const PointAddress& q) const {
  if (points_equal(*cx, p, q)) return 0.0;
  std::vector<CellId> sources = start_cells(*cx, p, L);
  std::vector<CellId> targets = start_cells(*cx, q, L);
  std::vector<char> is_target(cx->cells.size(), 0);
  for (CellId t : targets) is_target[size_t(t)] = 1;

  // node-weighted Dijkstra: chain cost includes both endpoints
  std::vector<double> dist(cx->cells.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, CellId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (CellId s : sources) {
    if (node_weight[size_t(s)] <= 0) continue;
    if (node_weight[size_t(s)] < dist[size_t(s)]) {
      dist[size_t(s)] = node_weight[size_t(s)];
      pq.push({dist[size_t(s)], s});
    }
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[size_t(u)]) continue;
    if (is_target[size_t(u)]) return d;
    for (CellId w : graph[size_t(u)]) {
      double nd = d + node_weight[size_t(w)];
      if (nd < dist[size_t(w)]) {
        dist[size_t(w)] = nd;
        pq.push({nd, w});
      }
    }
  }
  raise(ErrorCode::DepthInsufficient, "no chain connects the two points at level <= L");
}

double DistanceOracle::lower_bound(const PointAddress& p, const PointAddress& q) const {
  CoveringResult cov = covering_level(*cx, p, q);
  return std::pow(alpha, double(1 - cov.P - k));
}

double DistanceOracle::vertex_distance(VertexId a, VertexId b) const {
  if (a == b) return 0.0;
  return distance(PointAddress::at_vertex(a), PointAddress::at_vertex(b));
}

}  // namespace ramify
