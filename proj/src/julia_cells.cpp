#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "ramify/julia.hpp"

namespace ramify {

namespace {

Vec2 to_vec(Cplx z) { return {std::real(z), std::imag(z)}; }

struct PointGrid {
  double cell = 1;
  double ox = 0, oy = 0;
  std::unordered_map<int64_t, std::vector<int>> buckets;
  const std::vector<Cplx>* pts = nullptr;

  int64_t key(int64_t ix, int64_t iy) const { return ix * 2000003 + iy; }

  void build(const std::vector<Cplx>& points, double cell_size) {
    pts = &points;
    cell = cell_size;
    buckets.clear();
    for (size_t i = 0; i < points.size(); ++i) {
      int64_t ix = int64_t(std::floor((std::real(points[i]) - ox) / cell));
      int64_t iy = int64_t(std::floor((std::imag(points[i]) - oy) / cell));
      buckets[key(ix, iy)].push_back(int(i));
    }
  }

  template <class F>
  void for_radius(Cplx p, double radius, F&& f) const {
    int64_t x0 = int64_t(std::floor((std::real(p) - radius - ox) / cell));
    int64_t x1 = int64_t(std::floor((std::real(p) + radius - ox) / cell));
    int64_t y0 = int64_t(std::floor((std::imag(p) - radius - oy) / cell));
    int64_t y1 = int64_t(std::floor((std::imag(p) + radius - oy) / cell));
    for (int64_t ix = x0; ix <= x1; ++ix)
      for (int64_t iy = y0; iy <= y1; ++iy) {
        auto it = buckets.find(key(ix, iy));
        if (it == buckets.end()) continue;
        for (int i : it->second)
          if (std::abs((*pts)[size_t(i)] - p) <= radius) f(i);
      }
  }
};

// distance to the k-th nearest neighbor, per point
std::vector<double> local_scales(const std::vector<Cplx>& pts, int k) {
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (Cplx z : pts) {
    lo_x = std::min(lo_x, std::real(z));
    hi_x = std::max(hi_x, std::real(z));
    lo_y = std::min(lo_y, std::imag(z));
    hi_y = std::max(hi_y, std::imag(z));
  }
  double diag = std::hypot(hi_x - lo_x, hi_y - lo_y);
  double cell = std::max(diag / std::sqrt(double(pts.size()) + 1.0), diag * 1e-9);
  PointGrid grid;
  grid.build(pts, cell * 4);
  std::vector<double> scale(pts.size());
  std::vector<double> dists;
  for (size_t i = 0; i < pts.size(); ++i) {
    double radius = cell * 4;
    for (;;) {
      dists.clear();
      grid.for_radius(pts[i], radius, [&](int j) {
        if (size_t(j) != i) dists.push_back(std::abs(pts[size_t(j)] - pts[i]));
      });
      if (int(dists.size()) >= k || radius > diag) break;
      radius *= 2;
    }
    if (int(dists.size()) >= k) {
      std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
      scale[i] = dists[size_t(k - 1)];
    } else {
      scale[i] = radius;
    }
  }
  return scale;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) {
    for (size_t i = 0; i < n; ++i) parent[i] = int(i);
  }
  int find(int x) {
    int root = x;
    while (parent[size_t(root)] != root) root = parent[size_t(root)];
    while (parent[size_t(x)] != root) {
      int nxt = parent[size_t(x)];
      parent[size_t(x)] = root;
      x = nxt;
    }
    return root;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[size_t(std::max(a, b))] = std::min(a, b);
  }
};

struct LevelClustering {
  std::vector<int> cluster_of;            // per cloud point; -1 removed
  std::vector<std::vector<int>> members;  // canonical order
};

LevelClustering cluster_level(const std::vector<Cplx>& cloud, const std::vector<double>& scale,
                              const std::vector<Cplx>& cut_pts, double link_mult, double remove_mult) {
  LevelClustering out;
  size_t n = cloud.size();
  out.cluster_of.assign(n, -1);

  std::vector<char> active(n, 1);
  if (!cut_pts.empty()) {
    PointGrid cut_grid;
    double med = 0;
    {
      std::vector<double> s = scale;
      std::nth_element(s.begin(), s.begin() + long(s.size() / 2), s.end());
      med = s[s.size() / 2];
    }
    cut_grid.build(cut_pts, std::max(med * remove_mult, 1e-12));
    for (size_t i = 0; i < n; ++i) {
      double radius = remove_mult * scale[i];
      bool removed = false;
      cut_grid.for_radius(cloud[i], radius, [&](int) { removed = true; });
      if (removed) active[i] = 0;
    }
  }

  // link active points within link_mult * min(scale_u, scale_v)
  PointGrid grid;
  std::vector<Cplx> act_pts;
  std::vector<int> act_idx;
  for (size_t i = 0; i < n; ++i)
    if (active[i]) {
      act_pts.push_back(cloud[i]);
      act_idx.push_back(int(i));
    }
  if (act_pts.empty()) return out;
  double med_scale;
  {
    std::vector<double> s;
    s.reserve(act_idx.size());
    for (int i : act_idx) s.push_back(scale[size_t(i)]);
    std::nth_element(s.begin(), s.begin() + long(s.size() / 2), s.end());
    med_scale = s[s.size() / 2];
  }
  grid.build(act_pts, std::max(med_scale * link_mult, 1e-12));
  UnionFind uf(act_pts.size());
  for (size_t i = 0; i < act_pts.size(); ++i) {
    double radius = link_mult * scale[size_t(act_idx[i])];
    grid.for_radius(act_pts[i], radius, [&](int j) {
      if (size_t(j) <= i) return;
      double lim = link_mult * std::min(scale[size_t(act_idx[i])], scale[size_t(act_idx[size_t(j)])]);
      if (std::abs(act_pts[size_t(j)] - act_pts[i]) <= lim) uf.unite(int(i), j);
    });
  }
  std::unordered_map<int, int> root_to_cluster;
  std::vector<std::vector<int>> groups;
  for (size_t i = 0; i < act_pts.size(); ++i) {
    int r = uf.find(int(i));
    auto it = root_to_cluster.find(r);
    if (it == root_to_cluster.end()) {
      it = root_to_cluster.emplace(r, int(groups.size())).first;
      groups.emplace_back();
    }
    groups[size_t(it->second)].push_back(act_idx[i]);
  }
  // absorb stray fragments (below 4 points) into the nearest real cluster
  std::vector<std::pair<Cplx, int>> anchors;  // (point, group) for large groups
  for (size_t g = 0; g < groups.size(); ++g)
    if (groups[g].size() >= 4)
      for (int i : groups[g]) anchors.emplace_back(cloud[size_t(i)], int(g));
  if (!anchors.empty()) {
    for (size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].size() >= 4) continue;
      int best_group = -1;
      double best = 1e300;
      for (int i : groups[g])
        for (const auto& [p, og] : anchors) {
          double d = std::abs(cloud[size_t(i)] - p);
          if (d < best) {
            best = d;
            best_group = og;
          }
        }
      if (best_group >= 0) {
        for (int i : groups[g]) groups[size_t(best_group)].push_back(i);
        groups[g].clear();
      }
    }
  }
  groups.erase(std::remove_if(groups.begin(), groups.end(), [](const auto& g) { return g.empty(); }),
               groups.end());
  // canonical ordering by lexicographically smallest member point
  auto group_key = [&](const std::vector<int>& g) {
    Cplx best = cloud[size_t(g.front())];
    for (int i : g) {
      Cplx z = cloud[size_t(i)];
      if (std::real(z) < std::real(best) ||
          (std::real(z) == std::real(best) && std::imag(z) < std::imag(best)))
        best = z;
    }
    return std::pair<double, double>(std::real(best), std::imag(best));
  };
  std::sort(groups.begin(), groups.end(),
            [&](const auto& a, const auto& b) { return group_key(a) < group_key(b); });
  for (auto& g : groups) std::sort(g.begin(), g.end());
  out.members = std::move(groups);
  for (size_t g = 0; g < out.members.size(); ++g)
    for (int i : out.members[g]) out.cluster_of[size_t(i)] = int(g);
  return out;
}

std::vector<Cplx> preimage_set(const RationalMap& f, const std::vector<Cplx>& pts, double dedup_tol,
                               std::vector<int>* parent_out) {
  std::vector<Cplx> out;
  std::vector<int> parents;
  for (size_t i = 0; i < pts.size(); ++i) {
    PreimageResult pre = preimages(f, pts[i]);
    for (Cplx z : pre.roots) {
      bool dup = false;
      for (Cplx w : out)
        if (std::abs(z - w) < dedup_tol) {
          dup = true;
          break;
        }
      if (!dup) {
        out.push_back(z);
        parents.push_back(int(i));
      }
    }
  }
  if (parent_out) *parent_out = std::move(parents);
  return out;
}

}  // namespace

// ---- branch cut validation -----------------------------------------------------

BranchCutReport validate_branch_cut(const RationalMap& f, const BranchCutSpec& cut,
                                    const JuliaSample& sample, const ClusterParams& params) {
  if (sample.pts.size() < 10000)
    raise(ErrorCode::BadInput, "branch cut validation needs a sample of >= 1e4 points");
  BranchCutReport rep;

  // (i) invariance f(S) subset S
  rep.invariant = true;
  for (Cplx s : cut.points) {
    Cplx image = f.eval(s);
    double best = 1e300;
    for (Cplx t : cut.points) best = std::min(best, std::abs(image - t));
    if (best > 1e-9) rep.invariant = false;
  }

  std::vector<double> scale = local_scales(sample.pts, params.knn);
  std::vector<int> v1_parent;
  std::vector<Cplx> v1 = preimage_set(f, cut.points, 1e-9, &v1_parent);

  auto count_components = [&](const std::vector<Cplx>& cut_pts, double mult_factor) {
    LevelClustering c = cluster_level(sample.pts, scale, cut_pts, params.link_mult * mult_factor,
                                      params.remove_mult * mult_factor);
    return c;
  };

  LevelClustering cS = count_components(cut.points, 1.0);
  LevelClustering cS_half = count_components(cut.points, 0.5);
  LevelClustering cV = count_components(v1, 1.0);
  LevelClustering cV_half = count_components(v1, 0.5);
  rep.components_S = int(cS.members.size());
  rep.components_V1 = int(cV.members.size());
  rep.counts_stable =
      cS.members.size() == cS_half.members.size() && cV.members.size() == cV_half.members.size();

  // (iii) even-cover law
  rep.cover_law = rep.components_V1 == f.degree() * rep.components_S;

  // (iv) numerical injectivity per 1-cell: far-apart samples with near-equal images
  rep.injective = true;
  double med_scale;
  {
    std::vector<double> s = scale;
    std::nth_element(s.begin(), s.begin() + long(s.size() / 2), s.end());
    med_scale = s[s.size() / 2];
  }
  double img_tol = 3 * med_scale;
  std::vector<Cplx> cloud_imgs(sample.pts.size());
  for (size_t i = 0; i < sample.pts.size(); ++i) cloud_imgs[i] = f.eval(sample.pts[i]);
  double diam_est = 0;
  {
    std::vector<Vec2> v;
    for (size_t i = 0; i < sample.pts.size(); i += 37) v.push_back(to_vec(sample.pts[i]));
    diam_est = cloud_diameter(v);
  }
  double sep = 0.05 * diam_est;
  PointGrid img_grid;
  img_grid.build(cloud_imgs, std::max(img_tol, 1e-12));
  for (size_t i = 0; i < sample.pts.size() && rep.injective; i += 3) {
    int ci = cV.cluster_of[i];
    if (ci < 0) continue;
    img_grid.for_radius(cloud_imgs[i], img_tol, [&](int j) {
      if (!rep.injective || size_t(j) <= i) return;
      if (cV.cluster_of[size_t(j)] != ci) return;
      if (std::abs(sample.pts[size_t(j)] - sample.pts[i]) >= sep) {
        rep.injective = false;
        rep.injectivity_witness[0] = sample.pts[i];
        rep.injectivity_witness[1] = sample.pts[size_t(j)];
      }
    });
  }

  if (!rep.invariant)
    rep.failure = error_code_name(ErrorCode::NotInvariant);
  else if (!rep.injective)
    rep.failure = error_code_name(ErrorCode::InjectivityWitness);
  else if (!rep.cover_law)
    rep.failure = error_code_name(ErrorCode::CoverCountMismatch);
  else if (!rep.counts_stable)
    rep.failure = error_code_name(ErrorCode::UnstableClustering);
  rep.valid = rep.invariant && rep.injective && rep.cover_law && rep.counts_stable;
  return rep;
}

std::string BranchCutReport::to_json() const {
  nlohmann::json j;
  j["valid"] = valid;
  j["invariant"] = invariant;
  j["counts_stable"] = counts_stable;
  j["cover_law"] = cover_law;
  j["injective"] = injective;
  j["components_without_cut"] = components_S;
  j["components_without_preimage"] = components_V1;
  if (!failure.empty()) j["failure"] = failure;
  if (!injective)
    j["injectivity_witness"] = {{std::real(injectivity_witness[0]), std::imag(injectivity_witness[0])},
                                {std::real(injectivity_witness[1]), std::imag(injectivity_witness[1])}};
  return j.dump(2);
}

// ---- extraction -----------------------------------------------------------------

std::vector<int> JuliaCellDecomposition::counts() const {
  std::vector<int> out;
  for (int n = 1; n <= depth; ++n) out.push_back(int(cells[size_t(n)].size()));
  return out;
}

JuliaCellDecomposition extract_cells(const RationalMap& f, const BranchCutSpec& cut, int depth,
                                     const JuliaSample& sample, const ClusterParams& params) {
  if (depth < 1) raise(ErrorCode::BadInput, "extraction depth must be >= 1");
  JuliaCellDecomposition dec;
  dec.f = f;
  dec.cut = cut.points;
  dec.depth = depth;
  dec.cloud = sample.pts;

  // V_0 = S, V_n = f^-1(V_{n-1}); keep parent links and verify containment
  dec.level_vertices.push_back(cut.points);
  dec.vertex_parent.push_back(std::vector<int>(cut.points.size(), -1));
  for (int n = 1; n <= depth; ++n) {
    std::vector<int> parent;
    std::vector<Cplx> vn = preimage_set(f, dec.level_vertices[size_t(n) - 1], 1e-9, &parent);
    for (size_t i = 0; i < vn.size(); ++i) {
      double err = std::abs(f.eval(vn[i]) - dec.level_vertices[size_t(n) - 1][size_t(parent[i])]);
      if (err > 1e-7)
        raise(ErrorCode::BadInput, "preimage residual too large while building level vertices");
    }
    dec.level_vertices.push_back(std::move(vn));
    dec.vertex_parent.push_back(std::move(parent));
  }

  std::vector<double> scale = local_scales(dec.cloud, params.knn);

  dec.cells.assign(size_t(depth) + 1, {});
  std::vector<LevelClustering> clusterings(size_t(depth) + 1);
  for (int n = 1; n <= depth; ++n) {
    const auto& vn = dec.level_vertices[size_t(n)];
    LevelClustering c =
        cluster_level(dec.cloud, scale, vn, params.link_mult, params.remove_mult);
    LevelClustering probe =
        cluster_level(dec.cloud, scale, vn, params.link_mult * 0.5, params.remove_mult * 0.5);
    if (c.members.size() != probe.members.size())
      raise(ErrorCode::UnstableClustering,
            "component count at level " + std::to_string(n) + " changes under refinement (" +
                std::to_string(c.members.size()) + " vs " + std::to_string(probe.members.size()) + ")");
    clusterings[size_t(n)] = std::move(c);
  }

  for (int n = 1; n <= depth; ++n) {
    const LevelClustering& cl = clusterings[size_t(n)];
    auto& cells = dec.cells[size_t(n)];
    cells.resize(cl.members.size());
    for (size_t g = 0; g < cl.members.size(); ++g) cells[g].sample_idx = cl.members[g];

    // parent: the level-(n-1) cluster containing this cluster's samples
    if (n >= 2) {
      const LevelClustering& up = clusterings[size_t(n) - 1];
      for (size_t g = 0; g < cells.size(); ++g) {
        std::map<int, int> votes;
        for (int i : cells[g].sample_idx) {
          int pg = up.cluster_of[size_t(i)];
          if (pg >= 0) votes[pg]++;
        }
        if (votes.empty())
          raise(ErrorCode::UnstableClustering, "cluster lost its parent at level " + std::to_string(n));
        cells[g].parent =
            std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
              return a.second < b.second;
            })->first;
      }
    }

    // image under f: level n-1 cluster receiving the forward images (n >= 2)
    if (n >= 2) {
      const LevelClustering& up = clusterings[size_t(n) - 1];
      PointGrid up_grid;
      std::vector<Cplx> up_pts;
      std::vector<int> up_cluster;
      for (size_t i = 0; i < dec.cloud.size(); ++i)
        if (up.cluster_of[i] >= 0) {
          up_pts.push_back(dec.cloud[i]);
          up_cluster.push_back(up.cluster_of[i]);
        }
      double med_scale;
      {
        std::vector<double> s = scale;
        std::nth_element(s.begin(), s.begin() + long(s.size() / 2), s.end());
        med_scale = s[s.size() / 2];
      }
      up_grid.build(up_pts, med_scale * 8);
      for (size_t g = 0; g < cells.size(); ++g) {
        std::map<int, int> votes;
        int checked = 0;
        for (int i : cells[g].sample_idx) {
          if (checked > 400) break;
          Cplx w = f.eval(dec.cloud[size_t(i)]);
          int best = -1;
          double best_d = 1e300;
          for (double radius = med_scale * 4; radius < 1e6; radius *= 3) {
            up_grid.for_radius(w, radius, [&](int j) {
              double d = std::abs(up_pts[size_t(j)] - w);
              if (d < best_d) {
                best_d = d;
                best = up_cluster[size_t(j)];
              }
            });
            if (best >= 0) break;
          }
          if (best >= 0 && best_d < med_scale * 16) {
            votes[best]++;
            checked++;
          }
        }
        if (votes.empty())
          raise(ErrorCode::UnstableClustering, "image cell vote failed at level " + std::to_string(n));
        cells[g].image = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                           return a.second < b.second;
                         })->first;
      }
    }

    // boundary vertices: V_n points adhering to the cluster
    {
      PointGrid act_grid;
      std::vector<Cplx> act_pts;
      std::vector<int> act_cluster;
      for (size_t i = 0; i < dec.cloud.size(); ++i)
        if (cl.cluster_of[i] >= 0) {
          act_pts.push_back(dec.cloud[i]);
          act_cluster.push_back(cl.cluster_of[i]);
        }
      std::vector<double> act_scale;
      for (size_t i = 0; i < dec.cloud.size(); ++i)
        if (cl.cluster_of[i] >= 0) act_scale.push_back(scale[i]);
      double med_scale;
      {
        std::vector<double> s = act_scale;
        std::nth_element(s.begin(), s.begin() + long(s.size() / 2), s.end());
        med_scale = s[s.size() / 2];
      }
      act_grid.build(act_pts, med_scale * params.adhere_mult);
      const auto& vn = dec.level_vertices[size_t(n)];
      for (size_t vi = 0; vi < vn.size(); ++vi) {
        std::map<int, double> near;  // cluster -> closest adherent distance
        for (double radius_mult : {1.0, 3.0, 9.0}) {
          act_grid.for_radius(vn[vi], med_scale * params.adhere_mult * radius_mult, [&](int j) {
            double d = std::abs(act_pts[size_t(j)] - vn[vi]);
            if (d <= params.adhere_mult * act_scale[size_t(j)]) {
              auto it = near.find(act_cluster[size_t(j)]);
              if (it == near.end() || d < it->second) near[act_cluster[size_t(j)]] = d;
            }
          });
          if (!near.empty()) break;
        }
        for (const auto& [g, d] : near) cells[size_t(g)].boundary_vertices.push_back(int(vi));
      }
      for (auto& cell : cells) {
        std::sort(cell.boundary_vertices.begin(), cell.boundary_vertices.end());
        cell.boundary_vertices.erase(std::unique(cell.boundary_vertices.begin(), cell.boundary_vertices.end()),
                                     cell.boundary_vertices.end());
      }
    }
  }
  return dec;
}

std::string JuliaCellDecomposition::cells_csv() const {
  std::ostringstream os;
  os << "level,cell_id,x,y\n";
  for (int n = 1; n <= depth; ++n)
    for (size_t g = 0; g < cells[size_t(n)].size(); ++g)
      for (int i : cells[size_t(n)][g].sample_idx)
        os << n << "," << g << "," << std::real(cloud[size_t(i)]) << "," << std::imag(cloud[size_t(i)])
           << "\n";
  return os.str();
}

std::string JuliaCellDecomposition::vertices_csv() const {
  std::ostringstream os;
  os << "level,vertex_id,x,y,cell_ids\n";
  for (int n = 1; n <= depth; ++n) {
    const auto& vn = level_vertices[size_t(n)];
    for (size_t vi = 0; vi < vn.size(); ++vi) {
      os << n << "," << vi << "," << std::real(vn[vi]) << "," << std::imag(vn[vi]) << ",";
      bool first = true;
      for (size_t g = 0; g < cells[size_t(n)].size(); ++g) {
        const auto& bv = cells[size_t(n)][g].boundary_vertices;
        if (std::binary_search(bv.begin(), bv.end(), int(vi))) {
          if (!first) os << ";";
          os << g;
          first = false;
        }
      }
      os << "\n";
    }
  }
  return os.str();
}

// ---- replacement derivation ------------------------------------------------------

namespace {

int numeric_type(const JuliaCellDecomposition& dec, int level, int cell) {
  // type of a level-n cell = index of the 1-cell reached by n-1 forward images
  while (level > 1) {
    cell = dec.cells[size_t(level)][size_t(cell)].image;
    --level;
  }
  return cell;
}

}  // namespace

DerivedSystem derive_replacement(const JuliaCellDecomposition& dec) {
  if (dec.depth < 2)
    raise(ErrorCode::InsufficientDepth, "replacement derivation needs a depth >= 2 decomposition");
  DerivedSystem out;
  const auto& one_cells = dec.cells[1];
  const auto& two_cells = dec.cells[2];
  size_t n_types = one_cells.size();

  // match each V_2 vertex to a V_1 vertex when they coincide as points
  const auto& v1 = dec.level_vertices[1];
  const auto& v2 = dec.level_vertices[2];
  std::vector<int> v2_as_v1(v2.size(), -1);
  for (size_t i = 0; i < v2.size(); ++i)
    for (size_t j = 0; j < v1.size(); ++j)
      if (std::abs(v2[i] - v1[j]) < 1e-8) {
        v2_as_v1[i] = int(j);
        break;
      }

  // children of 1-cell t, ordered canonically by the image cell's type
  std::vector<std::vector<int>> children_of(n_types);  // 2-cell indices
  for (size_t d = 0; d < two_cells.size(); ++d) children_of[size_t(two_cells[d].parent)].push_back(int(d));
  for (auto& ch : children_of)
    std::sort(ch.begin(), ch.end(),
              [&](int a, int b) { return two_cells[size_t(a)].image < two_cells[size_t(b)].image; });
  for (const auto& ch : children_of) {
    for (size_t i = 1; i < ch.size(); ++i)
      if (two_cells[size_t(ch[i])].image == two_cells[size_t(ch[i - 1])].image)
        raise(ErrorCode::GluingAmbiguity, "two children of one cell share a type");
  }

  ReplacementSystem sys;
  auto type_name = [](int t) { return "t" + std::to_string(t); };
  for (size_t t = 0; t < n_types; ++t) {
    CellType ct;
    ct.id = type_name(int(t));
    ct.boundary_arity = int(one_cells[t].boundary_vertices.size());
    for (int d : children_of[t]) ct.children.push_back(type_name(two_cells[size_t(d)].image));
    sys.types.push_back(ct);
  }
  // root: children are the 1-cells; junctions are the shared V_1 points
  {
    CellType root;
    root.id = "root";
    root.boundary_arity = 0;
    for (size_t t = 0; t < n_types; ++t) root.children.push_back(type_name(int(t)));
    std::map<int, int> junction_of_v1;
    root.gluing.resize(n_types);
    for (size_t t = 0; t < n_types; ++t) {
      for (int v : one_cells[t].boundary_vertices) {
        int count = 0;
        for (size_t u = 0; u < n_types; ++u)
          if (std::binary_search(one_cells[u].boundary_vertices.begin(),
                                 one_cells[u].boundary_vertices.end(), v))
            ++count;
        GluingTarget g;
        if (count >= 2) {
          auto it = junction_of_v1.find(v);
          if (it == junction_of_v1.end()) it = junction_of_v1.emplace(v, int(junction_of_v1.size())).first;
          g = {GluingTarget::Kind::Junction, it->second};
        } else {
          g = {GluingTarget::Kind::Free, 0};
        }
        root.gluing[t].push_back(g);
      }
    }
    root.junction_count = int(junction_of_v1.size());
    sys.types.push_back(root);
    sys.root_type = "root";
  }

  // per-type gluing from the level 1 -> 2 structure
  for (size_t t = 0; t < n_types; ++t) {
    CellType& ct = sys.types[t];
    ct.gluing.resize(ct.children.size());
    std::map<int, int> junction_of_v2;  // shared interior V_2 vertex -> junction index
    const auto& parent_bv = one_cells[t].boundary_vertices;
    for (size_t ci = 0; ci < children_of[t].size(); ++ci) {
      const JuliaCell& d = two_cells[size_t(children_of[t][ci])];
      for (int w : d.boundary_vertices) {
        GluingTarget g;
        if (v2_as_v1[size_t(w)] >= 0) {
          // a V_1 point: must be a boundary vertex of the parent 1-cell
          auto it = std::find(parent_bv.begin(), parent_bv.end(), v2_as_v1[size_t(w)]);
          if (it == parent_bv.end())
            raise(ErrorCode::GluingAmbiguity,
                  "level-2 vertex coincides with a level-1 point outside its parent's boundary");
          g = {GluingTarget::Kind::Parent, int(it - parent_bv.begin())};
        } else {
          // interior: how many children of this parent adhere to it?
          int count = 0;
          for (int other : children_of[t]) {
            const auto& bv = two_cells[size_t(other)].boundary_vertices;
            if (std::binary_search(bv.begin(), bv.end(), w)) ++count;
          }
          if (count >= 2) {
            auto it = junction_of_v2.find(w);
            if (it == junction_of_v2.end())
              it = junction_of_v2.emplace(w, int(junction_of_v2.size())).first;
            g = {GluingTarget::Kind::Junction, it->second};
          } else {
            raise(ErrorCode::GluingAmbiguity,
                  "interior level-2 vertex adheres to a single cell (adherence radius too small?)");
          }
        }
        ct.gluing[ci].push_back(g);
      }
    }
    ct.junction_count = int(junction_of_v2.size());
  }

  // The child slot order above follows each 2-cell's boundary_vertices list;
  // the child's *type* slot order is its own 1-cell's list. Reorder entries so
  // slot s of the gluing matches slot s of the type, using the f-link.
  for (size_t t = 0; t < n_types; ++t) {
    CellType& ct = sys.types[t];
    for (size_t ci = 0; ci < children_of[t].size(); ++ci) {
      const JuliaCell& d = two_cells[size_t(children_of[t][ci])];
      const auto& type_bv = one_cells[size_t(d.image)].boundary_vertices;  // V_1 indices
      std::vector<GluingTarget> reordered(type_bv.size());
      std::vector<char> filled(type_bv.size(), 0);
      if (d.boundary_vertices.size() != type_bv.size())
        raise(ErrorCode::GluingAmbiguity, "child cell and its image disagree on boundary vertex count");
      for (size_t k = 0; k < d.boundary_vertices.size(); ++k) {
        int w = d.boundary_vertices[k];
        int image_v1 = dec.vertex_parent[2][size_t(w)];
        auto it = std::find(type_bv.begin(), type_bv.end(), image_v1);
        if (it == type_bv.end())
          raise(ErrorCode::GluingAmbiguity, "boundary vertex image is not a boundary vertex of the image cell");
        size_t slot = size_t(it - type_bv.begin());
        if (filled[slot]) raise(ErrorCode::GluingAmbiguity, "two boundary vertices map to one slot");
        filled[slot] = 1;
        reordered[slot] = ct.gluing[ci][k];
      }
      ct.gluing[ci] = std::move(reordered);
    }
  }

  ValidationReport val = validate_system(sys);
  if (!val.well_formed)
    raise(ErrorCode::GluingAmbiguity, "derived system fails validation: " + val.violations.front());

  out.system = std::make_shared<ReplacementSystem>(std::move(sys));
  out.complex = std::make_shared<CellComplex>(expand(*out.system, dec.depth));
  for (size_t t = 0; t < n_types; ++t) out.type_of_onecell.push_back(int(t));
  CellComplex& cx = *out.complex;

  // align complex cells with numeric clusters level by level
  out.cell_to_cluster.assign(size_t(dec.depth) + 1, {});
  std::vector<int> cluster_of_cell(cx.cells.size(), -1);
  cluster_of_cell[0] = 0;  // root: whole cloud
  for (int n = 1; n <= dec.depth; ++n) {
    out.cell_to_cluster[size_t(n)].assign(cx.levels[size_t(n)].size(), -1);
    // group numeric cells by parent cluster
    std::vector<std::vector<int>> by_parent(n == 1 ? 1 : dec.cells[size_t(n) - 1].size());
    for (size_t g = 0; g < dec.cells[size_t(n)].size(); ++g) {
      int par = n == 1 ? 0 : dec.cells[size_t(n)][g].parent;
      by_parent[size_t(par)].push_back(int(g));
    }
    for (size_t pos = 0; pos < cx.levels[size_t(n)].size(); ++pos) {
      CellId c = cx.levels[size_t(n)][pos];
      const Cell& cell = cx.cells[size_t(c)];
      int parent_cluster = cluster_of_cell[size_t(cell.parent)];
      int match = -1;
      for (int g : by_parent[size_t(parent_cluster)]) {
        int ty = numeric_type(dec, n, g);
        if (ty == cell.type) {
          if (match >= 0) raise(ErrorCode::GluingAmbiguity, "cluster alignment ambiguous");
          match = g;
        }
      }
      if (match < 0) raise(ErrorCode::GluingAmbiguity, "no cluster matches a symbolic cell");
      cluster_of_cell[size_t(c)] = match;
      out.cell_to_cluster[size_t(n)][pos] = match;
    }
  }

  // embedding: cluster samples per cell, V_n coordinates per complex vertex
  EmbeddedMetric m;
  m.cx = out.complex.get();
  m.exact = false;
  m.samples.assign(cx.cells.size(), {});
  m.vertex_pos.assign(cx.vertex_count(), Vec2{});
  m.vertex_known.assign(cx.vertex_count(), 0);
  for (size_t c = 0; c < cx.cells.size(); ++c) {
    const Cell& cell = cx.cells[c];
    if (cell.level == 0) {
      for (size_t i = 0; i < dec.cloud.size(); i += 11) m.samples[c].push_back(to_vec(dec.cloud[i]));
      continue;
    }
    int g = cluster_of_cell[c];
    const JuliaCell& jc = dec.cells[size_t(cell.level)][size_t(g)];
    auto& dst = m.samples[c];
    dst.reserve(jc.sample_idx.size() + jc.boundary_vertices.size());
    for (int i : jc.sample_idx) dst.push_back(to_vec(dec.cloud[size_t(i)]));
    const auto& vn = dec.level_vertices[size_t(cell.level)];
    for (int vi : jc.boundary_vertices) dst.push_back(to_vec(vn[size_t(vi)]));

    // slot alignment: complex slot order == type slot order == image-chain order
    // walk the numeric cell's boundary vertices into type slot positions
    std::vector<int> slot_to_bv(cell.vertices.size(), -1);
    {
      int level = cell.level;
      std::vector<int> bvs = jc.boundary_vertices;
      // type slot order comes from the 1-cell instance; map by repeated f-links
      std::vector<int> order(bvs.size());
      const auto& type_bv = dec.cells[1][size_t(numeric_type(dec, level, g))].boundary_vertices;
      for (size_t k = 0; k < bvs.size(); ++k) {
        int w = bvs[k];
        int lvl = level;
        while (lvl > 1) {
          w = dec.vertex_parent[size_t(lvl)][size_t(w)];
          --lvl;
        }
        auto it = std::find(type_bv.begin(), type_bv.end(), w);
        if (it == type_bv.end())
          raise(ErrorCode::GluingAmbiguity, "vertex image chain leaves the type's boundary list");
        order[k] = int(it - type_bv.begin());
      }
      if (bvs.size() != cell.vertices.size())
        raise(ErrorCode::GluingAmbiguity,
              "symbolic arity disagrees with numeric boundary vertex count at level " +
                  std::to_string(level));
      for (size_t k = 0; k < bvs.size(); ++k) slot_to_bv[size_t(order[k])] = bvs[k];
    }
    for (size_t s = 0; s < cell.vertices.size(); ++s) {
      VertexId v = cell.vertices[s];
      Vec2 pos = to_vec(dec.level_vertices[size_t(cell.level)][size_t(slot_to_bv[s])]);
      if (m.vertex_known[size_t(v)]) {
        if (dist(m.vertex_pos[size_t(v)], pos) > 1e-6)
          raise(ErrorCode::GluingAmbiguity, "vertex coordinate mismatch across cells");
      } else {
        m.vertex_known[size_t(v)] = 1;
        m.vertex_pos[size_t(v)] = pos;
      }
    }
  }
  out.embedding = std::move(m);
  return out;
}

std::vector<int> DerivedSystem::itinerary(CellId c) const {
  const CellComplex& cx = *complex;
  std::vector<int> out;
  std::vector<int> addr = cx.address(c);
  CellId cur = 0;
  for (int step : addr) {
    cur = cx.cells[size_t(cur)].children[size_t(step)];
    out.push_back(cx.cells[size_t(cur)].type);
  }
  return out;
}

JuliaVerifyReport verify_julia_undistorted(const JuliaCellDecomposition& dec, int depth) {
  if (depth > dec.depth) raise(ErrorCode::InsufficientDepth, "decomposition shallower than requested");
  const JuliaCellDecomposition* use = &dec;
  JuliaCellDecomposition truncated;
  if (depth < dec.depth) {
    truncated = dec;
    truncated.depth = depth;
    truncated.cells.resize(size_t(depth) + 1);
    truncated.level_vertices.resize(size_t(depth) + 1);
    truncated.vertex_parent.resize(size_t(depth) + 1);
    use = &truncated;
  }
  DerivedSystem d = derive_replacement(*use);
  JuliaVerifyReport rep;
  rep.undistorted = verify_undistorted(d.embedding, *d.complex);
  rep.local = verify_local_conditions(d.embedding, *d.complex);

  // Euclidean reduction: the orbit through infinity stays chordally away from
  // the sampled Julia set.
  auto chordal = [](Cplx a, Cplx b) {
    return 2 * std::abs(a - b) / std::sqrt((1 + std::norm(a)) * (1 + std::norm(b)));
  };
  Cplx z(1e9, 1e9);
  double min_chordal = 2;
  for (int it = 0; it < 60; ++it) {
    for (size_t i = 0; i < dec.cloud.size(); i += 211)
      min_chordal = std::min(min_chordal, chordal(z, dec.cloud[i]));
    Cplx p = dec.f.P.eval(z), q = dec.f.Q.eval(z);
    if (std::abs(q) < 1e-12 * std::max(1.0, std::abs(p)) || std::abs(p / q) > 1e12)
      z = Cplx(1e9, 1e9);  // passed through infinity
    else
      z = p / q;
  }
  rep.euclidean_reduction_ok = min_chordal > 1e-3;
  return rep;
}

std::string JuliaVerifyReport::to_json() const {
  nlohmann::json j;
  j["undistorted"] = nlohmann::json::parse(undistorted.to_json());
  j["local_conditions"] = nlohmann::json::parse(local.to_json());
  j["euclidean_reduction_ok"] = euclidean_reduction_ok;
  return j.dump(2);
}

}  // namespace ramify
