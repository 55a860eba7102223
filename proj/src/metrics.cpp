#include "ramify/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "ramify/rng.hpp"

namespace ramify {

double EmbeddedMetric::cell_diam(CellId c) const {
  if (exact) return geom[size_t(c)].diameter();
  const auto& pts = samples[size_t(c)];
  if (pts.size() < 2) raise(ErrorCode::MissingCellSamples, "cell has fewer than 2 samples");
  return cloud_diameter(pts);
}

double EmbeddedMetric::cell_dist(CellId a, CellId b) const {
  if (exact) return geom[size_t(a)].distance_to(geom[size_t(b)]);
  const auto& pa = samples[size_t(a)];
  const auto& pb = samples[size_t(b)];
  if (pa.empty() || pb.empty()) raise(ErrorCode::MissingCellSamples, "cell has no samples");
  size_t sa = std::max<size_t>(1, pa.size() / 700);
  size_t sb = std::max<size_t>(1, pb.size() / 700);
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pa.size(); i += sa)
    for (size_t j = 0; j < pb.size(); j += sb) best = std::min(best, dist(pa[i], pb[j]));
  return best;
}

Vec2 EmbeddedMetric::vertex_position(VertexId v) const {
  if (v < 0 || size_t(v) >= vertex_pos.size() || !vertex_known[size_t(v)])
    raise(ErrorCode::BadInput, "vertex has no coordinates");
  return vertex_pos[size_t(v)];
}

Vec2 EmbeddedMetric::anchor(CellId c) const {
  if (exact) return geom[size_t(c)].corner_points().front();
  const auto& pts = samples[size_t(c)];
  if (pts.empty()) raise(ErrorCode::MissingCellSamples, "cell has no samples");
  return pts.front();
}

EmbeddedMetric attach_embedding(const CellComplex& cx, const std::string& builtin,
                                const VicsekParams& params) {
  BuiltinGeometry g = builtin_geometry(builtin, cx, params);
  EmbeddedMetric m;
  m.cx = &cx;
  m.exact = true;
  m.geom = std::move(g.cell_geom);
  m.vertex_pos = std::move(g.vertex_pos);
  m.vertex_known.assign(m.vertex_pos.size(), 1);
  // exactness of *distances* varies (vicsek hulls only bound the piece); the
  // hull diameters are exact for all geometric builtins.
  (void)g.exact_distances;
  return m;
}

EmbeddedMetric attach_embedding_json(const CellComplex& cx, const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  EmbeddedMetric m;
  m.cx = &cx;
  m.exact = false;
  m.samples.assign(cx.cells.size(), {});
  m.vertex_pos.assign(cx.vertex_count(), Vec2{});
  m.vertex_known.assign(cx.vertex_count(), 0);
  for (const auto& jc : j.at("cells")) {
    std::vector<int> addr = jc.at("address").get<std::vector<int>>();
    CellId c = cx.cell_at(addr);
    if (c < 0) raise(ErrorCode::BadInput, "embedding references a cell outside the complex");
    for (const auto& p : jc.at("points"))
      m.samples[size_t(c)].push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  if (j.contains("vertices"))
    for (const auto& jv : j.at("vertices")) {
      int v = jv.at(0).get<int>();
      if (v >= 0 && size_t(v) < m.vertex_pos.size()) {
        m.vertex_pos[size_t(v)] = {jv.at(1).get<double>(), jv.at(2).get<double>()};
        m.vertex_known[size_t(v)] = 1;
      }
    }
  for (size_t c = 0; c < cx.cells.size(); ++c)
    if (m.samples[c].size() < 2)
      raise(ErrorCode::MissingCellSamples,
            "cell " + std::to_string(c) + " has fewer than 2 sample points");
  return m;
}

// ---- tables ------------------------------------------------------------------

DiamTable diam_table(const EmbeddedMetric& m, const CellComplex& cx, int depth) {
  if (depth > cx.depth) raise(ErrorCode::LevelOutOfRange, "table depth exceeds complex depth");
  DiamTable t;
  for (int l = 0; l <= depth; ++l)
    for (CellId c : cx.levels[size_t(l)]) t.diameters.push_back({l, c, m.cell_diam(c)});
  // same-level pairs whose parents intersect (the local pairs of the theory)
  for (int l = 1; l <= depth; ++l) {
    for (CellId a : cx.levels[size_t(l)]) {
      const Cell& ca = cx.cells[size_t(a)];
      // peers: children of cells intersecting the parent
      std::vector<CellId> peers;
      const Cell& par = cx.cells[size_t(ca.parent)];
      for (VertexId v : par.vertices)
        for (CellId up : cx.cells_with_vertex(v, par.level))
          for (CellId ch : cx.cells[size_t(up)].children) peers.push_back(ch);
      for (CellId ch : par.children) peers.push_back(ch);
      std::sort(peers.begin(), peers.end());
      peers.erase(std::unique(peers.begin(), peers.end()), peers.end());
      for (CellId b : peers)
        if (b > a) {
          bool disjoint = !cx.same_level_intersect(a, b);
          t.pair_distances.push_back({l, a, b, m.cell_dist(a, b), disjoint});
        }
    }
  }
  return t;
}

std::string DiamTable::diameters_csv(const CellComplex& cx) const {
  std::ostringstream os;
  os << "level,address,diameter\n";
  for (const auto& row : diameters) {
    os << row.level << ",";
    auto addr = cx.address(row.cell);
    for (size_t i = 0; i < addr.size(); ++i) os << (i ? " " : "") << addr[i];
    char buf[32];
    snprintf(buf, sizeof buf, "%.17g", row.diameter);
    os << "," << buf << "\n";
  }
  return os.str();
}

// ---- verify_undistorted ------------------------------------------------------

namespace {

struct RatioStats {
  // per level-gap x: extreme ratios diam(deep)/diam(shallow) over intersecting pairs
  std::vector<double> min_ratio, max_ratio;
  std::vector<RatioWitness> min_wit, max_wit;
  void note(int x, double ratio, CellId low, CellId high, int ll, int lh) {
    if (int(min_ratio.size()) <= x) {
      min_ratio.resize(size_t(x) + 1, std::numeric_limits<double>::infinity());
      max_ratio.resize(size_t(x) + 1, 0.0);
      min_wit.resize(size_t(x) + 1);
      max_wit.resize(size_t(x) + 1);
    }
    if (ratio < min_ratio[size_t(x)]) {
      min_ratio[size_t(x)] = ratio;
      min_wit[size_t(x)] = {low, high, ratio, ll, lh};
    }
    if (ratio > max_ratio[size_t(x)]) {
      max_ratio[size_t(x)] = ratio;
      max_wit[size_t(x)] = {low, high, ratio, ll, lh};
    }
  }
};

}  // namespace

UndistortedReport verify_undistorted(const EmbeddedMetric& m, const CellComplex& cx,
                                     const VerifyOptions& opts) {
  if (cx.depth < 4) raise(ErrorCode::InsufficientDepth, "need at least 4 expanded levels");
  UndistortedReport rep;
  rep.depth_used = cx.depth;

  std::vector<double> diam(cx.cells.size());
  for (size_t c = 0; c < cx.cells.size(); ++c) diam[c] = m.cell_diam(CellId(c));

  RatioStats stats;
  rep.lambda_per_level.assign(size_t(cx.depth) + 1, 1.0);
  std::vector<RatioWitness> lambda_wit(size_t(cx.depth) + 1);

  // nested pairs (every cell against each proper ancestor)
  for (size_t c = 1; c < cx.cells.size(); ++c) {
    int lc = cx.cells[c].level;
    CellId anc = cx.cells[c].parent;
    while (anc >= 0) {
      int la = cx.cells[size_t(anc)].level;
      stats.note(lc - la, diam[c] / diam[size_t(anc)], anc, CellId(c), la, lc);
      anc = cx.cells[size_t(anc)].parent;
    }
  }
  // vertex-sharing pairs across all level gaps (includes same-level)
  for (size_t v = 0; v < cx.vtable.size(); ++v) {
    for (int lm = cx.vertex_birth[v]; lm <= cx.depth; ++lm) {
      const auto& shallow = cx.vtable[v][size_t(lm)];
      if (shallow.empty()) continue;
      for (int ln = lm; ln <= cx.depth; ++ln) {
        const auto& deep = cx.vtable[v][size_t(ln)];
        for (CellId a : shallow)
          for (CellId b : deep) {
            if (ln == lm) {
              if (a == b) continue;
              double ratio = diam[size_t(b)] / diam[size_t(a)];
              double& best = rep.lambda_per_level[size_t(lm)];
              double r2 = std::max(ratio, 1.0 / ratio);
              if (r2 > best) {
                best = r2;
                lambda_wit[size_t(lm)] =
                    ratio >= 1 ? RatioWitness{a, b, ratio, lm, ln} : RatioWitness{b, a, 1 / ratio, lm, ln};
              }
            }
            if (cx.ancestor_at(b, lm) == a) continue;  // counted as nested
            stats.note(ln - lm, diam[size_t(b)] / diam[size_t(a)], a, b, lm, ln);
          }
      }
    }
  }

  // fit r, R, C over the observed gaps (x >= 1); x = 0 feeds C via lambda
  double R = 0, r = std::numeric_limits<double>::infinity();
  for (size_t x = 1; x < stats.max_ratio.size(); ++x) {
    if (stats.max_ratio[x] > 0) R = std::max(R, std::pow(stats.max_ratio[x], 1.0 / double(x)));
    if (std::isfinite(stats.min_ratio[x])) r = std::min(r, std::pow(stats.min_ratio[x], 1.0 / double(x)));
  }
  if (!std::isfinite(r)) r = R;
  if (r > R) r = R;
  double C = 1;
  for (size_t x = 0; x < stats.max_ratio.size(); ++x) {
    if (stats.max_ratio[x] > 0 && R > 0) C = std::max(C, stats.max_ratio[x] / std::pow(R, double(x)));
    if (std::isfinite(stats.min_ratio[x]) && stats.min_ratio[x] > 0)
      C = std::max(C, std::pow(r, double(x)) / stats.min_ratio[x]);
  }
  rep.constants.r = r;
  rep.constants.R = R;
  rep.constants.C = C;

  // separation: local disjoint pairs (parents intersect), min ordered ratio per level
  rep.delta_per_level.assign(size_t(cx.depth) + 1, std::numeric_limits<double>::infinity());
  double delta = std::numeric_limits<double>::infinity();
  DiamTable table = diam_table(m, cx, cx.depth);
  for (const auto& row : table.pair_distances) {
    if (!row.disjoint) continue;
    double ra = row.distance / diam[size_t(row.a)];
    double rb = row.distance / diam[size_t(row.b)];
    double worst = std::min(ra, rb);
    if (worst < rep.delta_per_level[size_t(row.level)]) rep.delta_per_level[size_t(row.level)] = worst;
    if (worst < delta) {
      delta = worst;
      rep.separation_witness = row;
    }
  }
  // cross-validation: full quadratic scan at shallow depths
  int full_depth = std::min(opts.full_check_depth, cx.depth);
  for (int l = 1; l <= full_depth; ++l) {
    const auto& lvl = cx.levels[size_t(l)];
    for (size_t i = 0; i < lvl.size(); ++i)
      for (size_t j = i + 1; j < lvl.size(); ++j) {
        if (cx.same_level_intersect(lvl[i], lvl[j])) continue;
        double d = m.cell_dist(lvl[i], lvl[j]);
        double worst = std::min(d / diam[size_t(lvl[i])], d / diam[size_t(lvl[j])]);
        if (worst < rep.delta_per_level[size_t(l)]) rep.delta_per_level[size_t(l)] = worst;
        if (worst < delta) {
          delta = worst;
          rep.separation_witness = {l, lvl[i], lvl[j], d, true};
        }
      }
  }
  rep.constants.delta = std::isfinite(delta) ? delta : 0;

  // drift test: trends across levels falsify; any finite depth admits constants
  std::vector<double> xs, ys;
  for (int l = 1; l <= cx.depth; ++l)
    if (rep.lambda_per_level[size_t(l)] > 0) {
      xs.push_back(l);
      ys.push_back(std::log(rep.lambda_per_level[size_t(l)]));
    }
  rep.lambda_drift_slope = linear_fit(xs, ys).slope;
  xs.clear();
  ys.clear();
  for (int l = 1; l <= cx.depth; ++l)
    if (std::isfinite(rep.delta_per_level[size_t(l)]) && rep.delta_per_level[size_t(l)] > 0) {
      xs.push_back(l);
      ys.push_back(std::log(rep.delta_per_level[size_t(l)]));
    }
  rep.delta_drift_slope = xs.size() >= 2 ? linear_fit(xs, ys).slope : 0;

  rep.exp_decay_ok = rep.lambda_drift_slope <= opts.drift_tol && R < 1.0;
  rep.separation_ok = rep.delta_drift_slope >= -opts.drift_tol && rep.constants.delta > 0;
  rep.pass = rep.exp_decay_ok && rep.separation_ok;

  // worst grower: deepest-level lambda witness
  for (int l = cx.depth; l >= 1; --l)
    if (rep.lambda_per_level[size_t(l)] > 1) {
      rep.decay_witness = lambda_wit[size_t(l)];
      break;
    }
  return rep;
}

// ---- local conditions --------------------------------------------------------

LocalConditionsReport verify_local_conditions(const EmbeddedMetric& m, const CellComplex& cx) {
  if (cx.depth < 2) raise(ErrorCode::InsufficientDepth, "need at least 2 expanded levels");
  LocalConditionsReport rep;
  std::vector<double> diam(cx.cells.size());
  for (size_t c = 0; c < cx.cells.size(); ++c) diam[c] = m.cell_diam(CellId(c));

  // lambda over same-level intersecting pairs
  double lambda = 1;
  for (int l = 1; l <= cx.depth; ++l)
    for (const auto& e : same_level_adjacency(cx, l)) {
      double ratio = std::max(diam[size_t(e.a)] / diam[size_t(e.b)], diam[size_t(e.b)] / diam[size_t(e.a)]);
      if (ratio > lambda) {
        lambda = ratio;
        rep.lambda_witness = {e.a, e.b, ratio, l, l};
      }
    }
  rep.constants.lambda = lambda;

  // mu over parent/child
  double mu = std::numeric_limits<double>::infinity();
  for (size_t c = 1; c < cx.cells.size(); ++c) {
    double ratio = diam[c] / diam[size_t(cx.cells[c].parent)];
    if (ratio < mu) {
      mu = ratio;
      rep.mu_witness = {cx.cells[c].parent, CellId(c), ratio, cx.cells[c].level - 1, cx.cells[c].level};
    }
  }
  rep.constants.mu = mu;

  // smallest k with nu < 1
  for (int k = 1; k < cx.depth; ++k) {
    double nu = 0;
    RatioWitness wit;
    for (size_t c = 0; c < cx.cells.size(); ++c) {
      if (cx.cells[c].level + k > cx.depth) continue;
      // max over k-step descendants
      std::vector<CellId> stack{CellId(c)};
      for (int step = 0; step < k; ++step) {
        std::vector<CellId> next;
        for (CellId id : stack)
          for (CellId ch : cx.cells[size_t(id)].children) next.push_back(ch);
        stack = std::move(next);
      }
      for (CellId d : stack) {
        double ratio = diam[size_t(d)] / diam[c];
        if (ratio > nu) {
          nu = ratio;
          wit = {CellId(c), d, ratio, cx.cells[c].level, cx.cells[c].level + k};
        }
      }
    }
    if (nu < 1) {
      rep.constants.k = k;
      rep.constants.nu = nu;
      rep.nu_witness = wit;
      break;
    }
  }

  // delta over disjoint same-level pairs whose parents intersect
  DiamTable table = diam_table(m, cx, cx.depth);
  double delta = std::numeric_limits<double>::infinity();
  for (const auto& row : table.pair_distances) {
    if (!row.disjoint) continue;
    double worst = std::min(row.distance / diam[size_t(row.a)], row.distance / diam[size_t(row.b)]);
    if (worst < delta) {
      delta = worst;
      rep.delta_witness = row;
    }
  }
  rep.constants.delta = std::isfinite(delta) ? delta : 0;
  rep.pass = rep.constants.k > 0 && rep.constants.nu < 1 && rep.constants.mu > 0 &&
             rep.constants.delta > 0;
  return rep;
}

// ---- strong decay --------------------------------------------------------------

DecayFit strong_decay_fit_series(const std::vector<int>& levels, const std::vector<double>& diams) {
  if (levels.size() < 4) raise(ErrorCode::InsufficientDepth, "need at least 4 levels for the fit");
  DecayFit fit;
  std::vector<double> xs, ys, lxs;
  int max_level = 0;
  for (size_t i = 0; i < levels.size(); ++i) {
    xs.push_back(levels[i]);
    ys.push_back(std::log(diams[i]));
    lxs.push_back(std::log(double(levels[i]) == 0 ? 1.0 : double(levels[i])));
    max_level = std::max(max_level, levels[i]);
  }
  LinFit lin = linear_fit(xs, ys);
  fit.r = std::exp(lin.slope);
  fit.rms = lin.rms;
  // C from the extreme residual
  double worst = 0;
  std::vector<double> level_worst(size_t(max_level) + 1, 0.0);
  std::vector<char> level_seen(size_t(max_level) + 1, 0);
  for (size_t i = 0; i < xs.size(); ++i) {
    double res = std::abs(ys[i] - (lin.slope * xs[i] + lin.intercept));
    worst = std::max(worst, res);
    level_worst[size_t(levels[i])] = std::max(level_worst[size_t(levels[i])], res);
    level_seen[size_t(levels[i])] = 1;
  }
  fit.C = std::exp(worst);
  std::vector<double> dx, dy;
  for (size_t l = 0; l < level_worst.size(); ++l)
    if (level_seen[l]) {
      dx.push_back(double(l));
      dy.push_back(level_worst[l]);
    }
  fit.residual_drift = linear_fit(dx, dy).slope;
  fit.holds = fit.residual_drift <= 1e-2 && fit.r < 1;
  // power-law comparison: log d ~ a + b log n (reciprocal when b ~ -1)
  std::vector<double> pxs, pys;
  for (size_t i = 0; i < levels.size(); ++i)
    if (levels[i] >= 1) {
      pxs.push_back(std::log(double(levels[i])));
      pys.push_back(ys[i]);
    }
  if (pxs.size() >= 2) {
    LinFit pw = linear_fit(pxs, pys);
    fit.recip_exponent = pw.slope;
    fit.recip_c = std::exp(pw.intercept);
    fit.recip_rms = pw.rms;
  }
  return fit;
}

DecayFit strong_decay_fit(const EmbeddedMetric& m, const CellComplex& cx) {
  if (cx.depth < 4) raise(ErrorCode::InsufficientDepth, "need at least 4 expanded levels");
  std::vector<int> levels;
  std::vector<double> diams;
  std::vector<double> max_per_level(size_t(cx.depth) + 1, 0.0);
  for (size_t c = 0; c < cx.cells.size(); ++c) {
    int l = cx.cells[c].level;
    double d = m.cell_diam(CellId(c));
    levels.push_back(l);
    diams.push_back(d);
    max_per_level[size_t(l)] = std::max(max_per_level[size_t(l)], d);
  }
  DecayFit fit = strong_decay_fit_series(levels, diams);
  fit.max_diam_per_level = std::move(max_per_level);
  return fit;
}

// ---- JSON dumps ---------------------------------------------------------------

namespace {
nlohmann::json witness_json(const CellComplex* cx, const RatioWitness& w) {
  nlohmann::json j;
  if (w.low >= 0 && cx) {
    j["low_address"] = cx->address(w.low);
    j["high_address"] = cx->address(w.high);
  }
  j["ratio"] = w.ratio;
  j["levels"] = {w.level_low, w.level_high};
  return j;
}
}  // namespace

std::string UndistortedReport::to_json() const {
  nlohmann::json j;
  j["pass"] = pass;
  j["exp_decay_ok"] = exp_decay_ok;
  j["separation_ok"] = separation_ok;
  j["constants"] = {
      {"r", constants.r}, {"R", constants.R}, {"C", constants.C}, {"delta", constants.delta}};
  j["lambda_drift_slope"] = lambda_drift_slope;
  j["delta_drift_slope"] = delta_drift_slope;
  j["lambda_per_level"] = lambda_per_level;
  j["delta_per_level"] = delta_per_level;
  j["decay_witness"] = witness_json(nullptr, decay_witness);
  j["depth"] = depth_used;
  return j.dump(2);
}

std::string LocalConditionsReport::to_json() const {
  nlohmann::json j;
  j["pass"] = pass;
  j["lambda"] = constants.lambda;
  j["mu"] = constants.mu;
  j["k"] = constants.k;
  j["nu"] = constants.nu;
  j["delta"] = constants.delta;
  return j.dump(2);
}

std::string DecayFit::to_json() const {
  nlohmann::json j;
  j["r"] = r;
  j["C"] = C;
  j["residual_rms"] = rms;
  j["residual_drift"] = residual_drift;
  j["holds"] = holds;
  j["reciprocal_fit"] = {{"c", recip_c}, {"exponent", recip_exponent}, {"rms", recip_rms}};
  return j.dump(2);
}

// ---- eta envelope ---------------------------------------------------------------

double EtaEnvelope::eval(double t) const {
  for (size_t i = 0; i < bin_lo.size(); ++i)
    if (t >= bin_lo[i] && t <= bin_hi[i]) return eta[i];
  return std::numeric_limits<double>::quiet_NaN();
}

std::string EtaEnvelope::csv() const {
  std::ostringstream os;
  os << "t_bin_lo,t_bin_hi,eta,count\n";
  for (size_t i = 0; i < bin_lo.size(); ++i)
    os << bin_lo[i] << "," << bin_hi[i] << "," << eta[i] << "," << count[i] << "\n";
  return os.str();
}

EtaEnvelope eta_envelope(size_t n_points, const MetricFn& d1, const MetricFn& d2, int64_t n_triples,
                         uint64_t seed, int bins, std::optional<std::pair<double, double>> t_range) {
  if (n_points < 3) raise(ErrorCode::BadInput, "need at least 3 points");
  EtaEnvelope env;
  env.seed = seed;
  CounterRng rng(seed, /*stream=*/17);

  struct Obs {
    double t, ratio2;
  };
  std::vector<Obs> obs;
  obs.reserve(size_t(n_triples));
  double tmin = std::numeric_limits<double>::infinity(), tmax = 0;
  for (int64_t i = 0; i < n_triples; ++i) {
    size_t a = size_t(rng.next_below(n_points));
    size_t b = size_t(rng.next_below(n_points));
    size_t c = size_t(rng.next_below(n_points));
    if (a == b || a == c || b == c) {
      env.degenerate++;
      continue;
    }
    double d1ab = d1(a, b), d1ac = d1(a, c);
    double d2ab = d2(a, b), d2ac = d2(a, c);
    if (d1ab <= 0 || d1ac <= 0 || d2ab <= 0 || d2ac <= 0) {
      env.degenerate++;
      continue;
    }
    double t = d1ab / d1ac;
    if (t_range && (t < t_range->first || t > t_range->second)) continue;
    obs.push_back({t, d2ab / d2ac});
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (obs.empty()) raise(ErrorCode::BadInput, "no valid triples sampled");
  if (t_range) {
    tmin = t_range->first;
    tmax = t_range->second;
  }
  double lo = std::log(tmin), hi = std::log(tmax);
  if (hi <= lo) hi = lo + 1e-9;
  env.bin_lo.resize(size_t(bins));
  env.bin_hi.resize(size_t(bins));
  env.eta.assign(size_t(bins), 0.0);
  env.max_t.assign(size_t(bins), 0.0);
  env.count.assign(size_t(bins), 0);
  for (int i = 0; i < bins; ++i) {
    env.bin_lo[size_t(i)] = std::exp(lo + (hi - lo) * i / bins);
    env.bin_hi[size_t(i)] = std::exp(lo + (hi - lo) * (i + 1) / bins);
  }
  for (const Obs& o : obs) {
    int b = int(std::floor((std::log(o.t) - lo) / (hi - lo) * bins));
    b = std::clamp(b, 0, bins - 1);
    env.eta[size_t(b)] = std::max(env.eta[size_t(b)], o.ratio2);
    env.max_t[size_t(b)] = std::max(env.max_t[size_t(b)], o.t);
    env.count[size_t(b)]++;
  }
  // monotone rectification; empty bins inherit the running max
  double run = 0;
  for (size_t i = 0; i < env.eta.size(); ++i) {
    run = std::max(run, env.eta[i]);
    env.eta[i] = run;
  }
  return env;
}

}  // namespace ramify
