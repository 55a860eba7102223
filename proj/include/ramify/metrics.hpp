#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ramify/builtins.hpp"
#include "ramify/cell_model.hpp"
#include "ramify/geom.hpp"

namespace ramify {

// A metric attached to a cell complex: exact hulls for geometric builtins,
// point clouds (plus exact vertex coordinates) for sampled sets like Julia
// cells. Diameters from hulls are exact; sample diameters are certified
// lower bounds and sample distances certified upper bounds.
struct EmbeddedMetric {
  const CellComplex* cx = nullptr;
  bool exact = false;  // hull diameters and distances are exact
  std::vector<CellGeometry> geom;           // per cell when exact
  std::vector<std::vector<Vec2>> samples;   // per cell (may supplement hulls)
  std::vector<Vec2> vertex_pos;
  std::vector<char> vertex_known;

  double cell_diam(CellId c) const;
  double cell_dist(CellId a, CellId b) const;
  Vec2 vertex_position(VertexId v) const;
  // A point of the fractal inside the cell (hull corner or first sample).
  Vec2 anchor(CellId c) const;
};

// Geometric builtins ("sierpinski", "vicsek", "weird-interval", "rauzy",
// "plus-example"): exact hull embeddings.
EmbeddedMetric attach_embedding(const CellComplex& cx, const std::string& builtin,
                                const VicsekParams& params = {});

// File source: JSON {"cells":[{"address":[...],"points":[[x,y],...]},...],
// "vertices":[[id,x,y],...]}. Every cell of the complex needs >= 2 points.
EmbeddedMetric attach_embedding_json(const CellComplex& cx, const std::string& json_text);

struct DiamRow {
  int level;
  CellId cell;
  double diameter;
};

struct PairDistRow {
  int level;
  CellId a, b;
  double distance;
  bool disjoint;
};

struct DiamTable {
  std::vector<DiamRow> diameters;
  std::vector<PairDistRow> pair_distances;  // same-level pairs with intersecting parents
  std::string diameters_csv(const CellComplex& cx) const;
};

DiamTable diam_table(const EmbeddedMetric& m, const CellComplex& cx, int depth);

struct RatioWitness {
  CellId low = -1, high = -1;  // m-cell, n-cell
  double ratio = 0;
  int level_low = 0, level_high = 0;
};

struct UndistortedConstants {
  double r = 0, R = 0, C = 1, delta = 0;
};

struct UndistortedReport {
  bool pass = false;
  bool exp_decay_ok = false;
  bool separation_ok = false;
  UndistortedConstants constants;
  double lambda_drift_slope = 0;  // log max same-level ratio vs level
  double delta_drift_slope = 0;   // log min separation ratio vs level
  std::vector<double> lambda_per_level;  // index = level (1-based entries used)
  std::vector<double> delta_per_level;
  RatioWitness decay_witness;           // worst grower (argmax ratio at deepest level)
  PairDistRow separation_witness{};     // argmin separation ratio
  int depth_used = 0;
  std::string to_json() const;
};

struct VerifyOptions {
  double drift_tol = 1e-2;
  int full_check_depth = 4;  // quadratic disjoint-pair cross-check up to here
};

UndistortedReport verify_undistorted(const EmbeddedMetric& m, const CellComplex& cx,
                                     const VerifyOptions& opts = {});

struct LocalConstants {
  double lambda = 1;  // same-level intersecting diameter ratio bound
  double mu = 0;      // parent->child shrink lower bound
  int k = 0;          // smallest k with nu < 1
  double nu = 1;      // k-step shrink upper bound
  double delta = 0;   // local separation bound
};

struct LocalConditionsReport {
  LocalConstants constants;
  bool pass = false;  // all four witnessed with valid ranges
  RatioWitness lambda_witness, mu_witness, nu_witness;
  PairDistRow delta_witness{};
  std::string to_json() const;
};

LocalConditionsReport verify_local_conditions(const EmbeddedMetric& m, const CellComplex& cx);

struct DecayFit {
  double r = 0, C = 1;
  double rms = 0;                // residual of log-diameter vs level fit
  double residual_drift = 0;     // slope of per-level max |residual|
  bool holds = false;
  double recip_c = 0, recip_exponent = 0, recip_rms = 0;  // power-law comparison fit
  std::vector<double> max_diam_per_level;
  std::string to_json() const;
};

DecayFit strong_decay_fit(const EmbeddedMetric& m, const CellComplex& cx);

// Fit on an explicit (level, diameter) series, e.g. pure-power Rauzy cells.
DecayFit strong_decay_fit_series(const std::vector<int>& levels, const std::vector<double>& diams);

// ---- intrinsic metric ------------------------------------------------------

struct DistanceOracle {
  const CellComplex* cx = nullptr;
  double alpha = 0;
  int k = 0;
  int L = 0;  // chains may use cells of level <= L

  std::vector<double> node_weight;          // alpha^-level per cell (level <= L)
  std::vector<std::vector<CellId>> graph;   // unions of intersecting cells

  // Truncated intrinsic distance d_alpha^(L); exact over the allowed chains.
  double distance(const PointAddress& p, const PointAddress& q) const;
  // Certified lower bound alpha^(1-P-k) from the covering level.
  double lower_bound(const PointAddress& p, const PointAddress& q) const;
  double cell_diam_upper(CellId c) const;   // alpha^-level
  double vertex_distance(VertexId a, VertexId b) const;
};

DistanceOracle intrinsic_metric(const CellComplex& cx, int k, double alpha, int L);

// ---- quasisymmetry envelope --------------------------------------------------

struct EtaEnvelope {
  std::vector<double> bin_lo, bin_hi;   // log-spaced ratio bins
  std::vector<double> eta;              // per-bin max output ratio, rectified monotone
  std::vector<double> max_t;            // max input ratio observed per bin
  std::vector<int64_t> count;
  int64_t degenerate = 0;
  uint64_t seed = 0;
  double eval(double t) const;          // envelope lookup (monotone step)
  std::string csv() const;
};

using MetricFn = std::function<double(size_t, size_t)>;

EtaEnvelope eta_envelope(size_t n_points, const MetricFn& d1, const MetricFn& d2, int64_t n_triples,
                         uint64_t seed, int bins = 60,
                         std::optional<std::pair<double, double>> t_range = std::nullopt);

}  // namespace ramify
