#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "ramify/cell_model.hpp"
#include "ramify/geom.hpp"
#include "ramify/metrics.hpp"

namespace ramify {

using Cplx = std::complex<double>;

struct Poly {
  std::vector<Cplx> c;  // ascending degree
  int degree() const;
  Cplx eval(Cplx z) const;
  Poly derivative() const;
  static Poly mul(const Poly& a, const Poly& b);
  static Poly add(const Poly& a, const Poly& b);
  static Poly scale(const Poly& a, Cplx s);
  void trim(double tol = 0.0);
};

// All roots of a polynomial: companion-matrix eigenvalues plus Newton polish.
// Closed forms are used for degree <= 2 (the hot path in backward iteration).
std::vector<Cplx> poly_roots(const Poly& p);

struct RationalMap {
  Poly P, Q;  // f = P/Q
  int degree() const;
  Cplx eval(Cplx z) const;
  Cplx deriv(Cplx z) const;
  RationalMap compose(const RationalMap& inner) const;  // this(inner(z))
  static RationalMap polynomial(std::vector<Cplx> coeffs);
  static RationalMap from_json(const std::string& text);
  std::string to_json() const;
  // coprimality of P and Q to working precision
  bool coprime(double tol = 1e-8) const;
};

struct PreimageResult {
  std::vector<Cplx> roots;  // with multiplicity (repeated entries)
  int at_infinity = 0;      // degree drop: preimages at infinity
};

// Solutions of P(z) = w Q(z), Newton-polished to residual < 1e-12.
PreimageResult preimages(const RationalMap& f, Cplx w);

struct FixedPointInfo {
  Cplx z;
  Cplx multiplier;
  enum class Kind { Repelling, Attracting, Superattracting, Indifferent } kind;
};

std::vector<FixedPointInfo> find_fixed_points(const RationalMap& f);

struct BranchCutSpec {
  std::vector<Cplx> points;
  static BranchCutSpec from_json(const std::string& text, const RationalMap& f);
};

struct JuliaSample {
  std::vector<Cplx> pts;
  int64_t count = 0;
  int burn_in = 50;
  uint64_t seed = 0;
};

JuliaSample sample_julia(const RationalMap& f, int64_t n, uint64_t seed);

struct ClusterParams {
  double link_mult = 2.0;     // link radius = mult * local 16-NN distance
  double remove_mult = 2.0;   // removal radius around cut points
  double adhere_mult = 5.0;   // boundary-vertex adherence radius
  int knn = 16;
};

struct BranchCutReport {
  bool valid = false;
  bool invariant = false;
  bool counts_stable = false;
  bool cover_law = false;     // #comp(J \ f^-1 S) == d * #comp(J \ S)
  bool injective = true;
  int components_S = 0;       // components of J \ S
  int components_V1 = 0;      // components of J \ f^-1(S)
  Cplx injectivity_witness[2]{};
  std::string failure;        // first failed check, by error-code name
  std::string to_json() const;
};

BranchCutReport validate_branch_cut(const RationalMap& f, const BranchCutSpec& cut,
                                    const JuliaSample& sample, const ClusterParams& params = {});

struct JuliaCell {
  std::vector<int> sample_idx;      // cloud indices in this cell
  int parent = -1;                  // cell index one level up (-1 at level 1)
  int image = -1;                   // image cell one level down under f
  std::vector<int> boundary_vertices;  // indices into level_vertices[level]
};

struct JuliaCellDecomposition {
  RationalMap f;
  std::vector<Cplx> cut;
  int depth = 0;
  std::vector<Cplx> cloud;
  std::vector<std::vector<Cplx>> level_vertices;   // V_n, n = 0..depth (V_0 = cut)
  std::vector<std::vector<int>> vertex_parent;     // V_n index -> V_{n-1} index under f
  std::vector<std::vector<JuliaCell>> cells;       // index 0 unused; cells[n] for 1 <= n <= depth
  std::vector<int> counts() const;                 // cells per level 1..depth
  std::string cells_csv() const;
  std::string vertices_csv() const;
};

JuliaCellDecomposition extract_cells(const RationalMap& f, const BranchCutSpec& cut, int depth,
                                     const JuliaSample& sample, const ClusterParams& params = {});

struct DerivedSystem {
  std::shared_ptr<ReplacementSystem> system;
  std::shared_ptr<CellComplex> complex;  // expanded to the decomposition depth
  EmbeddedMetric embedding;              // clusters + V_n vertex coordinates
  std::vector<std::vector<int>> cell_to_cluster;  // per level, complex cell -> cluster index
  std::vector<int> type_of_onecell;  // 1-cell cluster index -> type index
  // itinerary of a complex cell: type indices along the address path
  std::vector<int> itinerary(CellId c) const;
};

DerivedSystem derive_replacement(const JuliaCellDecomposition& dec);

struct JuliaVerifyReport {
  UndistortedReport undistorted;
  LocalConditionsReport local;
  bool euclidean_reduction_ok = false;  // infinity confirmed outside J
  std::string to_json() const;
};

JuliaVerifyReport verify_julia_undistorted(const JuliaCellDecomposition& dec, int depth);

// Builtin instances.
RationalMap basilica_map();                    // z^2 - 1
RationalMap bubblebath_map();                  // 1 - z^-2
BranchCutSpec basilica_cut(const RationalMap& f);    // { (1 - sqrt 5)/2 }
BranchCutSpec bubblebath_cut(const RationalMap& f);  // { q, conj q }

}  // namespace ramify
