#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ramify/cell_model.hpp"
#include "ramify/julia.hpp"

namespace ramify {

// Shared expansion context for symbolic homeomorphisms over one replacement
// system. The complex deepens on demand; vertex ids are stable under extension.
class HomeoContext {
 public:
  explicit HomeoContext(std::shared_ptr<ReplacementSystem> sys, int initial_depth = 6);

  const ReplacementSystem& system() const { return *sys_; }
  const CellComplex& complex() const { return *cx_; }
  void ensure_depth(int depth) const;
  // ordered child-type lists agree <=> literal continuation is admissible
  bool followers_equal(int type_a, int type_b) const;
  int type_at(const std::vector<int>& word) const;  // -1 if inadmissible
  std::shared_ptr<ReplacementSystem> system_ptr() const { return sys_; }

 private:
  std::shared_ptr<ReplacementSystem> sys_;
  mutable std::shared_ptr<CellComplex> cx_;
};

using Word = std::vector<int>;  // child indices from the root

struct Rule {
  Word dom, ran;
  bool operator<(const Rule& o) const { return std::tie(dom, ran) < std::tie(o.dom, o.ran); }
  bool operator==(const Rule& o) const { return dom == o.dom && ran == o.ran; }
};

// A piecewise cellular homeomorphism as a finite prefix-rewriting system:
// a point with address dom·w maps to ran·w. Domain and range prefixes each
// form a complete partition of the space into cells; every rule preserves
// the subdivision structure below it (equal ordered child-type lists).
class SymbolicHomeo {
 public:
  SymbolicHomeo() = default;
  SymbolicHomeo(std::shared_ptr<const HomeoContext> ctx, std::vector<Rule> rules);

  static SymbolicHomeo identity(std::shared_ptr<const HomeoContext> ctx);

  const std::vector<Rule>& rules() const { return rules_; }
  const std::shared_ptr<const HomeoContext>& context() const { return ctx_; }

  SymbolicHomeo compose(const SymbolicHomeo& inner) const;  // this ∘ inner
  SymbolicHomeo inverse() const;
  SymbolicHomeo power(int n) const;  // negative allowed
  bool equals(const SymbolicHomeo& other) const;
  bool is_identity() const;

  Word apply_word(const Word& w) const;  // UnresolvedPrefix if too shallow
  PointAddress apply(const PointAddress& p) const;
  VertexId apply_vertex(VertexId v) const;

  std::string to_json() const;
  static SymbolicHomeo from_json(std::shared_ptr<const HomeoContext> ctx, const std::string& text);

  int max_rule_depth() const;

 private:
  std::shared_ptr<const HomeoContext> ctx_;
  std::vector<Rule> rules_;  // canonical: coarsest, sorted by dom
  friend SymbolicHomeo make_homeo_unchecked(std::shared_ptr<const HomeoContext>, std::vector<Rule>);
};

std::optional<int> order_of(const SymbolicHomeo& g, int limit = 64);

// A union of cells with explicit vertex adjustments: the point set is
// (union of closed cells minus excluded vertices) plus included vertices.
struct LaminarSet {
  std::vector<Word> cells;
  std::vector<VertexId> include, exclude;

  void normalize(const HomeoContext& ctx);
  bool contains_cell_space(const HomeoContext& ctx, const Word& w) const;  // subtree coverage
};

LaminarSet image_of(const SymbolicHomeo& g, const LaminarSet& a, int depth);
bool laminar_subset(const HomeoContext& ctx, const LaminarSet& a, const LaminarSet& b, int depth);
bool laminar_proper_subset(const HomeoContext& ctx, const LaminarSet& a, const LaminarSet& b, int depth);
bool laminar_disjoint(const HomeoContext& ctx, const LaminarSet& a, const LaminarSet& b, int depth);
LaminarSet laminar_complement(const HomeoContext& ctx, const LaminarSet& a, int depth);

// g restricted to the subtrees of a laminar set equals h there (vertex flags
// checked through apply_vertex on boundary vertices).
bool agree_on(const SymbolicHomeo& g, const SymbolicHomeo& h, const LaminarSet& set, int depth);

struct CanonicalPiece {
  std::vector<Word> domain_cells;
  int forward_steps = 0;   // n: apply f^n ...
  Word branch;             // ... then the inverse branch prepending this prefix (length m)
};

SymbolicHomeo compile_canonical(std::shared_ptr<const HomeoContext> ctx,
                                const std::vector<CanonicalPiece>& pieces);

struct PingPongVerdict {
  enum class Result { Pass, Fail, Indeterminate } result = Result::Indeterminate;
  std::string detail;
  bool passed() const { return result == Result::Pass; }
};

PingPongVerdict pingpong_free_check(const std::vector<SymbolicHomeo>& H_nontrivial,
                                    const std::vector<SymbolicHomeo>& K_nontrivial,
                                    const LaminarSet& X_H, const LaminarSet& X_K, int depth);

struct PingPongFReport {
  bool cond_proper = false;       // g0(R) proper subset of R
  bool cond_identity_off = false; // g1 identity on the complement of R
  bool cond_agree = false;        // g1 = g0 on g0(R)
  bool noncommuting = false;
  bool relation1 = false;  // x0^2 x1 x0^-2 = (x1 x0) x1 (x1 x0)^-1
  bool relation2 = false;  // x0^3 x1 x0^-3 = (x1 x0^2) x1 (x1 x0^2)^-1
  bool pass() const {
    return cond_proper && cond_identity_off && cond_agree && noncommuting && relation1 && relation2;
  }
  std::string to_json() const;
};

PingPongFReport pingpong_F_check(const SymbolicHomeo& g0, const SymbolicHomeo& g1, const LaminarSet& R,
                                 int depth);

struct QsCertificate {
  bool piecewise_cellular = false;
  bool metric_undistorted = false;
  bool certified = false;
  std::string notes;
  std::string to_json() const;
};

// Structural certificate: the homeo's partitions are valid cell partitions and
// the underlying metric is undistorted (report supplied by the caller).
QsCertificate certify_quasisymmetry(const SymbolicHomeo& g, const UndistortedReport& metric_report);

// ---- builtin generator sets -------------------------------------------------

struct GeneratorSet {
  std::shared_ptr<const HomeoContext> ctx;
  std::map<std::string, SymbolicHomeo> generators;
  // ping-pong data
  LaminarSet X_H, X_K;  // free-product sets (bubblebath)
  LaminarSet R;         // Thompson set (basilica)
  std::map<std::string, VertexId> named_vertices;  // breakpoints etc.
  DerivedSystem derived;                           // keeps the numeric provenance
};

// instance in {"basilica", "bubblebath"}; sampling is deterministic in seed.
GeneratorSet builtin_generators(const std::string& instance, int64_t samples = 100000,
                                uint64_t seed = 7);

// Evaluate a whitespace-separated word like "g0 g1^-1 rot" over the set.
SymbolicHomeo evaluate_word(const GeneratorSet& gens, const std::string& word);

}  // namespace ramify
