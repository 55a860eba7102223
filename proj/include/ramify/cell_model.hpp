#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ramify/errors.hpp"

namespace ramify {

using CellId = int32_t;
using VertexId = int32_t;

// Where a child's boundary vertex lands when its parent subdivides.
struct GluingTarget {
  enum class Kind : uint8_t { Parent, Junction, Free };
  Kind kind = Kind::Free;
  int index = 0;  // parent slot / junction index; unused for Free
};

struct CellType {
  std::string id;
  std::vector<std::string> children;  // ordered child type ids
  int boundary_arity = 0;
  int junction_count = 0;
  // gluing[child][child slot] -> target; sizes must match child types' arities
  std::vector<std::vector<GluingTarget>> gluing;
};

struct ReplacementSystem {
  std::vector<CellType> types;
  std::string root_type;

  int type_index(const std::string& id) const;
  const CellType& type(int i) const { return types[size_t(i)]; }
  std::string to_json() const;
  static ReplacementSystem from_json(const std::string& text);
};

struct ValidationReport {
  bool well_formed = true;
  std::vector<std::string> violations;
};

ValidationReport validate_system(const ReplacementSystem& sys);

struct Cell {
  int level = 0;
  CellId parent = -1;
  int child_index = -1;  // position within parent
  int type = -1;         // index into sys.types; synthetic for explicit complexes
  std::vector<CellId> children;
  std::vector<VertexId> vertices;  // boundary vertices by slot
};

// Expanded tree of cells to a finite depth with global vertex identification.
// Works identically for rule-generated and explicitly enumerated sources.
struct CellComplex {
  const ReplacementSystem* sys = nullptr;  // null for explicit complexes
  int depth = 0;
  std::vector<Cell> cells;                     // cells[0] = root
  std::vector<std::vector<CellId>> levels;     // per level, ascending ids
  std::vector<std::vector<std::vector<CellId>>> vtable;  // [vertex][level] -> sorted cells
  std::vector<int> vertex_birth;               // level at which the vertex appears as a slot
  std::vector<std::string> type_names;         // for explicit complexes (else from sys)

  size_t vertex_count() const { return vtable.size(); }
  const std::vector<CellId>& cells_with_vertex(VertexId v, int level) const;
  std::vector<int> address(CellId c) const;
  CellId cell_at(const std::vector<int>& address) const;  // -1 if absent
  CellId ancestor_at(CellId c, int level) const;
  bool contains_vertex(CellId c, VertexId v) const;
  bool same_level_intersect(CellId a, CellId b) const;
  // Intersection of cells at arbitrary levels (shared vertex, or nesting).
  bool cells_intersect(CellId a, CellId b) const;
  std::vector<VertexId> shared_vertices(CellId a, CellId b) const;  // same level
  std::string type_name(int type) const;
  std::string export_json() const;
};

// Default cap on total expanded cells; overflow is an error, never truncation.
inline constexpr int64_t kDefaultCellCap = 1'000'000;

CellComplex expand(const ReplacementSystem& sys, int depth, int64_t cell_cap = kDefaultCellCap);

// Explicitly enumerated complexes (no replacement rule). Currently: the
// plus-shaped union of two segments with the 2^-floor(log2 n) cut schedule.
CellComplex enumerate_explicit(const std::string& name, int depth, int64_t cell_cap = kDefaultCellCap);

struct AdjacencyEntry {
  CellId a, b;
  std::vector<VertexId> shared;
};

std::vector<AdjacencyEntry> same_level_adjacency(const CellComplex& cx, int level);

// A point of the limit space: finite prefix plus either a designated vertex
// or an eventually periodic continuation of child indices.
struct PointAddress {
  std::vector<int> head;
  std::optional<VertexId> vertex;
  std::vector<int> period;

  static PointAddress at_vertex(VertexId v) {
    PointAddress p;
    p.vertex = v;
    return p;
  }
  static PointAddress periodic(std::vector<int> head, std::vector<int> period) {
    PointAddress p;
    p.head = std::move(head);
    p.period = std::move(period);
    return p;
  }
};

// Cells containing the point at each level 0..depth. Periodic tails that
// converge onto a vertex are detected and resolved through the vertex table.
std::vector<std::vector<CellId>> resolve_point(const CellComplex& cx, const PointAddress& p);

bool points_equal(const CellComplex& cx, const PointAddress& p, const PointAddress& q);

struct CoveringResult {
  int level = 0;
  int P = 0;  // level + 1
  std::vector<std::pair<CellId, CellId>> covering_pairs;
};

CoveringResult covering_level(const CellComplex& cx, const PointAddress& p, const PointAddress& q);

struct AdmissibilityWitness {
  int n = 0;
  CellId cell = -1;        // condition (1): the n-cell with no disjoint (n+k)-descendants
  CellId deep_cell = -1;   // condition (2): the (n+k)-cell meeting two disjoint n-cells
  CellId first = -1, second = -1;  // the two disjoint n-cells
};

struct AdmissibilityReport {
  int k = 0;
  int max_n = 0;  // conditions checked for n in [0, max_n]
  bool condition1 = true;
  bool condition2 = true;
  std::vector<AdmissibilityWitness> failures1;
  std::vector<AdmissibilityWitness> failures2;
  bool admissible() const { return condition1 && condition2; }
};

AdmissibilityReport check_admissibility(const CellComplex& cx, int k);

}  // namespace ramify
