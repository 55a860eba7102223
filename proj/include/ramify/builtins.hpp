#pragma once

#include <array>
#include <string>
#include <vector>

#include "ramify/cell_model.hpp"
#include "ramify/geom.hpp"

namespace ramify {

// Self-similar / self-affine / projective replacement systems used throughout.
ReplacementSystem make_sierpinski_system();
ReplacementSystem make_vicsek_system();          // 1 type, 5 children (corners + center)
ReplacementSystem make_weird_interval_system();  // [0,1] split 1/4, 1/2, 1/4
ReplacementSystem make_rauzy_system();           // sierpinski combinatorics, projective geometry

struct VicsekParams {
  double a = 1.0 / 3, b = 1.0 / 3, c = 1.0 / 3;
};

// Exact hull of one cell of a geometric builtin.
struct CellGeometry {
  enum class Kind { Polygon, Segments };
  Kind kind = Kind::Polygon;
  std::vector<Vec2> corners;       // Polygon: hull corners, fractal touches all of them
  std::vector<Segment> segments;   // Segments: the cell IS this union of segments
  bool edges_in_set = true;        // hull edges lie inside the fractal piece (exact distances)

  double diameter() const;
  double distance_to(const CellGeometry& other) const;
  std::vector<Vec2> corner_points() const;
};

// Exact geometry for every cell of an expanded builtin complex, plus exact
// vertex coordinates. Throws UnknownBuiltin for unrecognized names.
struct BuiltinGeometry {
  std::vector<CellGeometry> cell_geom;   // indexed by CellId
  std::vector<Vec2> vertex_pos;          // indexed by VertexId
  bool exact_distances = true;           // false when hulls only bound the piece (vicsek)
};

BuiltinGeometry builtin_geometry(const std::string& name, const CellComplex& cx,
                                 const VicsekParams& params = {});

// Geometry for the explicit plus-example complex (exact dyadic segments).
BuiltinGeometry plus_example_geometry(const CellComplex& cx);

// Rauzy pure-power cells: exact triangle corners of the n-fold first-map image.
std::array<Vec2, 3> rauzy_power_triangle(int map_index, int n);

// Witness addresses for the distorted Vicsek family (intersecting n-cells of
// diameters sqrt(2) a c^{n-1} and sqrt(2) b a^{n-1}).
std::pair<std::vector<int>, std::vector<int>> vicsek_witness_addresses(int n);

}  // namespace ramify
