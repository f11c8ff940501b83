#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "jmlmc/geometry.hpp"
#include "jmlmc/jump_field.hpp"

namespace jmlmc {

/// Conforming triangulation of the unit square.
struct Mesh {
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;  ///< counter-clockwise
    std::vector<bool> boundary;                 ///< vertex lies on the square boundary
    std::vector<int> region_of_triangle;        ///< empty for non-adapted meshes
    double h = 0.0;                             ///< max triangle diameter
    double theta = 0.0;                         ///< max diam(K) / inscribed diameter

    bool adapted() const { return !region_of_triangle.empty(); }
    std::size_t interior_vertex_count() const;
    double triangle_area(std::size_t t) const;
    Point centroid(std::size_t t) const;
};

/// Smallest angle the adapted mesher accepts, in degrees.
inline constexpr double kMinAngleDegrees = 20.0;
/// Upper bound of diam/inscribed-diameter implied by the angle bound: cot(10 deg).
double max_shape_ratio_for_angle(double min_angle_degrees);

/// Interface-conforming Delaunay refinement: every interface is a union of
/// edges, every triangle lies in one region, diameters <= h_max and angles
/// >= kMinAngleDegrees. Throws NumericalError if refinement does not settle.
Mesh triangulate_adapted(const Partition& partition, double h_max);

/// Structured m x m squares split along the lower-left/upper-right diagonal,
/// m = ceil(sqrt(2) / h_max).
Mesh triangulate_uniform(double h_max);

/// True iff every interface is tiled by mesh edges and no triangle straddles an
/// interface.
bool check_conformity(const Mesh& mesh, const Partition& partition);

/// max over triangles of diam(K) / inscribed-circle diameter.
double shape_regularity(const Mesh& mesh);
double min_angle_degrees(const Mesh& mesh);
double triangle_diameter(Point a, Point b, Point c);
/// Inscribed-circle diameter; throws NumericalError for a zero-area triangle.
double inscribed_diameter(Point a, Point b, Point c);
double min_triangle_angle_degrees(Point a, Point b, Point c);

/// Red refinement: every triangle split into four similar ones.
Mesh refine_midpoint(const Mesh& mesh);

/// Recomputes h and theta from the geometry.
void finalize_metrics(Mesh& mesh);

/// Plain-text vertex and triangle tables.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace jmlmc
