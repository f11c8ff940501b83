#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "jmlmc/expression.hpp"
#include "jmlmc/geometry.hpp"
#include "jmlmc/random_field.hpp"
#include "jmlmc/rng.hpp"

namespace jmlmc {

/// Convex polygon, counter-clockwise. `closed_edge[k]` tells whether the edge
/// from vertex k to k+1 belongs to the region (points on an internal interface
/// belong to the region on the interface's left).
struct Region {
    std::vector<Point> vertices;
    std::vector<bool> closed_edge;

    double area() const;
    Point centroid() const;
};

/// Random polygonal partition of the unit square.
struct Partition {
    std::vector<Region> regions;
    /// Internal boundaries, each oriented by increasing chord parameter.
    std::vector<Segment> interface_segments;

    std::size_t tau() const { return regions.size(); }

    /// Builds a partition from convex regions and oriented interfaces and
    /// derives the tie-break flags of every region edge.
    static Partition from_polygons(std::vector<std::vector<Point>> polygons, std::vector<Segment> interfaces);

    /// Index of the region whose closure contains x, ties broken to the left of
    /// the interface.
    int locate(Point x) const;

    /// Pairs of regions sharing an interface segment.
    std::vector<std::array<int, 2>> adjacent_pairs() const;
};

/// Cross partition from a bottom-top chord (u[0],0)-(u[1],1) and a left-right
/// chord (0,u[2])-(1,u[3]). Regions are indexed counter-clockwise starting from
/// the one containing (0,0).
Partition quadrangle_partition(const std::array<double, 4>& u);
/// Draws u ~ U(0.2, 0.8)^4 and builds the cross partition.
Partition sample_partition_quadrangles(RandomStream& rng);
/// Intersection point of the two chords of a cross partition.
Point chord_intersection(const std::array<double, 4>& u);

struct UniformLaw {
    double lo = 0.0;
    double hi = 1.0;
    friend bool operator==(const UniformLaw&, const UniformLaw&) = default;
};

/// Jump laws and their assignment to region indices.
struct JumpLawTable {
    std::vector<UniformLaw> laws{{0.0, 1.0}, {5.0, 6.0}, {10.0, 11.0}};
    std::vector<int> region_law{0, 1, 0, 2};

    void validate() const;
    friend bool operator==(const JumpLawTable&, const JumpLawTable&) = default;
};

struct JumpHeights {
    std::vector<double> values;
    std::vector<int> law_tags;
};

/// One independent draw per region from the law assigned to its index.
JumpHeights sample_jump_heights(const Partition& partition, const JumpLawTable& table, RandomStream& rng);

enum class ClampMode { min, max };

/// Deterministic parts of the coefficient: a = a_bar + exp(W) + P and
/// b = clamp(b1 * a, b2).
struct CoefficientModel {
    Expression a_bar{0.0};
    Expression b1{-2.0};
    Expression b2{-5.0};
    ClampMode clamp = ClampMode::max;

    double b_from_a(Point x, double a) const {
        const double scaled = b1(x.x, x.y) * a;
        const double cap = b2(x.x, x.y);
        return clamp == ClampMode::min ? std::min(scaled, cap) : std::max(scaled, cap);
    }

    friend bool operator==(const CoefficientModel&, const CoefficientModel&) = default;
};

/// One coefficient realization, immutable after construction.
class CoefficientSample {
public:
    CoefficientSample(GridField field, Partition partition, JumpHeights jumps, CoefficientModel model);

    const GridField& field() const { return field_; }
    const Partition& partition() const { return partition_; }
    const JumpHeights& jumps() const { return jumps_; }
    const CoefficientModel& model() const { return model_; }

    double eval_a(Point x) const { return eval_a(x, partition_.locate(x)); }
    /// Same as eval_a when the region of x is already known.
    double eval_a(Point x, int region) const;
    double eval_b(Point x) const { return model_.b_from_a(x, eval_a(x)); }
    double eval_b(Point x, int region) const { return model_.b_from_a(x, eval_a(x, region)); }

    /// The same realization with the field restricted to the next coarser lattice.
    CoefficientSample with_field(GridField field) const;

private:
    GridField field_;
    Partition partition_;
    JumpHeights jumps_;
    CoefficientModel model_;
};

/// Plain-text record of a partition and its jump heights, for replay.
void write_partition_record(std::ostream& os, const Partition& partition, const JumpHeights& jumps);
std::pair<Partition, JumpHeights> read_partition_record(std::istream& is);

}  // namespace jmlmc
