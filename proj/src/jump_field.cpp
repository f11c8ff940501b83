#include "jmlmc/jump_field.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "jmlmc/error.hpp"

namespace jmlmc {

namespace {

constexpr double kPartitionLow = 0.2;
constexpr double kPartitionHigh = 0.8;

bool on_segment_line(const Segment& s, Point p) {
    const double len = distance(s.a, s.b);
    return std::abs(orient2d(s.a, s.b, p)) <= 1e-12 * len;
}

double project(const Segment& s, Point p) {
    const Point d = s.b - s.a;
    return dot(p - s.a, d) / dot(d, d);
}

}  // namespace

double Region::area() const {
    double twice = 0.0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        twice += cross(vertices[k], vertices[(k + 1) % vertices.size()]);
    }
    return 0.5 * twice;
}

Point Region::centroid() const {
    double a = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const Point p = vertices[k];
        const Point q = vertices[(k + 1) % vertices.size()];
        const double w = cross(p, q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    return {cx / (3.0 * a), cy / (3.0 * a)};
}

Partition Partition::from_polygons(std::vector<std::vector<Point>> polygons, std::vector<Segment> interfaces) {
    Partition p;
    p.interface_segments = std::move(interfaces);
    for (auto& poly : polygons) {
        Region r;
        r.vertices = std::move(poly);
        if (r.vertices.size() < 3 || !(r.area() > 0.0)) {
            throw ConfigError("partition: region must be a counter-clockwise polygon with positive area");
        }
        const Point c = r.centroid();
        r.closed_edge.assign(r.vertices.size(), true);
        for (std::size_t k = 0; k < r.vertices.size(); ++k) {
            const Point a = r.vertices[k];
            const Point b = r.vertices[(k + 1) % r.vertices.size()];
            const Point mid = 0.5 * (a + b);
            for (const Segment& s : p.interface_segments) {
                if (on_segment_line(s, a) && on_segment_line(s, b)) {
                    const double t = project(s, mid);
                    if (t > 0.0 && t < 1.0) {
                        r.closed_edge[k] = orient2d(s.a, s.b, c) > 0.0;
                    }
                }
            }
        }
        p.regions.push_back(std::move(r));
    }
    return p;
}

int Partition::locate(Point x) const {
    int best = 0;
    double best_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const Region& r = regions[i];
        bool inside = true;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < r.vertices.size(); ++k) {
            const Point a = r.vertices[k];
            const Point b = r.vertices[(k + 1) % r.vertices.size()];
            const double o = orient2d(a, b, x) / distance(a, b);
            worst = std::min(worst, o);
            if (o < 0.0 || (o == 0.0 && !r.closed_edge[k])) {
                inside = false;
            }
        }
        if (inside) {
            return static_cast<int>(i);
        }
        // Roundoff can leave a point on an interface outside both neighbours.
        if (worst > best_violation) {
            best_violation = worst;
            best = static_cast<int>(i);
        }
    }
    return best;
}

std::vector<std::array<int, 2>> Partition::adjacent_pairs() const {
    std::vector<std::array<int, 2>> pairs;
    for (const Segment& s : interface_segments) {
        const Point mid = 0.5 * (s.a + s.b);
        std::vector<int> touching;
        for (std::size_t i = 0; i < regions.size(); ++i) {
            const Region& r = regions[i];
            for (std::size_t k = 0; k < r.vertices.size(); ++k) {
                const Segment e{r.vertices[k], r.vertices[(k + 1) % r.vertices.size()]};
                if (on_segment_line(e, mid) && project(e, mid) > 0.0 && project(e, mid) < 1.0) {
                    touching.push_back(static_cast<int>(i));
                    break;
                }
            }
        }
        if (touching.size() == 2) {
            pairs.push_back({std::min(touching[0], touching[1]), std::max(touching[0], touching[1])});
        }
    }
    return pairs;
}

Point chord_intersection(const std::array<double, 4>& u) {
    // x = u0 + (u1 - u0) s on the vertical chord, y = u2 + (u3 - u2) r on the horizontal one.
    const double dv = u[1] - u[0];
    const double dh = u[3] - u[2];
    const double y = (u[2] + dh * u[0]) / (1.0 - dh * dv);
    const double x = u[0] + dv * y;
    return {x, y};
}

Partition quadrangle_partition(const std::array<double, 4>& u) {
    for (double v : u) {
        if (!(v > 0.0 && v < 1.0)) {
            throw ConfigError("quadrangle partition: chord endpoints must lie strictly inside the sides");
        }
    }
    const Point bottom{u[0], 0.0};
    const Point top{u[1], 1.0};
    const Point left{0.0, u[2]};
    const Point right{1.0, u[3]};
    const Point cross_pt = chord_intersection(u);
    std::vector<std::vector<Point>> polys{
        {{0.0, 0.0}, bottom, cross_pt, left},
        {bottom, {1.0, 0.0}, right, cross_pt},
        {cross_pt, right, {1.0, 1.0}, top},
        {left, cross_pt, top, {0.0, 1.0}},
    };
    std::vector<Segment> interfaces{{bottom, cross_pt}, {cross_pt, top}, {left, cross_pt}, {cross_pt, right}};
    return Partition::from_polygons(std::move(polys), std::move(interfaces));
}

Partition sample_partition_quadrangles(RandomStream& rng) {
    std::array<double, 4> u{};
    for (double& v : u) {
        v = rng.uniform(kPartitionLow, kPartitionHigh);
    }
    return quadrangle_partition(u);
}

void JumpLawTable::validate() const {
    if (laws.empty()) {
        throw ConfigError("jump laws: at least one law required");
    }
    for (const UniformLaw& law : laws) {
        if (!(law.lo >= 0.0) || !(law.hi > law.lo) || !std::isfinite(law.hi)) {
            throw ConfigError("jump laws: each law must satisfy 0 <= lo < hi < inf");
        }
    }
    if (region_law.size() != 4) {
        throw ConfigError("jump laws: the quadrangle partition needs exactly 4 region assignments");
    }
    for (int tag : region_law) {
        if (tag < 0 || tag >= static_cast<int>(laws.size())) {
            throw ConfigError("jump laws: region assignment refers to an unknown law");
        }
    }
    // Cross partition adjacency is the 4-cycle 0-1-2-3-0.
    for (int i = 0; i < 4; ++i) {
        if (laws[region_law[i]] == laws[region_law[(i + 1) % 4]]) {
            throw ConfigError("jump laws: adjacent regions " + std::to_string(i) + " and " +
                              std::to_string((i + 1) % 4) + " share a jump distribution");
        }
    }
}

JumpHeights sample_jump_heights(const Partition& partition, const JumpLawTable& table, RandomStream& rng) {
    if (partition.tau() != table.region_law.size()) {
        throw ConfigError("jump heights: partition has " + std::to_string(partition.tau()) +
                          " regions but the law table assigns " + std::to_string(table.region_law.size()));
    }
    JumpHeights out;
    for (int tag : table.region_law) {
        const UniformLaw& law = table.laws.at(static_cast<std::size_t>(tag));
        out.values.push_back(rng.uniform(law.lo, law.hi));
        out.law_tags.push_back(tag);
    }
    return out;
}

CoefficientSample::CoefficientSample(GridField field, Partition partition, JumpHeights jumps, CoefficientModel model)
    : field_(std::move(field)), partition_(std::move(partition)), jumps_(std::move(jumps)), model_(std::move(model)) {
    if (jumps_.values.size() != partition_.tau()) {
        throw ConfigError("coefficient sample: one jump height per region required");
    }
}

double CoefficientSample::eval_a(Point x, int region) const {
    return model_.a_bar(x.x, x.y) + std::exp(field_.interpolate(x)) + jumps_.values[static_cast<std::size_t>(region)];
}

CoefficientSample CoefficientSample::with_field(GridField field) const {
    return CoefficientSample(std::move(field), partition_, jumps_, model_);
}

void write_partition_record(std::ostream& os, const Partition& partition, const JumpHeights& jumps) {
    const auto old_precision = os.precision(17);
    os << "partition " << partition.tau() << '\n';
    for (std::size_t i = 0; i < partition.tau(); ++i) {
        const Region& r = partition.regions[i];
        os << "region " << i << " law " << jumps.law_tags.at(i) << " value " << jumps.values.at(i) << " vertices "
           << r.vertices.size() << '\n';
        for (Point p : r.vertices) {
            os << p.x << ' ' << p.y << '\n';
        }
    }
    os << "interfaces " << partition.interface_segments.size() << '\n';
    for (const Segment& s : partition.interface_segments) {
        os << s.a.x << ' ' << s.a.y << ' ' << s.b.x << ' ' << s.b.y << '\n';
    }
    os.precision(old_precision);
}

std::pair<Partition, JumpHeights> read_partition_record(std::istream& is) {
    auto expect = [&is](const std::string& word) {
        std::string token;
        if (!(is >> token) || token != word) {
            throw IoError("partition record: expected '" + word + "'");
        }
    };
    std::size_t tau = 0;
    expect("partition");
    if (!(is >> tau) || tau == 0) {
        throw IoError("partition record: bad region count");
    }
    std::vector<std::vector<Point>> polys(tau);
    JumpHeights jumps;
    for (std::size_t i = 0; i < tau; ++i) {
        std::size_t index = 0;
        std::size_t n = 0;
        int law = 0;
        double value = 0.0;
        expect("region");
        is >> index;
        expect("law");
        is >> law;
        expect("value");
        is >> value;
        expect("vertices");
        is >> n;
        if (!is || index != i || n < 3) {
            throw IoError("partition record: malformed region header");
        }
        jumps.law_tags.push_back(law);
        jumps.values.push_back(value);
        polys[i].resize(n);
        for (Point& p : polys[i]) {
            is >> p.x >> p.y;
        }
    }
    std::size_t nseg = 0;
    expect("interfaces");
    is >> nseg;
    std::vector<Segment> segs(nseg);
    for (Segment& s : segs) {
        is >> s.a.x >> s.a.y >> s.b.x >> s.b.y;
    }
    if (!is) {
        throw IoError("partition record: truncated");
    }
    return {Partition::from_polygons(std::move(polys), std::move(segs)), std::move(jumps)};
}

}  // namespace jmlmc
