#include "jmlmc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <string>

#include "jmlmc/error.hpp"

namespace jmlmc {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

double incircle(Point a, Point b, Point c, Point d, double& permanent) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    permanent = alift * (std::abs(bdx * cdy) + std::abs(cdx * bdy)) +
                blift * (std::abs(cdx * ady) + std::abs(adx * cdy)) +
                clift * (std::abs(adx * bdy) + std::abs(bdx * ady));
    return alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
}

Point circumcenter(Point a, Point b, Point c) {
    const Point ab = b - a;
    const Point ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = dot(ab, ab);
    const double ac2 = dot(ac, ac);
    return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

// Ruppert-style constrained Delaunay refinement on the cross partition PSLG.
class Refiner {
public:
    Refiner(const Partition& partition, double h_max) : partition_(partition), h_max_(h_max) {
        cos_min_angle_ = std::cos((kMinAngleDegrees + 1e-7) * kDegToRad);
        max_vertices_ = static_cast<std::size_t>(400.0 / (h_max * h_max)) + 20000;
        build_initial();
    }

    Mesh run() {
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            queue_.push_back(static_cast<int>(t));
        }
        pending_.assign(segments_.begin(), segments_.end());
        split_encroached();
        while (!queue_.empty()) {
            const int t = queue_.front();
            queue_.pop_front();
            if (!is_bad(t)) {
                continue;
            }
            const auto& v = tris_[t].v;
            const Point c = circumcenter(pts_[v[0]], pts_[v[1]], pts_[v[2]]);
            const Location loc = walk(t, c);
            if (loc.blocked) {
                split_segment(loc.segment);
                queue_.push_back(t);
                split_encroached();
                continue;
            }
            std::vector<std::uint64_t> encroached;
            for (std::uint64_t s : segments_) {
                if (encroaches(c, s)) {
                    encroached.push_back(s);
                }
            }
            if (!encroached.empty()) {
                for (std::uint64_t s : encroached) {
                    if (segments_.contains(s)) {
                        split_segment(s);
                    }
                }
                queue_.push_back(t);
                split_encroached();
                continue;
            }
            if (loc.edge >= 0) {
                const auto& tv = tris_[loc.tri].v;
                const Point a = pts_[tv[(loc.edge + 1) % 3]];
                const Point b = pts_[tv[(loc.edge + 2) % 3]];
                const Point d = b - a;
                const double s = std::clamp(dot(c - a, d) / dot(d, d), 0.0, 1.0);
                insert_on_edge(loc.tri, loc.edge, add_point(a + s * d, false));
            } else {
                insert_in_triangle(loc.tri, add_point(c, false));
            }
            split_encroached();
        }
        return to_mesh();
    }

private:
    struct Tri {
        std::array<int, 3> v{};
        std::array<int, 3> n{-1, -1, -1};
    };

    struct Location {
        int tri = -1;
        int edge = -1;
        bool blocked = false;
        std::uint64_t segment = 0;
    };

    void check_budget() const {
        if (pts_.size() > max_vertices_) {
            throw NumericalError("adapted mesh: refinement did not settle within " + std::to_string(max_vertices_) +
                                 " vertices");
        }
    }

    int add_point(Point p, bool input) {
        pts_.push_back(p);
        input_.push_back(input ? 1 : 0);
        vert_tri_.push_back(-1);
        check_budget();
        return static_cast<int>(pts_.size()) - 1;
    }

    bool is_segment(int a, int b) const { return segments_.contains(edge_key(a, b)); }

    void build_initial() {
        auto vertex_of = [this](Point p) {
            for (std::size_t i = 0; i < pts_.size(); ++i) {
                if (distance(pts_[i], p) < 1e-14) {
                    return static_cast<int>(i);
                }
            }
            return add_point(p, true);
        };
        std::map<std::pair<int, int>, std::pair<int, int>> directed;  // (a,b) -> (tri, edge)
        for (const Region& r : partition_.regions) {
            std::vector<int> ids;
            for (Point p : r.vertices) {
                ids.push_back(vertex_of(p));
            }
            for (std::size_t k = 0; k < ids.size(); ++k) {
                segments_.insert(edge_key(ids[k], ids[(k + 1) % ids.size()]));
            }
            for (std::size_t k = 1; k + 1 < ids.size(); ++k) {
                Tri t;
                t.v = {ids[0], ids[k], ids[k + 1]};
                tris_.push_back(t);
            }
        }
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            for (int i = 0; i < 3; ++i) {
                const int a = tris_[t].v[(i + 1) % 3];
                const int b = tris_[t].v[(i + 2) % 3];
                directed[{a, b}] = {static_cast<int>(t), i};
                vert_tri_[a] = static_cast<int>(t);
            }
        }
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            for (int i = 0; i < 3; ++i) {
                const int a = tris_[t].v[(i + 1) % 3];
                const int b = tris_[t].v[(i + 2) % 3];
                const auto it = directed.find({b, a});
                tris_[t].n[i] = it == directed.end() ? -1 : it->second.first;
            }
        }
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            for (int i = 0; i < 3; ++i) {
                legalize_edge(static_cast<int>(t), i, -1);
            }
        }
    }

    int edge_index(int t, int a, int b) const {
        const auto& v = tris_[t].v;
        for (int i = 0; i < 3; ++i) {
            if (v[(i + 1) % 3] == a && v[(i + 2) % 3] == b) {
                return i;
            }
        }
        return -1;
    }

    int vertex_index(int t, int p) const {
        const auto& v = tris_[t].v;
        for (int i = 0; i < 3; ++i) {
            if (v[i] == p) {
                return i;
            }
        }
        return -1;
    }

    // Re-derives neighbour links of freshly rewritten triangles.
    void relink(const std::vector<int>& slots, const std::vector<int>& outer) {
        for (int s : slots) {
            for (int i = 0; i < 3; ++i) {
                const int a = tris_[s].v[(i + 1) % 3];
                const int b = tris_[s].v[(i + 2) % 3];
                int nb = -1;
                for (int o : slots) {
                    if (o != s && edge_index(o, b, a) >= 0) {
                        nb = o;
                        break;
                    }
                }
                if (nb < 0) {
                    for (int o : outer) {
                        const int j = edge_index(o, b, a);
                        if (j >= 0) {
                            nb = o;
                            tris_[o].n[j] = s;
                            break;
                        }
                    }
                }
                tris_[s].n[i] = nb;
            }
            for (int p : tris_[s].v) {
                vert_tri_[p] = s;
            }
        }
    }

    std::vector<int> outer_of(const std::vector<int>& slots) const {
        std::vector<int> outer;
        for (int s : slots) {
            for (int nb : tris_[s].n) {
                if (nb >= 0 && std::find(slots.begin(), slots.end(), nb) == slots.end()) {
                    outer.push_back(nb);
                }
            }
        }
        return outer;
    }

    int new_slot() {
        tris_.emplace_back();
        return static_cast<int>(tris_.size()) - 1;
    }

    void insert_in_triangle(int t, int p) {
        const auto [a, b, c] = tris_[t].v;
        const std::vector<int> outer = outer_of({t});
        const int t1 = new_slot();
        const int t2 = new_slot();
        tris_[t].v = {p, b, c};
        tris_[t1].v = {a, p, c};
        tris_[t2].v = {a, b, p};
        relink({t, t1, t2}, outer);
        after_insert(p, {t, t1, t2});
    }

    void insert_on_edge(int t, int i, int p) {
        const int a = tris_[t].v[i];
        const int b = tris_[t].v[(i + 1) % 3];
        const int c = tris_[t].v[(i + 2) % 3];
        const int u = tris_[t].n[i];
        std::vector<int> old{t};
        if (u >= 0) {
            old.push_back(u);
        }
        const std::vector<int> outer = outer_of(old);
        if (segments_.erase(edge_key(b, c)) > 0) {
            segments_.insert(edge_key(b, p));
            segments_.insert(edge_key(p, c));
        }
        std::vector<int> slots{t, new_slot()};
        tris_[slots[0]].v = {a, b, p};
        tris_[slots[1]].v = {a, p, c};
        if (u >= 0) {
            const int d = tris_[u].v[(edge_index(u, c, b) + 3) % 3];
            slots.push_back(u);
            slots.push_back(new_slot());
            tris_[slots[2]].v = {d, c, p};
            tris_[slots[3]].v = {d, p, b};
        }
        relink(slots, outer);
        after_insert(p, slots);
    }

    void after_insert(int p, const std::vector<int>& created) {
        for (int s : created) {
            legalize_edge(s, vertex_index(s, p), p);
        }
        for (int s : incident(p)) {
            queue_.push_back(s);
        }
        collect_segments_near(p);
    }

    // Lawson flips around the newly inserted vertex p (p < 0: plain check).
    void legalize_edge(int t, int i, int p) {
        std::vector<std::pair<int, int>> stack{{t, i}};
        while (!stack.empty()) {
            const auto [s, k] = stack.back();
            stack.pop_back();
            const int nb = tris_[s].n[k];
            const int a = tris_[s].v[k];
            const int b = tris_[s].v[(k + 1) % 3];
            const int c = tris_[s].v[(k + 2) % 3];
            if (nb < 0 || is_segment(b, c) || (p >= 0 && a != p)) {
                continue;
            }
            const int j = edge_index(nb, c, b);
            const int d = tris_[nb].v[j];
            double permanent = 0.0;
            const double det = incircle(pts_[a], pts_[b], pts_[c], pts_[d], permanent);
            if (det <= 1e-12 * permanent) {
                continue;
            }
            // Flip (b,c) to (a,d) only when the quad is strictly convex.
            if (orient2d(pts_[a], pts_[b], pts_[d]) <= 0.0 || orient2d(pts_[a], pts_[d], pts_[c]) <= 0.0) {
                continue;
            }
            const std::vector<int> outer = outer_of({s, nb});
            tris_[s].v = {a, b, d};
            tris_[nb].v = {a, d, c};
            relink({s, nb}, outer);
            if (p >= 0) {
                stack.push_back({s, 0});
                stack.push_back({nb, 0});
            }
        }
    }

    std::vector<int> incident(int p) const {
        std::vector<int> out;
        const int start = vert_tri_[p];
        int t = start;
        // Counter-clockwise sweep, then clockwise if a hull edge interrupts it.
        for (;;) {
            out.push_back(t);
            const int i = vertex_index(t, p);
            const int next = tris_[t].n[(i + 2) % 3];
            if (next < 0 || next == start) {
                if (next == start) {
                    return out;
                }
                break;
            }
            t = next;
        }
        t = start;
        for (;;) {
            const int i = vertex_index(t, p);
            const int next = tris_[t].n[(i + 1) % 3];
            if (next < 0) {
                return out;
            }
            t = next;
            out.push_back(t);
        }
    }

    bool encroaches(Point q, std::uint64_t seg) const {
        const Point a = pts_[static_cast<int>(seg >> 32)];
        const Point b = pts_[static_cast<int>(seg & 0xffffffffu)];
        return dot(a - q, b - q) < -1e-12 * dot(b - a, b - a);
    }

    bool segment_encroached(std::uint64_t seg) const {
        const int a = static_cast<int>(seg >> 32);
        const int b = static_cast<int>(seg & 0xffffffffu);
        for (int t : incident(a)) {
            for (int i : {edge_index(t, a, b), edge_index(t, b, a)}) {
                if (i >= 0 && encroaches(pts_[tris_[t].v[i]], seg)) {
                    return true;
                }
            }
        }
        return false;
    }

    // Segments whose apex may have changed when p was inserted.
    void collect_segments_near(int p) {
        for (int t : incident(p)) {
            const auto& v = tris_[t].v;
            for (int i = 0; i < 3; ++i) {
                const int b = v[(i + 1) % 3];
                const int c = v[(i + 2) % 3];
                if (is_segment(b, c)) {
                    pending_.push_back(edge_key(b, c));
                }
            }
        }
    }

    // In a constrained Delaunay triangulation a segment is encroached iff one
    // of its apexes lies inside its diametral circle.
    void split_encroached() {
        while (!pending_.empty()) {
            const std::uint64_t seg = pending_.front();
            pending_.pop_front();
            if (segments_.contains(seg) && segment_encroached(seg)) {
                split_segment(seg);
            }
        }
    }

    void split_segment(std::uint64_t seg) {
        const int a = static_cast<int>(seg >> 32);
        const int b = static_cast<int>(seg & 0xffffffffu);
        const Point pa = pts_[a];
        const Point pb = pts_[b];
        const double len = distance(pa, pb);
        Point split = 0.5 * (pa + pb);
        if ((input_[a] != 0) != (input_[b] != 0)) {
            // Concentric shells around input vertices keep small input angles from ping-ponging.
            const double shell = std::exp2(std::round(std::log2(0.5 * len)));
            const double s = shell / len;
            split = input_[a] != 0 ? pa + s * (pb - pa) : pb + s * (pa - pb);
        }
        // Locate a triangle carrying the segment as an edge.
        for (int t : incident(a)) {
            int i = edge_index(t, a, b);
            if (i < 0) {
                i = edge_index(t, b, a);
            }
            if (i >= 0) {
                insert_on_edge(t, i, add_point(split, false));
                return;
            }
        }
        throw NumericalError("adapted mesh: lost track of a constrained segment");
    }

    bool is_bad(int t) const {
        const auto& v = tris_[t].v;
        const Point p0 = pts_[v[0]];
        const Point p1 = pts_[v[1]];
        const Point p2 = pts_[v[2]];
        std::array<double, 3> l2{dot(p1 - p2, p1 - p2), dot(p2 - p0, p2 - p0), dot(p0 - p1, p0 - p1)};
        std::sort(l2.begin(), l2.end());
        if (l2[2] > h_max_ * h_max_) {
            return true;
        }
        const double cos_smallest = (l2[1] + l2[2] - l2[0]) / (2.0 * std::sqrt(l2[1] * l2[2]));
        return cos_smallest > cos_min_angle_;
    }

    Location walk(int t, Point target) const {
        const auto& v0 = tris_[t].v;
        const Point origin = (1.0 / 3.0) * (pts_[v0[0]] + pts_[v0[1]] + pts_[v0[2]]);
        const std::size_t limit = 4 * tris_.size() + 16;
        for (std::size_t step = 0; step < limit; ++step) {
            const auto& v = tris_[t].v;
            int exit = -1;
            int fallback = -1;
            double most_negative = 0.0;
            std::array<double, 3> dist{};
            for (int i = 0; i < 3; ++i) {
                const Point a = pts_[v[(i + 1) % 3]];
                const Point b = pts_[v[(i + 2) % 3]];
                dist[i] = orient2d(a, b, target) / distance(a, b);
                if (dist[i] < -1e-12) {
                    const double s1 = orient2d(origin, target, a);
                    const double s2 = orient2d(origin, target, b);
                    if ((s1 <= 0.0 && s2 >= 0.0) || (s1 >= 0.0 && s2 <= 0.0)) {
                        exit = i;
                    }
                    if (dist[i] < most_negative) {
                        most_negative = dist[i];
                        fallback = i;
                    }
                }
            }
            if (exit < 0) {
                exit = fallback;
            }
            if (exit < 0) {
                Location loc;
                loc.tri = t;
                for (int i = 0; i < 3; ++i) {
                    if (std::abs(dist[i]) <= 1e-10) {
                        const int a = v[(i + 1) % 3];
                        const int b = v[(i + 2) % 3];
                        if (is_segment(a, b)) {
                            loc.blocked = true;
                            loc.segment = edge_key(a, b);
                            return loc;
                        }
                        loc.edge = i;
                    }
                }
                return loc;
            }
            const int a = v[(exit + 1) % 3];
            const int b = v[(exit + 2) % 3];
            if (is_segment(a, b) || tris_[t].n[exit] < 0) {
                Location loc;
                loc.blocked = true;
                loc.segment = edge_key(a, b);
                return loc;
            }
            t = tris_[t].n[exit];
        }
        throw NumericalError("adapted mesh: point location did not terminate");
    }

    Mesh to_mesh() const {
        Mesh mesh;
        mesh.vertices = pts_;
        mesh.boundary.resize(pts_.size());
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            const Point p = pts_[i];
            mesh.boundary[i] = p.x <= kGeomTol || p.x >= 1.0 - kGeomTol || p.y <= kGeomTol || p.y >= 1.0 - kGeomTol;
        }
        for (const Tri& t : tris_) {
            if (!(orient2d(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]]) > 0.0)) {
                throw NumericalError("adapted mesh: produced a degenerate triangle");
            }
            mesh.triangles.push_back(t.v);
        }
        mesh.region_of_triangle.resize(mesh.triangles.size());
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            mesh.region_of_triangle[t] = partition_.locate(mesh.centroid(t));
        }
        finalize_metrics(mesh);
        return mesh;
    }

    const Partition& partition_;
    double h_max_;
    double cos_min_angle_ = 0.0;
    std::size_t max_vertices_ = 0;
    std::vector<Point> pts_;
    std::vector<char> input_;
    std::vector<int> vert_tri_;
    std::vector<Tri> tris_;
    std::set<std::uint64_t> segments_;
    std::deque<int> queue_;
    std::deque<std::uint64_t> pending_;
};

}  // namespace

std::size_t Mesh::interior_vertex_count() const {
    return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), false));
}

double Mesh::triangle_area(std::size_t t) const {
    const auto& v = triangles[t];
    return 0.5 * orient2d(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
}

Point Mesh::centroid(std::size_t t) const {
    const auto& v = triangles[t];
    return (1.0 / 3.0) * (vertices[v[0]] + vertices[v[1]] + vertices[v[2]]);
}

double max_shape_ratio_for_angle(double min_angle_degrees) {
    return 1.0 / std::tan(0.5 * min_angle_degrees * kDegToRad);
}

double triangle_diameter(Point a, Point b, Point c) {
    return std::max({distance(a, b), distance(b, c), distance(c, a)});
}

double inscribed_diameter(Point a, Point b, Point c) {
    const double area = 0.5 * std::abs(orient2d(a, b, c));
    const double perimeter = distance(a, b) + distance(b, c) + distance(c, a);
    if (!(area > 0.0)) {
        throw NumericalError("shape regularity: zero-area triangle");
    }
    return 4.0 * area / perimeter;
}

double min_triangle_angle_degrees(Point a, Point b, Point c) {
    const double la = distance(b, c);
    const double lb = distance(c, a);
    const double lc = distance(a, b);
    auto angle = [](double opp, double s1, double s2) {
        return std::acos(std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0));
    };
    return std::min({angle(la, lb, lc), angle(lb, lc, la), angle(lc, la, lb)}) / kDegToRad;
}

double shape_regularity(const Mesh& mesh) {
    double theta = 0.0;
    for (const auto& t : mesh.triangles) {
        const Point a = mesh.vertices[t[0]];
        const Point b = mesh.vertices[t[1]];
        const Point c = mesh.vertices[t[2]];
        theta = std::max(theta, triangle_diameter(a, b, c) / inscribed_diameter(a, b, c));
    }
    return theta;
}

double min_angle_degrees(const Mesh& mesh) {
    double worst = 180.0;
    for (const auto& t : mesh.triangles) {
        worst = std::min(worst, min_triangle_angle_degrees(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
    }
    return worst;
}

void finalize_metrics(Mesh& mesh) {
    mesh.h = 0.0;
    for (const auto& t : mesh.triangles) {
        mesh.h = std::max(mesh.h, triangle_diameter(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
    }
    mesh.theta = shape_regularity(mesh);
}

Mesh triangulate_adapted(const Partition& partition, double h_max) {
    if (!(h_max > 0.0) || !std::isfinite(h_max)) {
        throw ConfigError("triangulate_adapted: h_max must be positive");
    }
    return Refiner(partition, h_max).run();
}

Mesh triangulate_uniform(double h_max) {
    if (!(h_max > 0.0) || !std::isfinite(h_max)) {
        throw ConfigError("triangulate_uniform: h_max must be positive");
    }
    const int m = std::max(1, static_cast<int>(std::ceil(std::sqrt(2.0) / h_max * (1.0 - 1e-12))));
    Mesh mesh;
    const int n = m + 1;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            mesh.vertices.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
            mesh.boundary.push_back(i == 0 || j == 0 || i == m || j == m);
        }
    }
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const int v00 = j * n + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + n;
            const int v11 = v01 + 1;
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    finalize_metrics(mesh);
    return mesh;
}

bool check_conformity(const Mesh& mesh, const Partition& partition) {
    constexpr double tol = 1e-10;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const int r = partition.locate(mesh.centroid(t));
        const Region& region = partition.regions[static_cast<std::size_t>(r)];
        for (int vi : mesh.triangles[t]) {
            const Point p = mesh.vertices[static_cast<std::size_t>(vi)];
            for (std::size_t k = 0; k < region.vertices.size(); ++k) {
                const Point a = region.vertices[k];
                const Point b = region.vertices[(k + 1) % region.vertices.size()];
                if (orient2d(a, b, p) / distance(a, b) < -tol) {
                    return false;
                }
            }
        }
    }
    std::set<std::pair<int, int>> edges;
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) {
            edges.insert({std::min(t[i], t[(i + 1) % 3]), std::max(t[i], t[(i + 1) % 3])});
        }
    }
    for (const Segment& s : partition.interface_segments) {
        const Point d = s.b - s.a;
        const double len = norm(d);
        std::vector<std::pair<double, double>> cover;
        for (const auto& [i, j] : edges) {
            const Point p = mesh.vertices[static_cast<std::size_t>(i)];
            const Point q = mesh.vertices[static_cast<std::size_t>(j)];
            if (std::abs(orient2d(s.a, s.b, p)) / len > tol || std::abs(orient2d(s.a, s.b, q)) / len > tol) {
                continue;
            }
            double tp = dot(p - s.a, d) / (len * len);
            double tq = dot(q - s.a, d) / (len * len);
            if (tp > tq) {
                std::swap(tp, tq);
            }
            if (tq <= tol || tp >= 1.0 - tol) {
                continue;
            }
            cover.emplace_back(tp, tq);
        }
        std::sort(cover.begin(), cover.end());
        double reach = 0.0;
        for (const auto& [lo, hi] : cover) {
            if (std::abs(lo - reach) > tol) {
                return false;
            }
            reach = hi;
        }
        if (std::abs(reach - 1.0) > tol) {
            return false;
        }
    }
    return true;
}

Mesh refine_midpoint(const Mesh& mesh) {
    Mesh out;
    out.vertices = mesh.vertices;
    out.boundary = mesh.boundary;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        const auto it = midpoint.find(key);
        if (it != midpoint.end()) {
            return it->second;
        }
        const int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
        out.boundary.push_back(mesh.boundary[a] && mesh.boundary[b] &&
                               [&] {
                                   const Point m = out.vertices.back();
                                   return m.x <= kGeomTol || m.x >= 1.0 - kGeomTol || m.y <= kGeomTol ||
                                          m.y >= 1.0 - kGeomTol;
                               }());
        midpoint.emplace(key, id);
        return id;
    };
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto [a, b, c] = mesh.triangles[t];
        const int ab = mid(a, b);
        const int bc = mid(b, c);
        const int ca = mid(c, a);
        out.triangles.push_back({a, ab, ca});
        out.triangles.push_back({ab, b, bc});
        out.triangles.push_back({ca, bc, c});
        out.triangles.push_back({ab, bc, ca});
        if (mesh.adapted()) {
            for (int k = 0; k < 4; ++k) {
                out.region_of_triangle.push_back(mesh.region_of_triangle[t]);
            }
        }
    }
    finalize_metrics(out);
    return out;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
    const auto old_precision = os.precision(17);
    os << "mesh " << mesh.vertices.size() << ' ' << mesh.triangles.size() << '\n';
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        os << "v " << mesh.vertices[i].x << ' ' << mesh.vertices[i].y << ' ' << (mesh.boundary[i] ? 1 : 0) << '\n';
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        os << "t " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' '
           << (mesh.adapted() ? mesh.region_of_triangle[t] : -1) << '\n';
    }
    os.precision(old_precision);
}

Mesh read_mesh(std::istream& is) {
    std::string tag;
    std::size_t nv = 0;
    std::size_t nt = 0;
    if (!(is >> tag >> nv >> nt) || tag != "mesh") {
        throw IoError("mesh file: missing 'mesh <vertices> <triangles>' header");
    }
    Mesh mesh;
    mesh.vertices.resize(nv);
    mesh.boundary.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        int b = 0;
        if (!(is >> tag >> mesh.vertices[i].x >> mesh.vertices[i].y >> b) || tag != "v") {
            throw IoError("mesh file: malformed vertex line " + std::to_string(i));
        }
        mesh.boundary[i] = b != 0;
    }
    bool adapted = true;
    std::vector<int> regions;
    for (std::size_t t = 0; t < nt; ++t) {
        std::array<int, 3> tri{};
        int region = -1;
        if (!(is >> tag >> tri[0] >> tri[1] >> tri[2] >> region) || tag != "t") {
            throw IoError("mesh file: malformed triangle line " + std::to_string(t));
        }
        for (int v : tri) {
            if (v < 0 || static_cast<std::size_t>(v) >= nv) {
                throw IoError("mesh file: triangle refers to a missing vertex");
            }
        }
        mesh.triangles.push_back(tri);
        regions.push_back(region);
        adapted = adapted && region >= 0;
    }
    if (adapted && nt > 0) {
        mesh.region_of_triangle = std::move(regions);
    }
    finalize_metrics(mesh);
    return mesh;
}

}  // namespace jmlmc
