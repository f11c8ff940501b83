#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "jmlmc/error.hpp"
#include "jmlmc/mesh.hpp"

using namespace jmlmc;

namespace {

// Every edge is shared by two triangles, or lies on the square boundary.
bool edge_conforming(const Mesh& m) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : m.triangles) {
        for (int i = 0; i < 3; ++i) {
            const int a = t[i];
            const int b = t[(i + 1) % 3];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    }
    for (const auto& [e, c] : count) {
        const Point p = m.vertices[e.first];
        const Point q = m.vertices[e.second];
        const bool on_side = (p.x == 0 && q.x == 0) || (p.y == 0 && q.y == 0) || (p.x == 1 && q.x == 1) ||
                             (p.y == 1 && q.y == 1);
        if (c != (on_side ? 1 : 2)) {
            return false;
        }
    }
    return true;
}

bool boundary_flags_exact(const Mesh& m) {
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        const Point p = m.vertices[v];
        const bool on = p.x == 0 || p.y == 0 || p.x == 1 || p.y == 1;
        if (on != m.boundary[v]) {
            return false;
        }
    }
    return true;
}

double total_area(const Mesh& m) {
    double a = 0.0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        a += m.triangle_area(t);
    }
    return a;
}

}  // namespace

TEST_SUITE("mesh") {
TEST_CASE("shape measures of reference triangles") {
    CHECK(triangle_diameter({0, 0}, {1, 0}, {0, 1}) / inscribed_diameter({0, 0}, {1, 0}, {0, 1}) ==
          doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
    const Point c{0.5, std::sqrt(3.0) / 2};
    CHECK(triangle_diameter({0, 0}, {1, 0}, c) / inscribed_diameter({0, 0}, {1, 0}, c) ==
          doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(min_triangle_angle_degrees({0, 0}, {1, 0}, c) == doctest::Approx(60.0));
    CHECK_THROWS_AS(inscribed_diameter({0, 0}, {1, 0}, {2, 0}), NumericalError);
    CHECK(max_shape_ratio_for_angle(20.0) == doctest::Approx(1.0 / std::tan(10.0 * M_PI / 180.0)));
}

TEST_CASE("uniform mesh structure") {
    const Mesh m = triangulate_uniform(std::sqrt(2.0) / 4);
    CHECK(m.triangles.size() == 32);
    CHECK(m.vertices.size() == 25);
    CHECK(m.interior_vertex_count() == 9);
    CHECK(m.h == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-15));
    CHECK(m.theta == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
    CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(edge_conforming(m));
    CHECK(boundary_flags_exact(m));
    std::vector<int> degree(m.vertices.size(), 0);
    std::map<std::pair<int, int>, bool> edges;
    for (const auto& t : m.triangles) {
        CHECK(orient2d(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) > 0);
        for (int i = 0; i < 3; ++i) {
            edges[{std::min(t[i], t[(i + 1) % 3]), std::max(t[i], t[(i + 1) % 3])}] = true;
        }
    }
    for (const auto& [e, unused] : edges) {
        ++degree[e.first];
        ++degree[e.second];
    }
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        if (!m.boundary[v]) {
            CHECK(degree[v] == 6);
        }
        const Point p = m.vertices[v];
        if ((p.x == 0 || p.x == 1) && (p.y == 0 || p.y == 1)) {
            CHECK(degree[v] <= 3);
        }
    }
    for (const auto& t : m.triangles) {
        CHECK(triangle_diameter(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) ==
              doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-14));
    }
    CHECK_THROWS_AS(triangulate_uniform(0.0), ConfigError);
}

TEST_CASE("adapted mesh of the symmetric cross") {
    const Partition p = quadrangle_partition({0.5, 0.5, 0.5, 0.5});
    const Mesh m = triangulate_adapted(p, std::sqrt(2.0) / 4);
    CHECK(check_conformity(m, p));
    CHECK(m.h <= std::sqrt(2.0) / 4);
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const Point c = m.centroid(t);
        const int expected = c.x < 0.5 ? (c.y < 0.5 ? 0 : 3) : (c.y < 0.5 ? 1 : 2);
        CHECK(m.region_of_triangle[t] == expected);
    }
    const Mesh u = triangulate_uniform(std::sqrt(2.0) / 4);
    CHECK(check_conformity(u, p));
}

TEST_CASE("adapted meshes of sampled partitions") {
    const RandomStream root(2024);
    const double h = std::sqrt(2.0) / 8;
    const double theta_bound = max_shape_ratio_for_angle(kMinAngleDegrees);
    for (std::uint64_t k = 0; k < 100; ++k) {
        RandomStream rng = root.child(k);
        const Partition p = sample_partition_quadrangles(rng);
        const Mesh m = triangulate_adapted(p, h);
        REQUIRE(check_conformity(m, p));
        CHECK(m.h <= h);
        CHECK(min_angle_degrees(m) >= kMinAngleDegrees);
        CHECK(m.theta <= theta_bound);
        CHECK(std::abs(total_area(m) - 1.0) <= 1e-12);
        CHECK(edge_conforming(m));
        CHECK(boundary_flags_exact(m));
        if (k < 20) {
            CHECK_FALSE(check_conformity(triangulate_uniform(h), p));
            const Mesh finer = triangulate_adapted(p, h / 2);
            CHECK(finer.h <= m.h);
        }
    }
}

TEST_CASE("midpoint refinement keeps the shape measure") {
    const Partition p = quadrangle_partition({0.3, 0.6, 0.45, 0.7});
    const Mesh m = triangulate_adapted(p, 0.25);
    const Mesh r = refine_midpoint(m);
    CHECK(r.triangles.size() == 4 * m.triangles.size());
    CHECK(r.theta == doctest::Approx(m.theta).epsilon(1e-10));
    CHECK(r.h == doctest::Approx(m.h / 2).epsilon(1e-12));
    CHECK(check_conformity(r, p));
    CHECK(edge_conforming(r));
    CHECK(boundary_flags_exact(r));
}

TEST_CASE("mesh text round trip") {
    const Partition p = quadrangle_partition({0.3, 0.6, 0.45, 0.7});
    const Mesh m = triangulate_adapted(p, 0.2);
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh q = read_mesh(ss);
    CHECK(q.vertices == m.vertices);
    CHECK(q.triangles == m.triangles);
    CHECK(q.region_of_triangle == m.region_of_triangle);
    CHECK(q.boundary == m.boundary);
    std::stringstream bad("mesh 1 1\nv 0 0 1\nt 0 1 2 0\n");
    CHECK_THROWS_AS(read_mesh(bad), IoError);
}
}
