#include <doctest.h>

#include <cmath>
#include <numbers>

#include "heat_oracle.hpp"
#include "jmlmc/error.hpp"
#include "jmlmc/fem.hpp"

using namespace jmlmc;

namespace {

// Midpoint-rule values on a 2048^2 (resp. 4096^2) tensor grid, see tests/oracles.
constexpr double kWeightIntegral = 0.9311913687942462;
constexpr double kWeightSinSinIntegral = 0.3839671627104945;

const CoefficientFn kUnit = [](Point, int) { return PointCoefficients{1.0, 0.0}; };

double mass_norm(const DiscreteSystem& sys, const std::vector<double>& c) {
    const std::vector<double> mc = spmv(sys.M, c);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        s += c[i] * mc[i];
    }
    return std::sqrt(s);
}

CoefficientSample sampled_coefficient(std::uint64_t seed, double eps) {
    const CirculantEmbedding e(SampleGrid(eps), CovarianceSpec{});
    return sample_coefficient(e, RandomStream(seed), ProblemConfig{});
}

}  // namespace

TEST_SUITE("fem") {
TEST_CASE("element stiffness of the unit right triangle") {
    Mesh m;
    m.vertices = {{0, 0}, {1, 0}, {0, 1}};
    m.boundary = {true, true, true};
    m.triangles = {{0, 1, 2}};
    finalize_metrics(m);
    const DiscreteSystem sys = assemble(m, kUnit, Expression(0.0), {false});
    const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(sys.A.coeff(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-15));
            CHECK(sys.M.coeff(i, j) == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("advection uses the centroid value of the test function") {
    Mesh m;
    m.vertices = {{0, 0}, {1, 0}, {0, 1}};
    m.boundary = {true, true, true};
    m.triangles = {{0, 1, 2}};
    finalize_metrics(m);
    const CoefficientFn adv = [](Point, int) { return PointCoefficients{0.0, 3.0}; };
    const DiscreteSystem sys = assemble(m, adv, Expression(0.0), {false});
    // grad v0 = (-1,-1), grad v1 = (1,0), grad v2 = (0,1); entry = b (1^T grad v_j) |K| / 3.
    const double col[3] = {-2.0, 1.0, 1.0};
    for (int k = 0; k < 3; ++k) {
        for (int j = 0; j < 3; ++j) {
            CHECK(sys.A.coeff(k, j) == doctest::Approx(3.0 * col[j] * 0.5 / 3.0));
        }
    }
}

TEST_CASE("mass and stiffness kernel invariants on many meshes") {
    for (std::uint64_t k = 0; k < 10; ++k) {
        const CoefficientSample sample = sampled_coefficient(100 + k, 1.0 / 16);
        const Mesh adapted = triangulate_adapted(sample.partition(), 0.125);
        const Mesh uniform = triangulate_uniform(0.125);
        for (const Mesh* mesh : {&adapted, &uniform}) {
            const CoefficientFn diffusion_only = [&](Point x, int r) {
                return PointCoefficients{sample.eval_a(x, r < 0 ? sample.partition().locate(x) : r), 0.0};
            };
            const DiscreteSystem sys = assemble(*mesh, diffusion_only, Expression(1.0), {false});
            double total = 0.0;
            for (double v : sys.M.values()) {
                total += v;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            const std::vector<double> ones(sys.dofs(), 1.0);
            double scale = 0.0;
            for (double v : sys.A.values()) {
                scale = std::max(scale, std::abs(v));
            }
            for (double r : spmv(sys.A, ones)) {
                CHECK(std::abs(r) <= 1e-12 * scale);
            }
            for (int i = 0; i < sys.M.rows(); ++i) {
                for (int q = sys.M.row_offsets()[i]; q < sys.M.row_offsets()[i + 1]; ++q) {
                    CHECK(sys.M.values()[q] == sys.M.coeff(sys.M.col_indices()[q], i));
                }
            }
            double load = 0.0;
            for (double v : sys.load(0.0)) {
                load += v;
            }
            CHECK(load == doctest::Approx(1.0).epsilon(1e-12));
        }
        const DiscreteSystem reduced = assemble(adapted, sample, Expression(1.0));
        CHECK(reduced.dofs() == adapted.interior_vertex_count());
    }
}

TEST_CASE("initial interpolation") {
    const Mesh m = triangulate_uniform(std::sqrt(2.0) / 4);
    const DiscreteSystem sys = assemble(m, kUnit, Expression(0.0));
    for (double c : interpolate_initial(sys, Expression(0.0))) {
        CHECK(c == 0.0);
    }
    const std::vector<double> c0 = interpolate_initial(sys, Expression::parse("0.1*sin(pi*x)*sin(pi*y)"));
    const std::vector<double> nodal = sys.to_nodal(c0);
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        if (m.vertices[v] == Point{0.5, 0.5}) {
            CHECK(nodal[v] == doctest::Approx(0.1).epsilon(1e-15));
        }
    }
    const Trajectory traj = backward_euler(sys, interpolate_initial(sys, Expression::parse("x")), 1.0, 0.5);
    const std::vector<double> at0 = sys.to_nodal(traj.at(0.0));
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        if (!m.boundary[v]) {
            CHECK(at0[v] == m.vertices[v].x);
        }
    }
}

TEST_CASE("time grid and trajectory interpolation") {
    const TimeGrid g = make_time_grid(1.0, 0.3);
    CHECK(g.steps == 4);
    CHECK(g.dt == 0.25);
    CHECK(make_time_grid(1.0, 1.0 / 16).steps == 16);
    CHECK(make_time_grid(1.0, std::ldexp(1.0 / 16, -5)).steps == 512);
    CHECK_THROWS_AS(make_time_grid(1.0, 0.0), ConfigError);
    Trajectory t;
    t.grid = make_time_grid(1.0, 0.5);
    t.coefficients = {{0.0}, {1.0}, {4.0}};
    CHECK(t.at(0.25)[0] == doctest::Approx(0.5));
    CHECK(t.at(0.75)[0] == doctest::Approx(2.5));
    CHECK(t.at(1.0)[0] == 4.0);
}

TEST_CASE("zero data gives a zero trajectory") {
    const Mesh m = triangulate_uniform(0.2);
    const DiscreteSystem sys = assemble(m, kUnit, Expression(0.0));
    const Trajectory traj = backward_euler(sys, std::vector<double>(sys.dofs(), 0.0), 1.0, 0.1);
    CHECK(traj.coefficients.size() == 11);
    for (const auto& c : traj.coefficients) {
        for (double v : c) {
            CHECK(v == 0.0);
        }
    }
}

TEST_CASE("heat equation against the separable solution") {
    const int m = 32;  // h = sqrt(2)/32
    const Mesh mesh = triangulate_uniform(std::sqrt(2.0) / m);
    const DiscreteSystem sys = assemble(mesh, kUnit, Expression(0.0));
    const Expression u0 = Expression::parse("sin(pi*x)*sin(pi*y)");
    for (SolverKind kind : {SolverKind::direct_lu, SolverKind::bicgstab}) {
        const Trajectory traj = backward_euler(sys, interpolate_initial(sys, u0), 0.1, 1e-3, kind);
        const std::vector<double> nodal = sys.to_nodal(traj.coefficients.back());
        double worst = 0.0;
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            worst = std::max(worst, std::abs(nodal[v] - testing::heat_exact(mesh.vertices[v], 0.1)));
        }
        CHECK(worst <= 2e-2);
    }
}

TEST_CASE("energy decays without advection and source") {
    const CoefficientSample sample = sampled_coefficient(4, 1.0 / 16);
    const Mesh mesh = triangulate_adapted(sample.partition(), 0.1);
    const CoefficientFn diffusion_only = [&](Point x, int r) { return PointCoefficients{sample.eval_a(x, r), 0.0}; };
    const DiscreteSystem sys = assemble(mesh, diffusion_only, Expression(0.0));
    const Expression u0 = Expression::parse("x*(1-x)*y*(1-y)*exp(x)");
    for (double dt : {1.0, 0.1, 1e-3}) {
        const Trajectory traj = backward_euler(sys, interpolate_initial(sys, u0), 1.0, dt);
        for (std::size_t i = 1; i < traj.coefficients.size(); ++i) {
            REQUIRE(mass_norm(sys, traj.coefficients[i]) <= mass_norm(sys, traj.coefficients[i - 1]) * (1 + 1e-14));
        }
    }
}

TEST_CASE("quantity of interest") {
    const Mesh mesh = triangulate_uniform(std::sqrt(2.0) / 64);
    const QoISpec spec;
    const std::vector<double> ones(mesh.vertices.size(), 1.0);
    CHECK(spatial_qoi(mesh, ones, spec.weight) == doctest::Approx(kWeightIntegral).epsilon(2e-5));
    const DiscreteSystem full = assemble(mesh, kUnit, Expression(0.0), {false});
    Trajectory traj;
    traj.grid = make_time_grid(1.0, 0.5);
    traj.coefficients = {ones, ones, ones};
    CHECK(evaluate_qoi(traj, full, spec) == doctest::Approx(kWeightIntegral).epsilon(2e-5));
    std::vector<double> scaled(ones.size(), -2.5);
    traj.coefficients.back() = scaled;
    CHECK(evaluate_qoi(traj, full, spec) == doctest::Approx(-2.5 * spatial_qoi(mesh, ones, spec.weight)).epsilon(1e-12));
    traj.coefficients = {std::vector<double>(ones.size(), 0.0), ones, std::vector<double>(ones.size(), 2.0)};
    QoISpec integral = spec;
    integral.time_rule = TimeRule::time_integral;
    // u = 2t: the trapezoid rule is exact and the time integral is 1.
    CHECK(evaluate_qoi(traj, full, integral) == doctest::Approx(spatial_qoi(mesh, ones, spec.weight)).epsilon(1e-12));
    for (auto& c : traj.coefficients) {
        std::fill(c.begin(), c.end(), 0.0);
    }
    CHECK(evaluate_qoi(traj, full, spec) == 0.0);
}

TEST_CASE("degenerate pipeline reduces to the heat equation") {
    ProblemConfig problem;
    problem.T = 0.1;
    problem.f = Expression(0.0);
    problem.coefficients.b1 = Expression(0.0);
    problem.coefficients.b2 = Expression(0.0);
    const Partition partition = quadrangle_partition({0.37, 0.52, 0.61, 0.44});
    const CoefficientSample sample(GridField::constant(SampleGrid(1.0 / 64), 0.0), partition,
                                   JumpHeights{{0, 0, 0, 0}, {0, 1, 0, 2}}, problem.coefficients);
    const Discretization level{1.0 / 16, 1.0 / 64, 1e-3};
    const double psi = evaluate_path(sample, level, Method::adapted, problem);
    const Mesh mesh = triangulate_adapted(partition, level.h_bar);
    const DiscreteSystem sys = assemble(mesh, kUnit, Expression(0.0));
    const Trajectory traj =
        backward_euler(sys, interpolate_initial(sys, Expression::parse("sin(pi*x)*sin(pi*y)")), 0.1, 1e-3);
    const double oracle = evaluate_qoi(traj, sys, problem.qoi);
    CHECK(psi == doctest::Approx(0.1 * oracle).epsilon(1e-12));
    const double exact = 0.1 * std::exp(-2.0 * std::numbers::pi * std::numbers::pi * 0.1) * kWeightSinSinIntegral;
    CHECK(psi == doctest::Approx(exact).epsilon(2e-2));
}

TEST_CASE("solve_path is deterministic and finite") {
    const ProblemConfig problem;
    const Discretization level{0.25, 1.0 / 16, 1.0 / 16};
    const RandomStream omega = RandomStream(12345).child(std::uint64_t{0});
    const double a = solve_path(level, Method::adapted, omega, problem);
    const double b = solve_path(level, Method::adapted, omega, problem);
    CHECK(a == b);
    CHECK(std::isfinite(a));
    CHECK(a > 0.0);
    CHECK(a < 0.1);
    CHECK(solve_path(level, Method::nonadapted, omega, problem) != a);
}

TEST_CASE("level-0 regression values") {
    // Frozen from the first build; a change means the sampling or solver pipeline changed.
    const ProblemConfig problem;
    const Discretization level{0.25, 1.0 / 16, 1.0 / 16};
    const RandomStream omega = RandomStream(12345).child(std::uint64_t{0});
    CHECK(solve_path(level, Method::adapted, omega, problem) == doctest::Approx(0.0099452262432984471).epsilon(1e-10));
    CHECK(solve_path(level, Method::nonadapted, omega, problem) == doctest::Approx(0.010005997645429922).epsilon(1e-10));
}
}
