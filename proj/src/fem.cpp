#include "jmlmc/fem.hpp"

#include <algorithm>
#include <cmath>

#include "jmlmc/error.hpp"

namespace jmlmc {

namespace {

// Re-throws library errors with the pipeline stage prefixed.
template <typename F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(stage) + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(stage) + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(std::string(stage) + ": " + e.what());
    }
}

}  // namespace

const char* to_string(Method method) { return method == Method::adapted ? "adapted" : "nonadapted"; }

DiscreteSystem assemble(const Mesh& mesh, const CoefficientFn& coefficients, const Expression& f,
                        AssemblyOptions options) {
    DiscreteSystem sys;
    sys.mesh_ = &mesh;
    sys.f_ = f;
    const std::size_t nv = mesh.vertices.size();
    sys.dof_of_vertex.assign(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
        if (!options.eliminate_dirichlet || !mesh.boundary[v]) {
            sys.dof_of_vertex[v] = static_cast<int>(sys.free_dofs.size());
            sys.free_dofs.push_back(static_cast<int>(v));
        }
    }
    const int n = static_cast<int>(sys.free_dofs.size());
    std::vector<Triplet> a_trip;
    std::vector<Triplet> m_trip;
    a_trip.reserve(9 * mesh.triangles.size());
    m_trip.reserve(9 * mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Point p[3] = {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
        const double area = 0.5 * orient2d(p[0], p[1], p[2]);
        if (!(area > 0.0)) {
            throw NumericalError("assemble: degenerate or inverted triangle " + std::to_string(t));
        }
        Point grad[3];
        for (int i = 0; i < 3; ++i) {
            const Point a = p[(i + 1) % 3];
            const Point b = p[(i + 2) % 3];
            grad[i] = {(a.y - b.y) / (2.0 * area), (b.x - a.x) / (2.0 * area)};
        }
        const Point xc = mesh.centroid(t);
        const int region = mesh.adapted() ? mesh.region_of_triangle[t] : -1;
        const PointCoefficients c = coefficients(xc, region);
        for (int k = 0; k < 3; ++k) {
            const int row = sys.dof_of_vertex[tri[k]];
            if (row < 0) {
                continue;
            }
            for (int j = 0; j < 3; ++j) {
                const int col = sys.dof_of_vertex[tri[j]];
                if (col < 0) {
                    continue;
                }
                const double diffusion = c.a * dot(grad[j], grad[k]);
                const double advection = c.b * (grad[j].x + grad[j].y) / 3.0;
                a_trip.push_back({row, col, (diffusion + advection) * area});
                m_trip.push_back({row, col, area / 12.0 * (j == k ? 2.0 : 1.0)});
            }
        }
    }
    sys.A = SparseMatrix::from_triplets(n, a_trip);
    sys.M = SparseMatrix::from_triplets(n, m_trip);
    return sys;
}

DiscreteSystem assemble(const Mesh& mesh, const CoefficientSample& sample, const Expression& f,
                        AssemblyOptions options) {
    const CoefficientFn fn = [&sample](Point x, int region) {
        if (region < 0) {
            region = sample.partition().locate(x);
        }
        const double a = sample.eval_a(x, region);
        return PointCoefficients{a, sample.model().b_from_a(x, a)};
    };
    return assemble(mesh, fn, f, options);
}

std::vector<double> DiscreteSystem::load(double t) const {
    std::vector<double> F(dofs(), 0.0);
    const Mesh& m = *mesh_;
    for (std::size_t k = 0; k < m.triangles.size(); ++k) {
        const Point xc = m.centroid(k);
        const double share = f_(xc.x, xc.y, t) * m.triangle_area(k) / 3.0;
        for (int v : m.triangles[k]) {
            const int d = dof_of_vertex[v];
            if (d >= 0) {
                F[d] += share;
            }
        }
    }
    return F;
}

std::vector<double> DiscreteSystem::to_nodal(const std::vector<double>& coeffs) const {
    std::vector<double> nodal(mesh_->vertices.size(), 0.0);
    for (std::size_t d = 0; d < free_dofs.size(); ++d) {
        nodal[free_dofs[d]] = coeffs[d];
    }
    return nodal;
}

std::vector<double> interpolate_initial(const DiscreteSystem& system, const Expression& u0) {
    std::vector<double> c(system.dofs());
    for (std::size_t d = 0; d < c.size(); ++d) {
        const Point p = system.mesh().vertices[system.free_dofs[d]];
        c[d] = u0(p.x, p.y, 0.0);
    }
    return c;
}

TimeGrid make_time_grid(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0) || !std::isfinite(T) || !std::isfinite(dt)) {
        throw ConfigError("time grid: T and dt must be positive");
    }
    TimeGrid g;
    g.T = T;
    g.steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    g.dt = T / g.steps;
    return g;
}

std::vector<double> Trajectory::at(double t) const {
    if (t <= 0.0) {
        return coefficients.front();
    }
    if (t >= grid.T) {
        return coefficients.back();
    }
    const double s = t / grid.dt;
    const int i = std::min(static_cast<int>(std::floor(s)), grid.steps - 1);
    const double w = s - i;
    std::vector<double> c(coefficients[i].size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = (1.0 - w) * coefficients[i][k] + w * coefficients[i + 1][k];
    }
    return c;
}

Trajectory backward_euler(const DiscreteSystem& system, std::vector<double> c0, double T, double dt,
                          SolverKind solver) {
    if (c0.size() != system.dofs()) {
        throw ConfigError("backward_euler: initial vector has the wrong length");
    }
    Trajectory traj;
    traj.grid = make_time_grid(T, dt);
    const double step = traj.grid.dt;
    traj.coefficients.reserve(static_cast<std::size_t>(traj.grid.steps) + 1);
    traj.coefficients.push_back(std::move(c0));
    if (system.dofs() == 0) {
        traj.coefficients.resize(static_cast<std::size_t>(traj.grid.steps) + 1);
        return traj;
    }
    const LinearSolver lhs(system.M.combine(1.0, system.A, step), solver);
    const bool steady_load = !system.source().time_dependent();
    std::vector<double> F;
    bool have_load = false;
    for (int i = 1; i <= traj.grid.steps; ++i) {
        if (!have_load || !steady_load) {
            F = system.load(traj.grid.time(i));
        }
        std::vector<double> rhs = spmv(system.M, traj.coefficients.back());
        for (std::size_t k = 0; k < rhs.size(); ++k) {
            rhs[k] += step * F[k];
        }
        try {
            traj.coefficients.push_back(lhs.solve(rhs));
        } catch (const NumericalError& e) {
            throw NumericalError("time step " + std::to_string(i) + ": " + e.what());
        }
        have_load = true;
    }
    return traj;
}

double spatial_qoi(const Mesh& mesh, const std::vector<double>& nodal, const Expression& weight) {
    double q = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Point xc = mesh.centroid(t);
        const double u = (nodal[tri[0]] + nodal[tri[1]] + nodal[tri[2]]) / 3.0;
        q += weight(xc.x, xc.y, 0.0) * u * mesh.triangle_area(t);
    }
    return q;
}

double evaluate_qoi(const Trajectory& trajectory, const DiscreteSystem& system, const QoISpec& spec) {
    // The functional is linear, so it reduces to one weight per unknown.
    const Mesh& mesh = system.mesh();
    std::vector<double> w(system.dofs(), 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Point xc = mesh.centroid(t);
        const double share = spec.weight(xc.x, xc.y, 0.0) * mesh.triangle_area(t) / 3.0;
        for (int v : mesh.triangles[t]) {
            const int d = system.dof_of_vertex[v];
            if (d >= 0) {
                w[d] += share;
            }
        }
    }
    auto functional = [&w](const std::vector<double>& c) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            s += w[k] * c[k];
        }
        return s;
    };
    if (spec.time_rule == TimeRule::terminal) {
        return functional(trajectory.coefficients.back());
    }
    double integral = 0.0;
    double prev = functional(trajectory.coefficients.front());
    for (int i = 1; i <= trajectory.grid.steps; ++i) {
        const double cur = functional(trajectory.coefficients[i]);
        integral += 0.5 * trajectory.grid.dt * (prev + cur);
        prev = cur;
    }
    return integral;
}

CoefficientSample sample_coefficient(const CirculantEmbedding& embedding, const RandomStream& omega,
                                     const ProblemConfig& problem) {
    RandomStream partition_rng = omega.child(StreamPurpose::partition);
    RandomStream jump_rng = omega.child(StreamPurpose::jumps);
    Partition partition = sample_partition_quadrangles(partition_rng);
    JumpHeights jumps = sample_jump_heights(partition, problem.jumps, jump_rng);
    GridField field = GridField::constant(embedding.grid(), 0.0);
    if (!problem.zero_field) {
        RandomStream field_rng = omega.child(StreamPurpose::field);
        field = embedding.sample(field_rng);
    }
    return CoefficientSample(std::move(field), std::move(partition), std::move(jumps), problem.coefficients);
}

double evaluate_path(const CoefficientSample& sample, const Discretization& level, Method method,
                     const ProblemConfig& problem, const Mesh* uniform) {
    Mesh own;
    const Mesh* mesh = uniform;
    if (method == Method::adapted) {
        own = staged("mesh", [&] { return triangulate_adapted(sample.partition(), level.h_bar); });
        mesh = &own;
    } else if (mesh == nullptr) {
        own = triangulate_uniform(level.h_bar);
        mesh = &own;
    }
    const DiscreteSystem sys = staged("assemble", [&] { return assemble(*mesh, sample, problem.f); });
    const Trajectory traj = staged("time stepping", [&] {
        return backward_euler(sys, interpolate_initial(sys, problem.u0), problem.T, level.dt, problem.solver);
    });
    return evaluate_qoi(traj, sys, problem.qoi);
}

double solve_path(const Discretization& level, Method method, const RandomStream& omega,
                  const ProblemConfig& problem) {
    const SampleGrid grid(level.eps);
    const CirculantEmbedding embedding = staged("field", [&] { return CirculantEmbedding(grid, problem.covariance); });
    const CoefficientSample sample = staged("sample", [&] { return sample_coefficient(embedding, omega, problem); });
    return evaluate_path(sample, level, method, problem);
}

}  // namespace jmlmc
