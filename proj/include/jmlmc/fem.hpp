#pragma once

#include <functional>
#include <vector>

#include "jmlmc/jump_field.hpp"
#include "jmlmc/mesh.hpp"
#include "jmlmc/problem.hpp"
#include "jmlmc/random_field.hpp"
#include "jmlmc/rng.hpp"
#include "jmlmc/sparse.hpp"

namespace jmlmc {

struct PointCoefficients {
    double a = 1.0;
    double b = 0.0;
};
/// Coefficient values at a point of a known region (region is -1 when unknown).
using CoefficientFn = std::function<PointCoefficients(Point x, int region)>;

struct AssemblyOptions {
    bool eliminate_dirichlet = true;
};

/// P1 system of one sample on one mesh. Rows are test functions, columns trial
/// functions. Keeps a pointer to the mesh, which must outlive it.
class DiscreteSystem {
public:
    SparseMatrix A;  ///< diffusion + advection, one-point rule
    SparseMatrix M;  ///< exact P1 mass
    std::vector<int> free_dofs;      ///< vertex index of every unknown
    std::vector<int> dof_of_vertex;  ///< -1 for eliminated boundary vertices

    const Mesh& mesh() const { return *mesh_; }
    std::size_t dofs() const { return free_dofs.size(); }
    const Expression& source() const { return f_; }

    /// Load vector F(t): f at each centroid times |K|/3 for each vertex.
    std::vector<double> load(double t) const;
    /// Nodal values on all vertices (zero on eliminated ones).
    std::vector<double> to_nodal(const std::vector<double>& coeffs) const;

private:
    friend DiscreteSystem assemble(const Mesh&, const CoefficientFn&, const Expression&, AssemblyOptions);

    const Mesh* mesh_ = nullptr;
    Expression f_;
};

DiscreteSystem assemble(const Mesh& mesh, const CoefficientFn& coefficients, const Expression& f,
                        AssemblyOptions options = {});
DiscreteSystem assemble(const Mesh& mesh, const CoefficientSample& sample, const Expression& f,
                        AssemblyOptions options = {});

/// Nodal interpolation of u0 on the unknowns of `system`.
std::vector<double> interpolate_initial(const DiscreteSystem& system, const Expression& u0);

/// Equidistant grid t_i = i T / n with the smallest n such that T / n <= dt.
struct TimeGrid {
    int steps = 0;
    double dt = 0.0;
    double T = 0.0;
    double time(int i) const { return i == steps ? T : i * dt; }
};
TimeGrid make_time_grid(double T, double dt);

struct Trajectory {
    TimeGrid grid;
    std::vector<std::vector<double>> coefficients;  ///< c_0 .. c_n on the unknowns

    /// Linear interpolation in time between stored steps.
    std::vector<double> at(double t) const;
};

/// (M + dt A) c_i = dt F(t_i) + M c_{i-1}, one factorization for all steps.
Trajectory backward_euler(const DiscreteSystem& system, std::vector<double> c0, double T, double dt,
                          SolverKind solver = SolverKind::direct_lu);

/// Integral of w times the P1 function with the given nodal values, centroid rule per triangle.
double spatial_qoi(const Mesh& mesh, const std::vector<double>& nodal, const Expression& weight);
double evaluate_qoi(const Trajectory& trajectory, const DiscreteSystem& system, const QoISpec& spec);

enum class Method { adapted, nonadapted };
const char* to_string(Method method);

/// Mesh threshold, field lattice spacing and time step of one level.
struct Discretization {
    double h_bar = 0.25;
    double eps = 1.0 / 16.0;
    double dt = 1.0 / 16.0;
};

/// Draws partition, jump heights and (unless problem.zero_field) the Gaussian
/// field on the embedding's lattice, each from its own substream of omega.
CoefficientSample sample_coefficient(const CirculantEmbedding& embedding, const RandomStream& omega,
                                     const ProblemConfig& problem);

/// Mesh, assemble, time-step and evaluate Psi for one realization. `uniform`
/// may supply a prebuilt structured mesh for the non-adapted method.
double evaluate_path(const CoefficientSample& sample, const Discretization& level, Method method,
                     const ProblemConfig& problem, const Mesh* uniform = nullptr);

/// Full pipeline for one realization at one level; deterministic given omega.
double solve_path(const Discretization& level, Method method, const RandomStream& omega,
                  const ProblemConfig& problem);

}  // namespace jmlmc
