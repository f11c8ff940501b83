#pragma once

#include "jmlmc/expression.hpp"
#include "jmlmc/jump_field.hpp"
#include "jmlmc/random_field.hpp"
#include "jmlmc/sparse.hpp"

namespace jmlmc {

enum class TimeRule { terminal, time_integral };

/// Psi(u) = integral of w(x) u(x, T) dx, or its trapezoidal time integral.
struct QoISpec {
    Expression weight = Expression::parse("exp(-0.25*((x-0.25)^2+(y-0.75)^2))");
    TimeRule time_rule = TimeRule::terminal;

    friend bool operator==(const QoISpec&, const QoISpec&) = default;
};

/// Physical problem on the unit square with homogeneous Dirichlet data.
struct ProblemConfig {
    double T = 1.0;
    Expression u0 = Expression::parse("0.1*sin(pi*x)*sin(pi*y)");
    Expression f{1.0};
    CoefficientModel coefficients;
    CovarianceSpec covariance;
    JumpLawTable jumps;
    QoISpec qoi;
    SolverKind solver = SolverKind::direct_lu;
    /// Forces W = 0 (deterministic field part), for oracle problems.
    bool zero_field = false;

    void validate() const;
};

}  // namespace jmlmc
