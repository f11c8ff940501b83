#include "jmlmc/sparse.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "jmlmc/error.hpp"

namespace jmlmc {

SparseMatrix::SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {
    if (rows < 0 || cols < 0) {
        throw ConfigError("sparse matrix: negative dimension");
    }
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
    SparseMatrix m(rows, cols);
    for (const Triplet& t : triplets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
            throw ConfigError("sparse matrix: triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                              ") outside " + std::to_string(rows) + " x " + std::to_string(cols));
        }
    }
    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), 0);
    // Stable sort keeps the summation order of duplicates equal to input order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return triplets[a].row != triplets[b].row ? triplets[a].row < triplets[b].row
                                                  : triplets[a].col < triplets[b].col;
    });
    m.cols_idx_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    int prev_row = -1;
    int prev_col = -1;
    for (std::size_t k : order) {
        const Triplet& t = triplets[k];
        if (t.row == prev_row && t.col == prev_col) {
            m.values_.back() += t.value;
            continue;
        }
        m.cols_idx_.push_back(t.col);
        m.values_.push_back(t.value);
        ++m.offsets_[static_cast<std::size_t>(t.row) + 1];
        prev_row = t.row;
        prev_col = t.col;
    }
    std::partial_sum(m.offsets_.begin(), m.offsets_.end(), m.offsets_.begin());
    return m;
}

SparseMatrix SparseMatrix::identity(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 1.0});
    }
    return from_triplets(n, t);
}

double SparseMatrix::coeff(int i, int j) const {
    const auto begin = cols_idx_.begin() + offsets_[static_cast<std::size_t>(i)];
    const auto end = cols_idx_.begin() + offsets_[static_cast<std::size_t>(i) + 1];
    const auto it = std::lower_bound(begin, end, j);
    return it != end && *it == j ? values_[static_cast<std::size_t>(it - cols_idx_.begin())] : 0.0;
}

SparseMatrix SparseMatrix::combine(double alpha, const SparseMatrix& other, double beta) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw ConfigError("sparse matrix: combine with mismatched shapes");
    }
    std::vector<Triplet> t;
    t.reserve(nnz() + other.nnz());
    for (int i = 0; i < rows_; ++i) {
        for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            t.push_back({i, cols_idx_[k], alpha * values_[k]});
        }
        for (int k = other.offsets_[i]; k < other.offsets_[i + 1]; ++k) {
            t.push_back({i, other.cols_idx_[k], beta * other.values_[k]});
        }
    }
    return from_triplets(rows_, cols_, t);
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
    std::vector<std::vector<double>> d(static_cast<std::size_t>(rows_), std::vector<double>(static_cast<std::size_t>(cols_), 0.0));
    for (int i = 0; i < rows_; ++i) {
        for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            d[i][cols_idx_[k]] = values_[k];
        }
    }
    return d;
}

std::vector<double> spmv(const SparseMatrix& A, const std::vector<double>& x) {
    if (x.size() != static_cast<std::size_t>(A.cols())) {
        throw ConfigError("spmv: vector of length " + std::to_string(x.size()) + " for " + std::to_string(A.cols()) +
                          " columns");
    }
    const auto& off = A.row_offsets();
    const auto& col = A.col_indices();
    const auto& val = A.values();
    std::vector<double> y(static_cast<std::size_t>(A.rows()), 0.0);
    for (int i = 0; i < A.rows(); ++i) {
        double s = 0.0;
        for (int k = off[i]; k < off[i + 1]; ++k) {
            s += val[k] * x[col[k]];
        }
        y[i] = s;
    }
    return y;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

std::string to_string(SolverKind kind) { return kind == SolverKind::direct_lu ? "lu" : "bicgstab"; }

SolverKind solver_from_string(const std::string& name) {
    if (name == "lu") {
        return SolverKind::direct_lu;
    }
    if (name == "bicgstab") {
        return SolverKind::bicgstab;
    }
    throw ConfigError("unknown solver '" + name + "' (expected lu or bicgstab)");
}

struct LinearSolver::Factor {
    Eigen::SparseMatrix<double> matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

LinearSolver::LinearSolver(const SparseMatrix& A, SolverKind kind) : A_(A), kind_(kind) {
    if (A.rows() != A.cols()) {
        throw ConfigError("linear solve: matrix is not square");
    }
    if (kind_ == SolverKind::direct_lu) {
        factor_ = std::make_unique<Factor>();
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(A.nnz());
        for (int i = 0; i < A.rows(); ++i) {
            for (int k = A.row_offsets()[i]; k < A.row_offsets()[i + 1]; ++k) {
                t.emplace_back(i, A.col_indices()[k], A.values()[k]);
            }
        }
        factor_->matrix.resize(A.rows(), A.cols());
        factor_->matrix.setFromTriplets(t.begin(), t.end());
        factor_->lu.compute(factor_->matrix);
        if (factor_->lu.info() != Eigen::Success) {
            throw NumericalError("linear solve: LU factorization failed (" + factor_->lu.lastErrorMessage() + ")");
        }
    } else {
        inv_diag_.assign(static_cast<std::size_t>(A.rows()), 1.0);
        for (int i = 0; i < A.rows(); ++i) {
            const double d = A.coeff(i, i);
            if (d != 0.0) {
                inv_diag_[i] = 1.0 / d;
            }
        }
    }
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

std::vector<double> LinearSolver::solve(const std::vector<double>& rhs) const {
    if (rhs.size() != static_cast<std::size_t>(A_.rows())) {
        throw ConfigError("linear solve: right-hand side length mismatch");
    }
    const double bnorm = norm2(rhs);
    last_iterations_ = 0;
    if (bnorm == 0.0) {
        last_residual_ = 0.0;
        return std::vector<double>(rhs.size(), 0.0);
    }
    std::vector<double> x;
    if (kind_ == SolverKind::direct_lu) {
        const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
        Eigen::VectorXd sol = factor_->lu.solve(b);
        // A couple of refinement sweeps recover the last digits on ill-conditioned steps.
        for (int sweep = 0; sweep < 3; ++sweep) {
            const Eigen::VectorXd r = b - factor_->matrix * sol;
            if (r.norm() <= 0.1 * kTolerance * bnorm) {
                break;
            }
            sol += factor_->lu.solve(r);
            ++last_iterations_;
        }
        x.assign(sol.data(), sol.data() + sol.size());
    } else {
        x = bicgstab(rhs);
    }
    std::vector<double> r = spmv(A_, x);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = rhs[i] - r[i];
    }
    last_residual_ = norm2(r) / bnorm;
    if (!(last_residual_ <= kTolerance)) {
        throw NumericalError("linear solve (" + to_string(kind_) + "): relative residual " +
                             std::to_string(last_residual_) + " exceeds " + std::to_string(kTolerance));
    }
    return x;
}

// Jacobi-preconditioned BiCGStab.
std::vector<double> LinearSolver::bicgstab(const std::vector<double>& b) const {
    const std::size_t n = b.size();
    const double bnorm = norm2(b);
    auto dotv = [](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            s += u[i] * v[i];
        }
        return s;
    };
    auto precond = [this](const std::vector<double>& v) {
        std::vector<double> z(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            z[i] = inv_diag_[i] * v[i];
        }
        return z;
    };
    std::vector<double> x(n, 0.0);
    std::vector<double> r = b;
    const std::vector<double> r_hat = r;
    std::vector<double> p(n, 0.0);
    std::vector<double> v(n, 0.0);
    double rho = 1.0;
    double alpha = 1.0;
    double omega = 1.0;
    const int max_iter = static_cast<int>(10 * n);
    for (int it = 1; it <= max_iter; ++it) {
        const double rho_new = dotv(r_hat, r);
        if (rho_new == 0.0 || omega == 0.0) {
            throw NumericalError("linear solve (bicgstab): breakdown at iteration " + std::to_string(it) +
                                 ", relative residual " + std::to_string(norm2(r) / bnorm));
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        const std::vector<double> p_hat = precond(p);
        v = spmv(A_, p_hat);
        alpha = rho / dotv(r_hat, v);
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = r[i] - alpha * v[i];
        }
        if (norm2(s) <= 0.1 * kTolerance * bnorm) {
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p_hat[i];
            }
            last_iterations_ = it;
            return x;
        }
        const std::vector<double> s_hat = precond(s);
        const std::vector<double> t = spmv(A_, s_hat);
        const double tt = dotv(t, t);
        omega = tt > 0.0 ? dotv(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        last_iterations_ = it;
        if (norm2(r) <= 0.1 * kTolerance * bnorm) {
            return x;
        }
    }
    return x;
}

std::vector<double> solve(const SparseMatrix& A, const std::vector<double>& rhs, SolverKind kind) {
    return LinearSolver(A, kind).solve(rhs);
}

}  // namespace jmlmc
