#pragma once

#include <memory>
#include <string>
#include <vector>

namespace jmlmc {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Compressed row storage with sorted, unique column indices per row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int rows, int cols);

    /// Duplicate (i, j) entries are summed. Throws ConfigError on out-of-range indices.
    static SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);
    static SparseMatrix from_triplets(int n, const std::vector<Triplet>& triplets) {
        return from_triplets(n, n, triplets);
    }
    static SparseMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    const std::vector<int>& row_offsets() const { return offsets_; }
    const std::vector<int>& col_indices() const { return cols_idx_; }
    const std::vector<double>& values() const { return values_; }

    /// Stored value at (i, j), zero if absent.
    double coeff(int i, int j) const;
    /// alpha * this + beta * other, same shape required.
    SparseMatrix combine(double alpha, const SparseMatrix& other, double beta) const;
    std::vector<std::vector<double>> to_dense() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> offsets_{0};
    std::vector<int> cols_idx_;
    std::vector<double> values_;
};

/// y = A x; throws ConfigError on a dimension mismatch.
std::vector<double> spmv(const SparseMatrix& A, const std::vector<double>& x);
double norm2(const std::vector<double>& v);

enum class SolverKind { direct_lu, bicgstab };
std::string to_string(SolverKind kind);
SolverKind solver_from_string(const std::string& name);

/// Prepared solver for repeated right-hand sides with one matrix.
/// Every solve checks ||A x - b|| <= tolerance * ||b|| and throws NumericalError,
/// quoting the achieved residual, when that fails.
class LinearSolver {
public:
    static constexpr double kTolerance = 1e-10;

    LinearSolver(const SparseMatrix& A, SolverKind kind = SolverKind::direct_lu);
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    std::vector<double> solve(const std::vector<double>& rhs) const;
    /// Relative residual of the last solve.
    double last_residual() const { return last_residual_; }
    int last_iterations() const { return last_iterations_; }

private:
    struct Factor;

    std::vector<double> bicgstab(const std::vector<double>& rhs) const;

    SparseMatrix A_;
    SolverKind kind_;
    std::unique_ptr<Factor> factor_;
    std::vector<double> inv_diag_;
    mutable double last_residual_ = 0.0;
    mutable int last_iterations_ = 0;
};

std::vector<double> solve(const SparseMatrix& A, const std::vector<double>& rhs,
                          SolverKind kind = SolverKind::direct_lu);

}  // namespace jmlmc
