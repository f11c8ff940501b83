#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "jmlmc/geometry.hpp"
#include "jmlmc/rng.hpp"

namespace jmlmc {

/// Parameters of the Matérn covariance kernel.
struct CovarianceSpec {
    double nu = 1.5;      ///< smoothness
    double sigma2 = 0.25; ///< variance
    double chi = 0.1;     ///< correlation length

    void validate() const;
    friend bool operator==(const CovarianceSpec&, const CovarianceSpec&) = default;
};

/// Matérn covariance at distance r; equals sigma2 at r = 0.
double matern_cov(double r, const CovarianceSpec& spec);

/// Regular (m+1) x (m+1) lattice on the closed unit square with m = ceil(1/eps),
/// so that the lattice spacing 1/m never exceeds the requested eps.
class SampleGrid {
public:
    SampleGrid(double eps, int level_tag = 0);
    static SampleGrid with_cells(int cells, int level_tag = 0);

    int cells() const { return cells_; }
    int points_per_side() const { return cells_ + 1; }
    std::size_t size() const {
        return static_cast<std::size_t>(points_per_side()) * static_cast<std::size_t>(points_per_side());
    }
    double spacing() const { return 1.0 / cells_; }
    int level_tag() const { return level_tag_; }

    /// Linear index of lattice point (i, j), i along x.
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(points_per_side()) + static_cast<std::size_t>(i);
    }
    Point point(int i, int j) const { return {i * spacing(), j * spacing()}; }

    bool coarsenable() const { return cells_ % 2 == 0 && cells_ >= 2; }
    SampleGrid coarsened() const;

    friend bool operator==(const SampleGrid& a, const SampleGrid& b) { return a.cells_ == b.cells_; }

private:
    SampleGrid() = default;
    int cells_ = 1;
    int level_tag_ = 0;
};

/// Lattice values with piecewise-linear interpolation on the triangulation that
/// splits every cell along its lower-left to upper-right diagonal.
class GridField {
public:
    GridField(SampleGrid grid, std::vector<double> values);

    static GridField constant(SampleGrid grid, double value);

    const SampleGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double value(int i, int j) const { return values_[grid_.index(i, j)]; }

    /// Piecewise-linear interpolant; throws ConfigError outside the closed unit square.
    double interpolate(Point x) const;

    /// Restriction to the sub-lattice of doubled spacing.
    GridField coarsen_nested() const;

private:
    SampleGrid grid_;
    std::vector<double> values_;
};

/// Eigenvalues of the block-circulant extension of the lattice covariance matrix,
/// ready for FFT-based exact sampling. Immutable after construction and safe to
/// share between threads.
/// Version string of the linked FFT library.
std::string fftw_version_string();

class CirculantEmbedding {
public:
    CirculantEmbedding(const SampleGrid& grid, const CovarianceSpec& spec);
    ~CirculantEmbedding();
    CirculantEmbedding(const CirculantEmbedding&) = delete;
    CirculantEmbedding& operator=(const CirculantEmbedding&) = delete;

    const SampleGrid& grid() const { return grid_; }
    const CovarianceSpec& spec() const { return spec_; }
    /// Periodic grid size per direction divided by the lattice cell count.
    int padding_factor() const { return padding_; }
    int embedding_size() const { return size_; }
    /// Eigenvalues (after clipping), size embedding_size()^2, row-major in (k2, k1).
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    /// Smallest eigenvalue before clipping.
    double min_raw_eigenvalue() const { return min_raw_; }

    /// One realization of the zero-mean Gaussian field on the lattice.
    GridField sample(RandomStream& rng) const;

private:
    struct FftPlan;

    SampleGrid grid_;
    CovarianceSpec spec_;
    int padding_ = 2;
    int size_ = 0;
    double min_raw_ = 0.0;
    std::vector<double> eigenvalues_;
    std::vector<double> amplitudes_;
    std::unique_ptr<FftPlan> plan_;
};

/// Periodic first row of the embedding: covariance at wrapped lattice offsets.
std::vector<double> embedding_first_row(const SampleGrid& grid, const CovarianceSpec& spec, int size);

}  // namespace jmlmc
