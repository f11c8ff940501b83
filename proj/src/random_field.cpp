#include "jmlmc/random_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "jmlmc/error.hpp"

namespace jmlmc {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& fftw_planner_mutex() {
    static std::mutex mutex;
    return mutex;
}

constexpr int kMinPadding = 2;
constexpr int kMaxPadding = 8;
// Eigenvalues above -kRoundoff * max are treated as FFT roundoff of zero.
constexpr double kRoundoff = 1e-10;
// After maximal padding, negative eigenvalues smaller than this are clipped.
constexpr double kClip = 1e-8;

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) {
            throw NumericalError("circulant embedding: FFT buffer allocation failed");
        }
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* data;
};

}  // namespace

std::string fftw_version_string() { return fftw_version; }

void CovarianceSpec::validate() const {
    if (!(nu > 0.0) || !(sigma2 > 0.0) || !(chi > 0.0) || !std::isfinite(nu) || !std::isfinite(sigma2) ||
        !std::isfinite(chi)) {
        throw ConfigError("covariance: nu, sigma2 and chi must be finite and strictly positive");
    }
}

double matern_cov(double r, const CovarianceSpec& spec) {
    if (!std::isfinite(r) || r < 0.0) {
        throw ConfigError("matern_cov: distance must be finite and non-negative");
    }
    if (r == 0.0) {
        return spec.sigma2;
    }
    const double s = std::sqrt(2.0 * spec.nu) * r / spec.chi;
    if (s > 700.0) {
        return 0.0;
    }
    const double scale = std::pow(2.0, 1.0 - spec.nu) / std::tgamma(spec.nu);
    return spec.sigma2 * scale * std::pow(s, spec.nu) * std::cyl_bessel_k(spec.nu, s);
}

SampleGrid::SampleGrid(double eps, int level_tag) : level_tag_(level_tag) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw ConfigError("sample grid: spacing must be positive");
    }
    // Relative slack absorbs rounding in eps = h^2 style inputs.
    const double cells = std::ceil(1.0 / eps * (1.0 - 1e-12));
    if (cells > 1 << 14) {
        throw ConfigError("sample grid: spacing " + std::to_string(eps) + " is too small");
    }
    cells_ = std::max(1, static_cast<int>(cells));
}

SampleGrid SampleGrid::with_cells(int cells, int level_tag) {
    if (cells < 1) {
        throw ConfigError("sample grid: need at least one cell");
    }
    SampleGrid g;
    g.cells_ = cells;
    g.level_tag_ = level_tag;
    return g;
}

SampleGrid SampleGrid::coarsened() const {
    if (!coarsenable()) {
        throw ConfigError("sample grid with " + std::to_string(cells_) + " cells is not coarsenable");
    }
    return with_cells(cells_ / 2, level_tag_ - 1);
}

GridField::GridField(SampleGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("grid field: value count does not match lattice size");
    }
}

GridField GridField::constant(SampleGrid grid, double value) {
    return GridField(grid, std::vector<double>(grid.size(), value));
}

double GridField::interpolate(Point x) const {
    if (!in_unit_square(x)) {
        throw ConfigError("interpolate: point outside the unit square");
    }
    const int m = grid_.cells();
    const double sx = std::clamp(x.x, 0.0, 1.0) * m;
    const double sy = std::clamp(x.y, 0.0, 1.0) * m;
    const int i = std::min(static_cast<int>(sx), m - 1);
    const int j = std::min(static_cast<int>(sy), m - 1);
    const double u = sx - i;
    const double v = sy - j;
    const double f00 = value(i, j);
    const double f11 = value(i + 1, j + 1);
    if (u >= v) {
        const double f10 = value(i + 1, j);
        return f00 + u * (f10 - f00) + v * (f11 - f10);
    }
    const double f01 = value(i, j + 1);
    return f00 + v * (f01 - f00) + u * (f11 - f01);
}

GridField GridField::coarsen_nested() const {
    const SampleGrid coarse = grid_.coarsened();
    std::vector<double> out(coarse.size());
    for (int j = 0; j < coarse.points_per_side(); ++j) {
        for (int i = 0; i < coarse.points_per_side(); ++i) {
            out[coarse.index(i, j)] = value(2 * i, 2 * j);
        }
    }
    return GridField(coarse, std::move(out));
}

std::vector<double> embedding_first_row(const SampleGrid& grid, const CovarianceSpec& spec, int size) {
    const double h = grid.spacing();
    std::vector<double> row(static_cast<std::size_t>(size) * size);
    // Covariance depends on |offset| only; tabulate one quadrant and mirror.
    const int half = size / 2;
    std::vector<double> quadrant(static_cast<std::size_t>(half + 1) * (half + 1));
    for (int k2 = 0; k2 <= half; ++k2) {
        for (int k1 = 0; k1 <= half; ++k1) {
            quadrant[static_cast<std::size_t>(k2) * (half + 1) + k1] = matern_cov(h * std::hypot(k1, k2), spec);
        }
    }
    for (int k2 = 0; k2 < size; ++k2) {
        const int d2 = std::min(k2, size - k2);
        for (int k1 = 0; k1 < size; ++k1) {
            const int d1 = std::min(k1, size - k1);
            row[static_cast<std::size_t>(k2) * size + k1] = quadrant[static_cast<std::size_t>(d2) * (half + 1) + d1];
        }
    }
    return row;
}

struct CirculantEmbedding::FftPlan {
    FftPlan(int n) {
        FftwBuffer scratch(static_cast<std::size_t>(n) * n);
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(n, n, scratch.data, scratch.data, FFTW_FORWARD, FFTW_ESTIMATE);
        if (plan == nullptr) {
            throw NumericalError("circulant embedding: FFT planning failed");
        }
    }
    ~FftPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_plan plan;
};

CirculantEmbedding::CirculantEmbedding(const SampleGrid& grid, const CovarianceSpec& spec)
    : grid_(grid), spec_(spec) {
    spec_.validate();
    for (int padding = kMinPadding; padding <= kMaxPadding; padding *= 2) {
        const int n = padding * grid_.cells();
        auto plan = std::make_unique<FftPlan>(n);
        const std::size_t total = static_cast<std::size_t>(n) * n;
        const std::vector<double> row = embedding_first_row(grid_, spec_, n);
        FftwBuffer buffer(total);
        for (std::size_t k = 0; k < total; ++k) {
            buffer.data[k][0] = row[k];
            buffer.data[k][1] = 0.0;
        }
        fftw_execute_dft(plan->plan, buffer.data, buffer.data);
        std::vector<double> lambda(total);
        for (std::size_t k = 0; k < total; ++k) {
            lambda[k] = buffer.data[k][0];
        }
        const auto [lo, hi] = std::minmax_element(lambda.begin(), lambda.end());
        const double max_eig = *hi;
        const double min_eig = *lo;
        const bool last = padding * 2 > kMaxPadding;
        const double threshold = (last ? kClip : kRoundoff) * max_eig;
        if (min_eig < -threshold) {
            if (last) {
                throw NumericalError("circulant embedding is not positive semi-definite at padding " +
                                     std::to_string(padding) + " (min eigenvalue " + std::to_string(min_eig) + ")");
            }
            continue;
        }
        padding_ = padding;
        size_ = n;
        min_raw_ = min_eig;
        for (double& l : lambda) {
            l = std::max(l, 0.0);
        }
        eigenvalues_ = std::move(lambda);
        amplitudes_.resize(total);
        const double inv_total = 1.0 / static_cast<double>(total);
        for (std::size_t k = 0; k < total; ++k) {
            amplitudes_[k] = std::sqrt(eigenvalues_[k] * inv_total);
        }
        plan_ = std::move(plan);
        return;
    }
}

CirculantEmbedding::~CirculantEmbedding() = default;

GridField CirculantEmbedding::sample(RandomStream& rng) const {
    const std::size_t total = static_cast<std::size_t>(size_) * size_;
    FftwBuffer buffer(total);
    for (std::size_t k = 0; k < total; ++k) {
        const double re = rng.normal();
        const double im = rng.normal();
        buffer.data[k][0] = amplitudes_[k] * re;
        buffer.data[k][1] = amplitudes_[k] * im;
    }
    fftw_execute_dft(plan_->plan, buffer.data, buffer.data);
    const int pts = grid_.points_per_side();
    std::vector<double> values(grid_.size());
    for (int j = 0; j < pts; ++j) {
        for (int i = 0; i < pts; ++i) {
            values[grid_.index(i, j)] = buffer.data[static_cast<std::size_t>(j) * size_ + i][0];
        }
    }
    return GridField(grid_, std::move(values));
}

}  // namespace jmlmc
