#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "jmlmc/fem.hpp"
#include "jmlmc/mesh.hpp"
#include "jmlmc/problem.hpp"
#include "jmlmc/random_field.hpp"
#include "jmlmc/rng.hpp"

namespace jmlmc {

struct LevelSpec {
    int level = 0;
    Discretization disc;
    double rho_hat = 0.0;  ///< normalized weight, zero on level 0
    double rho = 0.0;      ///< c_rho * rho_hat
    std::int64_t samples = 1;
};

struct LevelSchedule {
    Method method = Method::adapted;
    int L = 0;
    double kappa = 1.0;
    double c_rho = 2.0;
    /// Error exponent r with error ~ h^r: 2 kappa (adapted) or 1 (non-adapted).
    double rate = 2.0;
    std::vector<LevelSpec> levels;

    /// Throws ConfigError unless h decreases strictly and sample counts are
    /// positive and non-increasing.
    void validate() const;
};

/// Mesh threshold of level l: (1/4) 2^(-l/2) adapted, (1/4) 2^(-l) non-adapted.
double h_bar(Method method, int level);

/// Level parameters and sample counts
///   M_0 = ceil(h_L^(-2r)),  M_l = ceil(c_rho^(-2) (h_l / h_L)^(2r) rho_hat_l^(-2)),
/// rho_hat_l = (l+1)^(-1.001) / sum_{k=1..L} (k+1)^(-1.001). c_rho defaults to 2
/// (adapted) or 1 (non-adapted).
LevelSchedule build_schedule(int L, Method method, double kappa = 1.0, std::optional<double> c_rho = std::nullopt);

/// Produces Psi_l(omega) for a contiguous range of levels from one realization.
class LevelSampler {
public:
    virtual ~LevelSampler() = default;
    virtual int max_level() const = 0;
    /// Values for levels coarsest..finest, all computed from the same omega.
    virtual std::vector<double> evaluate(const RandomStream& omega, int coarsest, int finest) const = 0;
};

/// The PDE pipeline: the field is drawn on the finest requested lattice and
/// restricted to coarser ones; partition and jump heights are shared.
class PdeSampler final : public LevelSampler {
public:
    PdeSampler(const LevelSchedule& schedule, const ProblemConfig& problem);
    ~PdeSampler() override;

    int max_level() const override { return static_cast<int>(levels_.size()) - 1; }
    std::vector<double> evaluate(const RandomStream& omega, int coarsest, int finest) const override;

private:
    Method method_;
    ProblemConfig problem_;
    std::vector<LevelSpec> levels_;
    std::vector<std::unique_ptr<CirculantEmbedding>> embeddings_;
    std::vector<Mesh> uniform_meshes_;
};

/// Psi_l = mu_l + sigma_l Z + tau_l Y_l with Z, Y_0, Y_1, ... independent
/// standard normals drawn from omega.
class SyntheticSampler final : public LevelSampler {
public:
    struct Level {
        double mu = 0.0;
        double sigma = 0.0;
        double tau = 0.0;
    };
    explicit SyntheticSampler(std::vector<Level> levels);

    int max_level() const override { return static_cast<int>(levels_.size()) - 1; }
    std::vector<double> evaluate(const RandomStream& omega, int coarsest, int finest) const override;

    double mean(int level) const { return levels_[static_cast<std::size_t>(level)].mu; }
    /// Cov(Psi_j - Psi_{j-1}, Psi_k - Psi_{k-1}) with Psi_{-1} = 0.
    double correction_covariance(int j, int k) const;
    /// Variance of the standard estimator for the given sample counts.
    double standard_variance(const std::vector<std::int64_t>& samples) const;
    /// Variance of the coupled estimator for the given (non-increasing) sample counts.
    double coupled_variance(const std::vector<std::int64_t>& samples) const;

private:
    std::vector<Level> levels_;
};

struct LevelStatistics {
    int level = 0;
    std::int64_t samples = 0;
    double mean = 0.0;       ///< mean of Psi_l - Psi_{l-1}
    double variance = 0.0;   ///< unbiased sample variance of the correction
    double mean_fine = 0.0;  ///< mean of Psi_l over the same samples
    double seconds = 0.0;    ///< summed worker time of this level's tasks
};

struct EstimatorResult {
    double value = 0.0;
    bool coupled = false;
    std::vector<LevelStatistics> levels;
    /// C_jk = Cov(corrections j, k) over shared realizations (coupled runs only).
    std::vector<std::vector<double>> covariance;
    double seconds = 0.0;  ///< wall time
};

struct EstimatorOptions {
    int threads = 1;
};

/// Independent realizations per level; realization i of level l uses
/// stream.child(l).child(i) and feeds both Psi_l and Psi_{l-1}.
EstimatorResult mlmc_estimate(const LevelSchedule& schedule, const LevelSampler& sampler, const RandomStream& stream,
                              const EstimatorOptions& options = {});
/// Realization i uses stream.child(0).child(i) and is evaluated on levels
/// 0..max{l : i < M_l}, so every level shares the realizations of coarser ones.
EstimatorResult coupled_mlmc_estimate(const LevelSchedule& schedule, const LevelSampler& sampler,
                                      const RandomStream& stream, const EstimatorOptions& options = {});

EstimatorResult mlmc_estimate(const LevelSchedule& schedule, const ProblemConfig& problem, const RandomStream& stream,
                              const EstimatorOptions& options = {});
EstimatorResult coupled_mlmc_estimate(const LevelSchedule& schedule, const ProblemConfig& problem,
                                      const RandomStream& stream, const EstimatorOptions& options = {});

}  // namespace jmlmc
