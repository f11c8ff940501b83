#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jmlmc/mlmc.hpp"
#include "jmlmc/problem.hpp"
#include "jmlmc/rng.hpp"

namespace jmlmc {

enum class EstimatorKind { standard, coupled };

struct StudyMethod {
    Method method = Method::adapted;
    EstimatorKind estimator = EstimatorKind::standard;

    /// "adapted", "nonadapted", "adapted-coupled" or "nonadapted-coupled".
    std::string label() const;
    /// Stable small integer used to key random streams.
    std::uint64_t code() const;
    static StudyMethod parse(const std::string& label);

    friend bool operator==(const StudyMethod&, const StudyMethod&) = default;
};

/// Study parameters that sit next to the problem in a config file.
struct StudyConfig {
    std::vector<StudyMethod> methods{{Method::adapted, EstimatorKind::standard},
                                     {Method::nonadapted, EstimatorKind::standard}};
    int level_min = 0;
    int level_max = 3;
    int reps = 20;
    int ref_level = 5;
    double kappa = 1.0;
    std::uint64_t seed = 20240601;
    int threads = 0;  ///< 0: JMLMC_THREADS or 1

    void validate() const;
    friend bool operator==(const StudyConfig&, const StudyConfig&) = default;
};

struct StudyRow {
    std::string method;
    int L = 0;
    double h_L = 0.0;
    int rep = 0;
    double estimate = 0.0;
    double reference = 0.0;
    double rel_error = 0.0;
    double seconds = 0.0;  ///< wall time of the estimator run; not part of study.csv
};

struct SummaryRow {
    std::string method;
    int L = 0;
    double h_L = 0.0;
    int reps = 0;
    double rel_rmse = 0.0;
    double fitted_slope = 0.0;  ///< of log rel_rmse against log h_L over all L of the method
    double mean_seconds = 0.0;
};

/// Stream of replication `rep` of the estimator `method` at max level L.
RandomStream study_stream(const RandomStream& root, const StudyMethod& method, int L, int rep);
/// Stream of the reference run.
RandomStream reference_stream(const RandomStream& root);

/// `reps` independent estimator runs per method and L, compared with `reference`.
std::vector<StudyRow> rmse_study(const ProblemConfig& problem, const StudyConfig& study, double reference,
                                 const RandomStream& root, int threads);

/// Relative RMSE per (method, L) and the least-squares log-log slope per method.
std::vector<SummaryRow> summarize(const std::vector<StudyRow>& rows);

/// Least-squares slope of log y against log x; NaN with fewer than two usable points.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ReferenceResult {
    double value = 0.0;
    bool from_cache = false;
    /// Non-empty when a cache file existed but belonged to another configuration.
    std::string cache_note;
    std::string fingerprint;
    double seconds = 0.0;
};

/// Hex FNV-1a digest of everything that determines the reference value.
std::string reference_fingerprint(const ProblemConfig& problem, int L_ref, double kappa, std::uint64_t seed);

/// Adapted standard MLMC at L_ref. With a non-empty cache_path the value is
/// reused when the stored fingerprint matches and written otherwise.
ReferenceResult compute_reference(const ProblemConfig& problem, int L_ref, double kappa, std::uint64_t seed,
                                  int threads, const std::string& cache_path = "");

}  // namespace jmlmc
