#include "jmlmc/mlmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>

#include "jmlmc/error.hpp"
#include "jmlmc/parallel.hpp"

namespace jmlmc {

namespace {

// Ceiling that ignores round-off just above an integer, e.g. (4 sqrt 2)^4.
std::int64_t robust_ceil(double x) {
    return static_cast<std::int64_t>(std::ceil(x * (1.0 - 1e-12)));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename E>
[[noreturn]] void rethrow_with(const E& e, const std::string& where) {
    throw E(where + ": " + e.what());
}

// Runs fn and prefixes any library error with the task location.
template <typename F>
void with_context(const std::string& where, F&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        rethrow_with(e, where);
    } catch (const NumericalError& e) {
        rethrow_with(e, where);
    } catch (const IoError& e) {
        rethrow_with(e, where);
    }
}

double mean_of(const std::vector<double>& v, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += v[i];
    }
    return n > 0 ? s / static_cast<double>(n) : 0.0;
}

double covariance_of(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
    if (n < 2) {
        return 0.0;
    }
    const double ma = mean_of(a, n);
    const double mb = mean_of(b, n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += (a[i] - ma) * (b[i] - mb);
    }
    return s / static_cast<double>(n - 1);
}

}  // namespace

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("JMLMC_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    return 1;
}

double h_bar(Method method, int level) {
    if (method == Method::nonadapted) {
        return std::ldexp(0.25, -level);
    }
    const double base = level % 2 == 0 ? 1.0 : std::sqrt(0.5);
    return std::ldexp(0.25 * base, -(level / 2));
}

void LevelSchedule::validate() const {
    if (levels.empty() || static_cast<int>(levels.size()) != L + 1) {
        throw ConfigError("schedule: expected " + std::to_string(L + 1) + " levels");
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
        if (levels[l].samples < 1) {
            throw ConfigError("schedule: level " + std::to_string(l) + " has no samples");
        }
        if (l > 0 && !(levels[l].disc.h_bar < levels[l - 1].disc.h_bar)) {
            throw ConfigError("schedule: mesh threshold must decrease strictly with the level");
        }
        if (l > 0 && levels[l].samples > levels[l - 1].samples) {
            throw ConfigError("schedule: sample counts must be non-increasing in the level");
        }
    }
}

LevelSchedule build_schedule(int L, Method method, double kappa, std::optional<double> c_rho) {
    if (L < 0) {
        throw ConfigError("schedule: L must be non-negative");
    }
    if (!(kappa > 0.5 && kappa <= 1.0)) {
        throw ConfigError("schedule: kappa must lie in (1/2, 1]");
    }
    LevelSchedule s;
    s.method = method;
    s.L = L;
    s.kappa = kappa;
    s.c_rho = c_rho.value_or(method == Method::adapted ? 2.0 : 1.0);
    if (!(s.c_rho > 0.0)) {
        throw ConfigError("schedule: weight budget must be positive");
    }
    s.rate = method == Method::adapted ? 2.0 * kappa : 1.0;
    // Extended precision so the weights round once, to the nearest double.
    long double norm = 0.0L;
    for (int k = 1; k <= L; ++k) {
        norm += std::pow(static_cast<long double>(k + 1), -1.001L);
    }
    const double hL = h_bar(method, L);
    for (int l = 0; l <= L; ++l) {
        LevelSpec spec;
        spec.level = l;
        spec.disc.h_bar = h_bar(method, l);
        if (method == Method::adapted) {
            spec.disc.eps = std::ldexp(1.0 / 16.0, -l);
        } else {
            spec.disc.eps = spec.disc.h_bar;
        }
        spec.disc.dt = spec.disc.eps;
        if (l == 0) {
            spec.samples = robust_ceil(std::pow(hL, -2.0 * s.rate));
        } else {
            const long double rho_hat = std::pow(static_cast<long double>(l + 1), -1.001L) / norm;
            spec.rho_hat = static_cast<double>(rho_hat);
            spec.rho = s.c_rho * spec.rho_hat;
            const long double ratio = std::pow(static_cast<long double>(spec.disc.h_bar) / hL, 2.0L * s.rate);
            spec.samples = robust_ceil(static_cast<double>(ratio / (s.c_rho * s.c_rho * rho_hat * rho_hat)));
        }
        s.levels.push_back(spec);
    }
    return s;
}

PdeSampler::PdeSampler(const LevelSchedule& schedule, const ProblemConfig& problem)
    : method_(schedule.method), problem_(problem), levels_(schedule.levels) {
    for (const LevelSpec& l : levels_) {
        const SampleGrid grid(l.disc.eps, l.level);
        embeddings_.push_back(std::make_unique<CirculantEmbedding>(grid, problem_.covariance));
        if (method_ == Method::nonadapted) {
            uniform_meshes_.push_back(triangulate_uniform(l.disc.h_bar));
        }
    }
    for (std::size_t l = 1; l < levels_.size(); ++l) {
        const SampleGrid& fine = embeddings_[l]->grid();
        if (!fine.coarsenable() || !(fine.coarsened() == embeddings_[l - 1]->grid())) {
            throw ConfigError("sampler: field lattices of levels " + std::to_string(l - 1) + " and " +
                              std::to_string(l) + " are not nested");
        }
    }
}

PdeSampler::~PdeSampler() = default;

std::vector<double> PdeSampler::evaluate(const RandomStream& omega, int coarsest, int finest) const {
    std::vector<double> out(static_cast<std::size_t>(finest - coarsest + 1));
    CoefficientSample sample = sample_coefficient(*embeddings_[static_cast<std::size_t>(finest)], omega, problem_);
    for (int l = finest; l >= coarsest; --l) {
        const Mesh* uniform = method_ == Method::nonadapted ? &uniform_meshes_[static_cast<std::size_t>(l)] : nullptr;
        out[static_cast<std::size_t>(l - coarsest)] =
            evaluate_path(sample, levels_[static_cast<std::size_t>(l)].disc, method_, problem_, uniform);
        if (l > coarsest) {
            sample = sample.with_field(sample.field().coarsen_nested());
        }
    }
    return out;
}

SyntheticSampler::SyntheticSampler(std::vector<Level> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) {
        throw ConfigError("synthetic sampler: needs at least one level");
    }
}

std::vector<double> SyntheticSampler::evaluate(const RandomStream& omega, int coarsest, int finest) const {
    const RandomStream base = omega.child(StreamPurpose::synthetic);
    RandomStream zs = base.child(std::uint64_t{0});
    const double z = zs.normal();
    std::vector<double> out;
    for (int l = coarsest; l <= finest; ++l) {
        RandomStream ys = base.child(static_cast<std::uint64_t>(l) + 1);
        const Level& p = levels_[static_cast<std::size_t>(l)];
        out.push_back(p.mu + p.sigma * z + p.tau * ys.normal());
    }
    return out;
}

double SyntheticSampler::correction_covariance(int j, int k) const {
    if (j > k) {
        std::swap(j, k);
    }
    auto sigma = [this](int l) { return l < 0 ? 0.0 : levels_[static_cast<std::size_t>(l)].sigma; };
    auto tau = [this](int l) { return l < 0 ? 0.0 : levels_[static_cast<std::size_t>(l)].tau; };
    double c = (sigma(j) - sigma(j - 1)) * (sigma(k) - sigma(k - 1));
    if (j == k) {
        c += tau(k) * tau(k) + tau(k - 1) * tau(k - 1);
    } else if (k == j + 1) {
        c -= tau(j) * tau(j);
    }
    return c;
}

double SyntheticSampler::standard_variance(const std::vector<std::int64_t>& samples) const {
    double v = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        v += correction_covariance(static_cast<int>(k), static_cast<int>(k)) / static_cast<double>(samples[k]);
    }
    return v;
}

double SyntheticSampler::coupled_variance(const std::vector<std::int64_t>& samples) const {
    double v = standard_variance(samples);
    for (std::size_t j = 0; j < samples.size(); ++j) {
        for (std::size_t k = j + 1; k < samples.size(); ++k) {
            v += 2.0 * correction_covariance(static_cast<int>(j), static_cast<int>(k)) / static_cast<double>(samples[j]);
        }
    }
    return v;
}

EstimatorResult mlmc_estimate(const LevelSchedule& schedule, const LevelSampler& sampler, const RandomStream& stream,
                              const EstimatorOptions& options) {
    schedule.validate();
    if (sampler.max_level() < schedule.L) {
        throw ConfigError("estimator: sampler has fewer levels than the schedule");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t nlev = schedule.levels.size();
    struct Task {
        int level;
        std::int64_t index;
    };
    // Finest levels first so the expensive tasks start early.
    std::vector<Task> tasks;
    for (int l = schedule.L; l >= 0; --l) {
        for (std::int64_t i = 0; i < schedule.levels[static_cast<std::size_t>(l)].samples; ++i) {
            tasks.push_back({l, i});
        }
    }
    std::vector<std::vector<double>> correction(nlev);
    std::vector<std::vector<double>> fine(nlev);
    std::vector<std::vector<double>> cost(nlev);
    for (std::size_t l = 0; l < nlev; ++l) {
        const auto m = static_cast<std::size_t>(schedule.levels[l].samples);
        correction[l].resize(m);
        fine[l].resize(m);
        cost[l].resize(m);
    }
    parallel_for(tasks.size(), resolve_threads(options.threads), [&](std::size_t k) {
        const Task task = tasks[k];
        const auto l = static_cast<std::size_t>(task.level);
        const auto i = static_cast<std::size_t>(task.index);
        const auto start = std::chrono::steady_clock::now();
        with_context("level " + std::to_string(task.level) + ", sample " + std::to_string(task.index), [&] {
            const RandomStream omega = stream.child(static_cast<std::uint64_t>(task.level))
                                           .child(static_cast<std::uint64_t>(task.index));
            const std::vector<double> psi = sampler.evaluate(omega, std::max(task.level - 1, 0), task.level);
            fine[l][i] = psi.back();
            correction[l][i] = task.level == 0 ? psi.back() : psi.back() - psi.front();
        });
        cost[l][i] = seconds_since(start);
    });
    EstimatorResult result;
    for (std::size_t l = 0; l < nlev; ++l) {
        LevelStatistics st;
        st.level = static_cast<int>(l);
        st.samples = schedule.levels[l].samples;
        const auto m = static_cast<std::size_t>(st.samples);
        st.mean = mean_of(correction[l], m);
        st.variance = covariance_of(correction[l], correction[l], m);
        st.mean_fine = mean_of(fine[l], m);
        for (double c : cost[l]) {
            st.seconds += c;
        }
        result.value += st.mean;
        result.levels.push_back(st);
    }
    result.seconds = seconds_since(t0);
    return result;
}

EstimatorResult coupled_mlmc_estimate(const LevelSchedule& schedule, const LevelSampler& sampler,
                                      const RandomStream& stream, const EstimatorOptions& options) {
    schedule.validate();
    if (sampler.max_level() < schedule.L) {
        throw ConfigError("estimator: sampler has fewer levels than the schedule");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t nlev = schedule.levels.size();
    const auto n = static_cast<std::size_t>(schedule.levels[0].samples);
    auto top_level = [&](std::size_t i) {
        int top = 0;
        while (top + 1 < static_cast<int>(nlev) &&
               static_cast<std::int64_t>(i) < schedule.levels[static_cast<std::size_t>(top) + 1].samples) {
            ++top;
        }
        return top;
    };
    std::vector<std::vector<double>> psi(n);
    std::vector<double> cost(n, 0.0);
    parallel_for(n, resolve_threads(options.threads), [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        const int top = top_level(i);
        with_context("level " + std::to_string(top) + ", sample " + std::to_string(i), [&] {
            const RandomStream omega = stream.child(std::uint64_t{0}).child(static_cast<std::uint64_t>(i));
            psi[i] = sampler.evaluate(omega, 0, top);
        });
        cost[i] = seconds_since(start);
    });
    std::vector<std::vector<double>> correction(nlev);
    std::vector<std::vector<double>> fine(nlev);
    for (std::size_t l = 0; l < nlev; ++l) {
        const auto m = static_cast<std::size_t>(schedule.levels[l].samples);
        for (std::size_t i = 0; i < m; ++i) {
            fine[l].push_back(psi[i][l]);
            correction[l].push_back(l == 0 ? psi[i][0] : psi[i][l] - psi[i][l - 1]);
        }
    }
    EstimatorResult result;
    result.coupled = true;
    result.covariance.assign(nlev, std::vector<double>(nlev, 0.0));
    for (std::size_t l = 0; l < nlev; ++l) {
        LevelStatistics st;
        st.level = static_cast<int>(l);
        st.samples = schedule.levels[l].samples;
        const auto m = static_cast<std::size_t>(st.samples);
        st.mean = mean_of(correction[l], m);
        st.variance = covariance_of(correction[l], correction[l], m);
        st.mean_fine = mean_of(fine[l], m);
        result.value += st.mean;
        result.levels.push_back(st);
    }
    for (std::size_t i = 0; i < n; ++i) {
        result.levels[static_cast<std::size_t>(top_level(i))].seconds += cost[i];
    }
    for (std::size_t j = 0; j < nlev; ++j) {
        for (std::size_t k = j; k < nlev; ++k) {
            const auto m = static_cast<std::size_t>(schedule.levels[k].samples);
            result.covariance[j][k] = result.covariance[k][j] = covariance_of(correction[j], correction[k], m);
        }
    }
    result.seconds = seconds_since(t0);
    return result;
}

EstimatorResult mlmc_estimate(const LevelSchedule& schedule, const ProblemConfig& problem, const RandomStream& stream,
                              const EstimatorOptions& options) {
    const PdeSampler sampler(schedule, problem);
    return mlmc_estimate(schedule, sampler, stream, options);
}

EstimatorResult coupled_mlmc_estimate(const LevelSchedule& schedule, const ProblemConfig& problem,
                                      const RandomStream& stream, const EstimatorOptions& options) {
    const PdeSampler sampler(schedule, problem);
    return coupled_mlmc_estimate(schedule, sampler, stream, options);
}

}  // namespace jmlmc
