#include "jmlmc/study.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "jmlmc/config.hpp"
#include "jmlmc/error.hpp"

namespace jmlmc {

namespace {

constexpr std::uint64_t kStudyTag = 0x5354554459ULL;      // "STUDY"
constexpr std::uint64_t kReferenceTag = 0x524546ULL;      // "REF"

}  // namespace

std::string StudyMethod::label() const {
    std::string s = to_string(method);
    if (estimator == EstimatorKind::coupled) {
        s += "-coupled";
    }
    return s;
}

std::uint64_t StudyMethod::code() const {
    return (method == Method::adapted ? 0u : 1u) + (estimator == EstimatorKind::coupled ? 2u : 0u);
}

StudyMethod StudyMethod::parse(const std::string& label) {
    for (Method m : {Method::adapted, Method::nonadapted}) {
        for (EstimatorKind k : {EstimatorKind::standard, EstimatorKind::coupled}) {
            const StudyMethod candidate{m, k};
            if (candidate.label() == label) {
                return candidate;
            }
        }
    }
    throw ConfigError("unknown method '" + label +
                      "' (expected adapted, nonadapted, adapted-coupled or nonadapted-coupled)");
}

RandomStream study_stream(const RandomStream& root, const StudyMethod& method, int L, int rep) {
    return root.child(kStudyTag).child(method.code()).child(static_cast<std::uint64_t>(L)).child(
        static_cast<std::uint64_t>(rep));
}

RandomStream reference_stream(const RandomStream& root) { return root.child(kReferenceTag); }

std::vector<StudyRow> rmse_study(const ProblemConfig& problem, const StudyConfig& study, double reference,
                                 const RandomStream& root, int threads) {
    study.validate();
    std::vector<StudyRow> rows;
    const EstimatorOptions options{threads};
    for (const StudyMethod& m : study.methods) {
        for (int L = study.level_min; L <= study.level_max; ++L) {
            const LevelSchedule schedule = build_schedule(L, m.method, study.kappa);
            const PdeSampler sampler(schedule, problem);
            for (int rep = 0; rep < study.reps; ++rep) {
                const RandomStream stream = study_stream(root, m, L, rep);
                const EstimatorResult r = m.estimator == EstimatorKind::coupled
                                              ? coupled_mlmc_estimate(schedule, sampler, stream, options)
                                              : mlmc_estimate(schedule, sampler, stream, options);
                StudyRow row;
                row.method = m.label();
                row.L = L;
                row.h_L = schedule.levels.back().disc.h_bar;
                row.rep = rep;
                row.estimate = r.value;
                row.reference = reference;
                row.rel_error = (r.value - reference) / std::abs(reference);
                row.seconds = r.seconds;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

std::vector<SummaryRow> summarize(const std::vector<StudyRow>& rows) {
    std::vector<SummaryRow> out;
    std::vector<std::string> order;
    std::map<std::pair<std::string, int>, std::vector<const StudyRow*>> groups;
    for (const StudyRow& r : rows) {
        auto& g = groups[{r.method, r.L}];
        if (g.empty()) {
            order.push_back(r.method);
        }
        g.push_back(&r);
    }
    std::vector<std::string> methods;
    for (const auto& m : order) {
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) {
            methods.push_back(m);
        }
    }
    for (const std::string& m : methods) {
        std::vector<SummaryRow> block;
        for (const auto& [key, g] : groups) {
            if (key.first != m) {
                continue;
            }
            SummaryRow s;
            s.method = m;
            s.L = key.second;
            s.h_L = g.front()->h_L;
            s.reps = static_cast<int>(g.size());
            double sq = 0.0;
            double secs = 0.0;
            for (const StudyRow* r : g) {
                const double d = r->estimate - r->reference;
                sq += d * d;
                secs += r->seconds;
            }
            s.rel_rmse = std::sqrt(sq / static_cast<double>(g.size())) / std::abs(g.front()->reference);
            s.mean_seconds = secs / static_cast<double>(g.size());
            block.push_back(s);
        }
        std::vector<double> hs;
        std::vector<double> es;
        for (const auto& s : block) {
            hs.push_back(s.h_L);
            es.push_back(s.rel_rmse);
        }
        const double slope = fit_loglog_slope(hs, es);
        for (auto& s : block) {
            s.fitted_slope = slope;
            out.push_back(s);
        }
    }
    return out;
}

std::string reference_fingerprint(const ProblemConfig& problem, int L_ref, double kappa, std::uint64_t seed) {
    const Config c{problem, StudyConfig{}};
    std::string text = serialize_problem(c.problem);
    char buf[96];
    std::snprintf(buf, sizeof buf, "reference L=%d kappa=%.17g seed=%llu", L_ref, kappa,
                  static_cast<unsigned long long>(seed));
    text += buf;
    return fnv1a_hex(text);
}

ReferenceResult compute_reference(const ProblemConfig& problem, int L_ref, double kappa, std::uint64_t seed,
                                  int threads, const std::string& cache_path) {
    ReferenceResult out;
    out.fingerprint = reference_fingerprint(problem, L_ref, kappa, seed);
    if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
        std::ifstream in(cache_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw IoError("reference cache '" + cache_path + "' is unreadable: " + e.what());
        }
        if (j.value("fingerprint", std::string()) == out.fingerprint && j.contains("value")) {
            out.value = j["value"].get<double>();
            out.from_cache = true;
            return out;
        }
        out.cache_note = "reference cache '" + cache_path + "' belongs to fingerprint " +
                         j.value("fingerprint", std::string("?")) + ", recomputing for " + out.fingerprint;
    }
    const LevelSchedule schedule = build_schedule(L_ref, Method::adapted, kappa);
    const EstimatorResult r = mlmc_estimate(schedule, problem, reference_stream(RandomStream(seed)), {threads});
    out.value = r.value;
    out.seconds = r.seconds;
    if (!cache_path.empty()) {
        const auto parent = std::filesystem::path(cache_path).parent_path();
        std::error_code ec;
        if (!parent.empty()) {
            std::filesystem::create_directories(parent, ec);
        }
        nlohmann::json j;
        j["fingerprint"] = out.fingerprint;
        j["value"] = out.value;
        j["L_ref"] = L_ref;
        j["kappa"] = kappa;
        j["seed"] = seed;
        std::ofstream os(cache_path);
        if (!os) {
            throw IoError("cannot write reference cache '" + cache_path + "'");
        }
        os << j.dump(2) << "\n";
    }
    return out;
}

}  // namespace jmlmc
