#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "jmlmc/config.hpp"
#include "jmlmc/error.hpp"
#include "jmlmc/fem.hpp"
#include "jmlmc/mesh.hpp"
#include "jmlmc/parallel.hpp"
#include "jmlmc/random_field.hpp"
#include "jmlmc/report.hpp"
#include "jmlmc/study.hpp"

#ifndef JMLMC_VERSION
#define JMLMC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace jmlmc;

namespace {

enum Exit { ok = 0, config_error = 2, numerical_error = 3, io_error = 4 };

struct StudyOverrides {
    std::string config_path;
    std::string methods;
    std::string levels;
    std::optional<int> reps;
    std::optional<int> ref_level;
    std::optional<std::uint64_t> seed;
    std::optional<double> kappa;
    int threads = 0;
};

void add_common(CLI::App* cmd, StudyOverrides& o) {
    cmd->add_option("--config", o.config_path, "Config file; omitted keys keep their defaults");
    cmd->add_option("--methods", o.methods, "Comma list of adapted, nonadapted, adapted-coupled, nonadapted-coupled");
    cmd->add_option("--levels", o.levels, "Level range lo..hi");
    cmd->add_option("--reps", o.reps, "Replications per method and level");
    cmd->add_option("--ref-level", o.ref_level, "Level of the adapted reference run");
    cmd->add_option("--seed", o.seed, "Root seed");
    cmd->add_option("--kappa", o.kappa, "Rate exponent in (1/2, 1]");
    cmd->add_option("--threads", o.threads, "Worker count (default: JMLMC_THREADS, else 1)");
}

Config effective_config(const StudyOverrides& o) {
    Config c = o.config_path.empty() ? parse_config("") : load_config(o.config_path);
    const std::string origin = "command line";
    if (!o.methods.empty()) {
        override_config(c, "study.methods", o.methods, origin);
    }
    if (!o.levels.empty()) {
        override_config(c, "study.levels", o.levels, origin);
    }
    if (o.reps) {
        c.study.reps = *o.reps;
    }
    if (o.ref_level) {
        c.study.ref_level = *o.ref_level;
    }
    if (o.seed) {
        c.study.seed = *o.seed;
    }
    if (o.kappa) {
        c.study.kappa = *o.kappa;
    }
    c.study.validate();
    return c;
}

int threads_for(const StudyOverrides& o, const Config& c) {
    return resolve_threads(o.threads > 0 ? o.threads : c.study.threads);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text) || !os.flush()) {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

nlohmann::json library_versions() {
    return {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"fftw", fftw_version_string()},
            {"compiler", __VERSION__}};
}

int cmd_run(const StudyOverrides& o, const std::string& out, std::string cache) {
    const auto start = std::chrono::steady_clock::now();
    const Config c = effective_config(o);
    const int threads = threads_for(o, c);
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + out + "'");
    }
    if (cache.empty()) {
        cache = (dir / "reference.json").string();
    }
    const std::string config_text = serialize_config(c);
    write_file(dir / "config.ini", config_text);

    std::cerr << "reference: adapted L=" << c.study.ref_level << " on " << threads << " worker(s)\n";
    const ReferenceResult ref = compute_reference(c.problem, c.study.ref_level, c.study.kappa, c.study.seed, threads,
                                                  cache == "none" ? "" : cache);
    if (!ref.cache_note.empty()) {
        std::cerr << ref.cache_note << "\n";
    }
    std::cerr << "reference value " << ref.value << (ref.from_cache ? " (cached)" : "") << "\n";

    const RandomStream root(c.study.seed);
    const std::vector<StudyRow> rows = rmse_study(c.problem, c.study, ref.value, root, threads);
    const std::vector<SummaryRow> summary = summarize(rows);

    std::ostringstream study_csv;
    write_study_csv(study_csv, rows);
    write_file(dir / "study.csv", study_csv.str());
    std::ostringstream summary_csv;
    write_summary_csv(summary_csv, summary);
    write_file(dir / "summary.csv", summary_csv.str());
    write_file(dir / "rmse.svg", render_rmse_svg(summary));

    nlohmann::json manifest;
    manifest["tool"] = "jmlmc";
    manifest["version"] = JMLMC_VERSION;
    manifest["config"] = config_text;
    manifest["config_fingerprint"] = fnv1a_hex(config_text);
    manifest["seed"] = c.study.seed;
    manifest["reference"] = {{"value", ref.value}, {"level", c.study.ref_level}, {"fingerprint", ref.fingerprint}};
    manifest["outputs"] = {"config.ini", "study.csv", "summary.csv", "rmse.svg", "timing.json"};
    manifest["libraries"] = library_versions();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    nlohmann::json timing;
    timing["threads"] = threads;
    timing["reference_seconds"] = ref.seconds;
    timing["reference_from_cache"] = ref.from_cache;
    timing["runs"] = nlohmann::json::array();
    for (const StudyRow& r : rows) {
        timing["runs"].push_back({{"method", r.method}, {"L", r.L}, {"rep", r.rep}, {"seconds", r.seconds}});
    }
    timing["summary"] = nlohmann::json::array();
    for (const SummaryRow& s : summary) {
        timing["summary"].push_back({{"method", s.method}, {"L", s.L}, {"mean_seconds", s.mean_seconds}});
    }
    timing["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(dir / "timing.json", timing.dump(2) + "\n");

    for (const SummaryRow& s : summary) {
        std::printf("%-20s L=%d h_L=%.4f rel_rmse=%.4e slope=%.3f\n", s.method.c_str(), s.L, s.h_L, s.rel_rmse,
                    s.fitted_slope);
    }
    return ok;
}

int cmd_reference(const StudyOverrides& o, const std::string& cache) {
    const Config c = effective_config(o);
    const ReferenceResult ref =
        compute_reference(c.problem, c.study.ref_level, c.study.kappa, c.study.seed, threads_for(o, c), cache);
    if (!ref.cache_note.empty()) {
        std::cerr << ref.cache_note << "\n";
    }
    std::printf("%.17g\n", ref.value);
    return ok;
}

int cmd_schedule(const std::string& method, int L, double kappa) {
    const LevelSchedule s = build_schedule(L, StudyMethod::parse(method).method, kappa);
    std::printf("level,h_bar,eps,dt,rho_hat,rho,samples\n");
    for (const LevelSpec& l : s.levels) {
        std::printf("%d,%.17g,%.17g,%.17g,%.17g,%.17g,%lld\n", l.level, l.disc.h_bar, l.disc.eps, l.disc.dt,
                    l.rho_hat, l.rho, static_cast<long long>(l.samples));
    }
    return ok;
}

int cmd_sample(const StudyOverrides& o, const std::string& method_label, int level, std::uint64_t index,
               const std::string& mesh_out, const std::string& partition_out) {
    const Config c = effective_config(o);
    const Method method = StudyMethod::parse(method_label).method;
    const LevelSchedule s = build_schedule(level, method, c.study.kappa);
    const Discretization& disc = s.levels.back().disc;
    const RandomStream omega = RandomStream(c.study.seed).child(index);
    const CirculantEmbedding embedding(SampleGrid(disc.eps, level), c.problem.covariance);
    const CoefficientSample sample = sample_coefficient(embedding, omega, c.problem);
    if (!mesh_out.empty()) {
        const Mesh mesh = method == Method::adapted ? triangulate_adapted(sample.partition(), disc.h_bar)
                                                    : triangulate_uniform(disc.h_bar);
        std::ofstream os(mesh_out);
        write_mesh(os, mesh);
        if (!os) {
            throw IoError("cannot write '" + mesh_out + "'");
        }
    }
    if (!partition_out.empty()) {
        std::ofstream os(partition_out);
        write_partition_record(os, sample.partition(), sample.jumps());
        if (!os) {
            throw IoError("cannot write '" + partition_out + "'");
        }
    }
    std::printf("%.17g\n", evaluate_path(sample, disc, method, c.problem));
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilevel Monte Carlo for parabolic problems with jump coefficients"};
    app.set_version_flag("--version", std::string(JMLMC_VERSION));
    app.require_subcommand(1);

    StudyOverrides run_opts;
    std::string out;
    std::string cache;
    CLI::App* run = app.add_subcommand("run", "Run the RMSE study and write CSV, SVG and manifest");
    add_common(run, run_opts);
    run->add_option("--out", out, "Output directory")->required();
    run->add_option("--reference-cache", cache, "Reference cache file (default <out>/reference.json, 'none' to skip)");

    StudyOverrides ref_opts;
    std::string ref_cache;
    CLI::App* reference = app.add_subcommand("reference", "Compute (or load) the reference value");
    add_common(reference, ref_opts);
    reference->add_option("--cache", ref_cache, "Cache file");

    std::string sched_method = "adapted";
    int sched_L = 3;
    double sched_kappa = 1.0;
    CLI::App* schedule = app.add_subcommand("schedule", "Print the level schedule as CSV");
    schedule->add_option("--method", sched_method, "adapted or nonadapted");
    schedule->add_option("--L", sched_L, "Finest level");
    schedule->add_option("--kappa", sched_kappa, "Rate exponent in (1/2, 1]");

    StudyOverrides sample_opts;
    std::string sample_method = "adapted";
    int sample_level = 0;
    std::uint64_t sample_index = 0;
    std::string mesh_out;
    std::string partition_out;
    CLI::App* sample = app.add_subcommand("sample", "Solve one realization and print its QoI");
    add_common(sample, sample_opts);
    sample->add_option("--method", sample_method, "adapted or nonadapted");
    sample->add_option("--level", sample_level, "Level");
    sample->add_option("--index", sample_index, "Realization index below the root seed");
    sample->add_option("--mesh-out", mesh_out, "Write the mesh");
    sample->add_option("--partition-out", partition_out, "Write the partition and jump heights");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*run) {
            return cmd_run(run_opts, out, cache);
        }
        if (*reference) {
            return cmd_reference(ref_opts, ref_cache);
        }
        if (*schedule) {
            return cmd_schedule(sched_method, sched_L, sched_kappa);
        }
        if (*sample) {
            return cmd_sample(sample_opts, sample_method, sample_level, sample_index, mesh_out, partition_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return numerical_error;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return io_error;
    }
    return ok;
}
