#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jmlmc/config.hpp"
#include "jmlmc/error.hpp"
#include "jmlmc/fem.hpp"
#include "jmlmc/jump_field.hpp"
#include "jmlmc/mesh.hpp"
#include "jmlmc/mlmc.hpp"
#include "jmlmc/random_field.hpp"
#include "jmlmc/study.hpp"

namespace py = pybind11;
using namespace jmlmc;

namespace {

Method parse_method(const std::string& name) {
    return StudyMethod::parse(name).method;
}

Config config_from(const std::string& text) {
    return parse_config(text, "<python>");
}

py::dict schedule_dict(const LevelSchedule& s) {
    py::list levels;
    for (const LevelSpec& l : s.levels) {
        py::dict d;
        d["level"] = l.level;
        d["h_bar"] = l.disc.h_bar;
        d["eps"] = l.disc.eps;
        d["dt"] = l.disc.dt;
        d["rho_hat"] = l.rho_hat;
        d["rho"] = l.rho;
        d["samples"] = l.samples;
        levels.append(d);
    }
    py::dict out;
    out["method"] = to_string(s.method);
    out["L"] = s.L;
    out["kappa"] = s.kappa;
    out["rate"] = s.rate;
    out["levels"] = levels;
    return out;
}

py::dict estimate(int L, const std::string& method, std::uint64_t seed, bool coupled, int threads,
                  const std::string& config_text) {
    const Config c = config_from(config_text);
    const LevelSchedule schedule = build_schedule(L, parse_method(method), c.study.kappa);
    EstimatorResult r;
    {
        py::gil_scoped_release release;
        r = coupled ? coupled_mlmc_estimate(schedule, c.problem, RandomStream(seed), {threads})
                    : mlmc_estimate(schedule, c.problem, RandomStream(seed), {threads});
    }
    py::list levels;
    for (const LevelStatistics& l : r.levels) {
        py::dict d;
        d["level"] = l.level;
        d["samples"] = l.samples;
        d["mean"] = l.mean;
        d["variance"] = l.variance;
        d["seconds"] = l.seconds;
        levels.append(d);
    }
    py::dict out;
    out["value"] = r.value;
    out["coupled"] = r.coupled;
    out["levels"] = levels;
    out["covariance"] = r.covariance;
    return out;
}

py::array_t<double> sample_field(double eps, std::uint64_t seed, const std::string& config_text) {
    const Config c = config_from(config_text);
    const CirculantEmbedding embedding(SampleGrid(eps), c.problem.covariance);
    RandomStream rng = RandomStream(seed).child(StreamPurpose::field);
    const GridField f = embedding.sample(rng);
    const auto n = static_cast<py::ssize_t>(f.grid().points_per_side());
    py::array_t<double> out({n, n});
    auto view = out.mutable_unchecked<2>();
    for (py::ssize_t j = 0; j < n; ++j) {
        for (py::ssize_t i = 0; i < n; ++i) {
            view(j, i) = f.value(static_cast<int>(i), static_cast<int>(j));
        }
    }
    return out;
}

py::tuple triangulate(const std::array<double, 4>& chords, double h_max) {
    const Partition partition = quadrangle_partition(chords);
    const Mesh mesh = triangulate_adapted(partition, h_max);
    py::array_t<double> vertices({static_cast<py::ssize_t>(mesh.vertices.size()), py::ssize_t{2}});
    auto v = vertices.mutable_unchecked<2>();
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        v(i, 0) = mesh.vertices[i].x;
        v(i, 1) = mesh.vertices[i].y;
    }
    py::array_t<int> triangles({static_cast<py::ssize_t>(mesh.triangles.size()), py::ssize_t{3}});
    auto t = triangles.mutable_unchecked<2>();
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        for (int c = 0; c < 3; ++c) {
            t(k, c) = mesh.triangles[k][c];
        }
    }
    py::dict info;
    info["h"] = mesh.h;
    info["min_angle"] = min_angle_degrees(mesh);
    info["conforming"] = check_conformity(mesh, partition);
    return py::make_tuple(vertices, triangles, py::cast(mesh.region_of_triangle), info);
}

}  // namespace

PYBIND11_MODULE(_jmlmc, m) {
    m.doc() = "Multilevel Monte Carlo for parabolic problems with jump coefficients";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    m.def("default_config", [] { return serialize_config(Config{}); }, "Canonical text of the default config.");
    m.def(
        "normalize_config", [](const std::string& text) { return serialize_config(config_from(text)); },
        py::arg("text"), "Parse, validate and re-serialize a config.");
    m.def("matern_cov",
          [](double r, double nu, double sigma2, double chi) { return matern_cov(r, CovarianceSpec{nu, sigma2, chi}); },
          py::arg("r"), py::arg("nu") = 1.5, py::arg("sigma2") = 0.25, py::arg("chi") = 0.1);
    m.def(
        "build_schedule",
        [](int L, const std::string& method, double kappa) {
            return schedule_dict(build_schedule(L, parse_method(method), kappa));
        },
        py::arg("L"), py::arg("method") = "adapted", py::arg("kappa") = 1.0);
    m.def("sample_field", &sample_field, py::arg("eps"), py::arg("seed") = 0, py::arg("config") = "",
          "Gaussian field on the (m+1)x(m+1) lattice, indexed [j, i].");
    m.def("triangulate", &triangulate, py::arg("chords"), py::arg("h_max"),
          "Interface-fitted mesh of the cross partition with the given chord endpoints.");
    m.def(
        "solve_path",
        [](int level, const std::string& method, std::uint64_t seed, const std::string& config_text) {
            const Config c = config_from(config_text);
            const Method meth = parse_method(method);
            const LevelSchedule s = build_schedule(level, meth, c.study.kappa);
            py::gil_scoped_release release;
            return solve_path(s.levels.back().disc, meth, RandomStream(seed), c.problem);
        },
        py::arg("level"), py::arg("method") = "adapted", py::arg("seed") = 0, py::arg("config") = "",
        "QoI of one realization at one level.");
    m.def("mlmc_estimate", &estimate, py::arg("L"), py::arg("method") = "adapted", py::arg("seed") = 0,
          py::arg("coupled") = false, py::arg("threads") = 1, py::arg("config") = "");
    m.def("fit_loglog_slope", &fit_loglog_slope, py::arg("x"), py::arg("y"));
}
