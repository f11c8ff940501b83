#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "jmlmc/config.hpp"
#include "jmlmc/error.hpp"
#include "jmlmc/study.hpp"

using namespace jmlmc;

TEST_SUITE("study") {
TEST_CASE("method labels") {
    for (const char* label : {"adapted", "nonadapted", "adapted-coupled", "nonadapted-coupled"}) {
        CHECK(StudyMethod::parse(label).label() == label);
    }
    CHECK(StudyMethod::parse("adapted").code() != StudyMethod::parse("nonadapted").code());
    CHECK(StudyMethod::parse("adapted").code() != StudyMethod::parse("adapted-coupled").code());
}

TEST_CASE("stream keys are distinct") {
    const RandomStream root(5);
    const StudyMethod a = StudyMethod::parse("adapted");
    const StudyMethod n = StudyMethod::parse("nonadapted");
    auto first = [](RandomStream s) { return s.next_u32(); };
    CHECK(first(study_stream(root, a, 1, 0)) != first(study_stream(root, n, 1, 0)));
    CHECK(first(study_stream(root, a, 1, 0)) != first(study_stream(root, a, 2, 0)));
    CHECK(first(study_stream(root, a, 1, 0)) != first(study_stream(root, a, 1, 1)));
    CHECK(first(study_stream(root, a, 1, 0)) != first(reference_stream(root)));
    CHECK(first(study_stream(root, a, 1, 3)) == first(study_stream(root, a, 1, 3)));
}

TEST_CASE("log-log slope") {
    CHECK(fit_loglog_slope({1.0, 0.5, 0.25, 0.125}, {3.0, 0.75, 0.1875, 0.046875}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit_loglog_slope({2.0, 4.0}, {5.0, 5.0}) == doctest::Approx(0.0));
    CHECK(std::isnan(fit_loglog_slope({1.0}, {1.0})));
    CHECK(std::isnan(fit_loglog_slope({1.0, 2.0}, {0.0, 1.0})));
}

TEST_CASE("summary of hand-made rows") {
    std::vector<StudyRow> rows;
    auto add = [&rows](const char* m, int L, double h, double est) {
        StudyRow r;
        r.method = m;
        r.L = L;
        r.h_L = h;
        r.estimate = est;
        r.reference = 2.0;
        r.rel_error = (est - 2.0) / 2.0;
        rows.push_back(r);
    };
    add("x", 0, 0.5, 2.4);
    add("x", 0, 0.5, 1.6);
    add("x", 1, 0.25, 2.1);
    add("x", 1, 0.25, 1.9);
    add("y", 0, 0.5, 3.0);
    const std::vector<SummaryRow> s = summarize(rows);
    REQUIRE(s.size() == 3);
    CHECK(s[0].method == "x");
    CHECK(s[0].reps == 2);
    CHECK(s[0].rel_rmse == doctest::Approx(0.2));
    CHECK(s[1].rel_rmse == doctest::Approx(0.05));
    CHECK(s[0].fitted_slope == doctest::Approx(2.0));
    CHECK(s[2].method == "y");
    CHECK(std::isnan(s[2].fitted_slope));
}

TEST_CASE("small PDE study is reproducible") {
    StudyConfig study;
    study.level_min = 0;
    study.level_max = 0;
    study.reps = 2;
    study.ref_level = 1;
    study.methods = {StudyMethod::parse("adapted"), StudyMethod::parse("nonadapted-coupled")};
    const ProblemConfig problem;
    const auto one = rmse_study(problem, study, 0.008, RandomStream(3), 1);
    const auto two = rmse_study(problem, study, 0.008, RandomStream(3), 2);
    REQUIRE(one.size() == 4);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].estimate == two[i].estimate);
        CHECK(one[i].rel_error == doctest::Approx((one[i].estimate - 0.008) / 0.008));
        CHECK(one[i].h_L == 0.25);
    }
    CHECK(one[0].estimate != one[1].estimate);
    CHECK(one[2].method == "nonadapted-coupled");
}

TEST_CASE("reference cache") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "jmlmc_reference_cache_test";
    fs::remove_all(dir);
    const std::string path = (dir / "ref.json").string();
    const ProblemConfig problem;

    const std::string fp = reference_fingerprint(problem, 0, 1.0, 11);
    CHECK(fp == reference_fingerprint(problem, 0, 1.0, 11));
    CHECK(fp != reference_fingerprint(problem, 1, 1.0, 11));
    CHECK(fp != reference_fingerprint(problem, 0, 1.0, 12));
    ProblemConfig other = problem;
    other.covariance.chi = 0.2;
    CHECK(fp != reference_fingerprint(other, 0, 1.0, 11));

    const ReferenceResult fresh = compute_reference(problem, 0, 1.0, 11, 1, path);
    CHECK(!fresh.from_cache);
    CHECK(fresh.cache_note.empty());
    CHECK(fs::exists(path));
    const EstimatorResult direct =
        mlmc_estimate(build_schedule(0, Method::adapted), problem, reference_stream(RandomStream(11)));
    CHECK(fresh.value == direct.value);

    const ReferenceResult hit = compute_reference(problem, 0, 1.0, 11, 1, path);
    CHECK(hit.from_cache);
    CHECK(hit.value == fresh.value);

    {
        nlohmann::json j;
        j["fingerprint"] = "0000000000000000";
        j["value"] = 123.0;
        std::ofstream(path) << j.dump();
    }
    const ReferenceResult miss = compute_reference(problem, 0, 1.0, 11, 1, path);
    CHECK(!miss.from_cache);
    CHECK(miss.cache_note.find("0000000000000000") != std::string::npos);
    CHECK(miss.value == fresh.value);

    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(compute_reference(problem, 0, 1.0, 11, 1, path), IoError);
    fs::remove_all(dir);
}
}
