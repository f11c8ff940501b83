#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "jmlmc/error.hpp"
#include "jmlmc/report.hpp"

using namespace jmlmc;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

std::vector<StudyRow> slope_two_rows() {
    std::vector<StudyRow> rows;
    for (int L = 0; L < 4; ++L) {
        const double h = 0.25 * std::pow(2.0, -0.5 * L);
        for (int rep = 0; rep < 2; ++rep) {
            StudyRow r;
            r.method = "adapted";
            r.L = L;
            r.h_L = h;
            r.rep = rep;
            r.reference = 0.5;
            r.estimate = 0.5 + (rep ? -1.0 : 1.0) * 0.5 * 3.0 * h * h;
            r.rel_error = (r.estimate - r.reference) / r.reference;
            r.seconds = 0.1 * (L + 1);
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace

TEST_SUITE("report") {
TEST_CASE("study.csv round trip reproduces the summary exactly") {
    std::vector<StudyRow> rows = slope_two_rows();
    rows[3].estimate = 0.1 + 0.2;
    std::ostringstream a;
    write_study_csv(a, rows);
    std::istringstream in(a.str());
    const std::vector<StudyRow> back = read_study_csv(in);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].estimate == rows[i].estimate);
        CHECK(back[i].h_L == rows[i].h_L);
        CHECK(back[i].method == rows[i].method);
    }
    std::ostringstream s1;
    std::ostringstream s2;
    write_summary_csv(s1, summarize(rows));
    write_summary_csv(s2, summarize(back));
    CHECK(s1.str() == s2.str());
    CHECK(s1.str().rfind("method,L,h_L,reps,rel_rmse,fitted_slope\n", 0) == 0);

    std::istringstream bad("method,L\n");
    CHECK_THROWS_AS(read_study_csv(bad), IoError);
    std::istringstream short_row("method,L,h_L,rep,estimate,reference,rel_error\nx,1,2\n");
    CHECK_THROWS_AS(read_study_csv(short_row), IoError);
}

TEST_CASE("exact slope-2 data is annotated as 2.00") {
    const auto summary = summarize(slope_two_rows());
    CHECK(summary.front().fitted_slope == doctest::Approx(2.0).epsilon(1e-12));
    const std::string svg = render_rmse_svg(summary);
    CHECK(svg.find("fitted slope 2.00") != std::string::npos);
    CHECK(count(svg, "class=\"guide\"") == 2);
    CHECK(count(svg, "class=\"marker\"") == 8);
}

TEST_CASE("single point gives one marker per panel") {
    SummaryRow r;
    r.method = "nonadapted";
    r.h_L = 0.25;
    r.reps = 1;
    r.rel_rmse = 0.1;
    r.fitted_slope = std::nan("");
    const std::string svg = render_rmse_svg({r});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count(svg, "class=\"marker\"") == 1);
    CHECK(svg.find("no timing data") != std::string::npos);
    CHECK(svg.find("slope n/a") != std::string::npos);
}

TEST_CASE("two methods give two legend entries and colours") {
    auto rows = slope_two_rows();
    for (auto r : slope_two_rows()) {
        r.method = "nonadapted";
        r.estimate = r.reference + (r.estimate - r.reference) / r.h_L;
        rows.push_back(r);
    }
    const std::string svg = render_rmse_svg(summarize(rows));
    CHECK(count(svg, "class=\"legend\"") == 2);
    CHECK(svg.find("adapted (fitted slope 2.00)") != std::string::npos);
    CHECK(svg.find("nonadapted (fitted slope 1.00)") != std::string::npos);
    CHECK(svg.find("#1f77b4") != std::string::npos);
    CHECK(svg.find("#d62728") != std::string::npos);
}
}
