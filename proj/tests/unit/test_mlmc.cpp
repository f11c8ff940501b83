#include <doctest.h>

#include <cmath>
#include <string>

#include "jmlmc/error.hpp"
#include "jmlmc/mlmc.hpp"

using namespace jmlmc;

namespace {

LevelSchedule synthetic_schedule(std::vector<std::int64_t> samples) {
    LevelSchedule s = build_schedule(static_cast<int>(samples.size()) - 1, Method::adapted);
    for (std::size_t l = 0; l < samples.size(); ++l) {
        s.levels[l].samples = samples[l];
    }
    return s;
}

class FailingSampler final : public LevelSampler {
public:
    int max_level() const override { return 2; }
    std::vector<double> evaluate(const RandomStream& omega, int coarsest, int finest) const override {
        RandomStream probe = omega;
        if (finest == 1 && probe.next_u32() % 3 == 0) {
            throw NumericalError("boom");
        }
        return std::vector<double>(static_cast<std::size_t>(finest - coarsest + 1), 1.0);
    }
};

}  // namespace

TEST_SUITE("mlmc") {
TEST_CASE("schedule examples") {
    const LevelSchedule a0 = build_schedule(0, Method::adapted);
    REQUIRE(a0.levels.size() == 1);
    CHECK(a0.levels[0].disc.h_bar == 0.25);
    CHECK(a0.levels[0].disc.eps == 1.0 / 16);
    CHECK(a0.levels[0].disc.dt == 1.0 / 16);
    CHECK(a0.levels[0].samples == 256);

    const LevelSchedule a2 = build_schedule(2, Method::adapted);
    CHECK(a2.levels[1].disc.h_bar == doctest::Approx(std::pow(2.0, -2.5)).epsilon(1e-16));
    CHECK(a2.levels[2].disc.h_bar == 0.125);
    CHECK(a2.levels[0].samples == 4096);
    CHECK(a2.levels[1].samples == 3);
    const double r1 = std::pow(2.0, -1.001) / (std::pow(2.0, -1.001) + std::pow(3.0, -1.001));
    CHECK(a2.levels[1].rho_hat == doctest::Approx(r1).epsilon(1e-15));
    CHECK(a2.levels[2].disc.eps == 1.0 / 64);

    const LevelSchedule n1 = build_schedule(1, Method::nonadapted);
    CHECK(n1.levels[0].disc.h_bar == 0.25);
    CHECK(n1.levels[1].disc.h_bar == 0.125);
    CHECK(n1.levels[1].disc.eps == 0.125);
    CHECK(n1.levels[0].samples == 64);
    CHECK(n1.levels[1].samples == 1);
    CHECK(n1.levels[1].rho_hat == 1.0);

    CHECK_THROWS_AS(build_schedule(-1, Method::adapted), ConfigError);
    CHECK_THROWS_AS(build_schedule(2, Method::adapted, 0.4), ConfigError);
}

TEST_CASE("schedule invariants") {
    for (Method m : {Method::adapted, Method::nonadapted}) {
        for (int L = 0; L <= 7; ++L) {
            const LevelSchedule s = build_schedule(L, m);
            s.validate();
            double rho_sum = 0.0;
            const double hL = s.levels.back().disc.h_bar;
            for (const LevelSpec& l : s.levels) {
                const double h = l.disc.h_bar;
                if (m == Method::adapted) {
                    CHECK(l.disc.eps == doctest::Approx(h * h).epsilon(1e-15));
                } else {
                    CHECK(l.disc.eps == h);
                }
                CHECK(l.disc.dt == l.disc.eps);
                rho_sum += l.rho;
                if (l.level > 0) {
                    const double lhs = std::pow(h, s.rate) / std::sqrt(static_cast<double>(l.samples));
                    CHECK(lhs <= l.rho * std::pow(hL, s.rate) * (1 + 1e-12));
                    CHECK(lhs > 0.0);
                }
            }
            CHECK(rho_sum <= s.c_rho * (1 + 1e-12));
        }
    }
}

TEST_CASE("deterministic synthetic levels telescope exactly") {
    const SyntheticSampler sampler({{1.0, 0, 0}, {1.5, 0, 0}, {1.75, 0, 0}});
    const LevelSchedule s = synthetic_schedule({50, 20, 5});
    const EstimatorResult e = mlmc_estimate(s, sampler, RandomStream(1));
    const EstimatorResult c = coupled_mlmc_estimate(s, sampler, RandomStream(1));
    CHECK(e.value == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(c.value == doctest::Approx(1.75).epsilon(1e-15));
    for (const EstimatorResult* r : {&e, &c}) {
        double sum = 0.0;
        for (const auto& l : r->levels) {
            sum += l.mean;
            CHECK(l.variance >= 0.0);
        }
        CHECK(std::abs(sum - r->value) <= 1e-12);
    }
}

TEST_CASE("plain Monte Carlo at L = 0 and coupled equality") {
    const SyntheticSampler sampler({{2.0, 1.0, 0.5}});
    const LevelSchedule s = synthetic_schedule({300});
    const RandomStream stream(77);
    const EstimatorResult e = mlmc_estimate(s, sampler, stream);
    const EstimatorResult c = coupled_mlmc_estimate(s, sampler, stream);
    CHECK(e.value == c.value);
    double mean = 0.0;
    for (std::int64_t i = 0; i < 300; ++i) {
        mean += sampler.evaluate(stream.child(std::uint64_t{0}).child(static_cast<std::uint64_t>(i)), 0, 0)[0];
    }
    CHECK(e.value == doctest::Approx(mean / 300).epsilon(1e-14));
}

TEST_CASE("synthetic unbiasedness and covariance bookkeeping") {
    const SyntheticSampler sampler({{1.0, 1.0, 0.4}, {1.2, 1.1, 0.2}, {1.25, 1.15, 0.1}});
    const LevelSchedule s = synthetic_schedule({40, 10, 4});
    const std::vector<std::int64_t> m{40, 10, 4};
    const int reps = 200;
    double se = 0.0;
    double ce = 0.0;
    for (int r = 0; r < reps; ++r) {
        se += mlmc_estimate(s, sampler, RandomStream(1000 + r)).value;
        ce += coupled_mlmc_estimate(s, sampler, RandomStream(5000 + r)).value;
    }
    se /= reps;
    ce /= reps;
    CHECK(std::abs(se - 1.25) <= 3.0 * std::sqrt(sampler.standard_variance(m) / reps));
    CHECK(std::abs(ce - 1.25) <= 3.0 * std::sqrt(sampler.coupled_variance(m) / reps));
    CHECK(std::abs(se - ce) <= 3.0 * std::sqrt((sampler.standard_variance(m) + sampler.coupled_variance(m)) / reps));

    const EstimatorResult big = coupled_mlmc_estimate(synthetic_schedule({20000, 20000, 20000}), sampler, RandomStream(3));
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            CHECK(big.covariance[j][k] == doctest::Approx(sampler.correction_covariance(j, k)).epsilon(0.1).scale(0.05));
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    const SyntheticSampler sampler({{1.0, 1.0, 0.4}, {1.2, 1.1, 0.2}});
    const LevelSchedule s = synthetic_schedule({500, 60});
    for (int threads : {2, 3, 8}) {
        CHECK(mlmc_estimate(s, sampler, RandomStream(9), {threads}).value ==
              mlmc_estimate(s, sampler, RandomStream(9), {1}).value);
        CHECK(coupled_mlmc_estimate(s, sampler, RandomStream(9), {threads}).covariance ==
              coupled_mlmc_estimate(s, sampler, RandomStream(9), {1}).covariance);
    }
}

TEST_CASE("failures carry the level and sample index") {
    const LevelSchedule s = synthetic_schedule({5, 5});
    try {
        mlmc_estimate(s, FailingSampler{}, RandomStream(1), {2});
        FAIL("expected an error");
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("level 1, sample") != std::string::npos);
        CHECK(msg.find("boom") != std::string::npos);
    }
    LevelSchedule increasing = synthetic_schedule({5, 6});
    CHECK_THROWS_AS(coupled_mlmc_estimate(increasing, FailingSampler{}, RandomStream(1)), ConfigError);
}

TEST_CASE("PDE sampler couples levels through nested fields") {
    const ProblemConfig problem;
    for (Method m : {Method::adapted, Method::nonadapted}) {
        const LevelSchedule s = build_schedule(2, m);
        const PdeSampler sampler(s, problem);
        const RandomStream omega = RandomStream(31).child(std::uint64_t{2}).child(std::uint64_t{0});
        const std::vector<double> pair = sampler.evaluate(omega, 1, 2);
        const CirculantEmbedding fine(SampleGrid(s.levels[2].disc.eps), problem.covariance);
        const CoefficientSample sample = sample_coefficient(fine, omega, problem);
        const CoefficientSample coarse = sample.with_field(sample.field().coarsen_nested());
        CHECK(coarse.field().grid() == SampleGrid(s.levels[1].disc.eps));
        CHECK(pair[1] == evaluate_path(sample, s.levels[2].disc, m, problem));
        CHECK(pair[0] == evaluate_path(coarse, s.levels[1].disc, m, problem));
        CHECK(sampler.evaluate(omega, 2, 2)[0] == pair[1]);
    }
}

TEST_CASE("PDE estimators at L = 0 agree bitwise") {
    const ProblemConfig problem;
    LevelSchedule s = build_schedule(0, Method::adapted);
    s.levels[0].samples = 12;
    const PdeSampler sampler(s, problem);
    const EstimatorResult e = mlmc_estimate(s, sampler, RandomStream(4), {2});
    const EstimatorResult c = coupled_mlmc_estimate(s, sampler, RandomStream(4), {1});
    CHECK(e.value == c.value);
    CHECK(std::isfinite(e.value));
}
}
