#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ssdopt/acquisition.hpp"
#include "ssdopt/errors.hpp"
#include "ssdopt/stats.hpp"

using namespace ssdopt;

namespace {

double neg_rastrigin(const DesignPoint& x) {
    double s = 10.0 * x.size();
    for (double v : x) s += v * v - 10.0 * std::cos(2 * std::numbers::pi * v);
    return -s;
}

const DesignSpace kUnit2({{"a", 0, 1}, {"b", 0, 1}});

}  // namespace

TEST_CASE("feasibility quantile") {
    CHECK(feasibility_quantile(0.0, 1.0, 0.5) == doctest::Approx(0.0));
    CHECK(feasibility_quantile(-0.06, 0.035 * 0.035, 0.9) == doctest::Approx(-0.015146).epsilon(1e-5));
    CHECK(feasibility_quantile(0.3, 0.0, 0.99) == 0.3);
}

TEST_CASE("quantile update worked example") {
    const auto up = quantile_update(0.1, 0.01, 0.2 * 0.8 / 100, 0.975);
    CHECK(up.mean == doctest::Approx(0.172792).epsilon(1e-6));
    CHECK(up.variance == doctest::Approx(0.00862069).epsilon(1e-7));
}

TEST_CASE("quantile update against direct arithmetic and its limits") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> m(-0.5, 0.5), s2(1e-6, 0.1), w2(1e-6, 0.1), p(0.51, 0.999);
    for (int i = 0; i < 1000; ++i) {
        const double mm = m(rng), ss = s2(rng), ww = w2(rng), pp = p(rng);
        const auto up = quantile_update(mm, ss, ww, pp);
        const double z = stats::normal_quantile(pp);
        CHECK(std::abs(up.mean - (mm + z * std::sqrt(ww * ss / (ww + ss)))) < 1e-12);
        CHECK(std::abs(up.variance - ss * ss / (ww + ss)) < 1e-12);
        const auto far = quantile_update(mm, ss, 1e12, pp);
        CHECK(std::abs(far.mean - feasibility_quantile(mm, ss, pp)) < 1e-6);
        CHECK(std::abs(far.variance) < 1e-6);
        const auto near = quantile_update(mm, ss, 1e-15, pp);
        CHECK(std::abs(near.mean - mm) < 1e-6);
        CHECK(std::abs(near.variance - ss) < 1e-6);
    }
}

TEST_CASE("probability of feasibility") {
    CHECK(prob_feasible_after(0.0, 1.0) == doctest::Approx(0.5));
    CHECK(prob_feasible_after(-1.96, 1.0) == doctest::Approx(0.975002).epsilon(1e-6));
    CHECK(prob_feasible_after(0.5, 0.0) == 0.0);
}

TEST_CASE("expected improvement composes hypervolume gain and feasibility") {
    const DesignSpace space({{"n", 0, 2000}, {"k", 0, 100}});
    const ObjectiveSpec obj{{"a", "b"}, [](const DesignPoint& x) { return x; }};
    const ApproximationSet empty{{}, {1200, 30}};
    gp::GpModel prior({}, {}, {}, {1.0, {0.3, 0.3}});
    const std::vector<ConstraintSurrogate> median{{&prior, {"c", "h", 0.1, 0.5}}};
    CHECK(expected_improvement({982, 10}, space, median, empty, obj, 100) == doctest::Approx(2180.0));

    // Prior variance small enough that m+/s+ exceeds 8 at p = 0.975 and N = 100.
    gp::GpModel tight({}, {}, {}, {4e-5, {0.3, 0.3}});
    const std::vector<ConstraintSurrogate> strict{{&tight, {"c", "h", 0.1, 0.975}}};
    const auto st = feasibility_state({982, 10}, space, strict[0], 100);
    REQUIRE(st.mean_plus / std::sqrt(st.variance_plus) >= 8.0);
    CHECK(expected_improvement({982, 10}, space, strict, empty, obj, 100) < 1e-14 * 4360.0);

    const ApproximationSet with_member{{{{900, 5}, {900, 5}}}, {1200, 30}};
    CHECK(expected_improvement({982, 10}, space, median, with_member, obj, 100) == 0.0);
}

TEST_CASE("PSO finds the sphere optimum") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        PsoConfig cfg;
        cfg.seed = seed;
        const auto r = pso_maximize(
            [](const DesignPoint& x) { return -(std::pow(x[0] - 0.3, 2) + std::pow(x[1] - 0.7, 2)); }, kUnit2, cfg);
        CHECK(std::hypot(r.argmax[0] - 0.3, r.argmax[1] - 0.7) < 1e-3);
    }
}

TEST_CASE("negative Rastrigin has its grid maximum at the origin") {
    double best = -1e9;
    DesignPoint arg;
    for (int i = -512; i <= 512; ++i)
        for (int j = -512; j <= 512; ++j) {
            const DesignPoint x{i / 100.0, j / 100.0};
            const double v = neg_rastrigin(x);
            if (v > best) best = v, arg = x;
        }
    CHECK(arg == DesignPoint{0.0, 0.0});
}

TEST_CASE("PSO locates the Rastrigin optimum in at least 95 of 100 runs") {
    const DesignSpace box({{"a", -5.12, 5.12}, {"b", -5.12, 5.12}});
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        PsoConfig cfg;
        cfg.seed = seed;
        const auto r = pso_maximize(neg_rastrigin, box, cfg);
        if (std::hypot(r.argmax[0], r.argmax[1]) < 1e-2) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("PSO on a constant returns an in-bounds point") {
    const auto r = pso_maximize([](const DesignPoint&) { return 3.5; }, kUnit2, {});
    CHECK(r.value == 3.5);
    CHECK(kUnit2.contains(r.argmax));
}

TEST_CASE("PSO is deterministic per seed and validates its config") {
    PsoConfig cfg;
    cfg.seed = 8;
    const auto a = pso_maximize(neg_rastrigin, kUnit2, cfg), b = pso_maximize(neg_rastrigin, kUnit2, cfg);
    CHECK(a.argmax == b.argmax);
    cfg.inertia = 1.2;
    CHECK_THROWS_AS(pso_maximize(neg_rastrigin, kUnit2, cfg), PreconditionError);
}
