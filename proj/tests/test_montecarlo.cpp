#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ssdopt/errors.hpp"
#include "ssdopt/montecarlo.hpp"
#include "ssdopt/simlib.hpp"

using namespace ssdopt;

namespace {

const Hypothesis kNone{"h", {}};

bool coin(const DesignPoint&, const Hypothesis&, Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace

TEST_CASE("always-true simulator") {
    const auto est = mc_estimate([](const DesignPoint&, const Hypothesis&, Rng&) { return true; }, {}, kNone, 100, 7);
    CHECK(est.mean == 1.0);
    CHECK(est.successes == 100);
    CHECK(est.n_samples == 100);
}

TEST_CASE("fair coin at N = 1e5 lands within three standard errors") {
    const auto est = mc_estimate(coin, {}, kNone, 100000, 11);
    CHECK(std::abs(est.mean - 0.5) <= 0.00474);
    CHECK(est.variance == doctest::Approx(est.mean * (1 - est.mean) / 100000));
}

TEST_CASE("two-arm z-test at n = 63 matches the closed-form power") {
    const simlib::NormalHypothesis h{0.5, 1.0, 0.05};
    const TrialSimulator sim = [&](const DesignPoint&, const Hypothesis&, Rng& rng) {
        return simlib::two_arm_normal_simulate(63, h, rng);
    };
    const auto est = mc_estimate(sim, {63}, kNone, 100000, 5);
    CHECK(testutil::within_3se(est.mean, simlib::two_arm_normal_power(63, h), 1e5));
}

TEST_CASE("estimates do not depend on the worker count") {
    const auto one = mc_estimate(coin, {}, kNone, 20000, 99, 3, 1);
    for (int w : {4, 16}) {
        const auto many = mc_estimate(coin, {}, kNone, 20000, 99, 3, w);
        CHECK(many.successes == one.successes);
        CHECK(many.mean == one.mean);
    }
}

TEST_CASE("a throwing simulator reports the replicate and its seed") {
    int calls = 0;
    const TrialSimulator sim = [&](const DesignPoint&, const Hypothesis&, Rng&) -> bool {
        if (++calls == 37) throw std::runtime_error("boom");
        return false;
    };
    try {
        mc_estimate(sim, {}, kNone, 100, 42, 5, 1);
        FAIL("expected SimulationError");
    } catch (const SimulationError& e) {
        CHECK(e.replicate() == 36);
        CHECK(e.replicate_seed() == derive_replicate_seed(42, 5, 36));
    }
}

TEST_CASE("replicate streams can be replayed from the reported seed") {
    std::vector<std::uint64_t> first;
    const TrialSimulator record = [&](const DesignPoint&, const Hypothesis&, Rng& rng) {
        first.push_back(rng());
        return false;
    };
    mc_estimate(record, {}, kNone, 10, 3, 2, 1);
    for (std::uint64_t r = 0; r < 10; ++r) {
        Rng rng(derive_replicate_seed(3, 2, r));
        CHECK(rng() == first[r]);
    }
}

TEST_CASE("derived seeds are deterministic and collision free over 1e6 draws") {
    CHECK(derive_replicate_seed(17, 0, 0) == derive_replicate_seed(17, 0, 0));
    CHECK(derive_replicate_seed(17, 0, 0) != derive_replicate_seed(17, 0, 1));
    std::vector<std::uint64_t> seeds;
    seeds.reserve(1000000);
    for (std::uint64_t e = 0; e < 1000; ++e)
        for (std::uint64_t r = 0; r < 1000; ++r) seeds.push_back(derive_replicate_seed(17, e, r));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("standard error shrinks like one over root N") {
    auto spread = [](std::int64_t n) {
        double s = 0, s2 = 0;
        const int reps = 400;
        for (int i = 0; i < reps; ++i) {
            const double m = mc_estimate(coin, {}, kNone, n, 1234, static_cast<std::uint64_t>(i)).mean;
            s += m;
            s2 += m * m;
        }
        return std::sqrt(s2 / reps - (s / reps) * (s / reps));
    };
    const double ratio = spread(100) / spread(1600);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.3);
}

TEST_CASE("non-positive sample counts are rejected") {
    CHECK_THROWS_AS(mc_estimate(coin, {}, kNone, 0, 1), PreconditionError);
}
