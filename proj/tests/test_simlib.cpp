#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "ssdopt/errors.hpp"
#include "ssdopt/montecarlo.hpp"
#include "ssdopt/simlib.hpp"

using namespace ssdopt;
using namespace ssdopt::simlib;

namespace {

// Two-sided pooled t-test power for equal-variance cluster means, from Boost.
double noncentral_t_power(double effect, double unit_var, int u1, int u0, double alpha, bool two_sided = true) {
    const double df = u1 + u0 - 2;
    const double ncp = effect / std::sqrt(unit_var * (1.0 / u1 + 1.0 / u0));
    const double tail = two_sided ? alpha / 2 : alpha;
    const double crit = boost::math::quantile(boost::math::complement(boost::math::students_t(df), tail));
    boost::math::non_central_t nct(df, ncp);
    double p = boost::math::cdf(boost::math::complement(nct, crit));
    if (two_sided) p += boost::math::cdf(nct, -crit);
    return p;
}

// Rejection probability of the pooled two-proportion z-test by direct binomial summation.
double binary_power_sum(int n, double p0, double p1, double alpha) {
    const double z = 1.959963984540054;
    boost::math::binomial b0(n, p0), b1(n, p1);
    double total = 0;
    for (int x0 = 0; x0 <= n; ++x0)
        for (int x1 = 0; x1 <= n; ++x1) {
            const double pool = (x0 + x1) / (2.0 * n);
            const double se = std::sqrt(pool * (1 - pool) * 2.0 / n);
            if (se > 0 && std::abs(x1 - x0) / (n * se) > z) total += boost::math::pdf(b0, x0) * boost::math::pdf(b1, x1);
        }
    (void)alpha;
    return total;
}

ClusterHypothesis cluster_hyp(double effect, double st, double sd, double sw) { return {effect, {st, sd, sw}, 0.05}; }

}  // namespace

TEST_CASE("two-arm normal oracle") {
    CHECK(two_arm_normal_power(63, {0.5, 1.0, 0.05}) == doctest::Approx(0.80128).epsilon(1e-4));
    for (int n : {10, 63, 200}) CHECK(two_arm_normal_power(n, {0.0, 1.0, 0.05}) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("two-arm binary oracle") {
    CHECK(two_arm_binary_power(135, {0.1, 0.25, 0.05}) >= 0.90);
    for (int n : {100, 150, 200}) {
        const double size = two_arm_binary_power(n, {0.2, 0.2, 0.05});
        CHECK(size >= 0.8 * 0.05);
        CHECK(size <= 1.2 * 0.05);
    }
    CHECK(two_arm_binary_power(50, {0.1, 0.25, 0.05}) ==
          doctest::Approx(binary_power_sum(50, 0.1, 0.25, 0.05)).epsilon(1e-10));
}

TEST_CASE("two-arm binary Monte Carlo matches the exact sum at n = 50") {
    const BinaryHypothesis h{0.1, 0.25, 0.05};
    const TrialSimulator sim = [&](const DesignPoint&, const Hypothesis&, Rng& rng) {
        return two_arm_binary_simulate(50, h, rng);
    };
    const auto est = mc_estimate(sim, {50}, {"h", {}}, 100000, 21);
    CHECK(testutil::within_3se(est.mean, binary_power_sum(50, 0.1, 0.25, 0.05), 1e5));
}

TEST_CASE("cluster layouts") {
    const auto l = ClusterLayout::balanced(100, 100, 5, 10);
    CHECK(l.units1() == 5);
    CHECK(l.units0() == 5);
    CHECK(l.per_therapist == 20);
    CHECK(l.per_doctor0 == 20);
    CHECK_THROWS_AS(ClusterLayout::balanced(101, 101, 5, 10), PreconditionError);
    const auto t = ClusterLayout::trimmed(101, 101, 5, 10);
    CHECK(t.participants1() == 100);
    CHECK(t.participants0() <= 101);
}

TEST_CASE("cluster oracle equals a noncentral t when arm variances agree") {
    // No therapist variance and one doctor per therapist make the two arms' cluster means
    // equally variable, so the pooled t statistic is exactly noncentral t.
    for (int k : {3, 5, 10}) {
        const auto l = ClusterLayout::balanced(20 * k, 20 * k, k, 2 * k);
        const auto h = cluster_hyp(1.1, 0.0, 0.37, 3.29);
        REQUIRE(l.unit_variance1(h.variances) == doctest::Approx(l.unit_variance0(h.variances)));
        const double ref = noncentral_t_power(1.1, l.unit_variance0(h.variances), l.units1(), l.units0(), 0.05);
        CHECK(cluster_rct_power(l, h) == doctest::Approx(ref).epsilon(1e-7));
    }
}

TEST_CASE("cluster oracle without clustering reduces to the df-corrected two-arm test") {
    const auto l = ClusterLayout::balanced(120, 120, 6, 12);
    const double ref = noncentral_t_power(0.5, 1.0 / 20, 6, 6, 0.05);
    CHECK(cluster_rct_power(l, cluster_hyp(0.5, 0.0, 0.0, 1.0)) == doctest::Approx(ref).epsilon(1e-7));
}

TEST_CASE("cluster oracle has size alpha under the null when arm variances agree") {
    for (int k : {3, 8}) {
        const auto l = ClusterLayout::balanced(20 * k, 20 * k, k, 2 * k);
        CHECK(cluster_rct_power(l, cluster_hyp(0.0, 0.0, 0.37, 3.29)) == doctest::Approx(0.05).epsilon(1e-9));
    }
}

TEST_CASE("cluster oracle size stays near alpha when arm variances differ") {
    // The pooled t-test is only approximately sized when cluster means are unequally variable.
    for (auto l : {ClusterLayout::balanced(300, 300, 10, 20), ClusterLayout::trimmed(250, 250, 17, 34),
                   ClusterLayout::balanced(120, 120, 12, 6)}) {
        const double size = cluster_rct_power(l, cluster_hyp(0.0, 0.19, 0.37, 3.29));
        CHECK(size > 0.045);
        CHECK(size < 0.055);
    }
}

TEST_CASE("co-primary oracle limits") {
    const auto l = ClusterLayout::balanced(200, 200, 8, 16);
    BivariateHypothesis h;
    h.effect_f = 1.1;
    h.effect_d = 0.9;
    const double pf = cluster_rct_power(l, {h.effect_f, h.variances, h.alpha});
    const double pd = cluster_rct_power(l, {h.effect_d, h.variances, h.alpha});
    CHECK(co_primary_power(l, h) == doctest::Approx(pf * pd).epsilon(2e-3));
    h.rho = {0.9, 0.9, 0.9};
    CHECK(co_primary_power(l, h) <= std::min(pf, pd) + 1e-3);
    h.effect_d = h.effect_f;
    h.rho = {1.0, 1.0, 1.0};
    CHECK(co_primary_power(l, h) == doctest::Approx(pf).epsilon(2e-3));
}

TEST_CASE("pilot union oracle limits") {
    const auto l = ClusterLayout::balanced(60, 60, 3, 6);
    BivariateHypothesis h;
    h.effect_f = h.effect_d = 0.0;
    for (double a : {0.05, 0.1, 0.2}) {
        h.alpha = a;
        CHECK(pilot_either_power(l, h) == doctest::Approx(2 * a - a * a).epsilon(2e-3));
    }
    h.alpha = 0.1;
    h.effect_f = h.effect_d = 1.1;
    h.variances.therapist = 0.0;
    h.rho = {1.0, 1.0, 1.0};
    const double marginal = noncentral_t_power(1.1, l.unit_variance0(h.variances), l.units1(), l.units0(), 0.1, false);
    CHECK(pilot_either_power(l, h) == doctest::Approx(marginal).epsilon(2e-3));
    h.rho = {0.3, 0.3, 0.3};
    CHECK(pilot_either_power(l, h) >= marginal - 1e-3);
}

TEST_CASE("registry binds every built-in scenario") {
    for (const char* name : {"two_arm_normal", "two_arm_binary", "cluster_rct", "co_primary", "pilot_either"})
        CHECK(has_scenario(name));
    CHECK_FALSE(has_scenario("nope"));
    const auto s = make_scenario("cluster_rct", DesignSpace({{"n", 100, 500, DimKind::integer},
                                                             {"k", 3, 30, DimKind::integer}}));
    CHECK(s.formulas.at("total_participants")({120, 10}) == 240);
    CHECK(s.formulas.at("providers")({120, 10}) == 30);
}
