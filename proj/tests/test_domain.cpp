#include "doctest.h"
#include "helpers.hpp"
#include "ssdopt/domain.hpp"
#include "ssdopt/errors.hpp"

using namespace ssdopt;

namespace {

DesignSpace cluster_space() {
    return DesignSpace({{"n", 100, 500, DimKind::integer}, {"k", 3, 30, DimKind::integer}});
}

ObjectiveSpec two_objectives() {
    return {{"participants", "providers"}, [](const DesignPoint& x) { return ObjectiveVector{2 * x[0], 3 * x[1]}; }};
}

bool any_contains(const ValidationReport& r, const std::string& s) {
    for (const auto& v : r.violations)
        if (testutil::contains(v, s)) return true;
    return false;
}

}  // namespace

TEST_CASE("validate_problem accepts the two-dimensional cluster space") {
    const auto r = validate_problem(cluster_space(), two_objectives(), {{"type_ii", "alt", 0.1, 0.9}});
    CHECK(r.ok());
}

TEST_CASE("validate_problem flags a degenerate bound") {
    DesignSpace space({{"n", 100, 100, DimKind::integer}});
    const auto r = validate_problem(space, {{"n"}, [](const DesignPoint& x) { return x; }}, {{"c", "h", 0.1, 0.9}});
    CHECK(any_contains(r, "degenerate bound"));
}

TEST_CASE("validate_problem flags duplicate constraint labels and lists every problem") {
    DesignSpace space({{"n", 10, 10, DimKind::integer}});
    const auto r = validate_problem(space, {{"n"}, [](const DesignPoint& x) { return x; }},
                                    {{"c", "h", 0.1, 0.9}, {"c", "h", 0.2, 0.9}});
    CHECK(any_contains(r, "duplicate label"));
    CHECK(any_contains(r, "degenerate bound"));
}

TEST_CASE("constraint_value subtracts the nominal bound") {
    const Constraint c{"beta", "alt", 0.10, 0.9};
    CHECK(constraint_value(0.11, c) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(constraint_value(0.10, c) == doctest::Approx(0.0));
    CHECK(constraint_value(0.093, c) == doctest::Approx(-0.007).epsilon(1e-12));
}

TEST_CASE("bounded_rate maps rejection rates onto the bounded error") {
    Constraint c{"beta", "alt", 0.1, 0.9, ErrorRate::type_ii};
    CHECK(bounded_rate(0.85, c) == doctest::Approx(0.15));
    c.rate = ErrorRate::type_i;
    CHECK(bounded_rate(0.04, c) == doctest::Approx(0.04));
}

TEST_CASE("mc_variance clamps the estimate away from 0 and 1") {
    CHECK(mc_variance(0.5, 100) == doctest::Approx(0.0025));
    const double lo = 1.0 / 200.0;
    CHECK(mc_variance(0.0, 100) == doctest::Approx(lo * (1 - lo) / 100));
    CHECK(mc_variance(1.0, 100) == doctest::Approx(lo * (1 - lo) / 100));
    for (double p = 0.0; p <= 1.0; p += 0.01) {
        CHECK(mc_variance(p, 100) > 0.0);
        CHECK(mc_variance(p, 100) <= 0.25 / 100 + 1e-15);
    }
}

TEST_CASE("snap rounds integer dimensions and clips to the box") {
    DesignSpace space({{"n", 100, 500, DimKind::integer}, {"r", 0.5, 1.5, DimKind::continuous}});
    const auto x = space.snap({99.2, 1.7});
    CHECK(x[0] == 100);
    CHECK(x[1] == 1.5);
    CHECK(space.snap({250.6, 0.7})[0] == 251);
    CHECK(space.contains(space.snap({1e9, -1e9})));
    const auto u = space.to_unit({300, 1.0});
    CHECK(u[0] == doctest::Approx(0.5));
    CHECK(space.from_unit(u)[1] == doctest::Approx(1.0));
}

TEST_CASE("missing hypothesis parameters raise a precondition error naming the key") {
    Hypothesis h{"alt", {{"delta", 0.5}}};
    CHECK(h.param("delta") == 0.5);
    CHECK(h.param_or("sigma", 2.0) == 2.0);
    try {
        h.param("sigma");
        FAIL("expected an exception");
    } catch (const PreconditionError& e) {
        CHECK(testutil::contains(e.what(), "sigma"));
    }
}
