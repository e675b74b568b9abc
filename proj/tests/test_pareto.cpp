#include <algorithm>
#include <random>

#include "doctest.h"
#include "ssdopt/errors.hpp"
#include "ssdopt/pareto.hpp"

using namespace ssdopt;

namespace {

const std::vector<ObjectiveVector> kFigure{{589, 24}, {705, 20}, {810, 12}, {982, 10}};
const ObjectiveVector kRef{1200, 30};

std::vector<ParetoMember> members(const std::vector<ObjectiveVector>& objs) {
    std::vector<ParetoMember> out;
    for (const auto& o : objs) out.push_back({o, o});
    return out;
}

// Union volume by inclusion-exclusion over every subset of boxes [p, r].
double inclusion_exclusion(const std::vector<ObjectiveVector>& pts, const ObjectiveVector& r) {
    const std::size_t n = pts.size();
    double total = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        ObjectiveVector corner(r.size(), -1e300);
        int bits = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1u) {
                ++bits;
                for (std::size_t j = 0; j < r.size(); ++j) corner[j] = std::max(corner[j], pts[i][j]);
            }
        double vol = 1;
        for (std::size_t j = 0; j < r.size(); ++j) vol *= std::max(0.0, r[j] - corner[j]);
        total += (bits % 2 ? vol : -vol);
    }
    return total;
}

}  // namespace

TEST_CASE("dominance fixtures") {
    CHECK(dominates({200, 10}, {240, 10}));
    CHECK_FALSE(dominates({200, 10}, {160, 13}));
    CHECK_FALSE(dominates({200, 10}, {200, 10}));
}

TEST_CASE("pareto_filter drops the dominated point") {
    auto pts = kFigure;
    pts.push_back({1000, 25});
    const auto kept = pareto_filter(members(pts));
    REQUIRE(kept.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(kept[i].objectives == kFigure[i]);
}

TEST_CASE("pareto_filter singletons and duplicates") {
    CHECK(pareto_filter(members({{3, 4}})).size() == 1);
    const auto dup = pareto_filter({{{1}, {5, 5}}, {{2}, {5, 5}}, {{3}, {5, 5}}});
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].point == DesignPoint{1});
}

TEST_CASE("hypervolume fixture is 9202") {
    CHECK(hypervolume(kFigure, kRef) == 9202.0);
    CHECK(hypervolume(ApproximationSet{members(kFigure), kRef}) == 9202.0);
}

TEST_CASE("hypervolume of single boxes") {
    CHECK(hypervolume({{1200, 30}}, kRef) == 0.0);
    CHECK(hypervolume({{982, 10}}, kRef) == 4360.0);
    CHECK(hypervolume({}, kRef) == 0.0);
    CHECK(hypervolume({{3.0}, {5.0}}, {10.0}) == 7.0);
    CHECK(hypervolume({{1300, 10}}, kRef) == 0.0);
}

TEST_CASE("hypervolume matches inclusion-exclusion in one to three objectives") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 10);
    for (std::size_t b = 1; b <= 3; ++b)
        for (int t = 0; t < 60; ++t) {
            std::vector<ObjectiveVector> pts(1 + t % 9);
            for (auto& p : pts) {
                p.resize(b);
                for (auto& v : p) v = u(rng);
            }
            const ObjectiveVector ref(b, 9.0);
            CHECK(hypervolume(pts, ref) == doctest::Approx(inclusion_exclusion(pts, ref)).epsilon(1e-10));
        }
}

TEST_CASE("three-objective hypervolume agrees with a 1e6-sample Monte Carlo estimate") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<ObjectiveVector> pts(12);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
    const ObjectiveVector ref{1, 1, 1};
    int hits = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const ObjectiveVector z{u(rng), u(rng), u(rng)};
        for (const auto& p : pts)
            if (p[0] <= z[0] && p[1] <= z[1] && p[2] <= z[2]) {
                ++hits;
                break;
            }
    }
    const double est = static_cast<double>(hits) / n;
    const double h = hypervolume(pts, ref);
    CHECK(std::abs(est - h) < 3 * std::sqrt(h * (1 - h) / n) + 1e-12);
}

TEST_CASE("more than three objectives is unsupported") {
    CHECK_THROWS_AS(hypervolume({{1, 2, 3, 4}}, {5, 5, 5, 5}), UnsupportedDimensionError);
}

TEST_CASE("hypervolume improvement") {
    const ApproximationSet set{members(kFigure), kRef};
    CHECK(hypervolume_improvement(set, {1000, 25}) == 0.0);
    CHECK(hypervolume_improvement({{}, kRef}, {982, 10}) == 4360.0);
    CHECK(hypervolume_improvement(set, {1300, 5}) == 0.0);
    CHECK(hypervolume_improvement(set, {700, 15}) == doctest::Approx(hypervolume([&] {
                                                                         auto p = kFigure;
                                                                         p.push_back({700, 15});
                                                                         return p;
                                                                     }(),
                                                                     kRef) -
                                                                     9202.0));
}
