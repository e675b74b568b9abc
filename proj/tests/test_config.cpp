#include "doctest.h"
#include "helpers.hpp"
#include "ssdopt/config.hpp"
#include "ssdopt/errors.hpp"

using namespace ssdopt;

namespace {

const char* kCluster = R"({
  "scenario": "cluster_rct",
  "design_space": [
    {"name": "n", "low": 100, "up": 500, "kind": "integer"},
    {"name": "k", "low": 3, "up": 30, "kind": "integer"}
  ],
  "hypotheses": [{"name": "alt", "params": {"beta1": 1.10, "sigma_t2": 0.19, "sigma_d2": 0.37, "sigma_w2": 3.29}}],
  "constraints": [{"label": "type_ii", "hypothesis": "alt", "nominal": 0.1}],
  "objectives": [
    {"label": "participants", "formula": "total_participants"},
    {"label": "providers", "formula": "providers"}
  ],
  "reference_point": [1000, 90],
  "budget": {"initial_points": 20, "n_per_eval": 100, "iterations": 30}
})";

std::vector<std::string> problems_of(const std::string& text) {
    try {
        bind(parse_config(text));
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& ps, const std::string& s) {
    for (const auto& p : ps)
        if (testutil::contains(p, s)) return true;
    return false;
}

}  // namespace

TEST_CASE("a valid config binds") {
    const auto cfg = parse_config(kCluster);
    CHECK(cfg.constraints[0].confidence == 0.9);
    CHECK(cfg.seed == 1);
    const auto b = bind(cfg);
    CHECK(b.problem.space.size() == 2);
    CHECK(b.problem.objectives.evaluate({120, 10}) == ObjectiveVector{240, 30});
    CHECK(b.simulators.count("alt") == 1);
}

TEST_CASE("serialization round-trips on the normalized form") {
    const auto once = serialize(parse_config(kCluster));
    const auto twice = serialize(parse_config(once));
    CHECK(once == twice);
    CHECK(testutil::contains(once, "\"confidence\": 0.9"));
}

TEST_CASE("an unknown scenario is named in the error") {
    std::string text = kCluster;
    text.replace(text.find("cluster_rct"), 11, "cluster_xyz");
    const auto ps = problems_of(text);
    CHECK(mentions(ps, "cluster_xyz"));
    CHECK(mentions(ps, "two_arm_normal"));
}

TEST_CASE("every problem in a config is reported at once") {
    const auto ps = problems_of(R"({
      "scenario": "two_arm_normal",
      "design_space": [{"name": "n", "low": 50, "up": 50, "kind": "integer"}],
      "hypotheses": [{"name": "alt", "params": {"delta": 0.5, "gamma": 2}}],
      "constraints": [{"label": "power", "hypothesis": "alt", "nominal": 0.2, "confidence": 0.9},
                      {"label": "power", "hypothesis": "alt"}],
      "objectives": [{"label": "per_arm_n", "linear": {"m": 1.0}}],
      "reference_point": [200],
      "budget": {"n_per_eval": 0},
      "colour": "blue"
    })");
    CHECK(mentions(ps, "degenerate bound"));
    CHECK(mentions(ps, "duplicate label"));
    CHECK(mentions(ps, "gamma"));
    CHECK(mentions(ps, "'m'"));
    CHECK(mentions(ps, "n_per_eval"));
    CHECK(mentions(ps, "colour"));
    CHECK(ps.size() >= 6);
}

TEST_CASE("malformed JSON is a config error") {
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]"), ConfigError);
}

TEST_CASE("more than three objectives is rejected") {
    const auto ps = problems_of(R"({
      "scenario": "two_arm_normal",
      "design_space": [{"name": "n", "low": 10, "up": 200, "kind": "integer"}],
      "hypotheses": [{"name": "alt", "params": {"delta": 0.5}}],
      "constraints": [{"label": "power", "hypothesis": "alt"}],
      "objectives": [{"label": "a", "linear": {"n": 1}}, {"label": "b", "linear": {"n": 2}},
                     {"label": "c", "linear": {"n": 3}}, {"label": "d", "linear": {"n": 4}}],
      "reference_point": [1, 2, 3, 4]
    })");
    CHECK(mentions(ps, "at most 3 objectives"));
}

TEST_CASE("nominal overrides") {
    auto cfg = parse_config(kCluster);
    apply_nominals(cfg, {{"type_ii", 0.15}});
    CHECK(cfg.constraints[0].nominal == 0.15);
    CHECK_THROWS_AS(apply_nominals(cfg, {{"nope", 0.2}}), ConfigError);
}
