#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssdopt/acquisition.hpp"
#include "ssdopt/domain.hpp"
#include "ssdopt/engine.hpp"
#include "ssdopt/simlib.hpp"

namespace ssdopt {

/// Either a linear combination of design values or a scenario formula id.
struct ObjectiveConfig {
    std::string label;
    std::map<std::string, double> linear;
    std::string formula;
};

struct ProblemConfig {
    std::string scenario;
    std::vector<Dimension> design_space;
    std::vector<Hypothesis> hypotheses;
    std::vector<Constraint> constraints;
    std::vector<ObjectiveConfig> objectives;
    ObjectiveVector reference_point;
    BudgetConfig budget;
    PsoConfig pso;
    std::uint64_t seed = 1;
};

/// Parses JSON text. Throws ConfigError listing every problem found.
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);

/// Canonical JSON: every field explicit, defaults resolved, keys in fixed order.
std::string serialize(const ProblemConfig& config);

/// Everything needed to run: the problem, one simulator per hypothesis, the scenario.
struct BoundProblem {
    Problem problem;
    SimulatorMap simulators;
    simlib::Scenario scenario;
};

/// Resolves the scenario and objectives. Throws ConfigError listing every problem.
BoundProblem bind(const ProblemConfig& config);

/// Applies "label=value" nominal overrides; throws ConfigError for unknown labels.
void apply_nominals(ProblemConfig& config, const std::map<std::string, double>& nominals);

}  // namespace ssdopt
