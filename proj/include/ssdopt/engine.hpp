#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssdopt/acquisition.hpp"
#include "ssdopt/domain.hpp"
#include "ssdopt/gp.hpp"
#include "ssdopt/montecarlo.hpp"
#include "ssdopt/pareto.hpp"

namespace ssdopt {

struct BudgetConfig {
    std::int64_t initial_points = 0;  // 0 means 10 x dimensions
    std::int64_t n_per_eval = 100;
    std::int64_t iterations = 0;
    std::optional<std::int64_t> max_total_samples;

    std::int64_t initial_points_for(std::size_t dims) const {
        return initial_points > 0 ? initial_points : static_cast<std::int64_t>(10 * dims);
    }
};

/// Throws ConfigError listing every violated budget invariant.
void validate(const BudgetConfig& budget, const Problem& problem);

/// One simulator per hypothesis name.
using SimulatorMap = std::map<std::string, TrialSimulator>;

struct Diagnostic {
    std::int64_t iteration = 0;
    std::string constraint;
    double predicted_mean = 0.0;
    double predicted_sd = 0.0;
    double realized = 0.0;
    double z = 0.0;
};

struct EngineOptions {
    BudgetConfig budget;
    PsoConfig pso;
    gp::FitOptions fit;
    std::uint64_t seed = 1;
    int workers = 1;
    /// Called once per evaluation, in evaluation order, before the step commits.
    std::function<void(const EvaluationRecord&)> on_record;
    /// Model-fit warnings (standardized discrepancy above the threshold).
    std::function<void(const std::string&)> on_warning;
    double discrepancy_threshold = 4.0;
};

struct RunState {
    Problem problem;
    std::vector<EvaluationRecord> records;
    /// Aligned with problem.constraints.
    std::vector<std::shared_ptr<const gp::GpModel>> models;
    ApproximationSet set;
    /// H of the approximation set after the initial design and after every iteration.
    std::vector<double> trajectory;
    std::uint64_t seed = 0;
    std::int64_t iteration = 0;  // iterations completed
    std::uint64_t next_eval_index = 0;
    std::int64_t total_samples = 0;
    std::vector<Diagnostic> diagnostics;
};

/// Training data of constraint `c`: records under its hypothesis mapped to the unit cube,
/// g-values and MC noise.
struct ConstraintData {
    std::vector<DesignPoint> inputs;
    std::vector<double> targets;
    std::vector<double> noise;
};
ConstraintData constraint_data(const Problem& problem, const std::vector<EvaluationRecord>& records,
                               std::size_t c);

/// Distinct evaluated points in first-evaluation order.
std::vector<DesignPoint> evaluated_points(const std::vector<EvaluationRecord>& records);

/// Feasibility from GP quantiles at every evaluated point; Pareto filter of the feasible ones.
ApproximationSet recompute_feasible_set(const RunState& state);

/// Sobol initial design, first fits, first approximation set; trajectory length 1.
RunState initialize(const Problem& problem, const SimulatorMap& sims, const EngineOptions& options);

/// One fit-acquire-evaluate-update cycle. Returns false without touching the state when
/// the sample cap would be exceeded. The state is only modified once the whole iteration
/// has succeeded, so a throwing step leaves a consistent, resumable state.
bool step(RunState& state, const SimulatorMap& sims, const EngineOptions& options);

/// Runs iterations until `target_iterations` are complete or the cap is reached.
void advance(RunState& state, const SimulatorMap& sims, const EngineOptions& options,
             std::int64_t target_iterations);

/// initialize + advance(budget.iterations).
RunState run(const Problem& problem, const SimulatorMap& sims, const EngineOptions& options);

/// Evaluates `count` Sobol points once each; keeps points whose upper confidence bound
/// (one-sided, z = Phi^{-1}(confidence)) is below the nominal for every constraint.
ApproximationSet fixed_design_search(const Problem& problem, const SimulatorMap& sims, std::int64_t count,
                                     std::int64_t n_samples, double confidence, std::uint64_t seed,
                                     int workers = 1, std::vector<EvaluationRecord>* records = nullptr);

/// One row of the approximation-set report.
struct SetRow {
    DesignPoint point;
    ObjectiveVector objectives;
    std::vector<double> quantiles;  // per constraint
    std::vector<double> estimates;  // pooled raw bounded-rate estimate per constraint
    std::vector<std::int64_t> samples;
};
std::vector<SetRow> set_report(const RunState& state);

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ConstraintCheckpoint {
    std::string label;
    double nominal = 0.0;
    double confidence = 0.0;
    ErrorRate rate = ErrorRate::type_ii;
    gp::KernelParams params;
};

struct Checkpoint {
    std::string config;  // normalized config text
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::int64_t iteration = 0;
    std::uint64_t next_eval_index = 0;
    std::int64_t total_samples = 0;
    std::vector<double> trajectory;
    std::vector<ConstraintCheckpoint> constraints;
    std::vector<EvaluationRecord> records;
};

/// FNV-1a 64-bit.
std::uint64_t fnv1a(const std::string& bytes);

Checkpoint snapshot(const RunState& state, const std::string& config);
void write_checkpoint(const Checkpoint& cp, const std::string& path);
/// Throws CheckpointError on bad magic, version mismatch, truncation or checksum failure.
Checkpoint read_checkpoint(const std::string& path);

/// Rebuilds a state. GPs whose constraint bound is unchanged are rebuilt from the stored
/// hyperparameters; changed bounds trigger a refit warm-started from them. The feasible
/// set is recomputed either way; the stored trajectory is kept.
RunState restore(const Problem& problem, const Checkpoint& cp, const EngineOptions& options);

}  // namespace ssdopt
