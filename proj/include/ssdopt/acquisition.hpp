#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ssdopt/domain.hpp"
#include "ssdopt/gp.hpp"
#include "ssdopt/pareto.hpp"

namespace ssdopt {

/// Upper 100p% quantile of N(m, s2): m + Phi^{-1}(p) sqrt(s2).
double feasibility_quantile(double m, double s2, double p);

struct QuantileUpdate {
    double mean = 0.0;      // m+
    double variance = 0.0;  // s+^2
};

/// Predictive distribution of the feasibility quantile after a planned evaluation with
/// MC variance omega2_plan:
///   m+   = m + Phi^{-1}(p) sqrt(omega2 s2 / (omega2 + s2))
///   s+^2 = (s2)^2 / (omega2 + s2)
QuantileUpdate quantile_update(double m, double s2, double omega2_plan, double p);

/// Phi(-m+ / s+); a point mass when s+^2 = 0.
double prob_feasible_after(double m_plus, double s2_plus);

/// A fitted constraint model and the constraint it represents.
struct ConstraintSurrogate {
    const gp::GpModel* model = nullptr;
    Constraint constraint;
};

struct FeasibilityState {
    double mean = 0.0;
    double variance = 0.0;
    double quantile = 0.0;
    double omega2_plan = 0.0;
    double mean_plus = 0.0;
    double variance_plus = 0.0;
};

/// GP state at `candidate` (raw design coordinates) for one constraint.
FeasibilityState feasibility_state(const DesignPoint& candidate, const DesignSpace& space,
                                   const ConstraintSurrogate& surrogate, std::int64_t planned_n);

/// [H(A*) - H(A)] * prod_j Phi(-m_{j,+} / s_{j,+}).
double expected_improvement(const DesignPoint& candidate, const DesignSpace& space,
                            const std::vector<ConstraintSurrogate>& surrogates, const ApproximationSet& current,
                            const ObjectiveSpec& objectives, std::int64_t planned_n);

struct PsoConfig {
    int swarm_size = 40;
    int iterations = 200;
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    /// Per-dimension velocity cap as a fraction of the range.
    double velocity_clamp = 0.5;
    std::uint64_t seed = 0;
};

/// Throws PreconditionError when the config violates its invariants.
void validate(const PsoConfig& config);

struct PsoResult {
    DesignPoint argmax;
    double value = 0.0;
};

/// Synchronous global-best particle swarm maximizer over the box of `bounds`
/// (integer dims relaxed). Deterministic for a given config.seed.
PsoResult pso_maximize(const std::function<double(const DesignPoint&)>& f, const DesignSpace& bounds,
                       const PsoConfig& config);

}  // namespace ssdopt
