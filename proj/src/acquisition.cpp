#include "ssdopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ssdopt/errors.hpp"
#include "ssdopt/stats.hpp"

namespace ssdopt {

double feasibility_quantile(double m, double s2, double p) {
    if (s2 <= 0.0) return m;
    return m + stats::normal_quantile(p) * std::sqrt(s2);
}

QuantileUpdate quantile_update(double m, double s2, double omega2_plan, double p) {
    if (s2 <= 0.0) return {m, 0.0};
    const double denom = omega2_plan + s2;
    return {m + stats::normal_quantile(p) * std::sqrt(omega2_plan * s2 / denom), s2 * s2 / denom};
}

double prob_feasible_after(double m_plus, double s2_plus) {
    if (s2_plus <= 0.0) return m_plus <= 0.0 ? 1.0 : 0.0;
    return stats::normal_cdf(-m_plus / std::sqrt(s2_plus));
}

FeasibilityState feasibility_state(const DesignPoint& candidate, const DesignSpace& space,
                                   const ConstraintSurrogate& surrogate, std::int64_t planned_n) {
    const auto u = space.to_unit(candidate);
    const auto pred = surrogate.model->predict(u);
    const auto& c = surrogate.constraint;
    FeasibilityState st;
    st.mean = pred.mean;
    st.variance = pred.variance;
    st.quantile = feasibility_quantile(pred.mean, pred.variance, c.confidence);
    // Planned MC variance from the predicted rate, mapped back from the g-scale.
    st.omega2_plan = mc_variance(pred.mean + c.nominal, planned_n);
    const auto up = quantile_update(pred.mean, pred.variance, st.omega2_plan, c.confidence);
    st.mean_plus = up.mean;
    st.variance_plus = up.variance;
    return st;
}

double expected_improvement(const DesignPoint& candidate, const DesignSpace& space,
                            const std::vector<ConstraintSurrogate>& surrogates, const ApproximationSet& current,
                            const ObjectiveSpec& objectives, std::int64_t planned_n) {
    const double gain = hypervolume_improvement(current, objectives.evaluate(candidate));
    if (gain <= 0.0) return 0.0;
    double prob = 1.0;
    for (const auto& s : surrogates) {
        const auto st = feasibility_state(candidate, space, s, planned_n);
        prob *= prob_feasible_after(st.mean_plus, st.variance_plus);
        if (prob == 0.0) break;
    }
    return gain * prob;
}

void validate(const PsoConfig& config) {
    if (config.swarm_size < 2) throw PreconditionError("PSO swarm_size must be >= 2");
    if (config.iterations < 1) throw PreconditionError("PSO iterations must be >= 1");
    if (!(config.inertia > 0.0 && config.inertia < 1.0)) throw PreconditionError("PSO inertia must lie in (0,1)");
    if (!(config.cognitive > 0.0) || !(config.social > 0.0))
        throw PreconditionError("PSO cognitive and social weights must be positive");
    if (!(config.velocity_clamp > 0.0)) throw PreconditionError("PSO velocity clamp must be positive");
}

PsoResult pso_maximize(const std::function<double(const DesignPoint&)>& f, const DesignSpace& bounds,
                       const PsoConfig& config) {
    validate(config);
    const std::size_t d = bounds.size();
    const auto& dims = bounds.dims();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> vmax(d);
    for (std::size_t j = 0; j < d; ++j) vmax[j] = config.velocity_clamp * (dims[j].upper - dims[j].lower);

    const auto n = static_cast<std::size_t>(config.swarm_size);
    std::vector<DesignPoint> pos(n, DesignPoint(d)), vel(n, DesignPoint(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            pos[i][j] = dims[j].lower + unit(rng) * (dims[j].upper - dims[j].lower);
            vel[i][j] = (2.0 * unit(rng) - 1.0) * vmax[j];
        }
    }

    std::vector<DesignPoint> pbest = pos;
    std::vector<double> pbest_val(n, -std::numeric_limits<double>::infinity());
    DesignPoint gbest = pos.front();
    double gbest_val = -std::numeric_limits<double>::infinity();
    std::vector<double> vals(n);

    auto evaluate_and_update = [&] {
        for (std::size_t i = 0; i < n; ++i) vals[i] = f(pos[i]);
        for (std::size_t i = 0; i < n; ++i) {
            if (vals[i] > pbest_val[i]) {
                pbest_val[i] = vals[i];
                pbest[i] = pos[i];
            }
            if (vals[i] > gbest_val) {
                gbest_val = vals[i];
                gbest = pos[i];
            }
        }
    };

    evaluate_and_update();
    for (int it = 0; it < config.iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const double r1 = unit(rng);
                const double r2 = unit(rng);
                double v = config.inertia * vel[i][j] + config.cognitive * r1 * (pbest[i][j] - pos[i][j]) +
                           config.social * r2 * (gbest[j] - pos[i][j]);
                v = std::clamp(v, -vmax[j], vmax[j]);
                double x = pos[i][j] + v;
                if (x < dims[j].lower) {
                    x = dims[j].lower;
                    v = 0.0;
                } else if (x > dims[j].upper) {
                    x = dims[j].upper;
                    v = 0.0;
                }
                vel[i][j] = v;
                pos[i][j] = x;
            }
        }
        evaluate_and_update();
    }
    return {gbest, gbest_val};
}

}  // namespace ssdopt
