#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ssdopt {

/// Coordinates of one design, in the order of DesignSpace::dims().
using DesignPoint = std::vector<double>;

/// Objective values, all minimized.
using ObjectiveVector = std::vector<double>;

enum class DimKind { integer, continuous };

struct Dimension {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    DimKind kind = DimKind::continuous;
};

/// Box-shaped solution space with a mix of integer and continuous axes.
class DesignSpace {
   public:
    DesignSpace() = default;
    explicit DesignSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {}

    const std::vector<Dimension>& dims() const { return dims_; }
    std::size_t size() const { return dims_.size(); }
    std::optional<std::size_t> index_of(const std::string& name) const;

    /// Affine map into [0,1]^D.
    DesignPoint to_unit(const DesignPoint& x) const;
    /// Inverse of to_unit; no snapping.
    DesignPoint from_unit(const DesignPoint& u) const;
    /// Clips to the box and rounds integer dims to the nearest feasible integer.
    DesignPoint snap(DesignPoint x) const;
    bool contains(const DesignPoint& x) const;

   private:
    std::vector<Dimension> dims_;
};

struct Hypothesis {
    std::string name;
    std::map<std::string, double> params;

    /// Throws PreconditionError naming the missing key.
    double param(const std::string& key) const;
    double param_or(const std::string& key, double fallback) const;
};

/// Which error rate a constraint bounds. Simulators report "null rejected";
/// type_ii bounds 1 - rejection rate, type_i bounds the rejection rate.
enum class ErrorRate { type_ii, type_i };

struct Constraint {
    std::string label;
    std::string hypothesis;
    double nominal = 0.1;
    double confidence = 0.9;
    ErrorRate rate = ErrorRate::type_ii;
};

struct ObjectiveSpec {
    std::vector<std::string> labels;
    std::function<ObjectiveVector(const DesignPoint&)> evaluate;
};

struct EvaluationRecord {
    DesignPoint point;
    std::string hypothesis;
    std::int64_t n_samples = 0;
    std::int64_t successes = 0;
    double estimate = 0.0;
    double mc_variance = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t eval_index = 0;
    std::int64_t iteration = 0;
};

struct Problem {
    DesignSpace space;
    ObjectiveSpec objectives;
    std::vector<Hypothesis> hypotheses;
    std::vector<Constraint> constraints;
    ObjectiveVector reference;

    const Hypothesis& hypothesis(const std::string& name) const;
    /// Hypotheses referenced by at least one constraint, in first-use order.
    std::vector<std::string> constrained_hypotheses() const;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_problem(const DesignSpace& space, const ObjectiveSpec& objectives,
                                  const std::vector<Constraint>& constraints);
ValidationReport validate_problem(const Problem& problem);

/// Bernoulli MC variance with the estimate clamped to [1/(2N), 1 - 1/(2N)].
double mc_variance(double estimate, std::int64_t n_samples);

/// Rate bounded by `c` given the simulator's rejection rate.
double bounded_rate(double rejection_rate, const Constraint& c);

/// g = estimate - nominal; <= 0 means within bound.
double constraint_value(double estimate, const Constraint& c);

EvaluationRecord make_record(DesignPoint point, std::string hypothesis, std::int64_t n,
                             std::int64_t successes, std::uint64_t seed,
                             std::uint64_t eval_index, std::int64_t iteration);

}  // namespace ssdopt
