#include "ssdopt/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ssdopt/errors.hpp"

namespace ssdopt {

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& p : problems) msg += "\n  - " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

std::optional<std::size_t> DesignSpace::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < dims_.size(); ++i)
        if (dims_[i].name == name) return i;
    return std::nullopt;
}

DesignPoint DesignSpace::to_unit(const DesignPoint& x) const {
    DesignPoint u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        u[i] = (x[i] - dims_[i].lower) / (dims_[i].upper - dims_[i].lower);
    return u;
}

DesignPoint DesignSpace::from_unit(const DesignPoint& u) const {
    DesignPoint x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        x[i] = dims_[i].lower + u[i] * (dims_[i].upper - dims_[i].lower);
    return x;
}

DesignPoint DesignSpace::snap(DesignPoint x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& d = dims_[i];
        if (d.kind == DimKind::integer) {
            x[i] = std::clamp(std::round(x[i]), std::ceil(d.lower), std::floor(d.upper));
        } else {
            x[i] = std::clamp(x[i], d.lower, d.upper);
        }
    }
    return x;
}

bool DesignSpace::contains(const DesignPoint& x) const {
    if (x.size() != dims_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= dims_[i].lower && x[i] <= dims_[i].upper)) return false;
        if (dims_[i].kind == DimKind::integer && x[i] != std::round(x[i])) return false;
    }
    return true;
}

double Hypothesis::param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end())
        throw PreconditionError("hypothesis '" + name + "' is missing parameter '" + key + "'");
    return it->second;
}

double Hypothesis::param_or(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

const Hypothesis& Problem::hypothesis(const std::string& name) const {
    for (const auto& h : hypotheses)
        if (h.name == name) return h;
    throw PreconditionError("unknown hypothesis '" + name + "'");
}

std::vector<std::string> Problem::constrained_hypotheses() const {
    std::vector<std::string> out;
    for (const auto& c : constraints)
        if (std::find(out.begin(), out.end(), c.hypothesis) == out.end())
            out.push_back(c.hypothesis);
    return out;
}

ValidationReport validate_problem(const DesignSpace& space, const ObjectiveSpec& objectives,
                                  const std::vector<Constraint>& constraints) {
    ValidationReport report;
    auto& v = report.violations;
    if (space.size() == 0) v.push_back("design space has no dimensions");
    std::set<std::string> names;
    for (const auto& d : space.dims()) {
        if (!names.insert(d.name).second) v.push_back("duplicate label: dimension '" + d.name + "'");
        if (!std::isfinite(d.lower) || !std::isfinite(d.upper))
            v.push_back("non-finite bound on dimension '" + d.name + "'");
        else if (d.lower == d.upper)
            v.push_back("degenerate bound on dimension '" + d.name + "'");
        else if (d.lower > d.upper)
            v.push_back("inverted bound on dimension '" + d.name + "'");
        else if (d.kind == DimKind::integer && std::ceil(d.lower) > std::floor(d.upper))
            v.push_back("integer dimension '" + d.name + "' contains no integer");
    }
    if (objectives.labels.empty()) v.push_back("at least one objective is required");
    std::set<std::string> olabels;
    for (const auto& l : objectives.labels)
        if (!olabels.insert(l).second) v.push_back("duplicate label: objective '" + l + "'");
    std::set<std::string> clabels;
    for (const auto& c : constraints) {
        if (!clabels.insert(c.label).second) v.push_back("duplicate label: constraint '" + c.label + "'");
        if (!(c.nominal > 0.0 && c.nominal < 1.0))
            v.push_back("constraint '" + c.label + "' nominal must lie in (0,1)");
        if (!(c.confidence > 0.5 && c.confidence < 1.0))
            v.push_back("constraint '" + c.label + "' confidence must lie in (0.5,1)");
        if (c.hypothesis.empty()) v.push_back("constraint '" + c.label + "' names no hypothesis");
    }
    return report;
}

ValidationReport validate_problem(const Problem& problem) {
    auto report = validate_problem(problem.space, problem.objectives, problem.constraints);
    auto& v = report.violations;
    std::set<std::string> hnames;
    for (const auto& h : problem.hypotheses)
        if (!hnames.insert(h.name).second) v.push_back("duplicate label: hypothesis '" + h.name + "'");
    for (const auto& c : problem.constraints)
        if (!c.hypothesis.empty() && !hnames.count(c.hypothesis))
            v.push_back("constraint '" + c.label + "' references unknown hypothesis '" + c.hypothesis + "'");
    if (problem.reference.size() != problem.objectives.labels.size())
        v.push_back("reference point length " + std::to_string(problem.reference.size()) +
                    " does not match " + std::to_string(problem.objectives.labels.size()) + " objectives");
    if (problem.constraints.empty()) v.push_back("at least one constraint is required");
    return report;
}

double mc_variance(double estimate, std::int64_t n_samples) {
    const double n = static_cast<double>(n_samples);
    const double lo = 0.5 / n;
    const double y = std::clamp(estimate, lo, 1.0 - lo);
    return y * (1.0 - y) / n;
}

double bounded_rate(double rejection_rate, const Constraint& c) {
    return c.rate == ErrorRate::type_i ? rejection_rate : 1.0 - rejection_rate;
}

double constraint_value(double estimate, const Constraint& c) { return estimate - c.nominal; }

EvaluationRecord make_record(DesignPoint point, std::string hypothesis, std::int64_t n,
                             std::int64_t successes, std::uint64_t seed,
                             std::uint64_t eval_index, std::int64_t iteration) {
    EvaluationRecord r;
    r.point = std::move(point);
    r.hypothesis = std::move(hypothesis);
    r.n_samples = n;
    r.successes = successes;
    r.estimate = static_cast<double>(successes) / static_cast<double>(n);
    r.mc_variance = mc_variance(r.estimate, n);
    r.seed = seed;
    r.eval_index = eval_index;
    r.iteration = iteration;
    return r;
}

}  // namespace ssdopt
