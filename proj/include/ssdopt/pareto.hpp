#pragma once

#include <vector>

#include "ssdopt/domain.hpp"

namespace ssdopt {

struct ParetoMember {
    DesignPoint point;
    ObjectiveVector objectives;
};

/// Mutually nondominated members plus the reference point bounding the hypervolume.
/// Members that do not strictly dominate the reference stay in the set but add no volume.
struct ApproximationSet {
    std::vector<ParetoMember> members;
    ObjectiveVector reference;
};

/// a <= b componentwise and a < b somewhere (minimization).
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Nondominated subset, exact duplicates collapsed to the first seen, stable-sorted by
/// the first objective.
std::vector<ParetoMember> pareto_filter(const std::vector<ParetoMember>& points);

/// Exact dominated hypervolume for 1 to 3 objectives (sweep / slicing).
/// Throws UnsupportedDimensionError otherwise.
double hypervolume(const std::vector<ObjectiveVector>& points, const ObjectiveVector& reference);
double hypervolume(const ApproximationSet& set);

/// H(set + candidate, re-filtered) - H(set); zero for dominated or out-of-box candidates.
double hypervolume_improvement(const ApproximationSet& set, const ObjectiveVector& candidate);

}  // namespace ssdopt
