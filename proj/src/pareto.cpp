#include "ssdopt/pareto.hpp"

#include <algorithm>
#include <string>

#include "ssdopt/errors.hpp"

namespace ssdopt {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

std::vector<ParetoMember> pareto_filter(const std::vector<ParetoMember>& points) {
    std::vector<ParetoMember> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i].objectives;
        bool keep = true;
        for (std::size_t j = 0; j < points.size() && keep; ++j) {
            if (i == j) continue;
            const auto& q = points[j].objectives;
            if (dominates(q, p) || (j < i && q == p)) keep = false;
        }
        if (keep) out.push_back(points[i]);
    }
    std::stable_sort(out.begin(), out.end(), [](const ParetoMember& a, const ParetoMember& b) {
        return a.objectives.front() < b.objectives.front();
    });
    return out;
}

namespace {

bool strictly_inside(const ObjectiveVector& p, const ObjectiveVector& r) {
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!(p[i] < r[i])) return false;
    return true;
}

// Area dominated by 2-D points (x, y) below reference (rx, ry). Points need not be
// mutually nondominated.
double area_2d(std::vector<std::pair<double, double>> pts, double rx, double ry) {
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double best_y = ry;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].second >= best_y) continue;
        // Find the next x at which a lower y takes over.
        best_y = pts[i].second;
        double next_x = rx;
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (pts[j].second < best_y) {
                next_x = pts[j].first;
                break;
            }
        }
        area += (next_x - pts[i].first) * (ry - best_y);
    }
    return area;
}

}  // namespace

double hypervolume(const std::vector<ObjectiveVector>& points, const ObjectiveVector& reference) {
    const std::size_t b = reference.size();
    if (b < 1 || b > 3)
        throw UnsupportedDimensionError("hypervolume supports 1 to 3 objectives, got " + std::to_string(b));
    std::vector<ObjectiveVector> in;
    for (const auto& p : points) {
        if (p.size() != b) throw PreconditionError("objective vector length does not match reference point");
        if (strictly_inside(p, reference)) in.push_back(p);
    }
    if (in.empty()) return 0.0;

    if (b == 1) {
        double best = reference[0];
        for (const auto& p : in) best = std::min(best, p[0]);
        return reference[0] - best;
    }
    if (b == 2) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : in) pts.emplace_back(p[0], p[1]);
        return area_2d(std::move(pts), reference[0], reference[1]);
    }

    // Slice along the third objective; each slab's cross-section is a 2-D area.
    std::sort(in.begin(), in.end(), [](const auto& a, const auto& c) { return a[2] < c[2]; });
    double volume = 0.0;
    std::vector<std::pair<double, double>> active;
    for (std::size_t i = 0; i < in.size(); ++i) {
        active.emplace_back(in[i][0], in[i][1]);
        const double z_next = (i + 1 < in.size()) ? in[i + 1][2] : reference[2];
        const double depth = z_next - in[i][2];
        if (depth > 0.0) volume += depth * area_2d(active, reference[0], reference[1]);
    }
    return volume;
}

double hypervolume(const ApproximationSet& set) {
    std::vector<ObjectiveVector> pts;
    pts.reserve(set.members.size());
    for (const auto& m : set.members) pts.push_back(m.objectives);
    return hypervolume(pts, set.reference);
}

double hypervolume_improvement(const ApproximationSet& set, const ObjectiveVector& candidate) {
    const std::size_t b = set.reference.size();
    if (b < 1 || b > 3)
        throw UnsupportedDimensionError("hypervolume supports 1 to 3 objectives, got " + std::to_string(b));
    if (!strictly_inside(candidate, set.reference)) return 0.0;
    std::vector<ObjectiveVector> pts;
    pts.reserve(set.members.size() + 1);
    for (const auto& m : set.members) {
        if (m.objectives == candidate || dominates(m.objectives, candidate)) return 0.0;
        pts.push_back(m.objectives);
    }
    const double before = hypervolume(pts, set.reference);
    pts.push_back(candidate);
    return std::max(0.0, hypervolume(pts, set.reference) - before);
}

}  // namespace ssdopt
