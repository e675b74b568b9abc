#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ssdopt/domain.hpp"

namespace testutil {

inline bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

inline bool within_3se(double estimate, double truth, double n) {
    const double se = std::sqrt(std::max(truth * (1.0 - truth), 1e-12) / n);
    return std::abs(estimate - truth) <= 3.0 * se;
}

}  // namespace testutil
