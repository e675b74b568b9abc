#pragma once

#include <cstdint>
#include <vector>

#include "ssdopt/domain.hpp"

namespace ssdopt {

inline constexpr int kSobolMaxDim = 16;

/// First `count` points of the Sobol sequence in [0,1)^d (Gray-code order, Joe-Kuo
/// direction numbers, the all-zero point skipped). Throws UnsupportedDimensionError
/// for d outside [1, 16].
std::vector<DesignPoint> sobol_points(int d, std::int64_t count);

}  // namespace ssdopt
