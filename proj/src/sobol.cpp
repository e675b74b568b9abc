#include "ssdopt/sobol.hpp"

#include <array>
#include <bit>
#include <string>

#include "ssdopt/errors.hpp"

namespace ssdopt {

namespace {

constexpr int kBits = 32;

struct Primitive {
    int degree;
    std::uint32_t coeffs;
    std::array<std::uint32_t, 6> m;
};

// new-joe-kuo-6.21201, dimensions 2..16.
constexpr std::array<Primitive, kSobolMaxDim - 1> kTable = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
}};

std::array<std::uint32_t, kBits> direction_numbers(int dim) {
    std::array<std::uint32_t, kBits> v{};
    if (dim == 0) {
        for (int i = 0; i < kBits; ++i) v[i] = 1u << (kBits - 1 - i);
        return v;
    }
    const auto& p = kTable[dim - 1];
    const int s = p.degree;
    for (int i = 0; i < s; ++i) v[i] = p.m[i] << (kBits - 1 - i);
    for (int i = s; i < kBits; ++i) {
        std::uint32_t x = v[i - s] ^ (v[i - s] >> s);
        for (int k = 1; k < s; ++k)
            if ((p.coeffs >> (s - 1 - k)) & 1u) x ^= v[i - k];
        v[i] = x;
    }
    return v;
}

}  // namespace

std::vector<DesignPoint> sobol_points(int d, std::int64_t count) {
    if (d < 1 || d > kSobolMaxDim)
        throw UnsupportedDimensionError("Sobol sequence supports 1 to 16 dimensions, got " + std::to_string(d));
    if (count < 0) throw PreconditionError("Sobol point count must be non-negative");

    std::vector<std::array<std::uint32_t, kBits>> dirs(d);
    for (int j = 0; j < d; ++j) dirs[j] = direction_numbers(j);

    std::vector<std::uint32_t> state(d, 0);
    std::vector<DesignPoint> out;
    out.reserve(static_cast<std::size_t>(count));
    constexpr double scale = 1.0 / 4294967296.0;
    for (std::int64_t i = 0; i < count; ++i) {
        // Gray-code step: flip the direction number of the lowest zero bit of i.
        const int c = std::countr_one(static_cast<std::uint64_t>(i));
        if (c >= kBits) throw PreconditionError("Sobol point count exceeds 2^32");
        DesignPoint p(d);
        for (int j = 0; j < d; ++j) {
            state[j] ^= dirs[j][c];
            p[j] = state[j] * scale;
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace ssdopt
