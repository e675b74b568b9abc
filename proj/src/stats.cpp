#include "ssdopt/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace ssdopt::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double t_upper_quantile(double df, double tail) {
    return boost::math::quantile(boost::math::complement(boost::math::students_t_distribution<double>(df), tail));
}

namespace {

struct GaussLegendreHalf {
    const double* x;
    const double* w;
    int n;
};

constexpr std::array<double, 3> kX6 = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 6> kX12 = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                        0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
constexpr std::array<double, 6> kW12 = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                        0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
constexpr std::array<double, 10> kX20 = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                         0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                         0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                         0.07652652113349733};
constexpr std::array<double, 10> kW20 = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                         0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
                                         0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
                                         0.1527533871307259};

}  // namespace

double bvn_upper(double h, double k, double r) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (h == inf || k == inf) return 0.0;
    if (h == -inf) return k == -inf ? 1.0 : normal_cdf(-k);
    if (k == -inf) return normal_cdf(-h);
    if (r >= 1.0) return normal_cdf(-std::max(h, k));
    if (r <= -1.0) return std::max(0.0, normal_cdf(-k) - normal_cdf(h));
    if (r == 0.0) return normal_cdf(-h) * normal_cdf(-k);

    GaussLegendreHalf gl;
    if (std::abs(r) < 0.3)
        gl = {kX6.data(), kW6.data(), 3};
    else if (std::abs(r) < 0.75)
        gl = {kX12.data(), kW12.data(), 6};
    else
        gl = {kX20.data(), kW20.data(), 10};

    constexpr double tp = 2.0 * std::numbers::pi;
    double hk = h * k;
    double bvn = 0.0;

    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r) / 2.0;
        for (int i = 0; i < gl.n; ++i) {
            for (double sgn : {-1.0, 1.0}) {
                const double sn = std::sin(asr * (1.0 + sgn * gl.x[i]));
                bvn += gl.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        return std::clamp(bvn * asr / tp + normal_cdf(-h) * normal_cdf(-k), 0.0, 1.0);
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    const double as = 1.0 - r * r;
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 80.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
    if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(tp) * normal_cdf(-b / a);
        bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
    }
    a /= 2.0;
    double sum = 0.0;
    for (int i = 0; i < gl.n; ++i) {
        for (double sgn : {-1.0, 1.0}) {
            const double xs = std::pow(a * (1.0 + sgn * gl.x[i]), 2);
            const double asr_i = -(bs / xs + hk) / 2.0;
            if (asr_i <= -100.0) continue;
            const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
            const double rs = std::sqrt(1.0 - xs);
            const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
            sum += gl.w[i] * std::exp(asr_i) * (sp - ep);
        }
    }
    bvn = (a * sum - bvn) / tp;

    if (r > 0.0) {
        bvn += normal_cdf(-std::max(h, k));
    } else if (h >= k) {
        bvn = -bvn;
    } else {
        const double lo = h < 0.0 ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
        bvn = lo - bvn;
    }
    return std::clamp(bvn, 0.0, 1.0);
}

double bvn_lower(double h, double k, double r) { return bvn_upper(-h, -k, r); }

}  // namespace ssdopt::stats
