#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "ssdopt/errors.hpp"
#include "ssdopt/gp.hpp"

using namespace ssdopt;
using namespace ssdopt::gp;

namespace {

struct Instance {
    std::vector<DesignPoint> x;
    std::vector<double> y, noise;
    KernelParams params;
};

Instance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> e_dist(1, 50), d_dist(1, 3);
    std::uniform_real_distribution<double> u(0, 1), y_dist(-1, 1);
    const int e = e_dist(rng), d = d_dist(rng);
    Instance in;
    in.params.sigma = std::exp(std::log(0.01) + u(rng) * std::log(100.0));
    for (int j = 0; j < d; ++j) in.params.lengthscales.push_back(0.05 + 0.5 * u(rng));
    for (int i = 0; i < e; ++i) {
        DesignPoint p;
        for (int j = 0; j < d; ++j) p.push_back(u(rng));
        in.x.push_back(p);
        in.y.push_back(y_dist(rng));
        in.noise.push_back(in.params.sigma * (0.01 + 0.2 * u(rng)));
    }
    return in;
}

double se(const DesignPoint& a, const DesignPoint& b, const KernelParams& p) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::pow((a[j] - b[j]) / p.lengthscales[j], 2);
    return p.sigma * std::exp(-s);
}

Eigen::MatrixXd dense_cov(const Instance& in) {
    const auto e = static_cast<Eigen::Index>(in.x.size());
    Eigen::MatrixXd c(e, e);
    for (Eigen::Index i = 0; i < e; ++i)
        for (Eigen::Index j = 0; j < e; ++j) c(i, j) = se(in.x[i], in.x[j], in.params) + (i == j ? in.noise[i] : 0.0);
    return c;
}

}  // namespace

TEST_CASE("kernel values") {
    KernelParams p{2.0, {1.0}};
    const std::vector<double> a{0.0}, b{1.0};
    CHECK(kernel(a, a, p) == 2.0);
    CHECK(kernel(a, b, p) == doctest::Approx(0.735759).epsilon(1e-6));
    CHECK(kernel(a, b, p) == doctest::Approx(kernel(b, a, p)));
}

TEST_CASE("one noiseless point is interpolated exactly") {
    GpModel m({{0.4}}, {0.7}, {0.0}, {1.3, {0.2}});
    const auto pr = m.predict(std::vector<double>{0.4});
    CHECK(std::abs(pr.mean - 0.7) < 1e-12);
    CHECK(std::abs(pr.variance) < 1e-12);
}

TEST_CASE("one noisy point shrinks toward zero") {
    const double s = 1.7, w = 0.3, y = 0.9;
    GpModel m({{0.25, 0.5}}, {y}, {w}, {s, {0.3, 0.4}});
    const auto pr = m.predict(std::vector<double>{0.25, 0.5});
    CHECK(std::abs(pr.mean - s * y / (s + w)) < 1e-12);
    CHECK(std::abs(pr.variance - (s - s * s / (s + w))) < 1e-12);
}

TEST_CASE("posterior and likelihood match a dense-inverse oracle on 100 random instances") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        const auto in = random_instance(rng);
        GpModel m(in.x, in.y, in.noise, in.params);
        REQUIRE(m.jitter() == 0.0);
        const Eigen::MatrixXd c = dense_cov(in);
        const Eigen::MatrixXd inv = c.inverse();
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(in.y.data(), in.y.size());
        const double lml = -0.5 * y.dot(inv * y) - 0.5 * std::log(c.determinant()) -
                           0.5 * y.size() * std::log(2 * std::numbers::pi);
        CHECK(log_marginal_likelihood(in.x, in.y, in.noise, in.params) == doctest::Approx(lml).epsilon(1e-8));
        for (int q = 0; q < 5; ++q) {
            DesignPoint xs;
            for (std::size_t j = 0; j < in.params.lengthscales.size(); ++j) xs.push_back(u(rng));
            Eigen::VectorXd k(y.size());
            for (Eigen::Index i = 0; i < y.size(); ++i) k(i) = se(xs, in.x[i], in.params);
            const auto pr = m.predict(xs);
            CHECK(std::abs(pr.mean - k.dot(inv * y)) < 1e-8);
            CHECK(std::abs(pr.variance - (in.params.sigma - k.dot(inv * k))) < 1e-8);
        }
    }
}

TEST_CASE("log marginal likelihood closed forms") {
    const KernelParams p{1.0, {0.5}};
    CHECK(log_marginal_likelihood({{0.1}}, {0.0}, {0.0}, p) == doctest::Approx(-0.918939).epsilon(1e-6));
    CHECK(log_marginal_likelihood({{0.1}}, {1.0}, {0.0}, p) == doctest::Approx(-1.418939).epsilon(1e-6));
}

TEST_CASE("predictive variance never grows when data is added") {
    const KernelParams p{1.0, {0.3}};
    std::vector<DesignPoint> x;
    std::vector<double> y, w;
    double previous = 1.0;
    for (int i = 0; i < 10; ++i) {
        x.push_back({0.1 * i});
        y.push_back(std::sin(3.0 * i));
        w.push_back(0.01);
        const double v = GpModel(x, y, w, p).predict(std::vector<double>{0.47}).variance;
        CHECK(v <= previous + 1e-12);
        previous = v;
    }
}

TEST_CASE("an empty model returns the prior") {
    GpModel m({}, {}, {}, {0.8, {0.3}});
    const auto pr = m.predict(std::vector<double>{0.5});
    CHECK(pr.mean == 0.0);
    CHECK(pr.variance == doctest::Approx(0.8));
}

TEST_CASE("fitting recovers the generating lengthscale within a factor of two") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    std::normal_distribution<double> z;
    Instance in;
    in.params = {1.0, {0.3, 0.3}};
    for (int i = 0; i < 50; ++i) in.x.push_back({u(rng), u(rng)});
    in.noise.assign(50, 1e-4);
    const Eigen::MatrixXd c = dense_cov(in);
    Eigen::VectorXd draw(50);
    for (auto& v : draw) v = z(rng);
    const Eigen::VectorXd f = c.llt().matrixL() * draw;
    in.y.assign(f.data(), f.data() + 50);
    const auto fit = fit_hyperparameters(in.x, in.y, in.noise);
    for (double l : fit.params.lengthscales) {
        CHECK(l > 0.15);
        CHECK(l < 0.6);
    }
}

TEST_CASE("doubling the targets quadruples sigma") {
    std::vector<DesignPoint> x;
    std::vector<double> y, y2, w;
    for (int i = 0; i < 15; ++i) {
        const double t = i / 14.0;
        x.push_back({t});
        y.push_back(0.3 * std::sin(5 * t) + 0.1 * t);
        y2.push_back(2 * y.back());
        w.push_back(1e-6);
    }
    const auto a = fit_hyperparameters(x, y, w), b = fit_hyperparameters(x, y2, w);
    const double ratio = b.params.sigma / a.params.sigma;
    CHECK(ratio > 4.0 / 1.5);
    CHECK(ratio < 4.0 * 1.5);
    const double lr = b.params.lengthscales[0] / a.params.lengthscales[0];
    CHECK(lr > 1 / 1.2);
    CHECK(lr < 1.2);
}

TEST_CASE("flat data gives flat predictions") {
    const double c = 0.05;
    std::vector<DesignPoint> x;
    std::vector<double> y, w;
    for (int i = 0; i < 12; ++i) {
        x.push_back({i / 11.0, std::fmod(i * 0.37, 1.0)});
        y.push_back(c);
        w.push_back(1e-6);
    }
    const auto fit = fit_hyperparameters(x, y, w);
    CHECK(fit.params.sigma < 0.1);
    GpModel m(x, y, w, fit.params);
    const double band = 3 * std::sqrt(fit.params.sigma + 1e-6);
    for (double a = 0; a <= 1.0; a += 0.125)
        for (double b = 0; b <= 1.0; b += 0.125) {
            const double mean = m.predict(std::vector<double>{a, b}).mean;
            CHECK(mean >= c - band);
            CHECK(mean <= c + band);
        }
}

TEST_CASE("a singular kernel matrix is rescued by jitter") {
    GpModel m({{0.5}, {0.5}}, {0.1, 0.2}, {0.0, 0.0}, {1.0, {0.3}});
    CHECK(m.jitter() > 0.0);
    CHECK(std::isfinite(m.predict(std::vector<double>{0.5}).mean));
}
