#include "ssdopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ssdopt/errors.hpp"
#include "ssdopt/sobol.hpp"

namespace ssdopt::gp {

double kernel(std::span<const double> x, std::span<const double> xp, const KernelParams& params) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = (x[j] - xp[j]) / params.lengthscales[j];
        s += d * d;
    }
    return params.sigma * std::exp(-s);
}

namespace {

Eigen::MatrixXd covariance(const std::vector<DesignPoint>& inputs, const std::vector<double>& noise,
                           const KernelParams& params) {
    const auto n = static_cast<Eigen::Index>(inputs.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = params.sigma + noise[i];
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = kernel(inputs[i], inputs[j], params);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

// Factorizes K + Delta, escalating diagonal jitter 1e-8*sigma .. 1e-4*sigma on failure.
double factorize(Eigen::MatrixXd k, double sigma, Eigen::LLT<Eigen::MatrixXd>& llt) {
    llt.compute(k);
    if (llt.info() == Eigen::Success) return 0.0;
    for (double jitter = 1e-8 * sigma; jitter <= 1e-4 * sigma * (1.0 + 1e-9); jitter *= 10.0) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        llt.compute(kj);
        if (llt.info() == Eigen::Success) return jitter;
    }
    throw ConditioningError("covariance matrix is not positive definite after jitter escalation (E=" +
                            std::to_string(k.rows()) + ", sigma=" + std::to_string(sigma) + ")");
}

void check_shapes(const std::vector<DesignPoint>& inputs, const std::vector<double>& targets,
                  const std::vector<double>& noise, const KernelParams& params) {
    if (inputs.size() != targets.size() || inputs.size() != noise.size())
        throw PreconditionError("GP inputs, targets and noise must have equal length");
    if (!(params.sigma > 0.0)) throw PreconditionError("GP sigma must be positive");
    for (double l : params.lengthscales)
        if (!(l > 0.0)) throw PreconditionError("GP lengthscales must be positive");
    for (const auto& x : inputs)
        if (x.size() != params.lengthscales.size())
            throw PreconditionError("GP input dimension does not match lengthscales");
}

}  // namespace

GpModel::GpModel(std::vector<DesignPoint> inputs, std::vector<double> targets, std::vector<double> noise,
                 KernelParams params)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), noise_(std::move(noise)), params_(std::move(params)) {
    check_shapes(inputs_, targets_, noise_, params_);
    if (inputs_.empty()) return;
    jitter_ = factorize(covariance(inputs_, noise_, params_), params_.sigma, llt_);
    alpha_ = llt_.solve(Eigen::Map<const Eigen::VectorXd>(targets_.data(), static_cast<Eigen::Index>(targets_.size())));
}

Prediction GpModel::predict(std::span<const double> x) const {
    if (inputs_.empty()) return {0.0, params_.sigma};
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(x, inputs_[i], params_);
    const double mean = ks.dot(alpha_);
    Eigen::VectorXd v = llt_.matrixL().solve(ks);
    return {mean, std::max(0.0, params_.sigma - v.squaredNorm())};
}

double log_marginal_likelihood(const std::vector<DesignPoint>& inputs, const std::vector<double>& targets,
                               const std::vector<double>& noise, const KernelParams& params) {
    check_shapes(inputs, targets, noise, params);
    Eigen::LLT<Eigen::MatrixXd> llt;
    factorize(covariance(inputs, noise, params), params.sigma, llt);
    const auto n = static_cast<Eigen::Index>(targets.size());
    Eigen::Map<const Eigen::VectorXd> y(targets.data(), n);
    const Eigen::VectorXd z = llt.matrixL().solve(y);
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * z.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

namespace {

class LogLikObjective {
   public:
    LogLikObjective(const std::vector<DesignPoint>& inputs, const std::vector<double>& targets,
                    const std::vector<double>& noise)
        : inputs_(inputs), targets_(targets), noise_(noise) {}

    // theta = (log sigma, log lambda_1, ...). Conditioning failures score -inf.
    double operator()(const std::vector<double>& theta) const {
        try {
            return log_marginal_likelihood(inputs_, targets_, noise_, to_params(theta));
        } catch (const ConditioningError&) {
            return -std::numeric_limits<double>::infinity();
        }
    }

    static KernelParams to_params(const std::vector<double>& theta) {
        KernelParams p;
        p.sigma = std::exp(theta[0]);
        p.lengthscales.resize(theta.size() - 1);
        for (std::size_t j = 1; j < theta.size(); ++j) p.lengthscales[j - 1] = std::exp(theta[j]);
        return p;
    }

   private:
    const std::vector<DesignPoint>& inputs_;
    const std::vector<double>& targets_;
    const std::vector<double>& noise_;
};

}  // namespace

FitResult fit_hyperparameters(const std::vector<DesignPoint>& inputs, const std::vector<double>& targets,
                              const std::vector<double>& noise, const FitOptions& options) {
    if (inputs.size() < 2) throw PreconditionError("fit_hyperparameters requires at least 2 observations");
    const std::size_t dim = inputs.front().size();
    const std::size_t np = dim + 1;
    const auto& b = options.bounds;

    std::vector<double> lo(np), hi(np);
    lo[0] = std::log(b.sigma_lo);
    hi[0] = std::log(b.sigma_hi);
    for (std::size_t j = 1; j < np; ++j) {
        lo[j] = std::log(b.lengthscale_lo);
        hi[j] = std::log(b.lengthscale_hi);
    }

    std::vector<std::vector<double>> starts;
    if (np <= static_cast<std::size_t>(kSobolMaxDim)) {
        for (const auto& u : sobol_points(static_cast<int>(np), options.starts)) {
            std::vector<double> t(np);
            for (std::size_t j = 0; j < np; ++j) t[j] = lo[j] + u[j] * (hi[j] - lo[j]);
            starts.push_back(std::move(t));
        }
    } else {
        for (int s = 0; s < options.starts; ++s) {
            std::vector<double> t(np);
            for (std::size_t j = 0; j < np; ++j) t[j] = lo[j] + (s + 0.5) / options.starts * (hi[j] - lo[j]);
            starts.push_back(std::move(t));
        }
    }
    if (options.warm_start) {
        std::vector<double> t(np);
        t[0] = std::clamp(std::log(options.warm_start->sigma), lo[0], hi[0]);
        for (std::size_t j = 1; j < np; ++j)
            t[j] = std::clamp(std::log(options.warm_start->lengthscales.at(j - 1)), lo[j], hi[j]);
        if (starts.empty())
            starts.push_back(std::move(t));
        else
            starts.front() = std::move(t);
    }

    const LogLikObjective f(inputs, targets, noise);
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    constexpr double golden = 0.6180339887498949;

    std::vector<double> best_theta;
    double best_ll = ninf;
    for (auto theta : starts) {
        double cur = f(theta);
        for (int sweep = 0; sweep < options.sweeps; ++sweep) {
            const double before = cur;
            for (std::size_t j = 0; j < np; ++j) {
                const double half = 0.5 * (hi[j] - lo[j]) * std::pow(0.5, sweep);
                double a = std::max(lo[j], theta[j] - half);
                double c = std::min(hi[j], theta[j] + half);
                auto eval = [&](double v) {
                    auto t = theta;
                    t[j] = v;
                    return f(t);
                };
                double x1 = c - golden * (c - a);
                double x2 = a + golden * (c - a);
                double f1 = eval(x1);
                double f2 = eval(x2);
                double arg = f1 >= f2 ? x1 : x2;
                double val = std::max(f1, f2);
                for (int it = 0; it < options.golden_iterations; ++it) {
                    if (f1 >= f2) {
                        c = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = c - golden * (c - a);
                        f1 = eval(x1);
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + golden * (c - a);
                        f2 = eval(x2);
                    }
                    if (f1 > val) { arg = x1; val = f1; }
                    if (f2 > val) { arg = x2; val = f2; }
                }
                if (val > cur) {
                    theta[j] = arg;
                    cur = val;
                }
            }
            if (cur - before < 1e-10 && sweep > 0) break;
        }
        if (cur > best_ll) {
            best_ll = cur;
            best_theta = theta;
        }
    }

    FitResult result;
    if (best_ll == ninf) {
        if (!options.warm_start)
            throw ConditioningError("hyperparameter fit failed at every start and no fallback was supplied");
        result.params = *options.warm_start;
        result.log_likelihood = ninf;
        result.fell_back = true;
        return result;
    }
    result.params = LogLikObjective::to_params(best_theta);
    result.log_likelihood = best_ll;
    return result;
}

}  // namespace ssdopt::gp
