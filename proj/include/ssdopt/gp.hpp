#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ssdopt/domain.hpp"

namespace ssdopt::gp {

/// theta = (sigma, lambda_1..lambda_D). sigma multiplies the kernel linearly (a variance).
struct KernelParams {
    double sigma = 1.0;
    std::vector<double> lengthscales;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// sigma * exp(-sum_j (x_j - x'_j)^2 / lambda_j^2)
double kernel(std::span<const double> x, std::span<const double> xp, const KernelParams& params);

/// Zero-mean GP regression with a per-observation noise diagonal. Immutable once built;
/// prediction is safe from several threads.
class GpModel {
   public:
    /// Inputs must already live in the unit cube. Throws ConditioningError if K + Delta
    /// cannot be factorized even after jitter of 1e-4 * sigma.
    GpModel(std::vector<DesignPoint> inputs, std::vector<double> targets, std::vector<double> noise,
            KernelParams params);

    Prediction predict(std::span<const double> x) const;

    const std::vector<DesignPoint>& inputs() const { return inputs_; }
    const std::vector<double>& targets() const { return targets_; }
    const std::vector<double>& noise() const { return noise_; }
    const KernelParams& params() const { return params_; }
    std::size_t size() const { return inputs_.size(); }
    /// Diagonal jitter that was needed for the factorization (0 when none).
    double jitter() const { return jitter_; }

   private:
    std::vector<DesignPoint> inputs_;
    std::vector<double> targets_;
    std::vector<double> noise_;
    KernelParams params_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

/// -1/2 y'(K+Delta)^{-1} y - 1/2 log|K+Delta| - (E/2) log 2 pi, via Cholesky.
double log_marginal_likelihood(const std::vector<DesignPoint>& inputs, const std::vector<double>& targets,
                               const std::vector<double>& noise, const KernelParams& params);

struct FitBounds {
    double sigma_lo = 1e-6;
    double sigma_hi = 1e2;
    double lengthscale_lo = 1e-2;
    double lengthscale_hi = 1e1;
};

struct FitOptions {
    FitBounds bounds;
    int starts = 8;
    int sweeps = 6;
    int golden_iterations = 22;
    /// Previous hyperparameters; replace one multi-start point and serve as fallback.
    std::optional<KernelParams> warm_start;
};

struct FitResult {
    KernelParams params;
    double log_likelihood = 0.0;
    /// True when every start failed and warm_start was returned unchanged.
    bool fell_back = false;
};

/// Multi-start coordinate-wise golden-section ascent of the log marginal likelihood in
/// log-parameter space. Start points are Sobol points over the log bounds.
FitResult fit_hyperparameters(const std::vector<DesignPoint>& inputs, const std::vector<double>& targets,
                              const std::vector<double>& noise, const FitOptions& options = {});

}  // namespace ssdopt::gp
