#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ssdopt/domain.hpp"
#include "ssdopt/montecarlo.hpp"

namespace ssdopt::simlib {

// ---------------------------------------------------------------------------
// Two-arm tests

struct NormalHypothesis {
    double delta = 0.5;
    double sigma = 1.0;
    double alpha = 0.05;
};

/// n draws per arm, two-sided z-test with known sigma.
bool two_arm_normal_simulate(int n, const NormalHypothesis& h, Rng& rng);
/// Phi(delta sqrt(n/2)/sigma - z) + Phi(-delta sqrt(n/2)/sigma - z), z = z_{1-alpha/2}.
double two_arm_normal_power(int n, const NormalHypothesis& h);

struct BinaryHypothesis {
    double p0 = 0.1;
    double p1 = 0.25;
    double alpha = 0.05;
};

/// Binomial arms of n, two-sided pooled normal-approximation test of proportions.
bool two_arm_binary_simulate(int n, const BinaryHypothesis& h, Rng& rng);
/// Exact rejection probability by summing over both binomial outcomes when n <= 200,
/// normal approximation above.
double two_arm_binary_power(int n, const BinaryHypothesis& h);

// ---------------------------------------------------------------------------
// Clustered designs
//
// Intervention participants are cross-classified by therapist and doctor; control
// participants are nested within doctors. Doctors are split between arms
// (floor(j/2) control, the rest intervention) and are nested within therapists when
// there are at least as many intervention doctors as therapists, otherwise therapists
// are nested within doctors. Analysis compares the means of the top-level independent
// clusters in each arm with a pooled two-sample t-test.

struct VarianceComponents {
    double therapist = 0.19;  // sigma_T^2
    double doctor = 0.37;     // sigma_D^2
    double residual = 3.29;   // sigma_W^2
};

struct Correlations {
    double residual = 0.0;   // rho_W
    double therapist = 0.0;  // rho_T
    double doctor = 0.0;     // rho_D
};

struct ClusterLayout {
    int therapists = 0;           // therapists in use
    int doctors1 = 0;             // intervention doctors in use
    int doctors0 = 0;             // control doctors
    int per_therapist = 0;        // intervention participants per therapist
    int per_doctor0 = 0;          // control participants per doctor
    bool therapist_units = true;  // intervention analysis clusters are therapists
    int nest = 1;                 // doctors per therapist, or therapists per doctor

    int units1() const { return therapist_units ? therapists : doctors1; }
    int units0() const { return doctors0; }
    int df() const { return units1() + units0() - 2; }
    int participants1() const { return therapists * per_therapist; }
    int participants0() const { return doctors0 * per_doctor0; }

    /// Variance of one intervention / control cluster mean.
    double unit_variance1(const VarianceComponents& v) const;
    double unit_variance0(const VarianceComponents& v) const;
    /// Cross-endpoint covariance of one cluster mean (bivariate model).
    double unit_covariance1(const VarianceComponents& v, const Correlations& r) const;
    double unit_covariance0(const VarianceComponents& v, const Correlations& r) const;

    /// Exact balanced layout; throws PreconditionError when n1, n0, k, j do not divide evenly.
    static ClusterLayout balanced(int n1, int n0, int k, int j);
    /// Largest balanced layout that fits: participants or providers that do not divide
    /// evenly are left out of the analysis.
    static ClusterLayout trimmed(int n1, int n0, int k, int j);
};

struct ClusterHypothesis {
    double effect = 1.10;  // beta_1
    VarianceComponents variances;
    double alpha = 0.05;
};

/// Simulated cluster-mean two-sample t-test, two-sided at alpha.
bool cluster_rct_simulate(const ClusterLayout& layout, const ClusterHypothesis& h, Rng& rng);
/// Exact power: numerator normal, pooled variance a weighted sum of two chi-squares,
/// integrated by a Gauss-Hermite product rule in normal-score space.
double cluster_rct_power(const ClusterLayout& layout, const ClusterHypothesis& h);

struct BivariateHypothesis {
    double effect_f = 1.10;  // beta_1^F
    double effect_d = 1.10;  // beta_1^D
    VarianceComponents variances;
    Correlations rho;
    double alpha = 0.05;
};

/// Both endpoints must reject (two-sided at alpha, each analysed as in cluster_rct).
bool co_primary_simulate(const ClusterLayout& layout, const BivariateHypothesis& h, Rng& rng);
double co_primary_power(const ClusterLayout& layout, const BivariateHypothesis& h);

/// Either endpoint rejecting one-sided at level h.alpha (the nominal size `a`).
bool pilot_either_simulate(const ClusterLayout& layout, const BivariateHypothesis& h, Rng& rng);
double pilot_either_power(const ClusterLayout& layout, const BivariateHypothesis& h);

/// Number of quasi-random nodes used by the bivariate oracles.
inline constexpr int kBivariateOracleNodes = 1 << 16;

// ---------------------------------------------------------------------------
// Registry

using Oracle = std::function<double(const DesignPoint&, const Hypothesis&)>;
using Formula = std::function<double(const DesignPoint&)>;

struct Scenario {
    std::string name;
    std::vector<std::string> dims;               // required design-space names
    std::vector<std::string> hypothesis_params;  // required hypothesis keys
    TrialSimulator simulate;
    Oracle oracle;
    std::map<std::string, Formula> formulas;     // objective formula ids
};

using ScenarioFactory = std::function<Scenario(const DesignSpace&)>;

/// Adds a scenario to the registry; custom simulators plug in here at startup.
void register_scenario(const std::string& name, ScenarioFactory factory);
std::vector<std::string> scenario_names();
bool has_scenario(const std::string& name);
/// Binds a registered scenario to the dimension names of `space`. Throws ConfigError
/// when the name is unknown or required dimensions are missing.
Scenario make_scenario(const std::string& name, const DesignSpace& space);

}  // namespace ssdopt::simlib
