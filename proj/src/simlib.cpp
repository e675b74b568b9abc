#include "ssdopt/simlib.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <memory>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <Eigen/Eigenvalues>

#include "ssdopt/errors.hpp"
#include "ssdopt/sobol.hpp"
#include "ssdopt/stats.hpp"

namespace ssdopt::simlib {

using stats::normal_cdf;
using stats::normal_quantile;

namespace {

// Critical values are recomputed for every replicate otherwise; the quantile inversions
// dominate the cost of a small simulated trial.
double cached_t_upper(int df, double tail) {
    thread_local std::map<std::pair<int, double>, double> cache;
    auto [it, inserted] = cache.try_emplace({df, tail}, 0.0);
    if (inserted) it->second = stats::t_upper_quantile(df, tail);
    return it->second;
}

double cached_z_upper(double tail) {
    thread_local std::map<double, double> cache;
    auto [it, inserted] = cache.try_emplace(tail, 0.0);
    if (inserted) it->second = normal_quantile(1.0 - tail);
    return it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// Two-arm tests

bool two_arm_normal_simulate(int n, const NormalHypothesis& h, Rng& rng) {
    if (n < 2) throw PreconditionError("two_arm_normal requires n >= 2");
    std::normal_distribution<double> z(0.0, 1.0);
    double s0 = 0.0, s1 = 0.0;
    for (int i = 0; i < n; ++i) s0 += h.sigma * z(rng);
    for (int i = 0; i < n; ++i) s1 += h.delta + h.sigma * z(rng);
    const double stat = (s1 - s0) / n / (h.sigma * std::sqrt(2.0 / n));
    return std::abs(stat) > cached_z_upper(h.alpha / 2.0);
}

double two_arm_normal_power(int n, const NormalHypothesis& h) {
    if (n < 2) throw PreconditionError("two_arm_normal requires n >= 2");
    const double z = normal_quantile(1.0 - h.alpha / 2.0);
    const double ncp = h.delta * std::sqrt(n / 2.0) / h.sigma;
    return normal_cdf(ncp - z) + normal_cdf(-ncp - z);
}

namespace {

bool proportions_reject(int x0, int x1, int n, double crit) {
    const double pooled = (x0 + x1) / (2.0 * n);
    if (pooled <= 0.0 || pooled >= 1.0) return false;
    const double se = std::sqrt(pooled * (1.0 - pooled) * 2.0 / n);
    return std::abs((x1 - x0) / static_cast<double>(n) / se) > crit;
}

}  // namespace

bool two_arm_binary_simulate(int n, const BinaryHypothesis& h, Rng& rng) {
    if (n < 10) throw PreconditionError("two_arm_binary requires n >= 10");
    std::binomial_distribution<int> arm0(n, h.p0), arm1(n, h.p1);
    const int x0 = arm0(rng);
    const int x1 = arm1(rng);
    return proportions_reject(x0, x1, n, cached_z_upper(h.alpha / 2.0));
}

double two_arm_binary_power(int n, const BinaryHypothesis& h) {
    if (n < 10) throw PreconditionError("two_arm_binary requires n >= 10");
    const double crit = normal_quantile(1.0 - h.alpha / 2.0);
    if (n <= 200) {
        boost::math::binomial_distribution<double> b0(n, h.p0), b1(n, h.p1);
        std::vector<double> pmf0(n + 1), pmf1(n + 1);
        for (int x = 0; x <= n; ++x) {
            pmf0[x] = boost::math::pdf(b0, x);
            pmf1[x] = boost::math::pdf(b1, x);
        }
        double power = 0.0;
        for (int x0 = 0; x0 <= n; ++x0)
            for (int x1 = 0; x1 <= n; ++x1)
                if (proportions_reject(x0, x1, n, crit)) power += pmf0[x0] * pmf1[x1];
        return power;
    }
    const double pbar = (h.p0 + h.p1) / 2.0;
    const double se0 = std::sqrt(2.0 * pbar * (1.0 - pbar) / n);
    const double se1 = std::sqrt((h.p0 * (1.0 - h.p0) + h.p1 * (1.0 - h.p1)) / n);
    const double diff = h.p1 - h.p0;
    return normal_cdf((diff - crit * se0) / se1) + normal_cdf((-diff - crit * se0) / se1);
}

// ---------------------------------------------------------------------------
// Layout

double ClusterLayout::unit_variance1(const VarianceComponents& v) const {
    if (therapist_units) return v.therapist + v.doctor / nest + v.residual / per_therapist;
    return v.therapist / nest + v.doctor + v.residual / (static_cast<double>(nest) * per_therapist);
}

double ClusterLayout::unit_variance0(const VarianceComponents& v) const {
    return v.doctor + v.residual / per_doctor0;
}

double ClusterLayout::unit_covariance1(const VarianceComponents& v, const Correlations& r) const {
    if (therapist_units)
        return r.therapist * v.therapist + r.doctor * v.doctor / nest + r.residual * v.residual / per_therapist;
    return r.therapist * v.therapist / nest + r.doctor * v.doctor +
           r.residual * v.residual / (static_cast<double>(nest) * per_therapist);
}

double ClusterLayout::unit_covariance0(const VarianceComponents& v, const Correlations& r) const {
    return r.doctor * v.doctor + r.residual * v.residual / per_doctor0;
}

namespace {

ClusterLayout make_layout(int n1, int n0, int k, int j, bool strict) {
    const std::string where = "cluster layout (n1=" + std::to_string(n1) + ", n0=" + std::to_string(n0) +
                              ", k=" + std::to_string(k) + ", j=" + std::to_string(j) + "): ";
    if (k < 1) throw PreconditionError(where + "need at least one therapist");
    if (j < 2) throw PreconditionError(where + "need at least one doctor per arm");
    ClusterLayout L;
    L.doctors0 = j / 2;
    const int d1 = j - L.doctors0;
    if (d1 >= k) {
        L.therapist_units = true;
        L.nest = d1 / k;
        L.therapists = k;
        L.doctors1 = k * L.nest;
        L.per_therapist = (n1 / (k * L.nest)) * L.nest;
        if (strict && (L.doctors1 != d1 || L.participants1() != n1))
            throw PreconditionError(where + "imbalanced: k must divide the intervention doctors and n1");
    } else {
        L.therapist_units = false;
        L.nest = k / d1;
        L.doctors1 = d1;
        L.therapists = d1 * L.nest;
        L.per_therapist = n1 / L.therapists;
        if (strict && (L.therapists != k || L.participants1() != n1))
            throw PreconditionError(where + "imbalanced: intervention doctors must divide k, and k must divide n1");
    }
    L.per_doctor0 = n0 / L.doctors0;
    if (strict && L.participants0() != n0)
        throw PreconditionError(where + "imbalanced: control doctors must divide n0");
    if (L.per_therapist < L.nest || L.per_therapist < 1 || L.per_doctor0 < 1)
        throw PreconditionError(where + "fewer participants than providers");
    if (L.units1() + L.units0() < 3) throw PreconditionError(where + "need at least 3 analysis clusters");
    return L;
}

}  // namespace

ClusterLayout ClusterLayout::balanced(int n1, int n0, int k, int j) { return make_layout(n1, n0, k, j, true); }
ClusterLayout ClusterLayout::trimmed(int n1, int n0, int k, int j) { return make_layout(n1, n0, k, j, false); }

// ---------------------------------------------------------------------------
// Cluster simulation

namespace {

template <int E>
using Vec = std::array<double, E>;

// Correlated pair (or single draw) with common standard deviation sd.
template <int E>
Vec<E> draw(std::normal_distribution<double>& z, Rng& rng, double sd, double rho) {
    if constexpr (E == 1) {
        return {sd * z(rng)};
    } else {
        const double a = z(rng);
        const double b = z(rng);
        return {sd * a, sd * (rho * a + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * b)};
    }
}

template <int E>
struct ArmMeans {
    std::array<std::vector<double>, E> intervention;
    std::array<std::vector<double>, E> control;
};

template <int E>
ArmMeans<E> simulate_cluster_means(const ClusterLayout& L, const VarianceComponents& v, const Correlations& r,
                                   const Vec<E>& effect, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    const double sd_t = std::sqrt(v.therapist), sd_d = std::sqrt(v.doctor), sd_w = std::sqrt(v.residual);
    ArmMeans<E> out;
    for (auto& m : out.intervention) m.reserve(L.units1());
    for (auto& m : out.control) m.reserve(L.units0());

    auto add = [](Vec<E>& acc, const Vec<E>& x) {
        for (int e = 0; e < E; ++e) acc[e] += x[e];
    };

    if (L.therapist_units) {
        const int per_doctor = L.per_therapist / L.nest;
        for (int t = 0; t < L.therapists; ++t) {
            const auto u = draw<E>(z, rng, sd_t, r.therapist);
            Vec<E> sum{};
            for (int d = 0; d < L.nest; ++d) {
                const auto vd = draw<E>(z, rng, sd_d, r.doctor);
                for (int p = 0; p < per_doctor; ++p) {
                    add(sum, draw<E>(z, rng, sd_w, r.residual));
                    add(sum, u);
                    add(sum, vd);
                    add(sum, effect);
                }
            }
            for (int e = 0; e < E; ++e) out.intervention[e].push_back(sum[e] / L.per_therapist);
        }
    } else {
        const int size = L.nest * L.per_therapist;
        for (int d = 0; d < L.doctors1; ++d) {
            const auto vd = draw<E>(z, rng, sd_d, r.doctor);
            Vec<E> sum{};
            for (int t = 0; t < L.nest; ++t) {
                const auto u = draw<E>(z, rng, sd_t, r.therapist);
                for (int p = 0; p < L.per_therapist; ++p) {
                    add(sum, draw<E>(z, rng, sd_w, r.residual));
                    add(sum, u);
                    add(sum, vd);
                    add(sum, effect);
                }
            }
            for (int e = 0; e < E; ++e) out.intervention[e].push_back(sum[e] / size);
        }
    }
    for (int d = 0; d < L.doctors0; ++d) {
        const auto vd = draw<E>(z, rng, sd_d, r.doctor);
        Vec<E> sum{};
        for (int p = 0; p < L.per_doctor0; ++p) {
            add(sum, draw<E>(z, rng, sd_w, r.residual));
            add(sum, vd);
        }
        for (int e = 0; e < E; ++e) out.control[e].push_back(sum[e] / L.per_doctor0);
    }
    return out;
}

// Pooled two-sample t statistic (intervention minus control).
double pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / na;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / nb;
    double ss = 0.0;
    for (double x : a) ss += (x - ma) * (x - ma);
    for (double x : b) ss += (x - mb) * (x - mb);
    const double sp2 = ss / (na + nb - 2.0);
    return (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
}

}  // namespace

bool cluster_rct_simulate(const ClusterLayout& layout, const ClusterHypothesis& h, Rng& rng) {
    const auto means = simulate_cluster_means<1>(layout, h.variances, Correlations{}, {h.effect}, rng);
    const double t = pooled_t(means.intervention[0], means.control[0]);
    return std::abs(t) > cached_t_upper(layout.df(), h.alpha / 2.0);
}

bool co_primary_simulate(const ClusterLayout& layout, const BivariateHypothesis& h, Rng& rng) {
    const auto means = simulate_cluster_means<2>(layout, h.variances, h.rho, {h.effect_f, h.effect_d}, rng);
    const double crit = cached_t_upper(layout.df(), h.alpha / 2.0);
    return std::abs(pooled_t(means.intervention[0], means.control[0])) > crit &&
           std::abs(pooled_t(means.intervention[1], means.control[1])) > crit;
}

bool pilot_either_simulate(const ClusterLayout& layout, const BivariateHypothesis& h, Rng& rng) {
    const auto means = simulate_cluster_means<2>(layout, h.variances, h.rho, {h.effect_f, h.effect_d}, rng);
    const double crit = cached_t_upper(layout.df(), h.alpha);
    return pooled_t(means.intervention[0], means.control[0]) > crit ||
           pooled_t(means.intervention[1], means.control[1]) > crit;
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

double chi2_quantile(double df, double u) {
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), u);
}

// Probabilists' Gauss-Hermite rule (weights sum to one) by Golub-Welsch.
struct HermiteRule {
    std::vector<double> nodes, weights;
};

const HermiteRule& hermite_rule() {
    static const HermiteRule rule = [] {
        constexpr int n = 128;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
        HermiteRule r;
        for (int i = 0; i < n; ++i) {
            const double w = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
            if (w < 1e-300) continue;
            r.nodes.push_back(eig.eigenvalues()(i));
            r.weights.push_back(w);
        }
        return r;
    }();
    return rule;
}

// Nodes and weights for E f(X), X ~ chi-square(df), written as X = F^{-1}(Phi(Z)) with
// Z standard normal. df = 0 is the point mass at zero.
struct Chi2Rule {
    std::vector<double> values, weights;
};

Chi2Rule chi2_rule(int df) {
    if (df == 0) return {{0.0}, {1.0}};
    const auto& h = hermite_rule();
    const boost::math::chi_squared_distribution<double> dist(df);
    Chi2Rule r;
    for (std::size_t i = 0; i < h.nodes.size(); ++i) {
        const double z = h.nodes[i];
        const double x = z < 0.0 ? boost::math::quantile(dist, normal_cdf(z))
                                 : boost::math::quantile(boost::math::complement(dist, normal_cdf(-z)));
        r.values.push_back(x);
        r.weights.push_back(h.weights[i]);
    }
    return r;
}

}  // namespace

double cluster_rct_power(const ClusterLayout& L, const ClusterHypothesis& h) {
    const double v1 = L.unit_variance1(h.variances), v0 = L.unit_variance0(h.variances);
    const int g1 = L.units1(), g0 = L.units0();
    const double df = L.df();
    const double sd = std::sqrt(v1 / g1 + v0 / g0);
    const double hfac = 1.0 / g1 + 1.0 / g0;
    const double crit = stats::t_upper_quantile(df, h.alpha / 2.0);
    const auto rx = chi2_rule(g1 - 1), ry = chi2_rule(g0 - 1);
    double power = 0.0;
    for (std::size_t a = 0; a < rx.values.size(); ++a) {
        double inner = 0.0;
        for (std::size_t b = 0; b < ry.values.size(); ++b) {
            const double thr = crit * std::sqrt((v1 * rx.values[a] + v0 * ry.values[b]) / df * hfac);
            inner += ry.weights[b] * (normal_cdf((h.effect - thr) / sd) + normal_cdf((-h.effect - thr) / sd));
        }
        power += rx.weights[a] * inner;
    }
    return power;
}

namespace {

const std::vector<DesignPoint>& oracle_nodes() {
    static const std::vector<DesignPoint> nodes = sobol_points(6, kBivariateOracleNodes);
    return nodes;
}

// Diagonal of a 2x2 Wishart(nu, v [[1, rho], [rho, 1]]) scatter matrix via the Bartlett
// decomposition, from three uniforms.
std::pair<double, double> scatter_diagonal(int nu, double v, double rho, double u1, double u2, double u3) {
    if (nu == 0) return {0.0, 0.0};
    const double c1 = std::sqrt(chi2_quantile(nu, u1));
    const double n21 = normal_quantile(u2);
    const double c2sq = nu > 1 ? chi2_quantile(nu - 1, u3) : 0.0;
    const double rc = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const double lower = rho * c1 + rc * n21;
    return {v * c1 * c1, v * (lower * lower + rc * rc * c2sq)};
}

enum class Joint { both_two_sided, either_one_sided };

// Conditional on the pooled variance estimates the two mean differences are bivariate
// normal; the scatter matrices are integrated out with quasi-random nodes.
double bivariate_power(const ClusterLayout& L, const BivariateHypothesis& h, Joint joint) {
    const auto& var = h.variances;
    const double v1 = L.unit_variance1(var), v0 = L.unit_variance0(var);
    const double c1 = L.unit_covariance1(var, h.rho), c0 = L.unit_covariance0(var, h.rho);
    const double rho1 = std::clamp(c1 / v1, -1.0, 1.0), rho0 = std::clamp(c0 / v0, -1.0, 1.0);
    const int g1 = L.units1(), g0 = L.units0();
    const double df = L.df();
    const double vnum = v1 / g1 + v0 / g0;
    const double sd = std::sqrt(vnum);
    const double rnum = std::clamp((c1 / g1 + c0 / g0) / vnum, -1.0, 1.0);
    const double hfac = 1.0 / g1 + 1.0 / g0;
    const double crit = joint == Joint::both_two_sided ? stats::t_upper_quantile(df, h.alpha / 2.0)
                                                        : stats::t_upper_quantile(df, h.alpha);
    const double mf = h.effect_f / sd, md = h.effect_d / sd;

    double total = 0.0;
    const auto& nodes = oracle_nodes();
    for (const auto& u : nodes) {
        const auto s1 = scatter_diagonal(g1 - 1, v1, rho1, u[0], u[1], u[2]);
        const auto s0 = scatter_diagonal(g0 - 1, v0, rho0, u[3], u[4], u[5]);
        const double af = crit * std::sqrt((s1.first + s0.first) / df * hfac) / sd;
        const double ad = crit * std::sqrt((s1.second + s0.second) / df * hfac) / sd;
        if (joint == Joint::both_two_sided) {
            total += stats::bvn_upper(af - mf, ad - md, rnum) + stats::bvn_upper(af - mf, ad + md, -rnum) +
                     stats::bvn_upper(af + mf, ad - md, -rnum) + stats::bvn_upper(af + mf, ad + md, rnum);
        } else {
            total += 1.0 - stats::bvn_lower(af - mf, ad - md, rnum);
        }
    }
    return total / static_cast<double>(nodes.size());
}

}  // namespace

double co_primary_power(const ClusterLayout& layout, const BivariateHypothesis& h) {
    return bivariate_power(layout, h, Joint::both_two_sided);
}

double pilot_either_power(const ClusterLayout& layout, const BivariateHypothesis& h) {
    return bivariate_power(layout, h, Joint::either_one_sided);
}

// ---------------------------------------------------------------------------
// Registry

namespace {

class Binding {
   public:
    Binding(const std::string& scenario, const DesignSpace& space, const std::vector<std::string>& required) {
        std::vector<std::string> missing;
        for (const auto& name : required) {
            if (auto i = space.index_of(name))
                index_[name] = *i;
            else
                missing.push_back("scenario '" + scenario + "' requires a design dimension named '" + name + "'");
        }
        if (!missing.empty()) throw ConfigError(missing);
        for (const auto& d : space.dims())
            if (!index_.count(d.name)) index_[d.name] = *space.index_of(d.name);
    }
    bool has(const std::string& name) const { return index_.count(name) > 0; }
    double value(const DesignPoint& x, const std::string& name) const { return x[index_.at(name)]; }
    int integer(const DesignPoint& x, const std::string& name) const {
        return static_cast<int>(std::lround(value(x, name)));
    }

   private:
    std::map<std::string, std::size_t> index_;
};

NormalHypothesis normal_hyp(const Hypothesis& h) {
    return {h.param("delta"), h.param_or("sigma", 1.0), h.param_or("alpha", 0.05)};
}

BinaryHypothesis binary_hyp(const Hypothesis& h) {
    return {h.param("p0"), h.param("p1"), h.param_or("alpha", 0.05)};
}

VarianceComponents variances(const Hypothesis& h) {
    return {h.param("sigma_t2"), h.param("sigma_d2"), h.param("sigma_w2")};
}

ClusterHypothesis cluster_hyp(const Hypothesis& h) {
    return {h.param("beta1"), variances(h), h.param_or("alpha", 0.05)};
}

BivariateHypothesis bivariate_hyp(const Hypothesis& h, double alpha) {
    BivariateHypothesis b;
    b.effect_f = h.param("beta1_f");
    b.effect_d = h.param("beta1_d");
    b.variances = variances(h);
    b.rho = {h.param_or("rho_w", 0.0), h.param_or("rho_t", 0.0), h.param_or("rho_d", 0.0)};
    b.alpha = alpha;
    return b;
}

Scenario two_arm_normal_scenario(const DesignSpace& space) {
    auto b = std::make_shared<Binding>("two_arm_normal", space, std::vector<std::string>{"n"});
    Scenario s;
    s.name = "two_arm_normal";
    s.dims = {"n"};
    s.hypothesis_params = {"delta", "sigma", "alpha"};
    s.simulate = [b](const DesignPoint& x, const Hypothesis& h, Rng& rng) {
        return two_arm_normal_simulate(b->integer(x, "n"), normal_hyp(h), rng);
    };
    s.oracle = [b](const DesignPoint& x, const Hypothesis& h) {
        return two_arm_normal_power(b->integer(x, "n"), normal_hyp(h));
    };
    s.formulas["total_participants"] = [b](const DesignPoint& x) { return 2.0 * b->value(x, "n"); };
    return s;
}

Scenario two_arm_binary_scenario(const DesignSpace& space) {
    auto b = std::make_shared<Binding>("two_arm_binary", space, std::vector<std::string>{"n"});
    Scenario s;
    s.name = "two_arm_binary";
    s.dims = {"n"};
    s.hypothesis_params = {"p0", "p1", "alpha"};
    s.simulate = [b](const DesignPoint& x, const Hypothesis& h, Rng& rng) {
        return two_arm_binary_simulate(b->integer(x, "n"), binary_hyp(h), rng);
    };
    s.oracle = [b](const DesignPoint& x, const Hypothesis& h) {
        return two_arm_binary_power(b->integer(x, "n"), binary_hyp(h));
    };
    s.formulas["total_participants"] = [b](const DesignPoint& x) { return 2.0 * b->value(x, "n"); };
    return s;
}

// n per arm, k therapists, j doctors (defaults to 2k when the space has no "j").
ClusterLayout equal_arm_layout(const Binding& b, const DesignPoint& x) {
    const int n = b.integer(x, "n");
    const int k = b.integer(x, "k");
    const int j = b.has("j") ? b.integer(x, "j") : 2 * k;
    return ClusterLayout::trimmed(n, n, k, j);
}

void add_equal_arm_formulas(Scenario& s, const std::shared_ptr<Binding>& b) {
    s.formulas["total_participants"] = [b](const DesignPoint& x) { return 2.0 * b->value(x, "n"); };
    s.formulas["providers"] = [b](const DesignPoint& x) {
        const double k = b->value(x, "k");
        return k + (b->has("j") ? b->value(x, "j") : 2.0 * k);
    };
}

Scenario cluster_rct_scenario(const DesignSpace& space) {
    auto b = std::make_shared<Binding>("cluster_rct", space, std::vector<std::string>{"n", "k"});
    Scenario s;
    s.name = "cluster_rct";
    s.dims = {"n", "k"};
    s.hypothesis_params = {"beta1", "sigma_t2", "sigma_d2", "sigma_w2", "alpha"};
    s.simulate = [b](const DesignPoint& x, const Hypothesis& h, Rng& rng) {
        return cluster_rct_simulate(equal_arm_layout(*b, x), cluster_hyp(h), rng);
    };
    s.oracle = [b](const DesignPoint& x, const Hypothesis& h) {
        return cluster_rct_power(equal_arm_layout(*b, x), cluster_hyp(h));
    };
    add_equal_arm_formulas(s, b);
    return s;
}

Scenario co_primary_scenario(const DesignSpace& space) {
    auto b = std::make_shared<Binding>("co_primary", space, std::vector<std::string>{"n", "k"});
    Scenario s;
    s.name = "co_primary";
    s.dims = {"n", "k"};
    s.hypothesis_params = {"beta1_f", "beta1_d", "sigma_t2", "sigma_d2", "sigma_w2", "rho_w", "rho_t", "rho_d", "alpha"};
    s.simulate = [b](const DesignPoint& x, const Hypothesis& h, Rng& rng) {
        return co_primary_simulate(equal_arm_layout(*b, x), bivariate_hyp(h, h.param_or("alpha", 0.05)), rng);
    };
    s.oracle = [b](const DesignPoint& x, const Hypothesis& h) {
        return co_primary_power(equal_arm_layout(*b, x), bivariate_hyp(h, h.param_or("alpha", 0.05)));
    };
    add_equal_arm_formulas(s, b);
    return s;
}

ClusterLayout pilot_layout(const Binding& b, const DesignPoint& x) {
    const int n1 = b.integer(x, "n1");
    const int n0 = static_cast<int>(std::lround(b.value(x, "r") * n1));
    return ClusterLayout::trimmed(n1, n0, b.integer(x, "k"), b.integer(x, "j"));
}

Scenario pilot_either_scenario(const DesignSpace& space) {
    auto b = std::make_shared<Binding>("pilot_either", space, std::vector<std::string>{"n1", "k", "r", "j", "a"});
    Scenario s;
    s.name = "pilot_either";
    s.dims = {"n1", "k", "r", "j", "a"};
    s.hypothesis_params = {"beta1_f", "beta1_d", "sigma_t2", "sigma_d2", "sigma_w2", "rho_w", "rho_t", "rho_d"};
    s.simulate = [b](const DesignPoint& x, const Hypothesis& h, Rng& rng) {
        return pilot_either_simulate(pilot_layout(*b, x), bivariate_hyp(h, b->value(x, "a")), rng);
    };
    s.oracle = [b](const DesignPoint& x, const Hypothesis& h) {
        return pilot_either_power(pilot_layout(*b, x), bivariate_hyp(h, b->value(x, "a")));
    };
    s.formulas["total_participants"] = [b](const DesignPoint& x) {
        return b->value(x, "n1") * (1.0 + b->value(x, "r"));
    };
    s.formulas["therapists"] = [b](const DesignPoint& x) { return b->value(x, "k"); };
    s.formulas["doctors"] = [b](const DesignPoint& x) { return b->value(x, "j"); };
    return s;
}

struct Registry {
    std::mutex mutex;
    std::map<std::string, ScenarioFactory> factories{
        {"two_arm_normal", two_arm_normal_scenario}, {"two_arm_binary", two_arm_binary_scenario},
        {"cluster_rct", cluster_rct_scenario},       {"co_primary", co_primary_scenario},
        {"pilot_either", pilot_either_scenario},
    };
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void register_scenario(const std::string& name, ScenarioFactory factory) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.factories[name] = std::move(factory);
}

std::vector<std::string> scenario_names() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> out;
    for (const auto& [name, _] : r.factories) out.push_back(name);
    return out;
}

bool has_scenario(const std::string& name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    return r.factories.count(name) > 0;
}

Scenario make_scenario(const std::string& name, const DesignSpace& space) {
    ScenarioFactory factory;
    {
        auto& r = registry();
        std::lock_guard lock(r.mutex);
        auto it = r.factories.find(name);
        if (it == r.factories.end()) throw ConfigError({"unknown scenario '" + name + "'"});
        factory = it->second;
    }
    return factory(space);
}

}  // namespace ssdopt::simlib
