#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "seqsense/distributions.hpp"
#include "seqsense/nodes.hpp"

namespace seqsense {

/// Law of a walk increment Y, summarized by what the bound formulas use.
struct IncrementModel {
    double theta = 0.0;          // E[Y]
    double second_moment = 0.0;  // E[Y^2]; +inf if infinite
    std::optional<double> neg_first;   // E[|Y^-|]
    std::optional<double> neg_second;  // E[(Y^-)^2]
    std::optional<double> pos_second;  // E[(Y^+)^2]
    std::function<double(double)> mgf;   // E[e^{sY}]; empty when infinite for s > 0
    std::function<double(double)> tail;  // P(Y > y); empty if unavailable
    std::optional<double> tail_index;    // alpha_1 for regularly varying tails

    double variance() const { return second_moment - theta * theta; }

    static IncrementModel gaussian(double mean, double variance);
    /// Y = psi(X - shift; clip) for Gaussian or mixture X, by quadrature.
    /// clip = +inf gives the plain shifted law.
    static IncrementModel transformed(const DistributionSpec& law, double shift, double clip);
    /// Y ~ stable law (alpha > 1). E[(Y^-)^2] is finite only for skew = 1.
    static IncrementModel stable(const AlphaStable& law);
    /// Moments and MGF of the empirical law; suitable for bounded increments.
    static IncrementModel from_samples(std::vector<double> samples);
};

/// [t0/|theta|, t0/|theta| + E[(Y^-)^2]/(2 theta^2)] for the first passage
/// below -t0. Requires theta < 0 and finite E[(Y^-)^2].
std::pair<double, double> stop_time_bounds(const IncrementModel& model, double t0);

struct LundbergResult {
    double gamma = 0.0;
    /// E[Y]^2 / (E[|Y^-|] E[Y^2]). A moment approximation only; it is not an
    /// upper bound in general (it is below the true root for Gaussians).
    double moment_approximation = 0.0;
};

/// Positive root of E[e^{Gamma Y}] = 1. Throws UnsupportedError without an
/// MGF and DomainError unless theta < 0.
LundbergResult lundberg_exponent(const IncrementModel& model);

double pfa_light_tail(double gamma, double t1);

/// (1 - F(t1)) E0[N] with E0[N] ~ t0 / |theta|.
double pfa_heavy_tail(const IncrementModel& model, double t0, double t1);

struct DelayPair {
    double e0 = 0.0;
    double e1 = 0.0;
};

/// Delays at P_FA = a and P_MD = b for increments with tail index alpha1.
/// theta0 and theta1 are drift magnitudes.
DelayPair heavy_tail_delay(double theta0, double theta1, double alpha1, double a, double b);

/// Gaussian (mean, variance) of a node's stopping time: (g/|d|, g rho2/|d|^3).
std::pair<double, double> node_stop_gaussian_approx(double gamma, double drift, double rho2);

struct GaussianTime {
    double mean = 0.0;
    double variance = 0.0;
};

/// E[t_1], ..., E[t_L] for independent Gaussian times, by simulation.
std::vector<double> order_statistic_means(const std::vector<GaussianTime>& times,
                                          std::int64_t replicates = 1'000'000,
                                          std::uint64_t seed = 1);

/// E[t_k] (k is 1-based).
double order_statistic_mean(const std::vector<GaussianTime>& times, int k,
                            std::int64_t replicates = 1'000'000, std::uint64_t seed = 1);

/// P(min_l t_l > k) for independent Gaussian times.
double first_time_survival(const std::vector<GaussianTime>& times, double k);

struct DriftSchedule {
    std::vector<double> drift;        // delta^j, j = 0..L
    std::vector<double> change_time;  // E[t_j], j = 0..L with E[t_0] = 0
    std::vector<double> level;        // W~_j, j = 0..L with W~_0 = 0

    static DriftSchedule build(std::vector<double> drift, std::vector<double> change_time);
};

/// Time to reach `barrier` (signed: -beta0 under H0, +beta1 under H1): the
/// first j whose drift points at the barrier and reaches it before the next
/// change gives E[t_j] + (barrier - W~_j) / delta^j. Throws DomainError when
/// no j qualifies.
double fc_delay_approx(const DriftSchedule& schedule, double barrier);

struct ErrorBounds {
    double lower = 0.0;
    double upper = 0.0;
    double remainder = 0.0;  // bound on the dropped terms of either series
};

/// P(FC crosses `barrier` > 0 before the first node decides). `pre_increments`
/// are draws of the FC increment before t_1, oriented so that crossing means
/// going up; W_{k-1} is replaced by a Gaussian with the exact mean and
/// variance of the (k-1)-step sum.
ErrorBounds fc_error_approx(std::vector<double> pre_increments, double barrier,
                            const std::function<double(double)>& t1_survival, int n_terms);

struct ExponentReport {
    double r0 = 0.0;
    double gamma_l = 0.0;
    double gamma_prime = 0.0;
    double k2 = 0.0;
    double alpha0_max = 0.0;  // largest alpha0 with log phi(alpha0) <= eta
    bool feasible = false;    // k2 < alpha0_max
    double fc_gamma = 0.0;    // (mu1_bar - mu0_bar) / sigma_bar^2
    double node_gamma = 0.0;  // Lundberg exponent of a node increment under H0

    /// min{r alpha0 - k2, Gamma0 (1 - r), Gamma0l gamma_l}.
    double exponent(double r) const;
};

ExponentReport gaussian_exponent_report(double mu0, double mu1, double sigma2, int nodes,
                                        double mu0_bar, double mu1_bar, double sigma2_bar,
                                        double eta);

/// 1/|D_tot| + |c_i| / |Delta_i| with |c_i| = 1 + E|xi*| / |D_tot|.
double delay_slope_bound(double d_tot, double mean_abs_xi, double delta_all);

struct FcApproximation {
    std::optional<double> e0_n;
    std::optional<double> e1_n;
    std::optional<ErrorBounds> p_fa;
    std::optional<ErrorBounds> p_md;
    DriftSchedule schedule0;
    DriftSchedule schedule1;
    std::vector<GaussianTime> node_times0;
    std::vector<GaussianTime> node_times1;
};

/// Drift-change approximation of delay and error for a distributed system with thresholds set.
/// Node and FC increment laws are sampled. Throws UnsupportedError for node
/// tests that are not random walks.
FcApproximation approximate_fc(const SystemConfig& cfg, std::int64_t samples = 200'000,
                               std::uint64_t seed = 1, int n_terms = 400);

}  // namespace seqsense
