#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "seqsense/nodes.hpp"

namespace seqsense {

/// Binomial proportion with a 95% interval: normal approximation, or
/// Clopper-Pearson when fewer than 10 events were seen.
struct Proportion {
    std::int64_t count = 0;
    std::int64_t n = 0;
    double p = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double half_width = 0.0;
};

Proportion make_proportion(std::int64_t count, std::int64_t n);

struct MeanEstimate {
    std::int64_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // sample variance
    double half_width = 0.0;
};

/// Sequential two-pass mean/variance; the order of `values` fixes the result.
MeanEstimate make_mean(const std::vector<double>& values);

struct PerformanceEstimate {
    std::int64_t trials = 0;  // per hypothesis
    Proportion p_fa;
    Proportion p_md;
    MeanEstimate e0_n;
    MeanEstimate e1_n;
    std::int64_t truncated0 = 0;
    std::int64_t truncated1 = 0;
    std::int64_t abstained0 = 0;
    std::int64_t abstained1 = 0;

    double mean_error() const { return 0.5 * (p_fa.p + p_md.p); }
    double mean_delay() const { return 0.5 * (e0_n.mean + e1_n.mean); }
    /// Half-width of mean_error() assuming independent hypotheses.
    double mean_error_half_width() const;
    double mean_delay_half_width() const;
};

/// Stream id of one trial: partition * 2^33 + hypothesis * 2^32 + trial.
std::uint64_t trial_stream(std::uint64_t partition, Hypothesis h, std::uint64_t trial);

struct RunOptions {
    unsigned threads = 0;
    std::uint64_t partition = 0;
};

/// Runs n_trials under each hypothesis. Truncated and abstained trials count
/// as errors and are left out of the delay means.
PerformanceEstimate estimate(const SystemConfig& cfg, std::int64_t n_trials, std::uint64_t seed,
                             const RunOptions& opts = {});

struct ThresholdSchedule {
    double c = 0.0;
    std::vector<double> gamma0;  // per-node lower barrier magnitudes
    std::vector<double> gamma1;
    double beta0 = 0.0;
    double beta1 = 0.0;
};

/// beta = |log c|, gamma0_l = g_l |log c|, gamma1_l = r_l |log c| with g_l
/// and r_l each node's share of the total drift under H0 / H1.
ThresholdSchedule threshold_schedule(double c, const std::vector<double>& drift0,
                                     const std::vector<double>& drift1);

void apply_schedule(SystemConfig& cfg, const ThresholdSchedule& schedule);

struct MeansEstimate {
    double mu0 = 0.0;
    double mu0_hw = 0.0;
    double mu1 = 0.0;
    double mu1_hw = 0.0;
};

using ObservationSampler = std::function<double(Hypothesis, RngStream&)>;

/// Monte-Carlo means of psi_1(X) under each hypothesis (n >= 10^4 draws
/// each). Throws ConfigError when the two are not separated.
MeansEstimate estimate_means(const ObservationSampler& sampler, double inner_clip, std::int64_t n,
                             std::uint64_t seed, unsigned threads = 0);

/// Observation law of one node with gains redrawn per observation.
ObservationSampler node_sampler(const SystemConfig& cfg, int node);

/// A system whose node centers and drifts are resolved, ready to be
/// evaluated at any schedule scalar c.
struct Design {
    SystemConfig base;
    std::vector<double> drift0;
    std::vector<double> drift1;

    ThresholdSchedule schedule(double c) const;
    SystemConfig at(double c) const;
};

struct DesignOptions {
    std::vector<bool> auto_centers;  // per node; estimate mu0/mu1 by simulation
    std::int64_t samples = 200'000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

/// Fills auto centers and estimates each node's increment drifts. Drifts are
/// means of psi(psi_1(X) - center; K) whatever the test kind, so that they
/// exist under heavy tails.
Design prepare(SystemConfig cfg, const DesignOptions& opts);

struct SweepPoint {
    ThresholdSchedule schedule;
    PerformanceEstimate estimate;
};

/// Point i uses stream partition i + 1; partition 0 is left to pre-runs.
std::vector<SweepPoint> sweep(const Design& design, const std::vector<double>& grid,
                              std::int64_t n_trials, std::uint64_t seed, unsigned threads = 0);

struct Calibration {
    bool success = false;
    std::size_t index = 0;  // grid index of the returned point
    SweepPoint point;
    std::vector<std::size_t> evaluated;  // grid indices in evaluation order
};

/// Orders the grid by |log c| and bisects for the least demanding point whose
/// estimated P_FA and P_MD are both within target. On failure the returned
/// point is the evaluated one with the smallest mean error.
Calibration calibrate(const Design& design, const std::vector<double>& grid, double target_pfa,
                      double target_pmd, std::int64_t n_trials, std::uint64_t seed,
                      unsigned threads = 0);

}  // namespace seqsense
