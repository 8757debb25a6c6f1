#include "seqsense/montecarlo.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "seqsense/error.hpp"
#include "seqsense/parallel.hpp"

namespace seqsense {

namespace {

constexpr double kZ95 = 1.959963984540054;

struct TrialSummary {
    std::int64_t slots = 0;
    std::int8_t decision = -1;  // -1 none, 0 H0, 1 H1
    bool truncated = false;
    bool abstained = false;
};

}  // namespace

Proportion make_proportion(std::int64_t count, std::int64_t n) {
    Proportion p;
    p.count = count;
    p.n = n;
    if (n <= 0) {
        p.p = p.lo = p.hi = p.half_width = std::numeric_limits<double>::quiet_NaN();
        return p;
    }
    const double nn = static_cast<double>(n);
    p.p = static_cast<double>(count) / nn;
    if (count < 10) {
        using boost::math::beta_distribution;
        p.lo = count == 0 ? 0.0
                          : quantile(beta_distribution<>(static_cast<double>(count),
                                                         static_cast<double>(n - count + 1)),
                                     0.025);
        p.hi = count == n ? 1.0
                          : quantile(beta_distribution<>(static_cast<double>(count + 1),
                                                         static_cast<double>(n - count)),
                                     0.975);
        p.half_width = std::max(p.p - p.lo, p.hi - p.p);
    } else {
        p.half_width = kZ95 * std::sqrt(p.p * (1.0 - p.p) / nn);
        p.lo = std::max(0.0, p.p - p.half_width);
        p.hi = std::min(1.0, p.p + p.half_width);
    }
    return p;
}

MeanEstimate make_mean(const std::vector<double>& values) {
    MeanEstimate m;
    m.n = static_cast<std::int64_t>(values.size());
    if (values.empty()) {
        m.mean = m.variance = m.half_width = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    m.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - m.mean) * (v - m.mean);
        m.variance = ss / static_cast<double>(values.size() - 1);
    }
    m.half_width = kZ95 * std::sqrt(m.variance / static_cast<double>(values.size()));
    return m;
}

double PerformanceEstimate::mean_error_half_width() const {
    return 0.5 * std::hypot(p_fa.half_width, p_md.half_width);
}

double PerformanceEstimate::mean_delay_half_width() const {
    return 0.5 * std::hypot(e0_n.half_width, e1_n.half_width);
}

std::uint64_t trial_stream(std::uint64_t partition, Hypothesis h, std::uint64_t trial) {
    return (partition << 33) + (h == Hypothesis::H1 ? (std::uint64_t{1} << 32) : 0) + trial;
}

PerformanceEstimate estimate(const SystemConfig& cfg, std::int64_t n_trials, std::uint64_t seed,
                             const RunOptions& opts) {
    if (n_trials < 1) throw ContractViolation("estimate: n_trials must be >= 1");
    if (n_trials >= (std::int64_t{1} << 32)) throw ContractViolation("estimate: too many trials");
    validate(cfg);
    const auto n = static_cast<std::size_t>(n_trials);
    std::vector<TrialSummary> out(2 * n);
    parallel_for(2 * n, opts.threads, [&](std::size_t i) {
        const Hypothesis h = i < n ? Hypothesis::H0 : Hypothesis::H1;
        const std::uint64_t trial = i < n ? i : i - n;
        RngStream rng(seed, trial_stream(opts.partition, h, trial));
        const TrialResult r = run_trial(cfg, h, rng);
        TrialSummary& s = out[i];
        s.slots = r.slots;
        s.truncated = r.truncated;
        s.abstained = r.abstained;
        if (r.decision) s.decision = *r.decision == Hypothesis::H1 ? 1 : 0;
    });

    PerformanceEstimate est;
    est.trials = n_trials;
    std::int64_t errors0 = 0, errors1 = 0;
    std::vector<double> n0, n1;
    n0.reserve(n);
    n1.reserve(n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        const TrialSummary& s = out[i];
        const bool h0 = i < n;
        if (s.truncated) (h0 ? est.truncated0 : est.truncated1)++;
        if (s.abstained) (h0 ? est.abstained0 : est.abstained1)++;
        if (s.decision < 0) {
            (h0 ? errors0 : errors1)++;
            continue;
        }
        if (h0 && s.decision == 1) ++errors0;
        if (!h0 && s.decision == 0) ++errors1;
        (h0 ? n0 : n1).push_back(static_cast<double>(s.slots));
    }
    est.p_fa = make_proportion(errors0, n_trials);
    est.p_md = make_proportion(errors1, n_trials);
    est.e0_n = make_mean(n0);
    est.e1_n = make_mean(n1);
    return est;
}

ThresholdSchedule threshold_schedule(double c, const std::vector<double>& drift0,
                                     const std::vector<double>& drift1) {
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("schedule scalar c must lie in (0, 1]");
    if (drift0.empty() || drift0.size() != drift1.size())
        throw ConfigError("schedule needs one H0 and one H1 drift per node");
    for (std::size_t l = 0; l < drift0.size(); ++l) {
        if (!(drift0[l] < 0.0) || !std::isfinite(drift0[l]))
            throw ConfigError("node " + std::to_string(l) + ": H0 drift must be negative");
        if (!(drift1[l] > 0.0) || !std::isfinite(drift1[l]))
            throw ConfigError("node " + std::to_string(l) + ": H1 drift must be positive");
    }
    const double scale = std::abs(std::log(c));
    ThresholdSchedule s;
    s.c = c;
    s.beta0 = s.beta1 = scale;
    // share_l = d_l / sum_j d_j, written as 1 / sum_j (d_j / d_l) so that
    // identical nodes get exactly 1/L.
    auto share = [](const std::vector<double>& d, std::size_t l) {
        double ratio = 0.0;
        for (double dj : d) ratio += dj / d[l];
        return 1.0 / ratio;
    };
    for (std::size_t l = 0; l < drift0.size(); ++l) {
        s.gamma0.push_back(share(drift0, l) * scale);
        s.gamma1.push_back(share(drift1, l) * scale);
    }
    return s;
}

void apply_schedule(SystemConfig& cfg, const ThresholdSchedule& schedule) {
    if (schedule.gamma0.size() != cfg.node_tests.size())
        throw ConfigError("schedule and system disagree on the number of nodes");
    for (std::size_t l = 0; l < cfg.node_tests.size(); ++l) {
        cfg.node_tests[l].gamma0 = schedule.gamma0[l];
        cfg.node_tests[l].gamma1 = schedule.gamma1[l];
    }
    cfg.fc_test.gamma0 = schedule.beta0;
    cfg.fc_test.gamma1 = schedule.beta1;
}

MeansEstimate estimate_means(const ObservationSampler& sampler, double inner_clip, std::int64_t n,
                             std::uint64_t seed, unsigned threads) {
    if (n < 10'000) throw ContractViolation("estimate_means: n must be >= 10^4");
    const auto count = static_cast<std::size_t>(n);
    std::vector<double> v0(count), v1(count);
    parallel_for(2 * count, threads, [&](std::size_t i) {
        const Hypothesis h = i < count ? Hypothesis::H0 : Hypothesis::H1;
        const std::size_t j = i < count ? i : i - count;
        RngStream rng(seed, trial_stream(0, h, j));
        (i < count ? v0 : v1)[j] = psi(sampler(h, rng), inner_clip);
    });
    const MeanEstimate m0 = make_mean(v0);
    const MeanEstimate m1 = make_mean(v1);
    if (!(m1.mean - m1.half_width > m0.mean + m0.half_width))
        throw ConfigError("hypotheses are not separated after psi_1 (mu0 = " + std::to_string(m0.mean) +
                          ", mu1 = " + std::to_string(m1.mean) + ")");
    return {m0.mean, m0.half_width, m1.mean, m1.half_width};
}

ObservationSampler node_sampler(const SystemConfig& cfg, int node) {
    const SignalModel sig = cfg.node_signals.at(static_cast<std::size_t>(node));
    const EnergyConfig energy = cfg.energy;
    const Detector detector = cfg.detector;
    const FadingModel fading = cfg.node_fading;
    return [=](Hypothesis h, RngStream& rng) {
        const double gain = fading.mode == FadingMode::Slow ? draw_gain(fading, rng) : 1.0;
        return sample_observation(h, sig, energy, detector, fading, gain, rng);
    };
}

ThresholdSchedule Design::schedule(double c) const { return threshold_schedule(c, drift0, drift1); }

SystemConfig Design::at(double c) const {
    SystemConfig cfg = base;
    apply_schedule(cfg, schedule(c));
    return cfg;
}

Design prepare(SystemConfig cfg, const DesignOptions& opts) {
    const auto L = static_cast<std::size_t>(cfg.nodes);
    if (cfg.node_tests.size() != L || cfg.node_signals.size() != L)
        throw ConfigError("need one signal model and one test per node");
    Design d;
    for (std::size_t l = 0; l < L; ++l) {
        TestSpec& spec = cfg.node_tests[l];
        const auto sampler = node_sampler(cfg, static_cast<int>(l));
        if (l < opts.auto_centers.size() && opts.auto_centers[l]) {
            if (cfg.coherent_centers) throw ConfigError("coherent centers must be given explicitly");
            const MeansEstimate m = estimate_means(sampler, spec.inner_clip, opts.samples, opts.seed, opts.threads);
            spec.mu0 = m.mu0;
            spec.mu1 = m.mu1;
        }
        // Every node's drift is estimated from the same streams, so identical
        // nodes get identical drifts.
        const auto n = static_cast<std::size_t>(opts.samples);
        std::vector<double> inc0(n), inc1(n);
        const TestSpec s = spec;
        const bool coherent = cfg.coherent_centers;
        const SignalModel& sig = cfg.node_signals[l];
        parallel_for(2 * n, opts.threads, [&](std::size_t i) {
            const Hypothesis h = i < n ? Hypothesis::H0 : Hypothesis::H1;
            const std::size_t j = i < n ? i : i - n;
            RngStream rng(opts.seed, trial_stream(0, h, j) + (std::uint64_t{1} << 31));
            double x = 0.0, center = s.center();
            if (coherent) {
                const double gain = cfg.node_fading.mode == FadingMode::Slow ? draw_gain(cfg.node_fading, rng) : 1.0;
                x = sample_observation(h, sig, cfg.energy, cfg.detector, cfg.node_fading, gain, rng);
                center *= gain;
            } else {
                x = sampler(h, rng);
            }
            (i < n ? inc0 : inc1)[j] = psi(psi(x, s.inner_clip) - center, s.clip);
        });
        d.drift0.push_back(make_mean(inc0).mean);
        d.drift1.push_back(make_mean(inc1).mean);
    }
    d.base = std::move(cfg);
    validate(d.base);
    return d;
}

std::vector<SweepPoint> sweep(const Design& design, const std::vector<double>& grid,
                              std::int64_t n_trials, std::uint64_t seed, unsigned threads) {
    std::vector<SweepPoint> points;
    points.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SweepPoint p;
        p.schedule = design.schedule(grid[i]);
        SystemConfig cfg = design.base;
        apply_schedule(cfg, p.schedule);
        p.estimate = estimate(cfg, n_trials, seed, {threads, i + 1});
        points.push_back(std::move(p));
    }
    return points;
}

Calibration calibrate(const Design& design, const std::vector<double>& grid, double target_pfa,
                      double target_pmd, std::int64_t n_trials, std::uint64_t seed, unsigned threads) {
    if (!(target_pfa > 0.0 && target_pfa < 0.5) && target_pfa != 0.5)
        throw ConfigError("target P_FA must lie in (0, 0.5]");
    if (!(target_pmd > 0.0 && target_pmd < 0.5) && target_pmd != 0.5)
        throw ConfigError("target P_MD must lie in (0, 0.5]");
    if (grid.empty()) throw ConfigError("calibration grid is empty");
    // Least demanding (largest c, smallest |log c|) first.
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(std::log(grid[a])) < std::abs(std::log(grid[b]));
    });

    Calibration result;
    std::vector<std::optional<SweepPoint>> memo(grid.size());
    auto eval = [&](std::size_t rank) -> const SweepPoint& {
        const std::size_t idx = order[rank];
        if (!memo[idx]) {
            SweepPoint p;
            p.schedule = design.schedule(grid[idx]);
            SystemConfig cfg = design.base;
            apply_schedule(cfg, p.schedule);
            p.estimate = estimate(cfg, n_trials, seed, {threads, idx + 1});
            memo[idx] = std::move(p);
            result.evaluated.push_back(idx);
        }
        return *memo[idx];
    };
    auto qualifies = [&](const SweepPoint& p) {
        return p.estimate.p_fa.p <= target_pfa && p.estimate.p_md.p <= target_pmd;
    };

    std::size_t lo = 0, hi = grid.size();  // first qualifying rank lies in [lo, hi]
    if (!qualifies(eval(hi - 1))) {
        std::size_t best = order[hi - 1];
        for (std::size_t idx : result.evaluated)
            if (memo[idx]->estimate.mean_error() < memo[best]->estimate.mean_error()) best = idx;
        result.index = best;
        result.point = *memo[best];
        return result;
    }
    hi = hi - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (qualifies(eval(mid))) hi = mid;
        else lo = mid + 1;
    }
    result.success = true;
    result.index = order[hi];
    result.point = eval(hi);
    return result;
}

}  // namespace seqsense
