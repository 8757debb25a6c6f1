#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scenarios.hpp"
#include "seqsense/analysis.hpp"
#include "seqsense/channel.hpp"
#include "seqsense/distributions.hpp"
#include "seqsense/montecarlo.hpp"
#include "seqsense/nodes.hpp"
#include "seqsense/seqtests.hpp"

namespace seqsense::oracles {

void Context::expect(const std::string& quantity, double value, double lo, double hi) {
    checks.push_back({current, quantity, value, lo, hi, value >= lo && value <= hi});
}

void Context::expect_true(const std::string& quantity, bool ok) { expect(quantity, ok ? 1.0 : 0.0, 1.0, 1.0); }

namespace {

constexpr double kPi = 3.14159265358979323846;

// Each oracle draws from its own block of stream ids.
std::uint64_t stream(int oracle, std::uint64_t sub = 0) { return (static_cast<std::uint64_t>(oracle) << 40) + sub; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

template <typename F>
double simpson(F f, double a, double b, int n = 20000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// E[(Y^-)^2] for Y ~ N(m, v) by direct integration of the density.
double gaussian_neg_second(double m, double v) {
    const double s = std::sqrt(v);
    return simpson([&](double y) { return y * y * normal_pdf((y - m) / s) / s; }, m - 12.0 * s, std::min(0.0, m + 12.0 * s),
                   200000);
}

double widen(const Context& ctx) { return ctx.quick() ? std::sqrt(10.0) : 1.0; }

void normal_tail(Context& ctx) {
    const double ref = 0.5 * std::erfc(1.96 / std::sqrt(2.0));
    ctx.expect("P(N(0,1) > 1.96)", tail_complement(Gaussian{0.0, 1.0}, 1.96), ref - 1e-3, ref + 1e-3);
}

void stable_tail(Context& ctx) {
    const DistributionSpec law = AlphaStable{1.8, 1.0, 0.0, 0.0};
    const std::int64_t n = ctx.n(10'000'000);
    RngStream rng(ctx.seed, stream(2));
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n; ++i) hits += draw(law, rng) > 50.0;
    const double p = static_cast<double>(hits) / n;
    const double se = std::sqrt(p * (1.0 - p) / n);
    ctx.expect("P(S1.8 > 50) vs MC", tail_complement(law, 50.0), p - 3.0 * se, p + 3.0 * se);
}

void hill_index(Context& ctx) {
    SignalModel sig;
    sig.noise.noise = Gaussian{0.0, 1.0};
    sig.noise.emi = AlphaStable{1.8, 1.0, 0.0, 0.0};
    const std::int64_t n = ctx.n(10'000'000);
    RngStream rng(ctx.seed, stream(3));
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = std::abs(raw_sample(Hypothesis::H1, sig, 1.0, rng));
    const auto k = static_cast<std::size_t>(n / 100);
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k), x.end(), std::greater<>());
    const double threshold = x[k];
    double h = 0.0;
    for (std::size_t i = 0; i < k; ++i) h += std::log(x[i] / threshold);
    const double alpha = static_cast<double>(k) / h;
    const double tol = 0.1 * widen(ctx);
    ctx.expect("Hill index of |raw|, top 1%", alpha, 1.8 - tol, 1.8 + tol);
}

void energy_mc(Context& ctx) {
    SignalModel sig;
    sig.noise.noise = Gaussian{0.0, 2.0};
    EnergyConfig ec{5, 2.0};
    const double gain = 2.0;
    const EnergyMoments m = energy_moments(sig, ec, gain);
    // M sigma^2 and M (sigma^2 + g^2 E[S^2]) with E[S^2] = 1.
    ctx.expect("mean H0 (substitution)", m.mean_h0, 10.0, 10.0);
    ctx.expect("mean H1 (substitution)", m.mean_h1, 30.0, 30.0);
    const std::int64_t n = ctx.n(1'000'000);
    const double tol = 0.01 * widen(ctx);
    for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
        RngStream rng(ctx.seed, stream(4, h == Hypothesis::H1));
        std::vector<double> raws(5);
        double sum = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            for (auto& r : raws) r = raw_sample(h, sig, gain, rng);
            sum += energy_block(raws, ec);
        }
        const double ref = h == Hypothesis::H0 ? m.mean_h0 : m.mean_h1;
        ctx.expect(h == Hypothesis::H0 ? "MC mean H0" : "MC mean H1", sum / n, ref * (1 - tol), ref * (1 + tol));
    }
}

void rank_enumeration(Context& ctx) {
    const std::vector<double> y{0.7, -0.2, 1.1};
    // sum sgn(y_i) R_i / (n + 1) with R_i the rank of |y_i|.
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(y[a]) < std::abs(y[b]); });
    double signed_sum = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) signed_sum += (y[order[r]] > 0 ? 1.0 : -1.0) * static_cast<double>(r + 1);
    const double ref = signed_sum / static_cast<double>(y.size() + 1);
    TestSpec spec = make_test_spec(TestKind::Rank, -1.0, 1.0, 10.0, 10.0);
    TestState st;
    for (double v : y) update_in_place(st, spec, v);
    ctx.expect("T_3 vs enumeration", st.statistic, ref, ref);
    ctx.expect("T_3", st.statistic, 1.0, 1.0);
}

void deterministic_trial(Context& ctx) {
    const int L = 5;
    const double beta = 10.0;
    const SystemConfig cfg = scenarios::noise_free(L, beta);
    RngStream rng(ctx.seed, stream(6));
    const TrialResult r = run_trial(cfg, Hypothesis::H1, rng);
    // Node l steps +1/2 per slot and decides at slot ceil(gamma_l / (1/2));
    // the FC adds min(j, K) with j nodes transmitting +1.
    std::vector<std::int64_t> decide(L);
    for (int l = 0; l < L; ++l) decide[l] = static_cast<std::int64_t>(std::ceil(cfg.node_tests[l].gamma1 / 0.5));
    double w = 0.0;
    std::int64_t k = 0;
    while (w < beta) {
        ++k;
        const auto j = std::count_if(decide.begin(), decide.end(), [&](std::int64_t d) { return d <= k; });
        w += std::min(static_cast<double>(j), cfg.fc_test.clip);
    }
    ctx.expect_true("decides H1", r.decision == Hypothesis::H1);
    ctx.expect("N vs recursion", static_cast<double>(r.slots), static_cast<double>(k), static_cast<double>(k));
}

void pfa_falls_with_beta(Context& ctx) {
    DesignOptions opts;
    opts.auto_centers.assign(5, true);
    opts.samples = ctx.n(200'000);
    opts.seed = ctx.seed;
    opts.threads = ctx.threads;
    const Design design = prepare(scenarios::impaired_distributed(5, 1.0, 5), opts);
    SystemConfig base = design.at(std::exp(-4.0));
    std::vector<double> pfa;
    for (double b1 : {2.0, 4.0, 8.0}) {
        SystemConfig cfg = base;
        cfg.fc_test.gamma1 = b1;
        RunOptions ro;
        ro.threads = ctx.threads;
        ro.partition = 1;
        const auto est = estimate(cfg, ctx.n(10'000), ctx.seed, ro);
        pfa.push_back(est.p_fa.p);
        ctx.expect("P_FA at beta1=" + std::to_string(static_cast<int>(b1)), est.p_fa.p, 0.0, 1.0);
    }
    ctx.expect_true("P_FA strictly decreasing", pfa[0] > pfa[1] && pfa[1] > pfa[2]);
}

void eq_bracket_estimate(Context& ctx) {
    const SystemConfig cfg = scenarios::single_gaussian_walk(10.0, 10.0);
    const double neg2 = gaussian_neg_second(-0.5, 1.0);
    RunOptions ro;
    ro.threads = ctx.threads;
    const auto est = estimate(cfg, ctx.n(100'000), ctx.seed, ro);
    const double lo = 20.0, hi = 20.0 + neg2 / 0.5;
    ctx.expect("E0[N]", est.e0_n.mean, lo * 0.95, hi * 1.05);
    ctx.expect("E1[N]", est.e1_n.mean, lo * 0.95, hi * 1.05);
}

void calibrate_ladder(Context& ctx) {
    DesignOptions opts;
    opts.samples = ctx.n(200'000);
    opts.seed = ctx.seed;
    opts.threads = ctx.threads;
    const Design design = prepare(scenarios::gaussian_distributed(5, 1.0), opts);
    std::vector<double> grid;
    for (int k = 1; k <= 16; ++k) grid.push_back(std::exp(-static_cast<double>(k)));
    double prev0 = 0.0, prev1 = 0.0;
    bool monotone = true, all_found = true;
    for (double target : {0.2, 0.05, 0.01}) {
        const Calibration cal = calibrate(design, grid, target, target, ctx.n(5'000), ctx.seed, ctx.threads);
        all_found = all_found && cal.success;
        const auto& e = cal.point.estimate;
        monotone = monotone && e.e0_n.mean >= prev0 && e.e1_n.mean >= prev1;
        prev0 = e.e0_n.mean;
        prev1 = e.e1_n.mean;
        ctx.expect("E0[N] at target " + std::to_string(target).substr(0, 4), e.e0_n.mean, 0.0, 1e9);
    }
    ctx.expect_true("all targets reached", all_found);
    ctx.expect_true("E_i[N] non-decreasing as targets tighten", monotone);
}

void means_energy(Context& ctx) {
    SignalModel sig;
    sig.noise.noise = Gaussian{0.0, 1.0};
    const EnergyConfig ec{10, 2.0};
    const EnergyMoments m = energy_moments(sig, ec, 1.0);
    ObservationSampler sampler = [sig, ec](Hypothesis h, RngStream& rng) {
        std::vector<double> raws(10);
        for (auto& r : raws) r = raw_sample(h, sig, 1.0, rng);
        return energy_block(raws, ec);
    };
    const MeansEstimate e = estimate_means(sampler, 1e12, ctx.n(200'000), ctx.seed, ctx.threads);
    const double k = 3.0 / 1.96;
    // M sigma^2 and M sigma^2 + M g^2 E[S^2].
    ctx.expect("analytic mean H0", m.mean_h0, 10.0, 10.0);
    ctx.expect("analytic mean H1", m.mean_h1, 20.0, 20.0);
    ctx.expect("mu0 vs analytic", e.mu0, m.mean_h0 - k * e.mu0_hw, m.mean_h0 + k * e.mu0_hw);
    ctx.expect("mu1 vs analytic", e.mu1, m.mean_h1 - k * e.mu1_hw, m.mean_h1 + k * e.mu1_hw);
}

void stop_bracket(Context& ctx) {
    // N(-1, v) with E[(Y^-)^2] = 2: (1 + v) Phi(1/s) + s phi(1/s) = 2.
    auto f = [](double s) { return (1.0 + s * s) * normal_cdf(1.0 / s) + s * normal_pdf(1.0 / s) - 2.0; };
    double a = 0.5, b = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        (f(m) < 0.0 ? a : b) = m;
    }
    const double s = 0.5 * (a + b);
    const IncrementModel model = IncrementModel::gaussian(-1.0, s * s);
    ctx.expect("E[(Y^-)^2] by quadrature", gaussian_neg_second(-1.0, s * s), 2.0 - 1e-6, 2.0 + 1e-6);
    const auto [lo, hi] = stop_time_bounds(model, 10.0);
    ctx.expect("lower bound", lo, 10.0 - 1e-9, 10.0 + 1e-9);
    ctx.expect("upper bound", hi, 11.0 - 1e-6, 11.0 + 1e-6);
    RngStream rng(ctx.seed, stream(11));
    const std::int64_t n = ctx.n(100'000);
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double w = 0.0;
        std::int64_t k = 0;
        while (w > -10.0) {
            w += -1.0 + s * rng.normal();
            ++k;
        }
        sum += static_cast<double>(k);
    }
    ctx.expect("MC E[N]", sum / n, lo, hi);
}

void lundberg_sup(Context& ctx) {
    const double clip = 2.0;
    const IncrementModel model = IncrementModel::transformed(Gaussian{-0.5, 1.0}, 0.0, clip);
    const double gamma = lundberg_exponent(model).gamma;
    // Independent root: E[e^{s psi(X)}] with point masses at +-K.
    auto log_mgf = [&](double t) {
        const double inner = simpson([&](double x) { return std::exp(t * x) * normal_pdf(x + 0.5); }, -clip, clip, 20000);
        const double lo_mass = normal_cdf(-clip + 0.5), hi_mass = 1.0 - normal_cdf(clip + 0.5);
        return std::log(inner + lo_mass * std::exp(-t * clip) + hi_mass * std::exp(t * clip));
    };
    double a = 0.1, b = 10.0;
    for (int i = 0; i < 100; ++i) {
        const double m = 0.5 * (a + b);
        (log_mgf(m) < 0.0 ? a : b) = m;
    }
    const double ref = 0.5 * (a + b);
    ctx.expect("Gamma vs independent root", gamma, ref - 1e-6, ref + 1e-6);
    const std::int64_t n = ctx.n(100'000);
    for (double t1 : {2.0, 5.0, 8.0}) {
        RngStream rng(ctx.seed, stream(12, static_cast<std::uint64_t>(t1)));
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            double w = 0.0;
            while (w < t1 && w > t1 - 40.0) w += psi(-0.5 + rng.normal(), clip);
            hits += w >= t1;
        }
        const double p = static_cast<double>(hits) / n;
        const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
        const double bound = pfa_light_tail(gamma, t1);
        ctx.expect("MC P[sup >= " + std::to_string(static_cast<int>(t1)) + "]", p, 0.0, bound + 3.0 * se);
    }
}

void heavy_tail_pfa(Context& ctx) {
    const AlphaStable law{1.5, 1.0, 1.0, -1.0};
    const IncrementModel model = IncrementModel::stable(law);
    const DistributionSpec spec(law);
    const double t0 = 5.0;
    const std::int64_t n = ctx.n(1'000'000);
    int compared = 0;
    for (double t1 : {30.0, 50.0, 100.0}) {
        RngStream rng(ctx.seed, stream(13, static_cast<std::uint64_t>(t1)));
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            double w = 0.0;
            while (w > -t0 && w < t1) w += draw(spec, rng);
            hits += w >= t1;
        }
        const double p = static_cast<double>(hits) / n;
        if (p < 1e-3 || p > 1e-2) continue;
        ++compared;
        const double approx = pfa_heavy_tail(model, t0, t1);
        ctx.expect("approx/MC at t1=" + std::to_string(static_cast<int>(t1)), approx / p, 0.5, 2.0);
    }
    ctx.expect_true("some t1 with MC P_FA in [1e-3, 1e-2]", compared > 0);
}

void heavy_delay_solve(Context& ctx) {
    struct Case {
        double th0, th1, alpha1, a, b;
    };
    const std::vector<Case> cases{{1, 1, 2, 0.01, 0.01}, {0.5, 2, 1.5, 0.001, 0.05}, {3, 0.7, 2.5, 0.1, 1e-4}};
    for (const auto& c : cases) {
        // log a = log t0 - alpha1 log t1 - log th0; log b = log t1 - alpha1 log t0 - log th1.
        const double r0 = std::log(c.a) + std::log(c.th0), r1 = std::log(c.b) + std::log(c.th1);
        const double det = 1.0 - c.alpha1 * c.alpha1;
        const double u = (r0 + c.alpha1 * r1) / det, v = (r1 + c.alpha1 * r0) / det;
        const double e0 = std::exp(u) / c.th0, e1 = std::exp(v) / c.th1;
        const DelayPair d = heavy_tail_delay(c.th0, c.th1, c.alpha1, c.a, c.b);
        ctx.expect("E0[N] rel. error", std::abs(d.e0 / e0 - 1.0), 0.0, 1e-9);
        ctx.expect("E1[N] rel. error", std::abs(d.e1 / e1 - 1.0), 0.0, 1e-9);
    }
    ctx.expect("E0[N] at alpha1=2", heavy_tail_delay(1, 1, 2, 0.01, 0.01).e0, 100.0 - 1e-9, 100.0 + 1e-9);
}

void heavy_delay_alpha(Context& ctx) {
    const double e15 = heavy_tail_delay(1, 1, 1.5, 0.01, 0.01).e0;
    const double e2 = heavy_tail_delay(1, 1, 2, 0.01, 0.01).e0;
    const double e3 = heavy_tail_delay(1, 1, 3, 0.01, 0.01).e0;
    ctx.expect_true("E0[N] decreasing in alpha1", e15 > e2 && e2 > e3);
}

void node_time_mc(Context& ctx) {
    const auto [mean, var] = node_stop_gaussian_approx(50.0, -0.5, 1.0);
    const std::int64_t n = ctx.n(100'000);
    RngStream rng(ctx.seed, stream(16));
    std::vector<double> times(static_cast<std::size_t>(n));
    for (auto& t : times) {
        double w = 0.0;
        std::int64_t k = 0;
        while (w > -50.0) {
            w += -0.5 + rng.normal();
            ++k;
        }
        t = static_cast<double>(k);
    }
    const MeanEstimate m = make_mean(times);
    const double w = widen(ctx);
    ctx.expect("MC mean N_l", m.mean, mean * (1 - 0.02 * w), mean * (1 + 0.02 * w));
    ctx.expect("MC variance N_l", m.variance, var * (1 - 0.1 * w), var * (1 + 0.1 * w));
}

void min_two_normals(Context& ctx) {
    const double ref = -1.0 / std::sqrt(kPi);
    const auto stats = order_statistic_means({{0.0, 1.0}, {0.0, 1.0}}, ctx.n(1'000'000), ctx.seed);
    const double tol = 0.003 * widen(ctx);
    ctx.expect("E[min]", stats[0], ref - tol, ref + tol);
}

void exponent_report(Context& ctx) {
    const ExponentReport r = gaussian_exponent_report(-1.0, 1.0, 1.0, 5, -1.0, 1.0, 5.0, 0.25);
    // mu0^2 / (2 sigma^2)
    ctx.expect("R0", r.r0, 0.5, 0.5);
}

// Section shared by the delay and error oracles of the drift-change approximation.
struct ApproxRun {
    std::vector<SweepPoint> points;
    std::vector<FcApproximation> approx;
};

ApproxRun approximation_run(Context& ctx) {
    DesignOptions opts;
    opts.samples = ctx.n(200'000);
    opts.seed = ctx.seed;
    opts.threads = ctx.threads;
    const Design design = prepare(scenarios::gaussian_distributed(5, 1.0), opts);
    std::vector<double> grid;
    for (int k = 4; k <= 12; k += 2) grid.push_back(std::exp(-static_cast<double>(k)));
    ApproxRun run;
    run.points = sweep(design, grid, ctx.n(100'000), ctx.seed, ctx.threads);
    for (const auto& p : run.points) run.approx.push_back(approximate_fc(design.at(p.schedule.c), ctx.n(200'000), ctx.seed));
    return run;
}

bool in_error_window(const PerformanceEstimate& e) { return e.mean_error() >= 1e-3 && e.mean_error() <= 1e-1; }

std::string c_label(double c) { return "c=e^" + std::to_string(static_cast<int>(std::lround(std::log(c)))); }

void fc_delay_fidelity(Context& ctx) {
    const ApproxRun run = approximation_run(ctx);
    int compared = 0;
    for (std::size_t i = 0; i < run.points.size(); ++i) {
        const auto& e = run.points[i].estimate;
        if (!in_error_window(e)) continue;
        ++compared;
        const auto& a = run.approx[i];
        const std::string at = c_label(run.points[i].schedule.c);
        ctx.expect("approx/MC E0[N] " + at, a.e0_n ? *a.e0_n / e.e0_n.mean : 0.0, 0.8, 1.2);
        ctx.expect("approx/MC E1[N] " + at, a.e1_n ? *a.e1_n / e.e1_n.mean : 0.0, 0.8, 1.2);
    }
    ctx.expect("points with P_e in [1e-3, 1e-1]", compared, 3, 1e9);
}

void fc_error_fidelity(Context& ctx) {
    const ApproxRun run = approximation_run(ctx);
    int compared = 0;
    for (std::size_t i = 0; i < run.points.size(); ++i) {
        const auto& e = run.points[i].estimate;
        if (!in_error_window(e)) continue;
        ++compared;
        const auto& a = run.approx[i];
        const std::string at = c_label(run.points[i].schedule.c);
        const double lo = a.p_fa ? a.p_fa->lower / 3.0 : 0.0;
        const double hi = a.p_fa ? 3.0 * a.p_fa->upper : 0.0;
        ctx.expect("MC P_FA in (lower/3, 3 upper) " + at, e.p_fa.p, lo, hi);
    }
    ctx.expect("points with P_e in [1e-3, 1e-1]", compared, 3, 1e9);
}

}  // namespace

const std::vector<Oracle>& registry() {
    static const std::vector<Oracle> all{
        {"normal_tail_erfc", normal_tail},
        {"stable_tail_montecarlo", stable_tail},
        {"hill_tail_index", hill_index},
        {"energy_moments_montecarlo", energy_mc},
        {"rank_hand_enumeration", rank_enumeration},
        {"deterministic_trial", deterministic_trial},
        {"pfa_decreases_with_beta", pfa_falls_with_beta},
        {"stop_bracket_estimate", eq_bracket_estimate},
        {"calibrate_target_ladder", calibrate_ladder},
        {"means_match_energy_moments", means_energy},
        {"stop_bracket_substitution", stop_bracket},
        {"lundberg_supremum", lundberg_sup},
        {"heavy_tail_pfa_montecarlo", heavy_tail_pfa},
        {"heavy_delay_system_solve", heavy_delay_solve},
        {"heavy_delay_alpha_trend", heavy_delay_alpha},
        {"node_time_montecarlo", node_time_mc},
        {"min_of_two_normals", min_two_normals},
        {"exponent_report_r0", exponent_report},
        {"fc_delay_approximation", fc_delay_fidelity},
        {"fc_error_approximation", fc_error_fidelity},
    };
    return all;
}

std::vector<Check> run(Budget budget, unsigned threads, std::uint64_t seed, const std::string& filter) {
    Context ctx;
    ctx.budget = budget;
    ctx.threads = threads;
    ctx.seed = seed;
    for (const auto& o : registry()) {
        if (!filter.empty() && o.name.find(filter) == std::string::npos) continue;
        ctx.current = o.name;
        o.run(ctx);
    }
    return ctx.checks;
}

}  // namespace seqsense::oracles
