#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "seqsense/analysis.hpp"
#include "seqsense/config.hpp"
#include "seqsense/csv.hpp"
#include "seqsense/error.hpp"
#include "seqsense/montecarlo.hpp"

using namespace seqsense;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTruncated = 3;
constexpr int kExitUnreachable = 4;

struct Common {
    std::string config;
    std::optional<std::int64_t> trials;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out;
    std::vector<double> sweep;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", c.config, "experiment config file");
    if (needs_config) opt->required();
    cmd->add_option("--trials", c.trials, "Monte-Carlo trials per hypothesis")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "base seed");
    cmd->add_option("--threads", c.threads, "worker threads (0: SEQSENSE_THREADS or all cores)");
    cmd->add_option("--out", c.out, "output CSV path (stdout if omitted)");
    cmd->add_option("--sweep", c.sweep, "threshold scalars c1,c2,... in (0, 1]")->delimiter(',');
}

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = load_config(c.config);
    if (c.trials) cfg.trials = *c.trials;
    if (c.seed) cfg.seed = *c.seed;
    if (!c.sweep.empty()) {
        for (double v : c.sweep)
            if (!(v > 0.0 && v <= 1.0)) throw ConfigError("--sweep: values must lie in (0, 1]");
        cfg.sweep = c.sweep;
    }
    return cfg;
}

Design design_of(const ExperimentConfig& cfg, unsigned threads) {
    DesignOptions opts;
    opts.auto_centers = cfg.auto_centers;
    opts.samples = cfg.mean_samples;
    opts.seed = cfg.seed;
    opts.threads = threads;
    return prepare(cfg.system, opts);
}

void emit(const std::string& path, const Table& table, const std::vector<std::string>& comments) {
    if (path.empty()) {
        write_csv(std::cout, table, comments);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(f, table, comments);
}

std::vector<std::string> header_comments(const std::string& kind, const ExperimentConfig& cfg) {
    return {"seqsense " + kind + " v" + std::to_string(kCurveFormatVersion), "config_hash=" + config_hash(cfg),
            "seed=" + std::to_string(cfg.seed), "trials=" + std::to_string(cfg.trials)};
}

CurveRow curve_row(double c, const SystemConfig& sys, const PerformanceEstimate& e,
                   const std::optional<FcApproximation>& approx) {
    CurveRow r;
    r.c = c;
    for (const auto& t : sys.node_tests) {
        r.gamma0.push_back(t.gamma0);
        r.gamma1.push_back(t.gamma1);
    }
    r.beta0 = sys.fc_test.gamma0;
    r.beta1 = sys.fc_test.gamma1;
    r.p_fa = e.p_fa.p;
    r.p_fa_hw = e.p_fa.half_width;
    r.p_md = e.p_md.p;
    r.p_md_hw = e.p_md.half_width;
    r.e0_n = e.e0_n.mean;
    r.e0_n_hw = e.e0_n.half_width;
    r.e1_n = e.e1_n.mean;
    r.e1_n_hw = e.e1_n.half_width;
    r.truncated0 = e.truncated0;
    r.truncated1 = e.truncated1;
    if (approx) {
        r.approx_e0_n = approx->e0_n;
        r.approx_e1_n = approx->e1_n;
        if (approx->p_fa) {
            r.approx_p_fa_lo = approx->p_fa->lower;
            r.approx_p_fa_hi = approx->p_fa->upper;
        }
    }
    return r;
}

std::optional<FcApproximation> try_approx(const SystemConfig& sys, const ExperimentConfig& cfg) {
    try {
        return approximate_fc(sys, cfg.mean_samples, cfg.seed);
    } catch (const UnsupportedError&) {
    } catch (const DomainError&) {
    }
    return std::nullopt;
}

int cmd_run(const Common& c) {
    const ExperimentConfig cfg = load(c);
    const Design design = design_of(cfg, c.threads);
    std::vector<CurveRow> rows;
    bool truncated = false;
    if (cfg.use_schedule) {
        for (const SweepPoint& p : sweep(design, cfg.sweep, cfg.trials, cfg.seed, c.threads)) {
            const SystemConfig sys = design.at(p.schedule.c);
            rows.push_back(curve_row(p.schedule.c, sys, p.estimate, try_approx(sys, cfg)));
            truncated = truncated || p.estimate.truncated0 > 0 || p.estimate.truncated1 > 0;
        }
    } else {
        RunOptions ro;
        ro.threads = c.threads;
        ro.partition = 1;
        const auto e = estimate(design.base, cfg.trials, cfg.seed, ro);
        rows.push_back(curve_row(std::nan(""), design.base, e, try_approx(design.base, cfg)));
        truncated = e.truncated0 > 0 || e.truncated1 > 0;
    }
    emit(c.out, curve_table(rows), header_comments("curve", cfg));
    if (truncated) {
        std::cerr << "error: trials hit max_slots (see truncated0/truncated1)\n";
        return kExitTruncated;
    }
    return 0;
}

// Increment model of node l's walk, oriented so that the relevant barrier is
// below: Y under H0, -Y under H1.
struct NodeIncrements {
    std::optional<IncrementModel> model;
    bool heavy = false;
};

NodeIncrements node_increments(const SystemConfig& sys, int l, Hypothesis h, const ExperimentConfig& cfg) {
    const TestSpec& spec = sys.node_tests[static_cast<std::size_t>(l)];
    NodeIncrements out;
    const bool bounded = spec.kind == TestKind::MRandomWalk || spec.kind == TestKind::M2RandomWalk;
    out.heavy = !bounded && !sys.node_signals[static_cast<std::size_t>(l)].noise.variance(h);
    if (!is_iterative(spec.kind)) return out;
    const auto sampler = node_sampler(sys, l);
    RngStream rng(cfg.seed, trial_stream(1, h, static_cast<std::uint64_t>(l)));
    std::vector<double> inc(static_cast<std::size_t>(cfg.mean_samples));
    const double sign = h == Hypothesis::H0 ? 1.0 : -1.0;
    for (auto& y : inc) y = sign * walk_increment(spec, sampler(h, rng));
    out.model = IncrementModel::from_samples(std::move(inc));
    return out;
}

int cmd_analyze(const Common& c) {
    const ExperimentConfig cfg = load(c);
    const Design design = design_of(cfg, c.threads);
    Table t;
    t.header = {"c", "component", "hypothesis", "quantity", "value", "status"};
    auto row = [&](double cv, const std::string& comp, const char* h, const std::string& q,
                   std::optional<double> v, const std::string& status = "ok") {
        t.rows.push_back({format_double(cv), comp, h, q, csv_number(v), v ? status : std::string("unsupported")});
    };
    const SystemConfig& base = design.base;
    std::vector<std::array<NodeIncrements, 2>> inc;
    for (int l = 0; l < base.nodes; ++l)
        inc.push_back({node_increments(base, l, Hypothesis::H0, cfg), node_increments(base, l, Hypothesis::H1, cfg)});

    const std::vector<double> grid = cfg.use_schedule ? cfg.sweep : std::vector<double>{std::nan("")};
    for (double cv : grid) {
        const SystemConfig sys = cfg.use_schedule ? design.at(cv) : base;
        for (int l = 0; l < sys.nodes; ++l) {
            const std::string comp = "node." + std::to_string(l + 1);
            const TestSpec& spec = sys.node_tests[static_cast<std::size_t>(l)];
            for (int hi = 0; hi < 2; ++hi) {
                const char* hn = hi == 0 ? "h0" : "h1";
                const NodeIncrements& ni = inc[static_cast<std::size_t>(l)][static_cast<std::size_t>(hi)];
                const double own = hi == 0 ? spec.gamma0 : spec.gamma1;
                const double other = hi == 0 ? spec.gamma1 : spec.gamma0;
                if (!ni.model) {
                    row(cv, comp, hn, "theta", std::nullopt);
                    continue;
                }
                const IncrementModel& m = *ni.model;
                row(cv, comp, hn, "theta", m.theta);
                row(cv, comp, hn, "second_moment", m.second_moment);
                std::optional<double> lo, up, gamma, approx_gamma, pfa;
                if (m.theta < 0.0) {
                    const auto b = stop_time_bounds(m, own);
                    lo = b.first;
                    up = b.second;
                    if (!ni.heavy) {
                        const LundbergResult lr = lundberg_exponent(m);
                        gamma = lr.gamma;
                        approx_gamma = lr.moment_approximation;
                        pfa = pfa_light_tail(lr.gamma, other);
                    }
                }
                row(cv, comp, hn, "stop_lower", lo);
                row(cv, comp, hn, "stop_upper", up);
                row(cv, comp, hn, "lundberg_gamma", gamma);
                row(cv, comp, hn, "lundberg_moment_approx", approx_gamma);
                row(cv, comp, hn, "error_bound", pfa);
            }
        }
        const auto approx = try_approx(sys, cfg);
        for (int hi = 0; hi < 2; ++hi) {
            const char* hn = hi == 0 ? "h0" : "h1";
            if (!approx || (hi == 0 ? approx->schedule0 : approx->schedule1).drift.empty()) {
                row(cv, "fc", hn, "approx_delay", std::nullopt);
                continue;
            }
            const DriftSchedule& s = hi == 0 ? approx->schedule0 : approx->schedule1;
            for (std::size_t j = 0; j < s.drift.size(); ++j) {
                row(cv, "fc", hn, "drift_" + std::to_string(j), s.drift[j]);
                row(cv, "fc", hn, "change_time_" + std::to_string(j), s.change_time[j]);
                row(cv, "fc", hn, "level_" + std::to_string(j), s.level[j]);
            }
            row(cv, "fc", hn, "approx_delay", hi == 0 ? approx->e0_n : approx->e1_n);
            const auto& err = hi == 0 ? approx->p_fa : approx->p_md;
            row(cv, "fc", hn, "approx_error_lower", err ? std::optional<double>(err->lower) : std::nullopt);
            row(cv, "fc", hn, "approx_error_upper", err ? std::optional<double>(err->upper) : std::nullopt);
        }
    }
    emit(c.out, t, header_comments("analysis", cfg));
    return 0;
}

int cmd_calibrate(const Common& c, double target_pfa, double target_pmd) {
    const ExperimentConfig cfg = load(c);
    if (!(target_pfa > 0.0 && target_pfa <= 0.5) || !(target_pmd > 0.0 && target_pmd <= 0.5))
        throw ConfigError("targets must lie in (0, 0.5]");
    const Design design = design_of(cfg, c.threads);
    const Calibration cal = calibrate(design, cfg.sweep, target_pfa, target_pmd, cfg.trials, cfg.seed, c.threads);
    const SystemConfig sys = design.at(cal.point.schedule.c);
    auto comments = header_comments("calibration", cfg);
    comments.push_back(std::string("result=") + (cal.success ? "success" : "unreachable"));
    std::string order;
    for (std::size_t i : cal.evaluated) order += (order.empty() ? "" : ";") + format_double(cfg.sweep[i]);
    comments.push_back("evaluated=" + order);
    emit(c.out, curve_table({curve_row(cal.point.schedule.c, sys, cal.point.estimate, std::nullopt)}), comments);
    if (!cal.success) {
        std::cerr << "error: targets not reached on the grid; reported the point with the smallest mean error\n";
        return kExitUnreachable;
    }
    return 0;
}

int cmd_selftest(const Common& c, bool quick, const std::string& filter) {
    const std::uint64_t seed = c.seed.value_or(1);
    const auto checks =
        oracles::run(quick ? oracles::Budget::Quick : oracles::Budget::Full, c.threads, seed, filter);
    Table t;
    t.header = {"oracle", "quantity", "value", "lo", "hi", "pass"};
    bool all = true;
    for (const auto& ch : checks) {
        all = all && ch.pass;
        t.rows.push_back({ch.oracle, "\"" + ch.quantity + "\"", format_double(ch.value), format_double(ch.lo),
                          format_double(ch.hi), ch.pass ? "1" : "0"});
    }
    emit(c.out, t, {"seqsense selftest v" + std::to_string(kCurveFormatVersion), "seed=" + std::to_string(seed),
                    std::string("budget=") + (quick ? "quick" : "full")});
    return all ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust nonparametric sequential distributed spectrum sensing"};
    app.require_subcommand(1);

    Common run_opts, analyze_opts, calibrate_opts, selftest_opts;
    auto* run = app.add_subcommand("run", "simulate the threshold sweep and write the curve CSV");
    add_common(run, run_opts);
    auto* analyze = app.add_subcommand("analyze", "bounds and approximations per sweep point");
    add_common(analyze, analyze_opts);
    auto* cal = app.add_subcommand("calibrate", "pick the least demanding sweep point meeting error targets");
    add_common(cal, calibrate_opts);
    double target_pfa = 0.05, target_pmd = 0.05;
    cal->add_option("--target-pfa", target_pfa, "P_FA target");
    cal->add_option("--target-pmd", target_pmd, "P_MD target");
    auto* self = app.add_subcommand("selftest", "run the oracle suite");
    add_common(self, selftest_opts, false);
    bool quick = false;
    std::string filter;
    self->add_flag("--quick", quick, "reduced sample sizes");
    self->add_option("--filter", filter, "only oracles whose name contains this");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_opts);
        if (*analyze) return cmd_analyze(analyze_opts);
        if (*cal) return cmd_calibrate(calibrate_opts, target_pfa, target_pmd);
        if (*self) return cmd_selftest(selftest_opts, quick, filter);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
