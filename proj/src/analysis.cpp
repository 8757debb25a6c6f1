#include "seqsense/analysis.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "seqsense/error.hpp"
#include "seqsense/montecarlo.hpp"

namespace seqsense {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// P(X <= x) for X ~ N(mean, var), var = 0 allowed.
double gauss_cdf(double x, double mean, double var) {
    if (var <= 0.0) return x >= mean ? 1.0 : 0.0;
    return norm_cdf((x - mean) / std::sqrt(var));
}

struct Component {
    double weight;
    double mean;
    double sd;
};

std::vector<Component> gaussian_components(const DistributionSpec& law) {
    std::vector<Component> out;
    if (const auto* g = law.get_if<Gaussian>()) {
        out.push_back({1.0, g->mean, std::sqrt(g->variance)});
    } else if (const auto* m = law.get_if<GaussianMixture>()) {
        for (const auto& c : m->components) out.push_back({c.weight, c.mean, std::sqrt(c.variance)});
    } else {
        throw UnsupportedError("transformed increments need a Gaussian or mixture law");
    }
    return out;
}

// E[g(psi(X - shift; clip))] over a Gaussian mixture.
template <typename G>
double clipped_expectation(const std::vector<Component>& comps, double shift, double clip, G g) {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    for (const auto& c : comps) {
        const double m = c.mean - shift;
        if (c.sd == 0.0) {
            total += c.weight * g(std::clamp(m, -clip, clip));
            continue;
        }
        double part = 0.0;
        if (std::isfinite(clip)) {
            part += norm_cdf((-clip - m) / c.sd) * g(-clip);
            part += norm_cdf((m - clip) / c.sd) * g(clip);
        }
        const double lo = std::max(-clip, m - 12.0 * c.sd);
        const double hi = std::min(clip, m + 12.0 * c.sd);
        auto density = [&](double z) { return g(z) * norm_pdf((z - m) / c.sd) / c.sd; };
        std::vector<double> cuts{lo};
        if (lo < 0.0 && 0.0 < hi) cuts.push_back(0.0);
        cuts.push_back(hi);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] > cuts[i])
                part += gauss_kronrod<double, 61>::integrate(density, cuts[i], cuts[i + 1], 12, 1e-13);
        }
        total += c.weight * part;
    }
    return total;
}

}  // namespace

IncrementModel IncrementModel::gaussian(double mean, double var) {
    if (!(var >= 0.0)) throw DomainError("gaussian increment variance must be >= 0");
    IncrementModel m;
    m.theta = mean;
    m.second_moment = var + mean * mean;
    if (var == 0.0) {
        m.neg_first = mean < 0.0 ? -mean : 0.0;
        m.neg_second = mean < 0.0 ? mean * mean : 0.0;
    } else {
        const double s = std::sqrt(var);
        const double a = -mean / s;
        m.neg_first = s * norm_pdf(a) - mean * norm_cdf(a);
        m.neg_second = (mean * mean + var) * norm_cdf(a) - mean * s * norm_pdf(a);
    }
    m.pos_second = m.second_moment - *m.neg_second;
    m.mgf = [mean, var](double t) { return std::exp(t * mean + 0.5 * t * t * var); };
    m.tail = [mean, var](double y) { return 1.0 - gauss_cdf(y, mean, var); };
    return m;
}

IncrementModel IncrementModel::transformed(const DistributionSpec& law, double shift, double clip) {
    if (!(clip > 0.0)) throw DomainError("clip must be > 0");
    const auto comps = gaussian_components(law);
    IncrementModel m;
    m.theta = clipped_expectation(comps, shift, clip, [](double z) { return z; });
    m.second_moment = clipped_expectation(comps, shift, clip, [](double z) { return z * z; });
    m.neg_first = clipped_expectation(comps, shift, clip, [](double z) { return z < 0.0 ? -z : 0.0; });
    m.neg_second = clipped_expectation(comps, shift, clip, [](double z) { return z < 0.0 ? z * z : 0.0; });
    m.pos_second = clipped_expectation(comps, shift, clip, [](double z) { return z > 0.0 ? z * z : 0.0; });
    m.mgf = [comps, shift, clip](double t) {
        return clipped_expectation(comps, shift, clip, [t](double z) { return std::exp(t * z); });
    };
    m.tail = [comps, shift, clip](double y) {
        if (y >= clip) return 0.0;
        if (y < -clip) return 1.0;
        double p = 0.0;
        for (const auto& c : comps) p += c.weight * (1.0 - gauss_cdf(y + shift, c.mean, c.sd * c.sd));
        return p;
    };
    return m;
}

IncrementModel IncrementModel::stable(const AlphaStable& law) {
    validate(DistributionSpec(law));
    if (law.alpha == 2.0) return gaussian(law.location, 2.0 * law.scale * law.scale);
    if (!(law.alpha > 1.0)) throw DomainError("stable increments need alpha > 1 for a finite mean");
    IncrementModel m;
    m.theta = law.location;
    m.second_moment = kInf;
    m.tail_index = law.alpha;
    const DistributionSpec spec(law);
    m.tail = [spec](double y) { return tail_complement(spec, y); };
    if (law.skew == 1.0) {
        // Totally right-skewed: the left tail is light, so the negative-part
        // moments are finite. E[(Y^-)^r] = int_0^inf r y^{r-1} P(Y < -y) dy.
        using boost::math::quadrature::gauss_kronrod;
        const double upper = std::abs(law.location) + 40.0 * law.scale;
        auto left = [&](double y) { return 1.0 - tail_complement(spec, -y); };
        m.neg_first = gauss_kronrod<double, 31>::integrate(left, 0.0, upper, 8, 1e-10);
        m.neg_second = gauss_kronrod<double, 31>::integrate(
            [&](double y) { return 2.0 * y * left(y); }, 0.0, upper, 8, 1e-10);
    }
    return m;
}

IncrementModel IncrementModel::from_samples(std::vector<double> samples) {
    if (samples.empty()) throw DomainError("from_samples needs at least one sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double s1 = 0.0, s2 = 0.0, nf = 0.0, n2 = 0.0;
    for (double y : samples) {
        s1 += y;
        s2 += y * y;
        if (y < 0.0) {
            nf -= y;
            n2 += y * y;
        }
    }
    IncrementModel m;
    m.theta = s1 / n;
    m.second_moment = s2 / n;
    m.neg_first = nf / n;
    m.neg_second = n2 / n;
    m.pos_second = (s2 - n2) / n;
    auto shared = std::make_shared<const std::vector<double>>(std::move(samples));
    m.mgf = [shared](double t) {
        double acc = 0.0;
        for (double y : *shared) acc += std::exp(t * y);
        return acc / static_cast<double>(shared->size());
    };
    m.tail = [shared](double y) {
        const auto it = std::upper_bound(shared->begin(), shared->end(), y);
        return static_cast<double>(shared->end() - it) / static_cast<double>(shared->size());
    };
    return m;
}

std::pair<double, double> stop_time_bounds(const IncrementModel& model, double t0) {
    if (!(model.theta < 0.0)) throw DomainError("stop_time_bounds requires theta < 0");
    if (!(t0 >= 0.0)) throw DomainError("stop_time_bounds requires t0 >= 0");
    if (!model.neg_second || !std::isfinite(*model.neg_second))
        throw DomainError("stop_time_bounds requires a finite E[(Y^-)^2]");
    const double lower = t0 / std::abs(model.theta);
    return {lower, lower + *model.neg_second / (2.0 * model.theta * model.theta)};
}

LundbergResult lundberg_exponent(const IncrementModel& model) {
    if (!model.mgf) throw UnsupportedError("Lundberg exponent needs a finite moment generating function");
    if (!(model.theta < 0.0)) throw DomainError("Lundberg exponent requires theta < 0");
    auto f = [&](double s) { return std::log(model.mgf(s)); };
    double hi = 1.0;
    int guard = 0;
    while (!(f(hi) > 0.0)) {
        hi *= 2.0;
        if (++guard > 200) throw DomainError("no positive root of E[exp(sY)] = 1");
    }
    double lo = hi / 2.0;
    guard = 0;
    while (!(f(lo) < 0.0)) {
        lo /= 2.0;
        if (++guard > 200) throw DomainError("could not bracket the Lundberg root");
    }
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    LundbergResult out;
    out.gamma = 0.5 * (r.first + r.second);
    if (model.neg_first && *model.neg_first > 0.0 && std::isfinite(model.second_moment))
        out.moment_approximation = model.theta * model.theta / (*model.neg_first * model.second_moment);
    else
        out.moment_approximation = std::numeric_limits<double>::quiet_NaN();
    return out;
}

double pfa_light_tail(double gamma, double t1) {
    if (!(gamma > 0.0)) throw DomainError("pfa_light_tail requires gamma > 0");
    return std::exp(-gamma * t1);
}

double pfa_heavy_tail(const IncrementModel& model, double t0, double t1) {
    if (!model.tail) throw UnsupportedError("increment model has no tail function");
    if (!(model.theta < 0.0)) throw DomainError("pfa_heavy_tail requires theta < 0");
    if (!(t0 >= 0.0)) throw DomainError("pfa_heavy_tail requires t0 >= 0");
    return model.tail(t1) * t0 / std::abs(model.theta);
}

DelayPair heavy_tail_delay(double theta0, double theta1, double alpha1, double a, double b) {
    if (!(alpha1 > 1.0)) throw DomainError("heavy_tail_delay requires alpha1 > 1");
    if (!(theta0 > 0.0) || !(theta1 > 0.0)) throw DomainError("drift magnitudes must be > 0");
    if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0)) throw DomainError("targets must lie in (0, 1)");
    const double e = 1.0 / (1.0 - alpha1 * alpha1);
    DelayPair d;
    d.e0 = std::pow(theta0, e - 1.0) * std::pow(a * std::pow(theta1, alpha1) * std::pow(b, alpha1), e);
    d.e1 = std::pow(theta1, e - 1.0) * std::pow(b * std::pow(theta0, alpha1) * std::pow(a, alpha1), e);
    return d;
}

std::pair<double, double> node_stop_gaussian_approx(double gamma, double drift, double rho2) {
    if (drift == 0.0) throw DomainError("node drift must be nonzero");
    if (!(gamma > 0.0)) throw DomainError("node threshold must be > 0");
    const double d = std::abs(drift);
    return {gamma / d, gamma * rho2 / (d * d * d)};
}

std::vector<double> order_statistic_means(const std::vector<GaussianTime>& times,
                                          std::int64_t replicates, std::uint64_t seed) {
    if (times.empty()) return {};
    if (times.size() == 1) return {times[0].mean};
    if (replicates < 1) throw DomainError("replicates must be >= 1");
    const std::size_t L = times.size();
    std::vector<double> sums(L, 0.0), draw(L);
    std::vector<double> sd(L);
    for (std::size_t l = 0; l < L; ++l) sd[l] = std::sqrt(times[l].variance);
    RngStream rng(seed, 0);
    for (std::int64_t r = 0; r < replicates; ++r) {
        for (std::size_t l = 0; l < L; ++l) draw[l] = times[l].mean + sd[l] * rng.normal();
        std::sort(draw.begin(), draw.end());
        for (std::size_t l = 0; l < L; ++l) sums[l] += draw[l];
    }
    for (double& s : sums) s /= static_cast<double>(replicates);
    return sums;
}

double order_statistic_mean(const std::vector<GaussianTime>& times, int k, std::int64_t replicates,
                            std::uint64_t seed) {
    if (k < 1 || static_cast<std::size_t>(k) > times.size()) throw DomainError("k must lie in 1..L");
    return order_statistic_means(times, replicates, seed)[static_cast<std::size_t>(k - 1)];
}

double first_time_survival(const std::vector<GaussianTime>& times, double k) {
    double p = 1.0;
    for (const auto& t : times) p *= 1.0 - gauss_cdf(k, t.mean, t.variance);
    return p;
}

DriftSchedule DriftSchedule::build(std::vector<double> drift, std::vector<double> change_time) {
    if (drift.empty() || drift.size() != change_time.size())
        throw DomainError("drift schedule needs L + 1 drifts and change times");
    DriftSchedule s;
    s.level.assign(drift.size(), 0.0);
    for (std::size_t j = 1; j < drift.size(); ++j)
        s.level[j] = s.level[j - 1] + drift[j - 1] * (change_time[j] - change_time[j - 1]);
    s.drift = std::move(drift);
    s.change_time = std::move(change_time);
    return s;
}

double fc_delay_approx(const DriftSchedule& schedule, double barrier) {
    const std::size_t n = schedule.drift.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double d = schedule.drift[j];
        if (!(d * barrier > 0.0)) continue;
        const double remaining = (barrier - schedule.level[j]) / d;
        if (remaining <= 0.0) return schedule.change_time[j];
        const double gap = j + 1 < n ? schedule.change_time[j + 1] - schedule.change_time[j] : kInf;
        if (remaining < gap) return schedule.change_time[j] + remaining;
    }
    throw DomainError("FC drift never reaches the barrier; delay approximation diverges");
}

ErrorBounds fc_error_approx(std::vector<double> pre_increments, double barrier,
                            const std::function<double(double)>& t1_survival, int n_terms) {
    if (pre_increments.empty()) throw DomainError("fc_error_approx needs increment samples");
    if (n_terms < 1) throw DomainError("n_terms must be >= 1");
    if (!(barrier > 0.0)) throw DomainError("barrier must be > 0");
    ErrorBounds out;
    if (std::isinf(barrier)) return out;
    std::sort(pre_increments.begin(), pre_increments.end());
    const double n = static_cast<double>(pre_increments.size());
    double s1 = 0.0;
    for (double z : pre_increments) s1 += z;
    const double mean = s1 / n;
    double ss = 0.0;
    for (double z : pre_increments) ss += (z - mean) * (z - mean);
    const double var = ss / n;

    // Positive part, thinned to at most ~20000 quantile points.
    const auto first_pos = std::upper_bound(pre_increments.begin(), pre_increments.end(), 0.0);
    const std::size_t n_pos = static_cast<std::size_t>(pre_increments.end() - first_pos);
    const std::size_t stride = std::max<std::size_t>(1, n_pos / 20000);
    std::vector<double> pos;
    for (std::size_t i = 0; i < n_pos; i += stride) pos.push_back(*(first_pos + static_cast<std::ptrdiff_t>(i)));
    const double weight = n_pos == 0 ? 0.0 : (static_cast<double>(n_pos) / static_cast<double>(pos.size())) / n;

    const auto at_barrier = std::lower_bound(pre_increments.begin(), pre_increments.end(), barrier);
    const double i1 = static_cast<double>(pre_increments.end() - at_barrier) / n;
    const double surv1 = t1_survival(1.0);
    out.lower = out.upper = i1 * surv1;
    for (int k = 2; k <= n_terms; ++k) {
        const double surv = t1_survival(static_cast<double>(k));
        if (surv == 0.0) break;
        const double wm = (k - 1) * mean;
        const double wv = (k - 1) * var;
        const double f_barrier = gauss_cdf(barrier, wm, wv);
        double ik = 0.0;
        for (double z : pos) ik += f_barrier - gauss_cdf(barrier - z, wm, wv);
        ik *= weight;
        const double s_hi = f_barrier;
        const double s_lo = std::max(0.0, 1.0 - 2.0 * (1.0 - f_barrier));
        out.lower += ik * s_lo * surv;
        out.upper += ik * s_hi * surv;
    }
    // Each dropped term is at most P(t_1 > k).
    double rem = 0.0;
    double last = 1.0;
    for (std::int64_t k = n_terms + 1; k <= n_terms + 1'000'000; ++k) {
        last = t1_survival(static_cast<double>(k));
        rem += last;
        if (last < 1e-18) break;
    }
    out.remainder = last < 1e-18 ? rem : kInf;
    return out;
}

double ExponentReport::exponent(double r) const {
    return std::min({r * alpha0_max - k2, fc_gamma * (1.0 - r), node_gamma * gamma_l});
}

ExponentReport gaussian_exponent_report(double mu0, double mu1, double sigma2, int nodes,
                                        double mu0_bar, double mu1_bar, double sigma2_bar,
                                        double eta) {
    if (!(mu0 < 0.0 && mu1 > 0.0)) throw DomainError("need mu0 < 0 < mu1");
    if (!(sigma2 > 0.0) || !(sigma2_bar > 0.0)) throw DomainError("variances must be > 0");
    if (nodes < 1) throw DomainError("nodes must be >= 1");
    if (!(eta > 0.0)) throw DomainError("eta must be > 0");
    if (mu1 * mu1 < 2.0 * sigma2 * eta) throw DomainError("eta infeasible: mu1^2 < 2 sigma^2 eta");
    ExponentReport r;
    r.r0 = mu0 * mu0 / (2.0 * sigma2);
    r.gamma_l = 1.0 / nodes;
    r.gamma_prime = (mu1 - std::sqrt(mu1 * mu1 - 2.0 * sigma2 * eta)) / sigma2;
    for (int l = 0; l < nodes; ++l) r.k2 += r.gamma_l * r.gamma_prime;
    r.alpha0_max = (-mu0 + std::sqrt(mu0 * mu0 + 2.0 * sigma2 * eta)) / sigma2;
    r.feasible = r.k2 < r.alpha0_max;
    r.fc_gamma = (mu1_bar - mu0_bar) / sigma2_bar;
    r.node_gamma = -2.0 * mu0 / sigma2;
    return r;
}

double delay_slope_bound(double d_tot, double mean_abs_xi, double delta_all) {
    if (d_tot == 0.0 || delta_all == 0.0) throw DomainError("drifts must be nonzero");
    const double c = 1.0 + mean_abs_xi / std::abs(d_tot);
    return 1.0 / std::abs(d_tot) + c / std::abs(delta_all);
}

FcApproximation approximate_fc(const SystemConfig& cfg, std::int64_t samples, std::uint64_t seed,
                               int n_terms) {
    if (cfg.topology != Topology::Distributed)
        throw UnsupportedError("the drift-change approximation applies to the distributed system");
    for (const auto& t : cfg.node_tests)
        if (!is_iterative(t.kind))
            throw UnsupportedError("the drift-change approximation needs random-walk node tests");
    if (samples < 1000) throw DomainError("approximate_fc needs at least 1000 samples");
    const int L = cfg.nodes;
    const auto n = static_cast<std::size_t>(samples);
    FcApproximation out;

    // Node increments and Gaussian stopping-time laws.
    bool nodes_ok = true;
    for (int l = 0; l < L; ++l) {
        const auto sampler = node_sampler(cfg, l);
        const TestSpec& spec = cfg.node_tests[l];
        for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
            RngStream rng(seed, trial_stream(1, h, static_cast<std::uint64_t>(l)));
            std::vector<double> inc(n);
            for (auto& y : inc) y = walk_increment(spec, sampler(h, rng));
            const MeanEstimate m = make_mean(inc);
            const bool right_sign = h == Hypothesis::H0 ? m.mean < 0.0 : m.mean > 0.0;
            if (!right_sign) {
                nodes_ok = false;
                continue;
            }
            const double gamma = h == Hypothesis::H0 ? spec.gamma0 : spec.gamma1;
            const auto [mean, var] = node_stop_gaussian_approx(gamma, m.mean, m.variance);
            (h == Hypothesis::H0 ? out.node_times0 : out.node_times1).push_back({mean, var});
        }
    }
    if (!nodes_ok) return out;

    const bool mac_faded = cfg.mac_fading && cfg.mac_fading->mode != FadingMode::None;
    for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
        const auto& times = h == Hypothesis::H0 ? out.node_times0 : out.node_times1;
        const double level = h == Hypothesis::H0 ? -cfg.b0 : cfg.b1;

        std::vector<double> drift(static_cast<std::size_t>(L) + 1);
        std::vector<double> pre;
        for (int j = 0; j <= L; ++j) {
            RngStream rng(seed, trial_stream(2, h, static_cast<std::uint64_t>(j)));
            std::vector<double> inc(n);
            for (auto& y : inc) {
                double sum = 0.0;
                for (int i = 0; i < j; ++i) {
                    double g = mac_faded ? draw_gain(*cfg.mac_fading, rng) : 1.0;
                    if (cfg.partial_coherence) g = std::abs(g);
                    sum += g * level;
                }
                y = walk_increment(cfg.fc_test, sum + cfg.fc_noise.draw(h, rng));
            }
            drift[static_cast<std::size_t>(j)] = make_mean(inc).mean;
            if (j == 0) pre = std::move(inc);
        }
        std::vector<double> change(static_cast<std::size_t>(L) + 1, 0.0);
        const auto stats = order_statistic_means(times, 1'000'000, seed);
        for (int j = 1; j <= L; ++j) change[static_cast<std::size_t>(j)] = stats[static_cast<std::size_t>(j - 1)];
        DriftSchedule schedule = DriftSchedule::build(std::move(drift), std::move(change));

        const double barrier = h == Hypothesis::H0 ? -cfg.fc_test.gamma0 : cfg.fc_test.gamma1;
        std::optional<double> delay;
        try {
            delay = fc_delay_approx(schedule, barrier);
            // Order statistics of wide Gaussian times can sit below zero.
            if (*delay <= 0.0) delay.reset();
        } catch (const DomainError&) {
        }
        auto survival = [times](double k) { return first_time_survival(times, k); };
        if (h == Hypothesis::H0) {
            out.e0_n = delay;
            out.p_fa = fc_error_approx(std::move(pre), cfg.fc_test.gamma1, survival, n_terms);
            out.schedule0 = std::move(schedule);
        } else {
            for (double& z : pre) z = -z;
            out.e1_n = delay;
            out.p_md = fc_error_approx(std::move(pre), cfg.fc_test.gamma0, survival, n_terms);
            out.schedule1 = std::move(schedule);
        }
    }
    return out;
}

}  // namespace seqsense
