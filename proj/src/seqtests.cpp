#include "seqsense/seqtests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "seqsense/error.hpp"

namespace seqsense {

std::string_view to_string(TestKind kind) {
    switch (kind) {
        case TestKind::Rank: return "rank";
        case TestKind::TTest: return "t_test";
        case TestKind::RandomWalk: return "random_walk";
        case TestKind::MT: return "m_t_test";
        case TestKind::MRandomWalk: return "m_random_walk";
        case TestKind::M2RandomWalk: return "m2_random_walk";
    }
    return "?";
}

TestKind parse_test_kind(std::string_view name) {
    for (auto kind : {TestKind::Rank, TestKind::TTest, TestKind::RandomWalk, TestKind::MT,
                      TestKind::MRandomWalk, TestKind::M2RandomWalk}) {
        if (to_string(kind) == name) return kind;
    }
    throw ConfigError("unknown test kind '" + std::string(name) + "'");
}

TestSpec make_test_spec(TestKind kind, double mu0, double mu1, double gamma0, double gamma1,
                        double clip, double inner_clip) {
    TestSpec spec;
    spec.kind = kind;
    spec.mu0 = mu0;
    spec.mu1 = mu1;
    spec.gamma0 = gamma0;
    spec.gamma1 = gamma1;
    spec.clip = clip;
    spec.inner_clip = inner_clip;
    spec.min_samples = (kind == TestKind::TTest || kind == TestKind::MT) ? 2 : 1;
    return spec;
}

void validate(const TestSpec& spec) {
    if (!(spec.mu1 > spec.mu0)) throw ConfigError("test spec requires mu1 > mu0");
    if (!(spec.gamma0 >= 0.0) || !(spec.gamma1 >= 0.0))
        throw ConfigError("test thresholds must be non-negative magnitudes");
    const bool outer = spec.kind == TestKind::MT || spec.kind == TestKind::MRandomWalk ||
                       spec.kind == TestKind::M2RandomWalk;
    if (outer && !(spec.clip > 0.0)) throw ConfigError("psi clip K must be > 0");
    if (spec.kind == TestKind::M2RandomWalk && !(spec.inner_clip > 0.0))
        throw ConfigError("psi_1 clip K1 must be > 0");
    if (spec.min_samples < 1) throw ConfigError("min_samples must be >= 1");
}

double walk_increment(const TestSpec& spec, double x) {
    switch (spec.kind) {
        case TestKind::MRandomWalk: return psi(x - spec.center(), spec.clip);
        case TestKind::M2RandomWalk: return psi(psi(x, spec.inner_clip) - spec.center(), spec.clip);
        default: return x - spec.center();
    }
}

double signed_rank_statistic(const std::vector<double>& centered) {
    const std::size_t n = centered.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(centered[a]) < std::abs(centered[b]);
    });
    double total = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        const double key = std::abs(centered[order[i]]);
        while (j + 1 < n && std::abs(centered[order[j + 1]]) == key) ++j;
        // Positions i..j (0-based) share the midrank.
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            const double y = centered[order[k]];
            const double sign = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
            total += sign * midrank;
        }
        i = j + 1;
    }
    return total / static_cast<double>(n + 1);
}

void update_in_place(TestState& state, const TestSpec& spec, double x) {
    ++state.n;
    const double n = static_cast<double>(state.n);
    switch (spec.kind) {
        case TestKind::RandomWalk:
        case TestKind::MRandomWalk:
        case TestKind::M2RandomWalk:
            state.statistic += walk_increment(spec, x);
            return;
        case TestKind::TTest: {
            const double delta = x - state.mean;
            state.mean += delta / n;
            state.m2 += delta * (x - state.mean);
            if (state.n < 2 || !(state.m2 > 0.0)) {
                state.defined = false;
                state.statistic = 0.0;
                return;
            }
            const double s = std::sqrt(state.m2 / (n - 1.0));
            state.statistic = n * (state.mean - spec.center()) / s;
            state.defined = true;
            return;
        }
        case TestKind::MT: {
            state.samples.push_back(x);
            state.mean += (x - state.mean) / n;
            state.psi_sum += psi(x - spec.center(), spec.clip);
            double denom = 0.0;
            for (double xi : state.samples) {
                const double p = psi(xi - state.mean, spec.clip);
                denom += p * p;
            }
            if (!(denom > 0.0)) {
                state.defined = false;
                state.statistic = 0.0;
                return;
            }
            state.statistic = state.psi_sum / std::sqrt(denom);
            state.defined = true;
            return;
        }
        case TestKind::Rank:
            state.samples.push_back(x - spec.center());
            state.statistic = signed_rank_statistic(state.samples);
            return;
    }
}

Decision check(const TestState& state, const TestSpec& spec) {
    if (state.n < spec.min_samples || !state.defined) return Decision::Continue;
    if (state.statistic >= spec.gamma1) return Decision::DecideH1;
    if (state.statistic <= -spec.gamma0) return Decision::DecideH0;
    return Decision::Continue;
}

}  // namespace seqsense
