#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace seqsense {

enum class TestKind { Rank, TTest, RandomWalk, MT, MRandomWalk, M2RandomWalk };

std::string_view to_string(TestKind kind);
TestKind parse_test_kind(std::string_view name);

/// Only the random-walk family carries O(1) state.
constexpr bool is_iterative(TestKind kind) {
    return kind == TestKind::RandomWalk || kind == TestKind::MRandomWalk ||
           kind == TestKind::M2RandomWalk;
}

/// Test for mean <= mu0 against mean >= mu1 with stopping interval
/// (-gamma0, gamma1). For M2RandomWalk, mu0/mu1 are the means of the
/// inner-clipped observation.
struct TestSpec {
    TestKind kind = TestKind::RandomWalk;
    double mu0 = 0.0;
    double mu1 = 1.0;
    double clip = 5.0;          // outer psi clip K
    double inner_clip = 200.0;  // psi_1 clip K1 (M2RandomWalk)
    double gamma0 = 1.0;        // lower barrier at -gamma0
    double gamma1 = 1.0;
    int min_samples = 1;

    double center() const { return 0.5 * (mu0 + mu1); }
};

/// Spec with the kind's default min_samples (2 for TTest/MT, else 1).
TestSpec make_test_spec(TestKind kind, double mu0, double mu1, double gamma0, double gamma1,
                        double clip = 5.0, double inner_clip = 200.0);

/// Throws ConfigError.
void validate(const TestSpec& spec);

struct TestState {
    std::int64_t n = 0;
    double statistic = 0.0;
    bool defined = true;  // false while the statistic has no finite value (zero dispersion)
    // TTest: Welford running mean and centered sum of squares.
    double mean = 0.0;
    double m2 = 0.0;
    // MT: running numerator sum of psi(x - center).
    double psi_sum = 0.0;
    // Rank: centered samples; MT: raw samples.
    std::vector<double> samples;
};

enum class Decision { Continue, DecideH0, DecideH1 };

/// Huber psi_0: z clamped to [-K, K].
inline double psi(double z, double clip) {
    return z > clip ? clip : (z < -clip ? -clip : z);
}

/// Increment added by the random-walk kinds for observation x.
double walk_increment(const TestSpec& spec, double x);

/// Folds x into the running statistic.
void update_in_place(TestState& state, const TestSpec& spec, double x);

inline TestState update(TestState state, const TestSpec& spec, double x) {
    update_in_place(state, spec, x);
    return state;
}

Decision check(const TestState& state, const TestSpec& spec);

/// A node participates only when its channel gain magnitude exceeds delta.
inline bool delta_gate(double gain_magnitude, double delta) { return gain_magnitude > delta; }

/// sum sgn(y_i) R_i / (n + 1), R_i the midrank of |y_i|.
double signed_rank_statistic(const std::vector<double>& centered);

}  // namespace seqsense
