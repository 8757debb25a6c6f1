#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seqsense/channel.hpp"
#include "seqsense/seqtests.hpp"

namespace seqsense {

enum class Topology { Distributed, SingleNode };

/// What a node feeds its test per slot: the block energy or the
/// plain sum of the block's raw samples (mean detection).
enum class Detector { Energy, Mean };

struct NodeState {
    TestSpec spec;
    TestState test;
    double b0 = 1.0;
    double b1 = 1.0;
    std::optional<Hypothesis> latched;
    bool gated = false;
    std::int64_t stop_slot = -1;  // first slot with a decision, -1 if none
    std::optional<Hypothesis> first_decision;

    NodeState() = default;
    NodeState(TestSpec s, double b0_, double b1_) : spec(s), b0(b0_), b1(b1_) {}

    double transmission() const;
};

/// Feeds one detector observation (already formed from M raw samples) to the
/// node's test and returns the slot's transmission. A latched node keeps its
/// latest decision while the statistic is interior and switches when the
/// opposite barrier is crossed. `slot` is 1-based.
double node_step(NodeState& node, double observation, std::int64_t slot);

struct FcState {
    TestSpec spec;
    TestState test;
    std::optional<Hypothesis> decision;
    std::int64_t stop_slot = -1;

    FcState() = default;
    explicit FcState(TestSpec s) : spec(s) {}
};

/// One MAC observation; stops the FC when its statistic leaves (-beta0, beta1).
void fc_step(FcState& fc, double y, std::int64_t slot);

/// Default FC test: M2-random walk with centers -b, +b.
TestSpec default_fc_spec(double b, double beta0, double beta1);

struct SystemConfig {
    Topology topology = Topology::Distributed;
    int nodes = 5;  // L
    double b0 = 1.0;
    double b1 = 1.0;
    EnergyConfig energy;
    Detector detector = Detector::Energy;
    double delta = 0.0;
    bool partial_coherence = false;
    /// Node centers are given for unit gain and scaled by the node's known
    /// gain each trial (slow or no fading only).
    bool coherent_centers = false;
    FadingModel node_fading;
    std::optional<FadingModel> mac_fading;
    std::vector<SignalModel> node_signals;  // one per node
    std::vector<TestSpec> node_tests;       // one per node
    NoiseModel fc_noise;
    TestSpec fc_test;
    std::int64_t max_slots = 1'000'000;
};

/// Throws ConfigError.
void validate(const SystemConfig& cfg);

struct TrialResult {
    Hypothesis truth = Hypothesis::H0;
    std::optional<Hypothesis> decision;  // empty when truncated or abstained
    std::int64_t slots = 0;
    bool truncated = false;
    bool abstained = false;  // single node gated out by delta
    std::vector<std::int64_t> node_stop;
    std::vector<std::optional<Hypothesis>> node_first_decision;
    std::vector<std::int64_t> raw_consumed;
};

/// Per-slot record for inspection in tests.
struct TrialTrace {
    std::vector<std::vector<double>> transmissions;  // [slot][node]
    std::vector<double> fc_statistic;
    std::vector<double> node_gains;  // slow-fading draws (1 otherwise)
};

/// One detector observation for a node: M raw samples through the detector.
/// `gain` is used under slow fading or no fading; fast fading redraws per raw.
double sample_observation(Hypothesis h, const SignalModel& sig, const EnergyConfig& energy,
                          Detector detector, const FadingModel& fading, double gain,
                          RngStream& rng);

TrialResult run_trial(const SystemConfig& cfg, Hypothesis h, RngStream& rng,
                      TrialTrace* trace = nullptr);

}  // namespace seqsense
