#include "seqsense/nodes.hpp"

#include <cmath>
#include <string>

#include "seqsense/error.hpp"

namespace seqsense {

double NodeState::transmission() const {
    if (!latched) return 0.0;
    return *latched == Hypothesis::H1 ? b1 : -b0;
}

double node_step(NodeState& node, double observation, std::int64_t slot) {
    if (node.gated) return 0.0;
    update_in_place(node.test, node.spec, observation);
    const Decision d = check(node.test, node.spec);
    if (d != Decision::Continue) {
        node.latched = d == Decision::DecideH1 ? Hypothesis::H1 : Hypothesis::H0;
        if (node.stop_slot < 0) {
            node.stop_slot = slot;
            node.first_decision = node.latched;
        }
    }
    return node.transmission();
}

void fc_step(FcState& fc, double y, std::int64_t slot) {
    if (fc.decision) throw ContractViolation("fc_step called after the FC stopped");
    update_in_place(fc.test, fc.spec, y);
    const Decision d = check(fc.test, fc.spec);
    if (d == Decision::Continue) return;
    fc.decision = d == Decision::DecideH1 ? Hypothesis::H1 : Hypothesis::H0;
    fc.stop_slot = slot;
}

TestSpec default_fc_spec(double b, double beta0, double beta1) {
    return make_test_spec(TestKind::M2RandomWalk, -b, b, beta0, beta1);
}

void validate(const SystemConfig& cfg) {
    if (cfg.nodes < 1) throw ConfigError("system.nodes must be >= 1");
    if (cfg.topology == Topology::SingleNode && cfg.nodes != 1)
        throw ConfigError("single-node topology requires nodes = 1");
    if (!(cfg.b0 > 0.0) || !(cfg.b1 > 0.0)) throw ConfigError("b0 and b1 must be > 0");
    if (!(cfg.delta >= 0.0)) throw ConfigError("delta must be >= 0");
    if (cfg.max_slots < 1) throw ConfigError("max_slots must be >= 1");
    if (cfg.coherent_centers && cfg.node_fading.mode == FadingMode::Fast)
        throw ConfigError("coherent centers need slow fading or none");
    validate(cfg.energy);
    const auto l = static_cast<std::size_t>(cfg.nodes);
    if (cfg.node_signals.size() != l || cfg.node_tests.size() != l)
        throw ConfigError("need one signal model and one test per node (" + std::to_string(l) + ")");
    for (const auto& s : cfg.node_signals) validate(s);
    for (const auto& t : cfg.node_tests) validate(t);
    validate(cfg.node_fading.multipath);
    if (cfg.node_fading.shadow) validate(*cfg.node_fading.shadow);
    if (cfg.topology == Topology::Distributed) {
        validate(cfg.fc_noise);
        validate(cfg.fc_test);
    }
}

namespace {

double draw_slow_gain(const FadingModel& fading, RngStream& rng) {
    return fading.mode == FadingMode::Slow ? draw_gain(fading, rng) : 1.0;
}

}  // namespace

double sample_observation(Hypothesis h, const SignalModel& sig, const EnergyConfig& energy,
                          Detector detector, const FadingModel& fading, double gain,
                          RngStream& rng) {
    double acc = 0.0;
    for (int i = 0; i < energy.block_length; ++i) {
        const double g = fading.mode == FadingMode::Fast ? draw_gain(fading, rng) : gain;
        const double raw = raw_sample(h, sig, g, rng);
        if (detector == Detector::Mean) {
            acc += raw;
        } else if (energy.exponent == 2.0) {
            acc += raw * raw;
        } else {
            acc += std::pow(std::abs(raw), energy.exponent);
        }
    }
    return acc;
}

TrialResult run_trial(const SystemConfig& cfg, Hypothesis h, RngStream& rng, TrialTrace* trace) {
    const int L = cfg.nodes;
    TrialResult result;
    result.truth = h;
    result.node_stop.assign(L, -1);
    result.node_first_decision.assign(L, std::nullopt);
    result.raw_consumed.assign(L, 0);

    std::vector<NodeState> nodes;
    nodes.reserve(L);
    std::vector<double> node_gain(L, 1.0);
    for (int l = 0; l < L; ++l) {
        nodes.emplace_back(cfg.node_tests[l], cfg.b0, cfg.b1);
        node_gain[l] = draw_slow_gain(cfg.node_fading, rng);
        if (cfg.node_fading.mode != FadingMode::Fast) {
            nodes[l].gated = !delta_gate(std::abs(node_gain[l]), cfg.delta);
            if (cfg.coherent_centers) {
                nodes[l].spec.mu0 *= node_gain[l];
                nodes[l].spec.mu1 *= node_gain[l];
            }
        }
    }
    if (trace) {
        trace->transmissions.clear();
        trace->fc_statistic.clear();
        trace->node_gains = node_gain;
    }

    auto finish_nodes = [&] {
        for (int l = 0; l < L; ++l) {
            result.node_stop[l] = nodes[l].stop_slot;
            result.node_first_decision[l] = nodes[l].first_decision;
        }
    };

    if (cfg.topology == Topology::SingleNode) {
        NodeState& node = nodes[0];
        if (node.gated) {
            result.abstained = true;
            finish_nodes();
            return result;
        }
        for (std::int64_t slot = 1; slot <= cfg.max_slots; ++slot) {
            const double x = sample_observation(h, cfg.node_signals[0], cfg.energy, cfg.detector,
                                                cfg.node_fading, node_gain[0], rng);
            result.raw_consumed[0] += cfg.energy.block_length;
            const double tx = node_step(node, x, slot);
            if (trace) {
                trace->transmissions.push_back({tx});
                trace->fc_statistic.push_back(node.test.statistic);
            }
            if (node.stop_slot > 0) {
                result.decision = node.first_decision;
                result.slots = slot;
                finish_nodes();
                return result;
            }
        }
        result.truncated = true;
        result.slots = cfg.max_slots;
        finish_nodes();
        return result;
    }

    const bool mac_faded = cfg.mac_fading && cfg.mac_fading->mode != FadingMode::None;
    std::vector<double> mac_gain(L, 1.0);
    if (mac_faded && cfg.mac_fading->mode == FadingMode::Slow)
        for (int l = 0; l < L; ++l) mac_gain[l] = draw_gain(*cfg.mac_fading, rng);

    std::vector<double> tx(L, 0.0);
    FcState fc(cfg.fc_test);
    for (std::int64_t slot = 1; slot <= cfg.max_slots; ++slot) {
        for (int l = 0; l < L; ++l) {
            if (nodes[l].gated) {
                tx[l] = 0.0;
                continue;
            }
            const double x = sample_observation(h, cfg.node_signals[l], cfg.energy, cfg.detector,
                                                cfg.node_fading, node_gain[l], rng);
            result.raw_consumed[l] += cfg.energy.block_length;
            tx[l] = node_step(nodes[l], x, slot);
        }
        if (mac_faded && cfg.mac_fading->mode == FadingMode::Fast)
            for (int l = 0; l < L; ++l) mac_gain[l] = draw_gain(*cfg.mac_fading, rng);
        const double y = mac_combine(tx, mac_gain, cfg.partial_coherence, cfg.fc_noise.draw(h, rng));
        fc_step(fc, y, slot);
        if (trace) {
            trace->transmissions.push_back(tx);
            trace->fc_statistic.push_back(fc.test.statistic);
        }
        if (fc.decision) {
            result.decision = fc.decision;
            result.slots = slot;
            finish_nodes();
            return result;
        }
    }
    result.truncated = true;
    result.slots = cfg.max_slots;
    finish_nodes();
    return result;
}

}  // namespace seqsense
