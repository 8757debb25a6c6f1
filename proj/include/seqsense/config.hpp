#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "seqsense/nodes.hpp"

namespace seqsense {

/// Everything one experiment needs: the system, how its thresholds and
/// centers are resolved, and the run parameters.
struct ExperimentConfig {
    SystemConfig system;
    std::vector<bool> auto_centers;  // per node: mu0/mu1 estimated by simulation
    bool use_schedule = true;        // thresholds from c; otherwise taken as written
    std::vector<double> sweep{0.1, 0.01, 0.001};
    std::int64_t trials = 10'000;
    std::uint64_t seed = 1;
    std::int64_t mean_samples = 200'000;
};

/// Parses the sectioned key = value format. Errors are ConfigError with the
/// line number and field name in the message.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text: every field written explicitly, nodes expanded.
std::string serialize(const ExperimentConfig& cfg);

/// kind(key=value, ...), e.g. gaussian(mean=0,var=1),
/// stable(alpha=1.8,scale=1,skew=0,loc=0),
/// mixture(0.9*gaussian(mean=0,var=1),0.1*gaussian(mean=0,var=10)),
/// rayleigh(scale=1), lognormal(mu=0,var=0.36),
/// contaminated(base=...,outlier=...,eps=0.05).
DistributionSpec parse_distribution(std::string_view text);
std::string format_distribution(const DistributionSpec& spec);

/// Shortest representation that reads back to the same double.
std::string format_double(double x);

/// FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace seqsense
