#pragma once

#include <optional>
#include <span>
#include <vector>

#include "seqsense/distributions.hpp"
#include "seqsense/rng.hpp"

namespace seqsense {

enum class Hypothesis { H0, H1 };

enum class FadingMode { None, Slow, Fast };

/// Composite shadowing/multipath gain: the multipath law's scale is itself
/// drawn from the shadow law (Suzuki construction), e.g. H ~ Rayleigh(P)
/// with P ~ LogNormal(0, 0.36).
struct FadingModel {
    FadingMode mode = FadingMode::None;
    DistributionSpec multipath = Rayleigh{1.0};
    std::optional<DistributionSpec> shadow = LogNormal{0.0, 0.36};
};

/// One gain draw. Mode None always returns 1.
double draw_gain(const FadingModel& fading, RngStream& rng);

/// E[H^2] of the composite gain (1 for mode None).
double gain_second_moment(const FadingModel& fading);

enum class OutlierPlacement { H1Only, Both };

struct OutlierModel {
    double epsilon = 0.05;
    DistributionSpec law = Gaussian{0.0, 20.0};
    OutlierPlacement applies_under = OutlierPlacement::H1Only;

    bool active(Hypothesis h) const {
        return epsilon > 0.0 && (applies_under == OutlierPlacement::Both || h == Hypothesis::H1);
    }
};

/// Receiver noise plus optional additive EMI, optionally replaced by an
/// outlier draw.
struct NoiseModel {
    DistributionSpec noise = Gaussian{0.0, 1.0};
    std::optional<DistributionSpec> emi;
    std::optional<OutlierModel> outlier;

    double draw(Hypothesis h, RngStream& rng) const;
    /// Variance under h, or nullopt if infinite.
    std::optional<double> variance(Hypothesis h) const;
};

void validate(const NoiseModel& model);

struct Symbol {
    double value = 1.0;
    double probability = 1.0;
};

struct SignalModel {
    std::vector<Symbol> alphabet{{-1.0, 0.5}, {1.0, 0.5}};
    double amplitude = 1.0;
    NoiseModel noise;

    double symbol_second_moment() const;
};

void validate(const SignalModel& model);

struct EnergyConfig {
    int block_length = 1;  // M
    double exponent = 2.0; // p
};

void validate(const EnergyConfig& cfg);

/// X~ = gain * amplitude * S + N under H1, X~ = N under H0.
double raw_sample(Hypothesis h, const SignalModel& sig, double gain, RngStream& rng);

/// Sum of |raw|^p over exactly M raw samples.
double energy_block(std::span<const double> raws, const EnergyConfig& cfg);

/// Sum_l g_l y_l + z, with |g_l| in place of g_l under partial coherence.
double mac_combine(std::span<const double> transmissions, std::span<const double> gains,
                   bool partial_coherence, double z);

/// mac_combine with z drawn from `fc_noise`.
double mac_observation(std::span<const double> transmissions, std::span<const double> gains,
                       const DistributionSpec& fc_noise, bool partial_coherence, RngStream& rng);

struct EnergyMoments {
    double mean_h0 = 0.0;
    double mean_h1 = 0.0;
};

/// Analytic energy-sample means for p = 2 and finite-variance zero-mean
/// noise: (M sigma0^2, M sigma1^2 + M gain^2 amplitude^2 E[S^2]).
/// Throws UnsupportedError for heavy-tailed noise or p != 2.
EnergyMoments energy_moments(const SignalModel& sig, const EnergyConfig& cfg, double gain);

/// 10 log10(E[H^2] (mu1 - mu0)^2 / sigma^2).
double snr_db(double gain_second_moment, double mu0, double mu1, double noise_variance);

}  // namespace seqsense
