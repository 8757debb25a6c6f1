#include "seqsense/channel.hpp"

#include <cmath>

#include "seqsense/error.hpp"

namespace seqsense {

namespace {

double second_moment(const DistributionSpec& spec) {
    const auto m = mean(spec);
    const auto v = variance(spec);
    if (!m || !v) throw UnsupportedError("gain law has no finite second moment");
    return *v + *m * *m;
}

}  // namespace

double draw_gain(const FadingModel& fading, RngStream& rng) {
    if (fading.mode == FadingMode::None) return 1.0;
    const double shadow = fading.shadow ? draw(*fading.shadow, rng) : 1.0;
    return shadow * draw(fading.multipath, rng);
}

double gain_second_moment(const FadingModel& fading) {
    if (fading.mode == FadingMode::None) return 1.0;
    const double shadow = fading.shadow ? second_moment(*fading.shadow) : 1.0;
    return shadow * second_moment(fading.multipath);
}

double NoiseModel::draw(Hypothesis h, RngStream& rng) const {
    if (outlier && outlier->active(h) && rng.uniform() < outlier->epsilon) {
        return seqsense::draw(outlier->law, rng);
    }
    double n = seqsense::draw(noise, rng);
    if (emi) n += seqsense::draw(*emi, rng);
    return n;
}

std::optional<double> NoiseModel::variance(Hypothesis h) const {
    auto v = seqsense::variance(noise);
    if (!v) return std::nullopt;
    if (emi) {
        const auto ve = seqsense::variance(*emi);
        if (!ve) return std::nullopt;
        *v += *ve;
    }
    if (outlier && outlier->active(h)) {
        const auto vo = seqsense::variance(outlier->law);
        const auto mo = mean(outlier->law);
        auto mn = mean(noise);
        if (emi) {
            const auto me = mean(*emi);
            if (!me) return std::nullopt;
            *mn += *me;
        }
        if (!vo || !mo || !mn) return std::nullopt;
        const double eps = outlier->epsilon;
        const double mu = (1.0 - eps) * *mn + eps * *mo;
        const double second = (1.0 - eps) * (*v + *mn * *mn) + eps * (*vo + *mo * *mo);
        return second - mu * mu;
    }
    return v;
}

void validate(const NoiseModel& model) {
    validate(model.noise);
    if (model.emi) validate(*model.emi);
    if (model.outlier) {
        if (!(model.outlier->epsilon >= 0.0 && model.outlier->epsilon <= 1.0))
            throw ConfigError("outlier epsilon must lie in [0, 1]");
        validate(model.outlier->law);
    }
}

double SignalModel::symbol_second_moment() const {
    double s2 = 0.0;
    for (const auto& s : alphabet) s2 += s.probability * s.value * s.value;
    return s2;
}

void validate(const SignalModel& model) {
    if (model.alphabet.empty()) throw ConfigError("signal alphabet is empty");
    double total = 0.0;
    for (const auto& s : model.alphabet) {
        if (!(s.probability >= 0.0) || !std::isfinite(s.value))
            throw ConfigError("signal alphabet probabilities must be >= 0");
        total += s.probability;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("signal alphabet probabilities must sum to 1");
    if (!std::isfinite(model.amplitude)) throw ConfigError("signal amplitude must be finite");
    validate(model.noise);
}

void validate(const EnergyConfig& cfg) {
    if (cfg.block_length < 1) throw ConfigError("energy block length M must be >= 1");
    if (!(cfg.exponent > 0.0) || !std::isfinite(cfg.exponent))
        throw ConfigError("energy exponent p must be > 0");
}

double raw_sample(Hypothesis h, const SignalModel& sig, double gain, RngStream& rng) {
    if (h == Hypothesis::H0) return sig.noise.draw(h, rng);
    double symbol = sig.alphabet.back().value;
    if (sig.alphabet.size() > 1) {
        const double u = rng.uniform();
        double acc = 0.0;
        for (const auto& s : sig.alphabet) {
            acc += s.probability;
            if (u < acc) {
                symbol = s.value;
                break;
            }
        }
    }
    return gain * sig.amplitude * symbol + sig.noise.draw(h, rng);
}

double energy_block(std::span<const double> raws, const EnergyConfig& cfg) {
    if (raws.size() != static_cast<std::size_t>(cfg.block_length))
        throw ContractViolation("energy_block: expected exactly M raw samples");
    double energy = 0.0;
    if (cfg.exponent == 2.0) {
        for (double r : raws) energy += r * r;
    } else {
        for (double r : raws) energy += std::pow(std::abs(r), cfg.exponent);
    }
    return energy;
}

double mac_combine(std::span<const double> transmissions, std::span<const double> gains,
                   bool partial_coherence, double z) {
    if (transmissions.size() != gains.size())
        throw ContractViolation("mac_combine: transmissions and gains differ in length");
    double y = 0.0;
    for (std::size_t l = 0; l < transmissions.size(); ++l) {
        const double g = partial_coherence ? std::abs(gains[l]) : gains[l];
        y += g * transmissions[l];
    }
    return y + z;
}

double mac_observation(std::span<const double> transmissions, std::span<const double> gains,
                       const DistributionSpec& fc_noise, bool partial_coherence, RngStream& rng) {
    return mac_combine(transmissions, gains, partial_coherence, draw(fc_noise, rng));
}

EnergyMoments energy_moments(const SignalModel& sig, const EnergyConfig& cfg, double gain) {
    if (cfg.exponent != 2.0) throw UnsupportedError("energy_moments requires p = 2");
    const auto v0 = sig.noise.variance(Hypothesis::H0);
    const auto v1 = sig.noise.variance(Hypothesis::H1);
    if (!v0 || !v1)
        throw UnsupportedError("energy_moments requires finite-variance noise; estimate the means by simulation");
    const double m = cfg.block_length;
    const double signal = gain * gain * sig.amplitude * sig.amplitude * sig.symbol_second_moment();
    return {m * *v0, m * *v1 + m * signal};
}

double snr_db(double gain_second_moment, double mu0, double mu1, double noise_variance) {
    return 10.0 * std::log10(gain_second_moment * (mu1 - mu0) * (mu1 - mu0) / noise_variance);
}

}  // namespace seqsense
