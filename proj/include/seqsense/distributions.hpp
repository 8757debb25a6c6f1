#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "seqsense/rng.hpp"

namespace seqsense {

class DistributionSpec;

struct Gaussian {
    double mean = 0.0;
    double variance = 1.0;  // 0 is allowed and means a point mass at `mean`
};

/// S_alpha(scale, skew, location) in the Samorodnitsky-Taqqu parameterization.
/// alpha = 2 is N(location, 2 scale^2).
struct AlphaStable {
    double alpha = 2.0;
    double scale = 1.0;
    double skew = 0.0;
    double location = 0.0;
};

struct MixtureComponent {
    double weight = 1.0;
    double mean = 0.0;
    double variance = 1.0;
};

struct GaussianMixture {
    std::vector<MixtureComponent> components;
};

struct Rayleigh {
    double scale = 1.0;
};

/// exp(N(log_mean, log_variance)).
struct LogNormal {
    double log_mean = 0.0;
    double log_variance = 1.0;
};

/// With probability `epsilon` the sample is drawn from `outlier`, otherwise
/// from `base` (replacement, not an additive outlier).
struct Contaminated {
    std::shared_ptr<const DistributionSpec> base;
    std::shared_ptr<const DistributionSpec> outlier;
    double epsilon = 0.0;
};

/// Tagged description of a scalar sampling law. Immutable value type; nested
/// laws of a Contaminated spec are shared, never mutated.
class DistributionSpec {
public:
    using Variant =
        std::variant<Gaussian, AlphaStable, GaussianMixture, Rayleigh, LogNormal, Contaminated>;

    DistributionSpec() : law_(Gaussian{}) {}
    template <typename Law>
        requires std::is_constructible_v<Variant, Law>
    DistributionSpec(Law law) : law_(std::move(law)) {}  // NOLINT(implicit)

    const Variant& law() const { return law_; }

    template <typename Law>
    const Law* get_if() const {
        return std::get_if<Law>(&law_);
    }

private:
    Variant law_;
};

DistributionSpec contaminated(DistributionSpec base, DistributionSpec outlier, double epsilon);

/// Throws ConfigError when a parameter is out of range.
void validate(const DistributionSpec& spec);

double draw(const DistributionSpec& spec, RngStream& rng);

/// 1 - F(x). Supported for Gaussian, AlphaStable, GaussianMixture and
/// LogNormal; other variants throw UnsupportedError.
double tail_complement(const DistributionSpec& spec, double x);

/// Mean, or nullopt when it does not exist.
std::optional<double> mean(const DistributionSpec& spec);
/// Variance, or nullopt when it is infinite.
std::optional<double> variance(const DistributionSpec& spec);

/// Beyond this many scale units from the location, the alpha-stable tail is
/// taken from its first-order power-law asymptote instead of quadrature.
inline constexpr double kStableAsymptoticCrossover = 10.0;

/// Tail constant C_alpha with P[X > x] ~ C_alpha (1 + skew)/2 scale^alpha x^-alpha.
double stable_tail_constant(double alpha);

}  // namespace seqsense
