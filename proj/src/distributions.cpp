#include "seqsense/distributions.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "seqsense/error.hpp"

namespace seqsense {

namespace {

template <typename... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kPi = std::numbers::pi;

bool finite(double x) { return std::isfinite(x); }

double gaussian_tail(double mean, double var, double x) {
    if (var == 0.0) return x < mean ? 1.0 : 0.0;
    return 0.5 * std::erfc((x - mean) / std::sqrt(2.0 * var));
}

double draw_stable_standard(double alpha, double skew, RngStream& rng) {
    const double v = kPi * (rng.uniform_open() - 0.5);
    const double w = rng.exponential();
    if (alpha == 1.0) {
        const double shifted = kPi / 2.0 + skew * v;
        return (2.0 / kPi) *
               (shifted * std::tan(v) - skew * std::log((kPi / 2.0) * w * std::cos(v) / shifted));
    }
    const double tan_term = skew * std::tan(kPi * alpha / 2.0);
    const double b = std::atan(tan_term) / alpha;
    const double s = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * alpha));
    const double arg = alpha * (v + b);
    return s * std::sin(arg) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos(v - arg) / w, (1.0 - alpha) / alpha);
}

// 1 - F(z) for the standardized S_alpha(1, skew, 0) law by Gil-Pelaez inversion.
double stable_tail_quadrature(double alpha, double skew, double z) {
    const double omega = alpha == 1.0 ? 0.0 : std::tan(kPi * alpha / 2.0);
    auto integrand = [&](double t) -> double {
        if (t <= 0.0) return 0.0;
        const double ta = std::pow(t, alpha);
        const double phase = alpha == 1.0 ? -(2.0 / kPi) * skew * t * std::log(t) - t * z
                                          : skew * omega * ta - t * z;
        return std::exp(-ta) * std::sin(phase) / t;
    };
    // exp(-t^alpha) < 5e-18 beyond the cutoff.
    const double cutoff = std::pow(40.0, 1.0 / alpha);
    const double phase_rate =
        1.0 + std::abs(z) + alpha * std::abs(skew * omega) * std::max(1.0, std::pow(cutoff, alpha - 1.0)) +
        (alpha == 1.0 ? std::abs(skew) * (2.0 / kPi) * (1.0 + std::abs(std::log(cutoff))) : 0.0);
    const double width = std::min(0.5, kPi / (2.0 * phase_rate));

    boost::math::quadrature::tanh_sinh<double> edge;
    double integral = edge.integrate(integrand, 0.0, width);
    for (double a = width; a < cutoff; a += width) {
        const double b = std::min(a + width, cutoff);
        integral += boost::math::quadrature::gauss<double, 30>::integrate(integrand, a, b);
    }
    return std::clamp(0.5 + integral / kPi, 0.0, 1.0);
}

double stable_tail(const AlphaStable& s, double x) {
    double shift = s.location;
    if (s.alpha == 1.0) shift += (2.0 / kPi) * s.skew * s.scale * std::log(s.scale);
    const double z = (x - shift) / s.scale;
    if (s.alpha == 2.0) return gaussian_tail(0.0, 2.0, z);
    const double c = stable_tail_constant(s.alpha);
    if (z > kStableAsymptoticCrossover) return c * (1.0 + s.skew) / 2.0 * std::pow(z, -s.alpha);
    if (z < -kStableAsymptoticCrossover)
        return 1.0 - c * (1.0 - s.skew) / 2.0 * std::pow(-z, -s.alpha);
    return stable_tail_quadrature(s.alpha, s.skew, z);
}

}  // namespace

DistributionSpec contaminated(DistributionSpec base, DistributionSpec outlier, double epsilon) {
    return Contaminated{std::make_shared<const DistributionSpec>(std::move(base)),
                        std::make_shared<const DistributionSpec>(std::move(outlier)), epsilon};
}

double stable_tail_constant(double alpha) {
    if (alpha == 1.0) return 2.0 / kPi;
    return 2.0 * std::tgamma(alpha) * std::sin(kPi * alpha / 2.0) / kPi;
}

void validate(const DistributionSpec& spec) {
    std::visit(
        Overloaded{
            [](const Gaussian& g) {
                if (!finite(g.mean) || !finite(g.variance) || g.variance < 0.0)
                    throw ConfigError("gaussian: variance must be finite and >= 0");
            },
            [](const AlphaStable& s) {
                if (!(s.alpha > 0.0 && s.alpha <= 2.0))
                    throw ConfigError("stable: alpha must lie in (0, 2]");
                if (!(s.scale > 0.0) || !finite(s.scale))
                    throw ConfigError("stable: scale must be > 0");
                if (!(s.skew >= -1.0 && s.skew <= 1.0))
                    throw ConfigError("stable: skew must lie in [-1, 1]");
                if (!finite(s.location)) throw ConfigError("stable: location must be finite");
            },
            [](const GaussianMixture& m) {
                if (m.components.empty()) throw ConfigError("mixture: needs at least one component");
                double total = 0.0;
                for (const auto& c : m.components) {
                    if (!(c.weight >= 0.0)) throw ConfigError("mixture: weights must be >= 0");
                    if (!(c.variance > 0.0) || !finite(c.variance) || !finite(c.mean))
                        throw ConfigError("mixture: component variances must be > 0");
                    total += c.weight;
                }
                if (std::abs(total - 1.0) > 1e-12)
                    throw ConfigError("mixture: weights must sum to 1 (got " + std::to_string(total) + ")");
            },
            [](const Rayleigh& r) {
                if (!(r.scale > 0.0) || !finite(r.scale)) throw ConfigError("rayleigh: scale must be > 0");
            },
            [](const LogNormal& l) {
                if (!(l.log_variance > 0.0) || !finite(l.log_variance) || !finite(l.log_mean))
                    throw ConfigError("lognormal: log-variance must be > 0");
            },
            [](const Contaminated& c) {
                if (!c.base || !c.outlier) throw ConfigError("contaminated: base and outlier are required");
                if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0))
                    throw ConfigError("contaminated: epsilon must lie in [0, 1]");
                validate(*c.base);
                validate(*c.outlier);
            },
        },
        spec.law());
}

double draw(const DistributionSpec& spec, RngStream& rng) {
    return std::visit(
        Overloaded{
            [&](const Gaussian& g) { return g.mean + std::sqrt(g.variance) * rng.normal(); },
            [&](const AlphaStable& s) {
                const double x = draw_stable_standard(s.alpha, s.skew, rng);
                double y = s.scale * x + s.location;
                if (s.alpha == 1.0) y += (2.0 / kPi) * s.skew * s.scale * std::log(s.scale);
                return y;
            },
            [&](const GaussianMixture& m) {
                const double u = rng.uniform();
                double acc = 0.0;
                const MixtureComponent* chosen = &m.components.back();
                for (const auto& c : m.components) {
                    acc += c.weight;
                    if (u < acc) {
                        chosen = &c;
                        break;
                    }
                }
                return chosen->mean + std::sqrt(chosen->variance) * rng.normal();
            },
            [&](const Rayleigh& r) { return r.scale * std::sqrt(2.0 * rng.exponential()); },
            [&](const LogNormal& l) {
                return std::exp(l.log_mean + std::sqrt(l.log_variance) * rng.normal());
            },
            [&](const Contaminated& c) {
                return rng.uniform() < c.epsilon ? draw(*c.outlier, rng) : draw(*c.base, rng);
            },
        },
        spec.law());
}

double tail_complement(const DistributionSpec& spec, double x) {
    return std::visit(
        Overloaded{
            [&](const Gaussian& g) { return gaussian_tail(g.mean, g.variance, x); },
            [&](const AlphaStable& s) { return stable_tail(s, x); },
            [&](const GaussianMixture& m) {
                double p = 0.0;
                for (const auto& c : m.components) p += c.weight * gaussian_tail(c.mean, c.variance, x);
                return p;
            },
            [&](const LogNormal& l) {
                if (x <= 0.0) return 1.0;
                return gaussian_tail(l.log_mean, l.log_variance, std::log(x));
            },
            [](const Rayleigh&) -> double {
                throw UnsupportedError("tail_complement is not provided for rayleigh");
            },
            [](const Contaminated&) -> double {
                throw UnsupportedError("tail_complement is not provided for contaminated laws");
            },
        },
        spec.law());
}

std::optional<double> mean(const DistributionSpec& spec) {
    return std::visit(
        Overloaded{
            [](const Gaussian& g) -> std::optional<double> { return g.mean; },
            [](const AlphaStable& s) -> std::optional<double> {
                if (s.alpha > 1.0) return s.location;
                return std::nullopt;
            },
            [](const GaussianMixture& m) -> std::optional<double> {
                double mu = 0.0;
                for (const auto& c : m.components) mu += c.weight * c.mean;
                return mu;
            },
            [](const Rayleigh& r) -> std::optional<double> {
                return r.scale * std::sqrt(kPi / 2.0);
            },
            [](const LogNormal& l) -> std::optional<double> {
                return std::exp(l.log_mean + l.log_variance / 2.0);
            },
            [](const Contaminated& c) -> std::optional<double> {
                const auto mb = c.epsilon < 1.0 ? mean(*c.base) : std::optional<double>(0.0);
                const auto mo = c.epsilon > 0.0 ? mean(*c.outlier) : std::optional<double>(0.0);
                if (!mb || !mo) return std::nullopt;
                return (1.0 - c.epsilon) * *mb + c.epsilon * *mo;
            },
        },
        spec.law());
}

std::optional<double> variance(const DistributionSpec& spec) {
    return std::visit(
        Overloaded{
            [](const Gaussian& g) -> std::optional<double> { return g.variance; },
            [](const AlphaStable& s) -> std::optional<double> {
                if (s.alpha == 2.0) return 2.0 * s.scale * s.scale;
                return std::nullopt;
            },
            [](const GaussianMixture& m) -> std::optional<double> {
                double mu = 0.0, second = 0.0;
                for (const auto& c : m.components) {
                    mu += c.weight * c.mean;
                    second += c.weight * (c.variance + c.mean * c.mean);
                }
                return second - mu * mu;
            },
            [](const Rayleigh& r) -> std::optional<double> {
                return (4.0 - kPi) / 2.0 * r.scale * r.scale;
            },
            [](const LogNormal& l) -> std::optional<double> {
                return std::expm1(l.log_variance) * std::exp(2.0 * l.log_mean + l.log_variance);
            },
            [](const Contaminated& c) -> std::optional<double> {
                const double eps = c.epsilon;
                std::optional<double> vb = 0.0, mb = 0.0, vo = 0.0, mo = 0.0;
                if (eps < 1.0) {
                    vb = variance(*c.base);
                    mb = mean(*c.base);
                }
                if (eps > 0.0) {
                    vo = variance(*c.outlier);
                    mo = mean(*c.outlier);
                }
                if (!vb || !mb || !vo || !mo) return std::nullopt;
                const double mu = (1.0 - eps) * *mb + eps * *mo;
                const double second = (1.0 - eps) * (*vb + *mb * *mb) + eps * (*vo + *mo * *mo);
                return second - mu * mu;
            },
        },
        spec.law());
}

}  // namespace seqsense
