#pragma once

#include <span>
#include <string_view>

#include "cnade/graph.hpp"
#include "cnade/rng.hpp"

namespace cnade {

enum class HeadFamily { bernoulli, gaussian, lognormal };

std::string_view to_string(HeadFamily f);
HeadFamily parse_head_family(std::string_view text);
HeadFamily default_head(VarKind kind);

inline constexpr double kProbabilityClamp = 1e-6;
inline constexpr double kSigmaFloor = 1e-3;

/// Density parameters decoded from raw network outputs.
struct HeadParams {
    double p = 0.0;      // bernoulli
    double mu = 0.0;     // gaussian mean / lognormal log-space mean
    double sigma = 0.0;  // gaussian / lognormal log-space std
};

/// Maps raw network outputs onto a distribution.
///   bernoulli: raw = (logit),          p = clamp(sigmoid(logit))
///   gaussian:  raw = (mu, raw_scale),  sigma = softplus(raw_scale) + 1e-3
///   lognormal: raw = (mu, raw_scale),  same, in log space
struct Head {
    HeadFamily family = HeadFamily::gaussian;

    std::size_t raw_size() const { return family == HeadFamily::bernoulli ? 1 : 2; }
    HeadParams params(std::span<const double> raw) const;

    /// Negative log-density of x.
    double nll(std::span<const double> raw, double x) const;
    /// Negative log-density; writes d nll / d raw into grad (size raw_size()).
    double nll_grad(std::span<const double> raw, double x, std::span<double> grad) const;
    double sample(std::span<const double> raw, Rng& rng) const;
    double mean(std::span<const double> raw) const;

    /// Throws domain_error if x is outside the family's support.
    void check_support(double x) const;

    bool operator==(const Head&) const = default;
};

double sigmoid(double x);
double softplus(double x);
/// Raw scale whose decoded sigma equals `sigma` (> 1e-3).
double raw_scale_for_sigma(double sigma);

}  // namespace cnade
