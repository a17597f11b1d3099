#include "cnade/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cnade {

std::string_view to_string(HeadFamily f) {
    switch (f) {
        case HeadFamily::bernoulli: return "bernoulli";
        case HeadFamily::gaussian: return "gaussian";
        case HeadFamily::lognormal: return "lognormal";
    }
    return "?";
}

HeadFamily parse_head_family(std::string_view text) {
    if (text == "bernoulli") return HeadFamily::bernoulli;
    if (text == "gaussian") return HeadFamily::gaussian;
    if (text == "lognormal") return HeadFamily::lognormal;
    throw Error(ErrorCode::parse_error, "unknown head family '" + std::string(text) + "'");
}

HeadFamily default_head(VarKind kind) {
    switch (kind) {
        case VarKind::binary: return HeadFamily::bernoulli;
        case VarKind::continuous_real: return HeadFamily::gaussian;
        case VarKind::continuous_positive: return HeadFamily::lognormal;
    }
    return HeadFamily::gaussian;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double raw_scale_for_sigma(double sigma) {
    const double s = sigma - kSigmaFloor;
    if (!(s > 0.0)) throw Error(ErrorCode::domain_error, "sigma must exceed the floor");
    return s > 30.0 ? s : std::log(std::expm1(s));
}

namespace {

void check_raw(const Head& h, std::span<const double> raw) {
    if (raw.size() != h.raw_size()) {
        throw Error(ErrorCode::dimension_mismatch, std::string(to_string(h.family)) + " head expects " +
                                                       std::to_string(h.raw_size()) + " raw outputs");
    }
}

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

}  // namespace

HeadParams Head::params(std::span<const double> raw) const {
    check_raw(*this, raw);
    HeadParams p;
    if (family == HeadFamily::bernoulli) {
        p.p = std::clamp(sigmoid(raw[0]), kProbabilityClamp, 1.0 - kProbabilityClamp);
    } else {
        p.mu = raw[0];
        p.sigma = softplus(raw[1]) + kSigmaFloor;
    }
    return p;
}

void Head::check_support(double x) const {
    if (family == HeadFamily::bernoulli && x != 0.0 && x != 1.0) {
        throw Error(ErrorCode::domain_error, "bernoulli value must be 0 or 1, got " + std::to_string(x));
    }
    if (family == HeadFamily::lognormal && !(x > 0.0)) {
        throw Error(ErrorCode::domain_error, "lognormal value must be positive, got " + std::to_string(x));
    }
    if (!std::isfinite(x)) throw Error(ErrorCode::domain_error, "non-finite value");
}

double Head::nll(std::span<const double> raw, double x) const {
    double g[2];
    return nll_grad(raw, x, std::span<double>(g, raw_size()));
}

double Head::nll_grad(std::span<const double> raw, double x, std::span<double> grad) const {
    check_raw(*this, raw);
    check_support(x);
    if (family == HeadFamily::bernoulli) {
        const double p = std::clamp(sigmoid(raw[0]), kProbabilityClamp, 1.0 - kProbabilityClamp);
        // Gradient of the unclamped loss; identical wherever the clamp is inactive.
        grad[0] = sigmoid(raw[0]) - x;
        return -(x * std::log(p) + (1.0 - x) * std::log1p(-p));
    }
    const double y = family == HeadFamily::lognormal ? std::log(x) : x;
    const double mu = raw[0];
    const double sigma = softplus(raw[1]) + kSigmaFloor;
    const double r = y - mu;
    const double inv_var = 1.0 / (sigma * sigma);
    grad[0] = -r * inv_var;
    grad[1] = (1.0 / sigma - r * r * inv_var / sigma) * sigmoid(raw[1]);
    double value = kHalfLog2Pi + std::log(sigma) + 0.5 * r * r * inv_var;
    if (family == HeadFamily::lognormal) value += y;
    return value;
}

double Head::sample(std::span<const double> raw, Rng& rng) const {
    const HeadParams p = params(raw);
    switch (family) {
        case HeadFamily::bernoulli: return rng.uniform() < p.p ? 1.0 : 0.0;
        case HeadFamily::gaussian: return p.mu + p.sigma * rng.normal();
        case HeadFamily::lognormal: return std::exp(p.mu + p.sigma * rng.normal());
    }
    return 0.0;
}

double Head::mean(std::span<const double> raw) const {
    const HeadParams p = params(raw);
    switch (family) {
        case HeadFamily::bernoulli: return p.p;
        case HeadFamily::gaussian: return p.mu;
        case HeadFamily::lognormal: return std::exp(p.mu + 0.5 * p.sigma * p.sigma);
    }
    return 0.0;
}

}  // namespace cnade
