#include "cnade/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cnade/rng.hpp"

namespace cnade {

std::string_view to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::binary: return "binary";
        case ExperimentId::continuous_outcome: return "continuous-outcome";
        case ExperimentId::continuous_confounder_gamma: return "continuous-confounder-gamma";
        case ExperimentId::continuous_confounder_lognormal: return "continuous-confounder-lognormal";
        case ExperimentId::nonlinear: return "nonlinear";
        case ExperimentId::frontdoor: return "frontdoor";
        case ExperimentId::unobs_mild: return "unobs-mild";
        case ExperimentId::unobs_strong: return "unobs-strong";
        case ExperimentId::unobs_nonlinear: return "unobs-nonlinear";
    }
    return "?";
}

const std::vector<ExperimentId>& all_experiments() {
    static const std::vector<ExperimentId> ids{
        ExperimentId::binary,     ExperimentId::continuous_outcome, ExperimentId::continuous_confounder_gamma,
        ExperimentId::continuous_confounder_lognormal, ExperimentId::nonlinear, ExperimentId::frontdoor,
        ExperimentId::unobs_mild, ExperimentId::unobs_strong, ExperimentId::unobs_nonlinear,
    };
    return ids;
}

ExperimentId parse_experiment(std::string_view text) {
    for (auto id : all_experiments()) {
        if (to_string(id) == text) return id;
    }
    throw Error(ErrorCode::parse_error, "unknown experiment '" + std::string(text) + "'");
}

bool is_curve_experiment(ExperimentId id) {
    return id == ExperimentId::nonlinear || id == ExperimentId::unobs_mild || id == ExperimentId::unobs_strong ||
           id == ExperimentId::unobs_nonlinear;
}

double confounding_coefficient(const DgpSpec& spec) {
    if (spec.confounding != 0.0) return spec.confounding;
    switch (spec.id) {
        case ExperimentId::unobs_mild: return 0.3;
        case ExperimentId::unobs_strong: return 3.0;
        default: return 0.0;
    }
}

namespace {

const double kLogNormalMean = std::exp(kLogNormalMu + 0.5 * kLogNormalSigma * kLogNormalSigma);

Dag kidney_graph(VarKind ks, VarKind t, VarKind r) {
    return Dag({{"KS", ks, {}}, {"T", t, {"KS"}}, {"R", r, {"KS", "T"}}});
}

bool has_hidden_u(ExperimentId id) {
    return id == ExperimentId::unobs_mild || id == ExperimentId::unobs_strong || id == ExperimentId::unobs_nonlinear;
}

// Names of the generated columns in output order.
std::vector<std::string> columns_of(ExperimentId id) {
    if (id == ExperimentId::frontdoor) return {"KS", "T", "Mg", "R"};
    if (has_hidden_u(id)) return {"KS", "U", "T", "R"};
    return {"KS", "T", "R"};
}

std::vector<bool> hidden_of(ExperimentId id) {
    if (id == ExperimentId::frontdoor) return {true, false, false, false};
    if (has_hidden_u(id)) return {false, true, false, false};
    return {};
}

struct Clamp {
    std::optional<double> ks, u, t, mg, r;
};

Clamp read_clamp(ExperimentId id, const Intervention& iv) {
    Clamp c;
    const auto cols = columns_of(id);
    for (const auto& [name, value] : iv.assignments()) {
        if (std::find(cols.begin(), cols.end(), name) == cols.end()) {
            throw Error(ErrorCode::unknown_variable, "'" + name + "' is not generated by " +
                                                         std::string(to_string(id)));
        }
        if (name == "KS") c.ks = value;
        if (name == "U") c.u = value;
        if (name == "T") c.t = value;
        if (name == "Mg") c.mg = value;
        if (name == "R") c.r = value;
    }
    return c;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One row of the generating process; clamped variables skip their equation.
std::vector<double> draw_row(const DgpSpec& spec, const Clamp& c, Rng& rng) {
    using namespace kidney;
    auto pick = [&](const std::optional<double>& fixed, auto&& equation) -> double {
        // Equations are always evaluated so clamping one variable leaves the
        // random stream of the others unchanged.
        const double v = equation();
        return fixed ? *fixed : v;
    };

    switch (spec.id) {
        case ExperimentId::binary:
        case ExperimentId::continuous_outcome: {
            const double ks = pick(c.ks, [&] { return rng.bernoulli(1.0 - p_small) ? 1.0 : 0.0; });
            const double t = pick(c.t, [&] {
                return rng.bernoulli(ks == 1.0 ? p_a_given_large : p_a_given_small) ? 1.0 : 0.0;
            });
            double r;
            if (spec.id == ExperimentId::binary) {
                r = pick(c.r, [&] {
                    const double p = ks == 1.0 ? (t == 1.0 ? p_recover_large_a : p_recover_large_b)
                                               : (t == 1.0 ? p_recover_small_a : p_recover_small_b);
                    return rng.bernoulli(p) ? 1.0 : 0.0;
                });
            } else {
                r = pick(c.r, [&] { return rng.normal(4.0 * t + std::exp(ks), 2.0); });
            }
            return {ks, t, r};
        }
        case ExperimentId::continuous_confounder_gamma:
        case ExperimentId::continuous_confounder_lognormal: {
            const double ks = pick(c.ks, [&] {
                return spec.id == ExperimentId::continuous_confounder_gamma
                           ? rng.gamma(kGammaShape, kGammaScale)
                           : rng.lognormal(kLogNormalMu, kLogNormalSigma);
            });
            const double t = pick(c.t, [&] {
                return rng.bernoulli(ks > kConfounderCutoff ? p_a_given_large : p_a_given_small) ? 1.0 : 0.0;
            });
            const double r = pick(c.r, [&] { return rng.normal(4.0 * t + ks, 2.0); });
            return {ks, t, r};
        }
        case ExperimentId::nonlinear:
        case ExperimentId::unobs_mild:
        case ExperimentId::unobs_strong:
        case ExperimentId::unobs_nonlinear: {
            const bool hidden_u = has_hidden_u(spec.id);
            const double ks = pick(c.ks, [&] { return rng.lognormal(kLogNormalMu, kLogNormalSigma); });
            const double u = hidden_u ? pick(c.u, [&] { return rng.normal(0.0, 1.0); }) : 0.0;
            const double ks_t = spec.center_treatment ? ks - kLogNormalMean : ks;
            const double ks_r = spec.center_outcome ? ks - kLogNormalMean : ks;
            const double t = pick(c.t, [&] {
                const double z = (ks_t + u) / 10.0;
                return rng.bernoulli(logistic(spec.flip_treatment_sign ? -z : z)) ? 1.0 : 0.0;
            });
            const double r = pick(c.r, [&] {
                double mu = 50.0 * t / (ks_r + 3.0);
                if (spec.id == ExperimentId::unobs_nonlinear) {
                    mu += t * u * u;
                } else if (hidden_u) {
                    mu += confounding_coefficient(spec) * t * u;
                }
                return rng.normal(mu, 1.0);
            });
            if (hidden_u) return {ks, u, t, r};
            return {ks, t, r};
        }
        case ExperimentId::frontdoor: {
            const double ks = pick(c.ks, [&] { return rng.normal(0.0, 1.0); });
            const double t = pick(c.t, [&] { return rng.normal(std::sin(ks), 0.1); });
            const double mg = pick(c.mg, [&] { return rng.normal(1.0 + t * t, 0.1); });
            const double r = pick(c.r, [&] { return rng.normal(std::sin(ks * ks) + 5.0 / mg, 0.1); });
            return {ks, t, mg, r};
        }
    }
    return {};
}

Dataset simulate(const DgpSpec& spec, const Clamp& clamp, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "row count must be positive");
    Dataset data(columns_of(spec.id), hidden_of(spec.id));
    data.reserve(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) data.add_row(draw_row(spec, clamp, rng));
    return data;
}

}  // namespace

Dag model_dag(ExperimentId id) {
    switch (id) {
        case ExperimentId::binary:
            return kidney_graph(VarKind::binary, VarKind::binary, VarKind::binary);
        case ExperimentId::continuous_outcome:
            return kidney_graph(VarKind::binary, VarKind::binary, VarKind::continuous_real);
        case ExperimentId::frontdoor:
            return Dag({{"T", VarKind::continuous_real, {}},
                        {"Mg", VarKind::continuous_real, {"T"}},
                        {"R", VarKind::continuous_real, {"Mg"}}});
        default:
            return kidney_graph(VarKind::continuous_positive, VarKind::binary, VarKind::continuous_real);
    }
}

Dag true_dag(ExperimentId id) {
    if (id == ExperimentId::frontdoor) {
        return Dag({{"KS", VarKind::continuous_real, {}},
                    {"T", VarKind::continuous_real, {"KS"}},
                    {"Mg", VarKind::continuous_real, {"T"}},
                    {"R", VarKind::continuous_real, {"KS", "Mg"}}});
    }
    if (has_hidden_u(id)) {
        return Dag({{"KS", VarKind::continuous_positive, {}},
                    {"U", VarKind::continuous_real, {}},
                    {"T", VarKind::binary, {"KS", "U"}},
                    {"R", VarKind::continuous_real, {"KS", "T", "U"}}});
    }
    return model_dag(id);
}

TreatmentPair treatment_pair(ExperimentId id) {
    if (id == ExperimentId::frontdoor) return {0.5, 0.0};
    return {1.0, 0.0};
}

Dataset generate(const DgpSpec& spec) { return simulate(spec, Clamp{}, spec.n, spec.seed); }

std::optional<double> true_effect(const DgpSpec& spec, std::optional<double> ks) {
    using namespace kidney;
    switch (spec.id) {
        case ExperimentId::binary:
            return p_small * (p_recover_small_a - p_recover_small_b) +
                   (1.0 - p_small) * (p_recover_large_a - p_recover_large_b);
        case ExperimentId::continuous_outcome:
        case ExperimentId::continuous_confounder_gamma:
        case ExperimentId::continuous_confounder_lognormal:
            return 4.0;
        case ExperimentId::frontdoor:
            return std::nullopt;
        default:
            break;
    }
    if (!ks) throw Error(ErrorCode::ks_required, std::string(to_string(spec.id)) + " truth is conditional on KS");
    const double k = spec.center_outcome ? *ks - kLogNormalMean : *ks;
    return 50.0 / (k + 3.0);
}

Dataset intervene_dgp(const DgpSpec& spec, const Intervention& iv, std::size_t n, std::uint64_t seed) {
    return simulate(spec, read_clamp(spec.id, iv), n, seed);
}

}  // namespace cnade
