#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cnade/dataset.hpp"
#include "cnade/graph.hpp"

namespace cnade {

enum class ExperimentId {
    binary,
    continuous_outcome,
    continuous_confounder_gamma,
    continuous_confounder_lognormal,
    nonlinear,
    frontdoor,
    unobs_mild,
    unobs_strong,
    unobs_nonlinear,
};

std::string_view to_string(ExperimentId id);
ExperimentId parse_experiment(std::string_view text);
const std::vector<ExperimentId>& all_experiments();

/// Kidney-stone constants. KS = 1 is a large stone, T = 1 is treatment A,
/// R = 1 is recovery.
namespace kidney {
inline constexpr double p_small = 357.0 / 700.0;
inline constexpr double p_a_given_small = 87.0 / 357.0;
inline constexpr double p_a_given_large = 263.0 / 343.0;
inline constexpr double p_recover_small_a = 81.0 / 87.0;
inline constexpr double p_recover_small_b = 234.0 / 270.0;
inline constexpr double p_recover_large_a = 192.0 / 263.0;
inline constexpr double p_recover_large_b = 55.0 / 80.0;
}  // namespace kidney

inline constexpr double kLogNormalMu = 2.5;
inline constexpr double kLogNormalSigma = 0.25;
inline constexpr double kGammaShape = 5.0;
inline constexpr double kGammaScale = 2.0;
inline constexpr double kConfounderCutoff = 10.0;

struct DgpSpec {
    ExperimentId id = ExperimentId::binary;
    std::size_t n = 10000;
    std::uint64_t seed = 0;
    /// Coefficient of the T*U term (unobs-mild / unobs-strong); 0 selects the
    /// experiment default (0.3 / 3.0).
    double confounding = 0.0;
    /// Subtract the confounder mean before treatment assignment.
    bool center_treatment = true;
    /// Subtract the confounder mean inside the outcome equation 50T/(KS+3).
    bool center_outcome = false;
    /// Use P(T=1) = 1/(1+exp((KS-mean)/10)) (opposite sign) instead of
    /// 1/(1+exp(-(KS-mean)/10)).
    bool flip_treatment_sign = false;
};

double confounding_coefficient(const DgpSpec& spec);

/// Graph the estimator is trained on (observed variables only).
Dag model_dag(ExperimentId id);
/// Generating graph including hidden variables.
Dag true_dag(ExperimentId id);

/// Treatment values compared by the experiment's estimand.
struct TreatmentPair {
    double treated;
    double control;
};
TreatmentPair treatment_pair(ExperimentId id);

/// Draws spec.n rows. Hidden variables (U, or KS in the front-door setting)
/// are present but flagged unobservable.
Dataset generate(const DgpSpec& spec);

/// Ground truth: scalar ATE for the average-effect experiments, the
/// conditional effect at raw confounder value `ks` for the curve experiments,
/// and nullopt for the front-door setting (simulation only; use
/// intervene_dgp). Throws ks_required when a curve experiment gets no ks.
std::optional<double> true_effect(const DgpSpec& spec, std::optional<double> ks = std::nullopt);

/// True if the experiment's estimand is a conditional-effect curve.
bool is_curve_experiment(ExperimentId id);

/// Runs the generating process with the intervened variables clamped.
Dataset intervene_dgp(const DgpSpec& spec, const Intervention& iv, std::size_t n, std::uint64_t seed);

}  // namespace cnade
