#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cnade/model.hpp"

namespace cnade {

enum class Adjustment { backdoor_discrete, backdoor_mc, frontdoor_mc, none };

std::string_view to_string(Adjustment a);
Adjustment parse_adjustment(std::string_view text);

inline constexpr std::size_t kDefaultInnerSamples = 64;

/// An interventional query comparing do(treatment = treated) against
/// do(treatment = control) on `outcome`.
struct EffectQuery {
    std::string outcome;
    std::string treatment;
    double treated = 1.0;
    double control = 0.0;
    Adjustment adjustment = Adjustment::backdoor_discrete;
    std::size_t n_outer = 1000;
    std::size_t n_inner = kDefaultInnerSamples;
    std::uint64_t seed = 0;
};

struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

struct EffectEstimate {
    double point = 0.0;
    std::optional<std::vector<double>> samples;
    std::optional<Band> band;
};

/// Interventional outcome distribution: Rao-Blackwellized mean (head means)
/// plus one outcome draw per Monte Carlo sample.
struct InterventionalDraws {
    double mean = 0.0;
    std::vector<double> draws;
};

/// Structural check for back-door adjustment: a single root confounder C with
/// parents(treatment) = {C} and parents(outcome) = {treatment, C}. Throws
/// adjustment_set_not_found naming the failed check.
std::string find_backdoor_confounder(const Dag& dag, const std::string& treatment, const std::string& outcome);

/// Structural check for front-door adjustment over the observed graph:
/// treatment is a root, parents(M) = {treatment} and parents(outcome) = {M}.
/// Throws adjustment_graph_mismatch naming the failed check.
std::string find_frontdoor_mediator(const Dag& dag, const std::string& treatment, const std::string& outcome);

/// Exact back-door sum over a binary confounder using the heads' conditional
/// means: sum_c [E(Y|T=x,C=c) - E(Y|T=x',C=c)] P(C=c).
EffectEstimate backdoor_discrete_ate(const CausalModel& model, const EffectQuery& query);

/// Monte Carlo back-door integral at T = t. Confounder draws and outcome
/// draws use separate streams derived from query.seed, so two calls with the
/// same seed see identical confounder values (common random numbers).
InterventionalDraws backdoor_mc(const CausalModel& model, const EffectQuery& query, double t);

struct CurvePoint {
    double x = 0.0;
    double effect = 0.0;
};

/// effect(c) = E(Y | T=treated, C=c) - E(Y | T=control, C=c) for each c.
std::vector<CurvePoint> cate_curve(const CausalModel& model, const EffectQuery& query, std::span<const double> grid);

/// `points` evenly spaced values between the lo_q and hi_q empirical
/// quantiles of `values`.
std::vector<double> quantile_grid(std::span<const double> values, double lo_q = 0.01, double hi_q = 0.99,
                                  std::size_t points = 100);

/// Front-door Monte Carlo: for each of n_outer draws mg ~ P(M | T=t_hat), draw
/// n_inner pairs t' ~ P(T), y ~ aux(M=mg, T=t'). Returns all pooled draws.
InterventionalDraws frontdoor_mc(const CausalModel& model, const Conditional* aux, const std::string& treatment,
                                 const std::string& outcome, double t_hat, std::size_t n_outer, std::size_t n_inner,
                                 Rng& rng);

/// Plain conditioning baseline: mg ~ P(M | T=t_hat), y ~ aux(M=mg, T=t_hat).
InterventionalDraws conditioning_mc(const CausalModel& model, const Conditional& aux, const std::string& treatment,
                                    const std::string& outcome, double t_hat, std::size_t n, Rng& rng);

/// Difference of interventional means under the query's adjustment. Both
/// arms share the query seed.
EffectEstimate ate(const CausalModel& model, const EffectQuery& query, const Conditional* aux = nullptr);

/// Curve CSV: grid_value,effect_mean,band_lo,band_hi
void write_curve_csv(std::ostream& out, std::span<const double> grid, std::span<const double> mean,
                     std::span<const double> lo, std::span<const double> hi);
/// Draws CSV: t_value,draw
void write_draws_csv(std::ostream& out, double t_value, std::span<const double> draws, bool header = true);

}  // namespace cnade
