#include "cnade/effects.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "cnade/stats.hpp"

namespace cnade {

std::string_view to_string(Adjustment a) {
    switch (a) {
        case Adjustment::backdoor_discrete: return "backdoor-discrete";
        case Adjustment::backdoor_mc: return "backdoor-mc";
        case Adjustment::frontdoor_mc: return "frontdoor-mc";
        case Adjustment::none: return "none";
    }
    return "?";
}

Adjustment parse_adjustment(std::string_view text) {
    if (text == "backdoor-discrete") return Adjustment::backdoor_discrete;
    if (text == "backdoor-mc") return Adjustment::backdoor_mc;
    if (text == "frontdoor-mc") return Adjustment::frontdoor_mc;
    if (text == "none") return Adjustment::none;
    throw Error(ErrorCode::parse_error, "unknown adjustment '" + std::string(text) + "'");
}

namespace {

void check_pair(const Dag& dag, const std::string& treatment, const std::string& outcome) {
    dag.index_of(treatment);
    dag.index_of(outcome);
    if (treatment == outcome) throw Error(ErrorCode::invalid_argument, "treatment and outcome must differ");
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

// Input vector for `c` with two named values; every input must be one of them.
std::vector<double> inputs_of(const Conditional& c, const std::string& a, double va, const std::string& b, double vb) {
    std::vector<double> x;
    for (const auto& in : c.inputs) {
        if (in == a) {
            x.push_back(va);
        } else if (in == b) {
            x.push_back(vb);
        } else {
            throw Error(ErrorCode::invalid_argument, "'" + c.target + "' has unexpected input '" + in + "'");
        }
    }
    return x;
}

void require_samples(std::size_t n, const char* what) {
    if (n == 0) throw Error(ErrorCode::mc_samples_zero, std::string(what) + " must be positive");
}

}  // namespace

std::string find_backdoor_confounder(const Dag& dag, const std::string& treatment, const std::string& outcome) {
    check_pair(dag, treatment, outcome);
    const auto& tp = dag.parents(treatment);
    const auto& op = dag.parents(outcome);
    if (tp.size() != 1) {
        throw Error(ErrorCode::adjustment_set_not_found,
                    "treatment '" + treatment + "' must have exactly one parent (the confounder)");
    }
    const std::string& c = tp.front();
    if (!dag.parents(c).empty()) {
        throw Error(ErrorCode::adjustment_set_not_found, "confounder '" + c + "' must be a root");
    }
    if (as_set(op) != std::set<std::string>{treatment, c}) {
        throw Error(ErrorCode::adjustment_set_not_found,
                    "outcome '" + outcome + "' must have exactly the parents {" + treatment + ", " + c + "}");
    }
    return c;
}

std::string find_frontdoor_mediator(const Dag& dag, const std::string& treatment, const std::string& outcome) {
    check_pair(dag, treatment, outcome);
    if (!dag.parents(treatment).empty()) {
        throw Error(ErrorCode::adjustment_graph_mismatch,
                    "treatment '" + treatment + "' must be a root of the observed graph");
    }
    const auto& op = dag.parents(outcome);
    if (op.size() != 1) {
        throw Error(ErrorCode::adjustment_graph_mismatch,
                    "outcome '" + outcome + "' must have a single mediator parent");
    }
    const std::string& m = op.front();
    if (m == treatment || dag.parents(m) != std::vector<std::string>{treatment}) {
        throw Error(ErrorCode::adjustment_graph_mismatch,
                    "no mediator: '" + m + "' must have exactly the parent '" + treatment + "'");
    }
    return m;
}

EffectEstimate backdoor_discrete_ate(const CausalModel& model, const EffectQuery& query) {
    const Dag& dag = model.dag();
    const std::string c = find_backdoor_confounder(dag, query.treatment, query.outcome);
    if (dag.variable(c).kind != VarKind::binary || dag.variable(query.treatment).kind != VarKind::binary) {
        throw Error(ErrorCode::non_discrete_variables, "treatment and confounder must both be binary");
    }
    const Conditional& conf = model.node(c);
    const Conditional& out = model.node(query.outcome);
    const double p1 = conf.mean({});
    double point = 0.0;
    for (const double cv : {0.0, 1.0}) {
        const double weight = cv == 1.0 ? p1 : 1.0 - p1;
        const double hi = out.mean(inputs_of(out, query.treatment, query.treated, c, cv));
        const double lo = out.mean(inputs_of(out, query.treatment, query.control, c, cv));
        point += (hi - lo) * weight;
    }
    return {point, std::nullopt, std::nullopt};
}

InterventionalDraws backdoor_mc(const CausalModel& model, const EffectQuery& query, double t) {
    require_samples(query.n_outer, "mc outer samples");
    const std::string c = find_backdoor_confounder(model.dag(), query.treatment, query.outcome);
    const Conditional& conf = model.node(c);
    const Conditional& out = model.node(query.outcome);
    Rng conf_rng(derive_seed(query.seed, 1));
    Rng out_rng(derive_seed(query.seed, 2));

    InterventionalDraws result;
    result.draws.reserve(query.n_outer);
    double total = 0.0;
    for (std::size_t s = 0; s < query.n_outer; ++s) {
        const double cv = conf.sample({}, conf_rng);
        const auto raw = out.raw_output(inputs_of(out, query.treatment, t, c, cv));
        total += out.head.mean(raw);
        result.draws.push_back(out.head.sample(raw, out_rng));
    }
    result.mean = total / static_cast<double>(query.n_outer);
    return result;
}

std::vector<CurvePoint> cate_curve(const CausalModel& model, const EffectQuery& query, std::span<const double> grid) {
    if (grid.empty()) throw Error(ErrorCode::empty_grid, "confounder grid is empty");
    const std::string c = find_backdoor_confounder(model.dag(), query.treatment, query.outcome);
    const Conditional& out = model.node(query.outcome);
    std::vector<CurvePoint> curve;
    curve.reserve(grid.size());
    for (const double cv : grid) {
        const double hi = out.mean(inputs_of(out, query.treatment, query.treated, c, cv));
        const double lo = out.mean(inputs_of(out, query.treatment, query.control, c, cv));
        curve.push_back({cv, hi - lo});
    }
    return curve;
}

std::vector<double> quantile_grid(std::span<const double> values, double lo_q, double hi_q, std::size_t points) {
    if (points == 0) throw Error(ErrorCode::empty_grid, "grid needs at least one point");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = quantile_sorted(sorted, lo_q);
    const double hi = quantile_sorted(sorted, hi_q);
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

InterventionalDraws frontdoor_mc(const CausalModel& model, const Conditional* aux, const std::string& treatment,
                                 const std::string& outcome, double t_hat, std::size_t n_outer, std::size_t n_inner,
                                 Rng& rng) {
    const std::string m = find_frontdoor_mediator(model.dag(), treatment, outcome);
    if (aux == nullptr) throw Error(ErrorCode::missing_aux, "front-door adjustment needs an auxiliary estimator");
    if (aux->target != outcome || as_set(aux->inputs) != std::set<std::string>{m, treatment}) {
        throw Error(ErrorCode::missing_aux, "auxiliary estimator must model '" + outcome + "' given {" + m + ", " +
                                                treatment + "}");
    }
    require_samples(n_outer, "mc outer samples");
    require_samples(n_inner, "mc inner samples");

    Rng mediator_rng(rng.engine()());
    Rng treatment_rng(rng.engine()());
    Rng outcome_rng(rng.engine()());
    const Conditional& mediator = model.node(m);
    const Conditional& marginal = model.node(treatment);

    InterventionalDraws result;
    result.draws.reserve(n_outer * n_inner);
    double total = 0.0;
    for (std::size_t i = 0; i < n_outer; ++i) {
        const double mg = mediator.sample(std::vector<double>{t_hat}, mediator_rng);
        for (std::size_t j = 0; j < n_inner; ++j) {
            const double t = marginal.sample({}, treatment_rng);
            const auto raw = aux->raw_output(inputs_of(*aux, m, mg, treatment, t));
            total += aux->head.mean(raw);
            result.draws.push_back(aux->head.sample(raw, outcome_rng));
        }
    }
    result.mean = total / static_cast<double>(result.draws.size());
    return result;
}

InterventionalDraws conditioning_mc(const CausalModel& model, const Conditional& aux, const std::string& treatment,
                                    const std::string& outcome, double t_hat, std::size_t n, Rng& rng) {
    const std::string m = find_frontdoor_mediator(model.dag(), treatment, outcome);
    require_samples(n, "mc samples");
    Rng mediator_rng(rng.engine()());
    Rng outcome_rng(rng.engine()());
    const Conditional& mediator = model.node(m);

    InterventionalDraws result;
    result.draws.reserve(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mg = mediator.sample(std::vector<double>{t_hat}, mediator_rng);
        const auto raw = aux.raw_output(inputs_of(aux, m, mg, treatment, t_hat));
        total += aux.head.mean(raw);
        result.draws.push_back(aux.head.sample(raw, outcome_rng));
    }
    result.mean = total / static_cast<double>(n);
    return result;
}

EffectEstimate ate(const CausalModel& model, const EffectQuery& query, const Conditional* aux) {
    check_pair(model.dag(), query.treatment, query.outcome);
    switch (query.adjustment) {
        case Adjustment::backdoor_discrete: return backdoor_discrete_ate(model, query);
        case Adjustment::backdoor_mc: {
            auto hi = backdoor_mc(model, query, query.treated);
            const auto lo = backdoor_mc(model, query, query.control);
            return {hi.mean - lo.mean, std::move(hi.draws), std::nullopt};
        }
        case Adjustment::frontdoor_mc: {
            find_frontdoor_mediator(model.dag(), query.treatment, query.outcome);
            Rng rng_hi(query.seed);
            Rng rng_lo(query.seed);
            auto hi = frontdoor_mc(model, aux, query.treatment, query.outcome, query.treated, query.n_outer,
                                   query.n_inner, rng_hi);
            const auto lo = frontdoor_mc(model, aux, query.treatment, query.outcome, query.control, query.n_outer,
                                         query.n_inner, rng_lo);
            return {hi.mean - lo.mean, std::move(hi.draws), std::nullopt};
        }
        case Adjustment::none: {
            require_samples(query.n_outer, "mc outer samples");
            const std::size_t col = model.dag().index_of(query.outcome);
            auto arm = [&](double t) {
                Rng rng(query.seed);
                const Intervention iv({{query.treatment, t}});
                const Dataset d = ancestral_sample(model, query.n_outer, rng, iv);
                std::vector<double> draws(d.rows());
                for (std::size_t r = 0; r < d.rows(); ++r) draws[r] = d.at(r, col);
                return draws;
            };
            auto hi = arm(query.treated);
            const auto lo = arm(query.control);
            const double point = mean_of(hi) - mean_of(lo);
            return {point, std::move(hi), std::nullopt};
        }
    }
    throw Error(ErrorCode::invalid_argument, "unknown adjustment");
}

void write_curve_csv(std::ostream& out, std::span<const double> grid, std::span<const double> mean,
                     std::span<const double> lo, std::span<const double> hi) {
    if (mean.size() != grid.size() || lo.size() != grid.size() || hi.size() != grid.size()) {
        throw Error(ErrorCode::length_mismatch, "curve columns differ in length");
    }
    out << "grid_value,effect_mean,band_lo,band_hi\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << format_double(grid[i]) << ',' << format_double(mean[i]) << ',' << format_double(lo[i]) << ','
            << format_double(hi[i]) << '\n';
    }
}

void write_draws_csv(std::ostream& out, double t_value, std::span<const double> draws, bool header) {
    if (header) out << "t_value,draw\n";
    for (double d : draws) out << format_double(t_value) << ',' << format_double(d) << '\n';
}

}  // namespace cnade
