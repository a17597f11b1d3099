#include "cnade/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cnade/stats.hpp"

namespace cnade {

namespace {

constexpr std::uint64_t kQueryStream = 0xbd;
constexpr std::uint64_t kFrontdoorStream = 0xfd;
constexpr std::uint64_t kOracleStream = 0x0c;
constexpr std::uint64_t kAuxStream = 0xa1;

TrainConfig linear_variant(TrainConfig cfg) {
    cfg.activation = Activation::linear;
    return cfg;
}

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name, ExperimentReport& report) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + (dir / name).string());
    report.files.push_back(name);
    return out;
}

}  // namespace

FittedExperiment fit_experiment(ExperimentId id, const Dataset& train, const TrainConfig& cfg) {
    FittedExperiment fitted;
    fitted.model = build(model_dag(id), cfg.hidden, cfg.activation, cfg.seed);
    fitted.final_nll = fit(fitted.model, train, cfg).final_nll;
    if (id == ExperimentId::frontdoor) {
        TrainConfig aux_cfg = cfg;
        aux_cfg.seed = derive_seed(cfg.seed, kAuxStream);
        AuxFit aux = fit_auxiliary(train, {"Mg", "T"}, "R", Head{HeadFamily::gaussian}, aux_cfg);
        fitted.final_nll += aux.log.final_nll;
        fitted.aux = std::move(aux.estimator);
    }
    return fitted;
}

EffectQuery experiment_query(ExperimentId id, const SweepConfig& sweep) {
    EffectQuery q;
    q.outcome = "R";
    q.treatment = "T";
    const auto pair = treatment_pair(id);
    q.treated = pair.treated;
    q.control = pair.control;
    q.n_outer = sweep.mc_outer;
    q.n_inner = sweep.mc_inner;
    q.seed = derive_seed(sweep.seed, kQueryStream);
    switch (id) {
        case ExperimentId::binary:
        case ExperimentId::continuous_outcome: q.adjustment = Adjustment::backdoor_discrete; break;
        case ExperimentId::frontdoor: q.adjustment = Adjustment::frontdoor_mc; break;
        default: q.adjustment = Adjustment::backdoor_mc; break;
    }
    return q;
}

ScoredEstimate score_experiment(const DgpSpec& spec, const FittedExperiment& fitted, const Dataset& train,
                                const SweepConfig& sweep) {
    ScoredEstimate s;
    const EffectQuery q = experiment_query(spec.id, sweep);
    if (spec.id == ExperimentId::frontdoor) {
        if (!fitted.aux) throw Error(ErrorCode::missing_aux, "front-door experiment without auxiliary estimator");
        const std::size_t outer = (sweep.oracle_draws + sweep.mc_inner - 1) / sweep.mc_inner;
        const double values[] = {0.0, 0.5};
        for (std::size_t k = 0; k < 2; ++k) {
            Rng rng(derive_seed(sweep.seed, kFrontdoorStream + k));
            auto draws = frontdoor_mc(fitted.model, &*fitted.aux, "T", "R", values[k], outer, sweep.mc_inner, rng)
                             .draws;
            const Dataset oracle = intervene_dgp(spec, Intervention({{"T", values[k]}}), draws.size(),
                                                 derive_seed(sweep.seed, kOracleStream + k));
            auto truth = oracle.column("R");
            std::sort(draws.begin(), draws.end());
            std::sort(truth.begin(), truth.end());
            s.grid.insert(s.grid.end(), draws.size(), values[k]);
            s.estimate.insert(s.estimate.end(), draws.begin(), draws.end());
            s.truth.insert(s.truth.end(), truth.begin(), truth.end());
        }
        return s;
    }
    if (is_curve_experiment(spec.id)) {
        s.grid = quantile_grid(train.column("KS"), 0.05, 0.95, sweep.curve_points);
        for (const auto& p : cate_curve(fitted.model, q, s.grid)) {
            s.estimate.push_back(p.effect);
            s.truth.push_back(*true_effect(spec, p.x));
        }
        return s;
    }
    s.grid = {q.treated};
    s.estimate = {ate(fitted.model, q).point};
    s.truth = {*true_effect(spec)};
    return s;
}

TrainConfig default_train_config(ExperimentId id) {
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.batch_size = 128;
    cfg.optimizer = OptimizerKind::rmsprop;
    cfg.learning_rate = 5e-3;
    cfg.activation = Activation::tanh;
    switch (id) {
        case ExperimentId::binary:
        case ExperimentId::continuous_outcome: cfg.hidden = {4}; break;
        case ExperimentId::frontdoor: cfg.hidden = {16}; break;
        default: cfg.hidden = {8}; break;
    }
    return cfg;
}

GridSpec reduced_selection_grid() {
    GridSpec g;
    g.activations = {Activation::tanh};
    g.optimizers = {OptimizerKind::sgd, OptimizerKind::rmsprop};
    g.learning_rates = {1e-2, 5e-3};
    g.layouts = {{4}, {8}, {16}};
    return g;
}

ExperimentSettings default_settings(ExperimentId id, std::uint64_t seed) {
    ExperimentSettings s;
    s.dgp.id = id;
    s.dgp.n = 10000;
    s.dgp.seed = seed;
    s.train = default_train_config(id);
    s.train.seed = derive_seed(seed, 1);
    s.bootstrap.master_seed = derive_seed(seed, 2);
    s.sweep.base = s.train;
    s.sweep.seed = derive_seed(seed, 3);
    s.sweep.mc_outer = id == ExperimentId::frontdoor ? 200 : 1000;
    s.sweep.mc_inner = kDefaultInnerSamples;
    s.select = is_curve_experiment(id);
    s.run_bootstrap = is_curve_experiment(id);
    return s;
}

namespace {

void run_kidney(const ExperimentSettings& st, const Dataset& data, const std::filesystem::path& dir,
                ExperimentReport& report) {
    const ExperimentId id = st.dgp.id;
    const FittedExperiment neural = fit_experiment(id, data, st.train);
    const FittedExperiment linear = fit_experiment(id, data, linear_variant(st.train));
    const EffectQuery q = experiment_query(id, st.sweep);
    const double truth = *true_effect(st.dgp);
    report.metrics["ate_neural"] = ate(neural.model, q).point;
    report.metrics["ate_linear"] = ate(linear.model, q).point;
    report.metrics["ate_true"] = truth;
    report.metrics["final_nll_neural"] = neural.final_nll;

    auto out = open_out(dir, "ate.csv", report);
    out << "estimator,value\n";
    out << "neural," << format_double(report.metrics["ate_neural"]) << '\n';
    out << "linear," << format_double(report.metrics["ate_linear"]) << '\n';
    out << "true," << format_double(truth) << '\n';

    if (id != ExperimentId::binary) return;
    using namespace kidney;
    const auto& m = neural.model;
    struct Item {
        std::string name;
        double fitted;
        double generating;
    };
    auto p_r = [&](double ks, double t) { return m.node("R").mean(std::vector<double>{ks, t}); };
    const std::vector<Item> items{
        {"p(KS=large)", m.node("KS").mean({}), 1.0 - p_small},
        {"p(T=A|small)", m.node("T").mean(std::vector<double>{0.0}), p_a_given_small},
        {"p(T=A|large)", m.node("T").mean(std::vector<double>{1.0}), p_a_given_large},
        {"p(R=1|large,A)", p_r(1, 1), p_recover_large_a},
        {"p(R=1|large,B)", p_r(1, 0), p_recover_large_b},
        {"p(R=1|small,A)", p_r(0, 1), p_recover_small_a},
        {"p(R=1|small,B)", p_r(0, 0), p_recover_small_b},
    };
    auto cond = open_out(dir, "conditionals.csv", report);
    cond << "quantity,fitted,generating\n";
    double worst = 0.0;
    for (const auto& it : items) {
        cond << it.name << ',' << format_double(it.fitted) << ',' << format_double(it.generating) << '\n';
        worst = std::max(worst, std::abs(it.fitted - it.generating));
    }
    report.metrics["max_conditional_error"] = worst;
}

void run_continuous_confounder(const ExperimentSettings& st, const Dataset& data, const std::filesystem::path& dir,
                               ExperimentReport& report) {
    const ExperimentId id = st.dgp.id;
    const FittedExperiment neural = fit_experiment(id, data, st.train);
    const FittedExperiment linear = fit_experiment(id, data, linear_variant(st.train));
    auto out = open_out(dir, "ate_by_samples.csv", report);
    out << "mc_outer,model,ate\n";
    for (const std::size_t n : {1, 5, 25, 50, 1000}) {
        EffectQuery q = experiment_query(id, st.sweep);
        q.n_outer = n;
        const double a_neural = ate(neural.model, q).point;
        const double a_linear = ate(linear.model, q).point;
        out << n << ",neural," << format_double(a_neural) << '\n';
        out << n << ",linear," << format_double(a_linear) << '\n';
        report.metrics["ate_neural_" + std::to_string(n)] = a_neural;
        report.metrics["ate_linear_" + std::to_string(n)] = a_linear;
    }
    report.metrics["ate_true"] = 4.0;
}

std::vector<double> curve_effects(const FittedExperiment& f, const EffectQuery& q, const std::vector<double>& grid) {
    std::vector<double> out;
    for (const auto& p : cate_curve(f.model, q, grid)) out.push_back(p.effect);
    return out;
}

void run_curve(const ExperimentSettings& st, const Dataset& data, const std::filesystem::path& dir,
               ExperimentReport& report) {
    const ExperimentId id = st.dgp.id;
    TrainConfig best = st.train;
    if (st.select) {
        SweepConfig sweep = st.sweep;
        sweep.base = st.train;
        const GridResult selection = grid_search(st.dgp, st.selection_grid, data, sweep);
        auto out = open_out(dir, "selection.csv", report);
        write_grid_csv(out, selection);
        best = selection.rows[selection.best].config;
        report.metrics["selection_best_mae"] = selection.rows[selection.best].mae;
    }
    report.selected = best;
    const TrainConfig lin = linear_variant(st.train);
    const FittedExperiment neural = fit_experiment(id, data, best);
    const FittedExperiment linear = fit_experiment(id, data, lin);
    const EffectQuery q = experiment_query(id, st.sweep);

    const auto ks = data.column("KS");
    const auto grid = quantile_grid(ks, 0.01, 0.99, 100);
    std::vector<double> truth;
    for (double g : grid) truth.push_back(*true_effect(st.dgp, g));
    const auto curve_n = curve_effects(neural, q, grid);
    const auto curve_l = curve_effects(linear, q, grid);

    const auto inner = quantile_grid(ks, 0.05, 0.95, st.sweep.curve_points);
    std::vector<double> inner_truth;
    for (double g : inner) inner_truth.push_back(*true_effect(st.dgp, g));
    report.metrics["mae_neural_5_95"] = mae(curve_effects(neural, q, inner), inner_truth);
    report.metrics["mae_linear_5_95"] = mae(curve_effects(linear, q, inner), inner_truth);

    auto write_curve = [&](const std::string& name, const std::vector<double>& mean, const BandResult* band) {
        auto out = open_out(dir, name, report);
        write_curve_csv(out, grid, mean, band ? band->lo : mean, band ? band->hi : mean);
    };

    if (st.run_bootstrap) {
        auto estimator_for = [&](const TrainConfig& cfg) {
            return [&, cfg](const Dataset& sample, std::uint64_t seed) {
                TrainConfig c = cfg;
                c.seed = seed;
                return curve_effects(fit_experiment(id, sample, c), q, grid);
            };
        };
        const BandResult bn = bootstrap_bands(data, estimator_for(best), st.bootstrap);
        BootstrapConfig lin_boot = st.bootstrap;
        lin_boot.master_seed = derive_seed(st.bootstrap.master_seed, 1);
        const BandResult bl = bootstrap_bands(data, estimator_for(lin), lin_boot);
        write_curve("cate_curve.csv", curve_n, &bn);
        write_curve("cate_curve_linear.csv", curve_l, &bl);
        {
            auto out = open_out(dir, "bands.csv", report);
            write_curve_csv(out, grid, bn.mean, bn.lo, bn.hi);
        }
        {
            auto out = open_out(dir, "bands_linear.csv", report);
            write_curve_csv(out, grid, bl.mean, bl.lo, bl.hi);
        }
        report.metrics["band_width_p01"] = bn.hi.front() - bn.lo.front();
        report.metrics["band_width_median"] = bn.hi[grid.size() / 2] - bn.lo[grid.size() / 2];
    } else {
        write_curve("cate_curve.csv", curve_n, nullptr);
        write_curve("cate_curve_linear.csv", curve_l, nullptr);
    }

    {
        auto out = open_out(dir, "truth.csv", report);
        out << "grid_value,true_effect\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out << format_double(grid[i]) << ',' << format_double(truth[i]) << '\n';
        }
    }
    {
        constexpr std::size_t kBins = 40;
        const auto [lo_it, hi_it] = std::minmax_element(ks.begin(), ks.end());
        const double lo = *lo_it;
        const double width = (*hi_it - lo) / kBins;
        std::vector<std::size_t> counts(kBins, 0);
        for (double v : ks) {
            auto b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
            ++counts[std::min(b, kBins - 1)];
        }
        auto out = open_out(dir, "histogram.csv", report);
        out << "bin_lo,bin_hi,count\n";
        for (std::size_t b = 0; b < kBins; ++b) {
            out << format_double(lo + width * b) << ',' << format_double(lo + width * (b + 1)) << ',' << counts[b]
                << '\n';
        }
    }
    {
        auto out = open_out(dir, "support.csv", report);
        out << "quantile,value\n";
        for (double qv : {0.01, 0.05, 0.5, 0.95, 0.99}) {
            out << format_double(qv) << ',' << format_double(quantile(ks, qv)) << '\n';
        }
    }
}

void run_frontdoor(const ExperimentSettings& st, const Dataset& data, const std::filesystem::path& dir,
                   ExperimentReport& report) {
    const FittedExperiment neural = fit_experiment(ExperimentId::frontdoor, data, st.train);
    const FittedExperiment linear = fit_experiment(ExperimentId::frontdoor, data, linear_variant(st.train));
    const std::size_t outer = st.sweep.mc_outer;
    const std::size_t inner = st.sweep.mc_inner;
    const std::size_t total = outer * inner;

    auto draws_out = open_out(dir, "interventional_draws.csv", report);
    draws_out << "method,t_value,draw\n";
    auto wd_out = open_out(dir, "wasserstein.csv", report);
    wd_out << "t_value,method,wd\n";

    const double values[] = {0.0, 0.5};
    for (std::size_t k = 0; k < 2; ++k) {
        const double t = values[k];
        const auto oracle = intervene_dgp(st.dgp, Intervention({{"T", t}}), total,
                                          derive_seed(st.sweep.seed, kOracleStream + k)).column("R");
        Rng r1(derive_seed(st.sweep.seed, kFrontdoorStream + k));
        Rng r2(derive_seed(st.sweep.seed, kFrontdoorStream + k));
        Rng r3(derive_seed(st.sweep.seed, kFrontdoorStream + k));
        const auto fd = frontdoor_mc(neural.model, &*neural.aux, "T", "R", t, outer, inner, r1).draws;
        const auto cond = conditioning_mc(neural.model, *neural.aux, "T", "R", t, total, r2).draws;
        const auto lin = frontdoor_mc(linear.model, &*linear.aux, "T", "R", t, outer, inner, r3).draws;

        const std::pair<const char*, const std::vector<double>*> methods[] = {
            {"truth", &oracle}, {"frontdoor", &fd}, {"conditioning", &cond}, {"linear", &lin}};
        for (const auto& [name, draws] : methods) {
            for (double d : *draws) draws_out << name << ',' << format_double(t) << ',' << format_double(d) << '\n';
            if (std::string(name) == "truth") continue;
            const double wd = wasserstein1d(*draws, oracle);
            wd_out << format_double(t) << ',' << name << ',' << format_double(wd) << '\n';
            report.metrics["wd_" + std::string(name) + "_t" + format_double(t)] = wd;
        }
        report.metrics["mean_truth_t" + format_double(t)] = mean_of(oracle);
        report.metrics["mean_frontdoor_t" + format_double(t)] = mean_of(fd);
    }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSettings& settings, const std::filesystem::path& results_dir) {
    std::filesystem::create_directories(results_dir);
    ExperimentReport report;
    const Dataset data = generate(settings.dgp);
    write_csv(results_dir / "data.csv", data);
    report.files.push_back("data.csv");

    switch (settings.dgp.id) {
        case ExperimentId::binary:
        case ExperimentId::continuous_outcome: run_kidney(settings, data, results_dir, report); break;
        case ExperimentId::continuous_confounder_gamma:
        case ExperimentId::continuous_confounder_lognormal:
            run_continuous_confounder(settings, data, results_dir, report);
            break;
        case ExperimentId::frontdoor: run_frontdoor(settings, data, results_dir, report); break;
        default: run_curve(settings, data, results_dir, report); break;
    }

    auto out = open_out(results_dir, "metrics.csv", report);
    out << "metric,value\n";
    for (const auto& [k, v] : report.metrics) out << k << ',' << format_double(v) << '\n';
    return report;
}

}  // namespace cnade
