// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "cnade/dgp.hpp"
#include "cnade/effects.hpp"
#include "cnade/evalx.hpp"
#include "cnade/experiments.hpp"
#include "cnade/heads.hpp"
#include "cnade/netcore.hpp"
#include "cnade/parallel.hpp"

using namespace cnade;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 7;

struct Outcome {
    bool pass = false;
    std::string detail;
};

const fs::path kResults = fs::current_path() / "acceptance_results";

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

Outcome experiment_one() {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport r = run_experiment(default_settings(ExperimentId::binary, kSeed), kResults / "binary");
    const double secs = seconds_since(t0);
    const double ate = r.metrics.at("ate_neural");
    const double truth = r.metrics.at("ate_true");
    const double cond = r.metrics.at("max_conditional_error");
    const bool pass = std::abs(ate - truth) <= 0.01 && cond <= 0.02 && secs < 120;
    return {pass, "ATE " + fmt(100 * ate) + "% vs " + fmt(100 * truth) + "% (tol 1pp); max conditional error " +
                      fmt(100 * cond) + "pp (tol 2pp); " + fmt(secs, 3) + "s"};
}

Outcome experiment_two() {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport r =
        run_experiment(default_settings(ExperimentId::continuous_outcome, kSeed), kResults / "continuous_outcome");
    const double secs = seconds_since(t0);
    const double ate = r.metrics.at("ate_neural");
    return {std::abs(ate - 4.0) <= 0.3 && secs < 120,
            "ATE " + fmt(ate) + " vs 4 (tol 0.3); linear " + fmt(r.metrics.at("ate_linear")) + "; " + fmt(secs, 3) + "s"};
}

Outcome experiment_three() {
    bool pass = true;
    std::string detail;
    for (auto id : {ExperimentId::continuous_confounder_gamma, ExperimentId::continuous_confounder_lognormal}) {
        const ExperimentReport r = run_experiment(default_settings(id, kSeed), kResults / std::string(to_string(id)));
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        double tanh_lo = lo, tanh_hi = -lo;
        for (int n : {1, 5, 25, 50}) {
            const double a = r.metrics.at("ate_linear_" + std::to_string(n));
            lo = std::min(lo, a);
            hi = std::max(hi, a);
            const double b = r.metrics.at("ate_neural_" + std::to_string(n));
            tanh_lo = std::min(tanh_lo, b);
            tanh_hi = std::max(tanh_hi, b);
        }
        const bool ok = hi - lo <= 1e-9 && std::abs(lo - 4.0) <= 0.5;
        pass = pass && ok;
        detail += std::string(to_string(id)) + ": ATE " + fmt(lo) + " spread " + fmt(hi - lo, 2) +
                  " across mc-outer {1,5,25,50} (tanh spread " + fmt(tanh_hi - tanh_lo, 2) + "); ";
    }
    return {pass, detail};
}

struct CurveRun {
    ExperimentReport report;
    double seconds = 0.0;
};

CurveRun run_nonlinear() {
    const auto t0 = std::chrono::steady_clock::now();
    CurveRun run;
    run.report = run_experiment(default_settings(ExperimentId::nonlinear, kSeed), kResults / "nonlinear");
    run.seconds = seconds_since(t0);
    return run;
}

Outcome experiment_four(const CurveRun& run) {
    const auto& m = run.report.metrics;
    const double mae = m.at("mae_neural_5_95");
    const Dataset linear = read_csv(kResults / "nonlinear" / "cate_curve_linear.csv");
    const auto effect = linear.column("effect_mean");
    double worst = 0.0;
    for (std::size_t i = 2; i < effect.size(); ++i) {
        worst = std::max(worst, std::abs(effect[i] - 2 * effect[i - 1] + effect[i - 2]));
    }
    const bool bands = fs::exists(kResults / "nonlinear" / "bands.csv");
    const double w01 = m.at("band_width_p01");
    const double wmed = m.at("band_width_median");
    const bool pass = mae < 0.5 && worst <= 1e-9 && bands && w01 > wmed && run.seconds < 1800;
    return {pass, "tanh MAE " + fmt(mae) + " (tol 0.5, config " + layout_to_string(run.report.selected->hidden) + " " +
                      std::string(to_string(run.report.selected->optimizer)) + " lr " +
                      fmt(run.report.selected->learning_rate) + "); linear max |second difference| " + fmt(worst, 2) +
                      "; band width p01 " + fmt(w01) + " > median " + fmt(wmed) + "; " + fmt(run.seconds, 4) + "s with " +
                      std::to_string(worker_count()) + " worker(s)"};
}

Outcome experiment_five() {
    const ExperimentReport r = run_experiment(default_settings(ExperimentId::frontdoor, kSeed), kResults / "frontdoor");
    bool pass = true;
    std::string detail;
    for (const std::string t : {"0", "0.5"}) {
        const double fd = r.metrics.at("wd_frontdoor_t" + t);
        const double cond = r.metrics.at("wd_conditioning_t" + t);
        const double lin = r.metrics.at("wd_linear_t" + t);
        pass = pass && fd < cond && fd < lin;
        detail += "t=" + t + ": WD front-door " + fmt(fd) + ", conditioning " + fmt(cond) + ", linear " + fmt(lin) + "; ";
    }
    return {pass, detail};
}

Outcome experiment_six(const CurveRun& iv) {
    ExperimentSettings s = default_settings(ExperimentId::unobs_strong, kSeed);
    s.train = *iv.report.selected;
    s.select = false;
    s.run_bootstrap = false;
    const ExperimentReport r = run_experiment(s, kResults / "unobs_strong");
    const double strong = r.metrics.at("mae_neural_5_95");
    const double base = iv.report.metrics.at("mae_neural_5_95");
    return {strong >= 2 * base, "strong-confounding MAE " + fmt(strong) + " vs nonlinear MAE " + fmt(base) + " (ratio " +
                                    fmt(strong / base, 3) + ", need >= 2)"};
}

// Numerical core: finite-difference gradients, discrete oracle, determinism.
Outcome numerical_core() {
    std::size_t checked = 0, bad = 0;
    Rng rng(123);
    const GridSpec grid;
    for (const auto& layout : grid.layouts) {
        for (auto act : grid.activations) {
            for (auto fam : {HeadFamily::bernoulli, HeadFamily::gaussian, HeadFamily::lognormal}) {
                const Head head{fam};
                std::vector<std::size_t> sizes{2};
                sizes.insert(sizes.end(), layout.begin(), layout.end());
                sizes.push_back(head.raw_size());
                Mlp net = init_mlp(sizes, act, rng);
                const std::vector<double> x{rng.normal(), rng.normal()};
                double target = rng.normal();
                if (fam == HeadFamily::bernoulli) target = rng.bernoulli(0.5) ? 1.0 : 0.0;
                if (fam == HeadFamily::lognormal) target = std::exp(target);
                std::vector<double> g(head.raw_size());
                head.nll_grad(forward(net, x), target, g);
                const Gradients grads = backward(net, x, g);
                auto loss = [&] { return head.nll(forward(net, x), target); };
                auto probe = [&](double& theta, double analytic) {
                    constexpr double h = 1e-5;
                    const double keep = theta;
                    theta = keep + h;
                    const double up = loss();
                    theta = keep - h;
                    const double down = loss();
                    theta = keep;
                    const double numeric = (up - down) / (2 * h);
                    ++checked;
                    if (std::abs(numeric - analytic) > std::max(1e-6, 1e-4 * std::abs(numeric))) ++bad;
                };
                for (std::size_t l = 0; l < net.layer_count(); ++l) {
                    for (std::size_t i = 0; i < net.weights[l].size(); ++i) probe(net.weights[l][i], grads.params.weights[l][i]);
                    for (std::size_t i = 0; i < net.biases[l].size(); ++i) probe(net.biases[l][i], grads.params.biases[l][i]);
                }
            }
        }
    }

    // discrete oracle: enumerate the truncated factorization from per-node likelihoods
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const CausalModel m = build(model_dag(ExperimentId::binary), {8}, Activation::tanh, s);
        auto interventional = [&](double t) {
            double total = 0.0;
            for (double ks : {0.0, 1.0}) {
                const double p_ks = std::exp(-m.node("KS").nll({}, ks));
                total += p_ks * std::exp(-m.node("R").nll(std::vector<double>{ks, t}, 1.0));
            }
            return total;
        };
        EffectQuery q;
        q.outcome = "R";
        q.treatment = "T";
        worst = std::max(worst, std::abs(backdoor_discrete_ate(m, q).point - (interventional(1.0) - interventional(0.0))));
    }

    // determinism: repeated runs with the same seed
    bool same = true;
    {
        const DgpSpec spec{ExperimentId::continuous_confounder_lognormal, 2000, 99};
        same = same && generate(spec) == generate(spec);
        TrainConfig cfg = default_train_config(spec.id);
        cfg.epochs = 20;
        cfg.seed = 5;
        const Dataset data = generate(spec);
        const FittedExperiment a = fit_experiment(spec.id, data, cfg);
        const FittedExperiment b = fit_experiment(spec.id, data, cfg);
        same = same && a.model == b.model;
        Rng r1(3), r2(3);
        same = same && ancestral_sample(a.model, 500, r1) == ancestral_sample(b.model, 500, r2);
        EffectQuery q;
        q.outcome = "R";
        q.treatment = "T";
        q.adjustment = Adjustment::backdoor_mc;
        q.seed = 8;
        same = same && ate(a.model, q).point == ate(b.model, q).point;
        const BootstrapEstimator est = [&](const Dataset& d, std::uint64_t seed) {
            TrainConfig c = cfg;
            c.epochs = 2;
            c.seed = seed;
            return std::vector<double>{ate(fit_experiment(spec.id, d, c).model, q).point};
        };
        const BandResult b1 = bootstrap_bands(data, est, {4, 0.9, 1});
        const BandResult b2 = bootstrap_bands(data, est, {4, 0.9, 1});
        same = same && b1.replicates == b2.replicates;
    }

    const bool pass = bad == 0 && worst <= 1e-10 && same;
    return {pass, std::to_string(checked - bad) + "/" + std::to_string(checked) +
                      " gradient entries within 1e-4 over 15 layouts x activations x 3 heads; back-door vs brute force " +
                      fmt(worst, 2) + "; determinism " + (same ? "bit-identical" : "VIOLATED")};
}

Outcome reduced_sweep() {
    const auto t0 = std::chrono::steady_clock::now();
    const DgpSpec spec{ExperimentId::continuous_outcome, 2000, kSeed};
    const Dataset data = generate(spec);
    SweepConfig sweep;
    sweep.base = default_train_config(spec.id);
    sweep.base.epochs = 100;
    sweep.seed = derive_seed(kSeed, 3);
    const GridResult r = grid_search(spec, GridSpec{}, data, sweep);
    const double secs = seconds_since(t0);
    fs::create_directories(kResults / "sweep");
    {
        std::ofstream out(kResults / "sweep" / "grid.csv");
        write_grid_csv(out, r);
    }
    double max_smooth = -std::numeric_limits<double>::infinity();
    double min_relu = std::numeric_limits<double>::infinity();
    for (const auto& row : r.rows) {
        if (row.config.activation == Activation::relu) {
            min_relu = std::min(min_relu, row.mae);
        } else {
            max_smooth = std::max(max_smooth, row.mae);
        }
    }
    const bool pass = r.rows.size() == 120 && secs < 3600;
    return {pass, std::to_string(r.rows.size()) + " rows in " + fmt(secs, 4) + "s; reported: max MAE(linear,tanh) " +
                      fmt(max_smooth) + (max_smooth < min_relu ? " < " : " >= ") + "min MAE(relu) " + fmt(min_relu) +
                      " (ReLU-inferiority " + (max_smooth < min_relu ? "reproduced" : "not reproduced") +
                      "); Spearman(-NLL, -MAE) " + fmt(r.nll_mae_spearman, 3)};
}

}  // namespace

int main() {
    fs::create_directories(kResults);
    int failures = 0;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << std::endl;
    };

    report(1, "binary kidney ATE", experiment_one);
    report(2, "continuous outcome ATE", experiment_two);
    report(3, "continuous confounder, common random numbers", experiment_three);
    CurveRun iv;
    report(4, "nonlinear conditional effect", [&] {
        iv = run_nonlinear();
        return experiment_four(iv);
    });
    report(5, "front-door distributions", experiment_five);
    report(6, "strong unobserved confounding", [&] {
        if (!iv.report.selected) return Outcome{false, "criterion 4 run unavailable"};
        return experiment_six(iv);
    });
    report(7, "numerical core", numerical_core);
    report(8, "hyperparameter sweep", reduced_sweep);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
