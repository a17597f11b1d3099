#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cnade/experiments.hpp"

using namespace cnade;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentSettings small(ExperimentId id) {
    ExperimentSettings s = default_settings(id, 13);
    s.dgp.n = 600;
    s.train.epochs = 3;
    s.sweep.base = s.train;
    s.sweep.mc_outer = 20;
    s.sweep.mc_inner = 4;
    s.bootstrap.replicates = 3;
    s.select = false;
    return s;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cnade_exp_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("fit_experiment adds the auxiliary net only for the front-door setting") {
    const DgpSpec spec{ExperimentId::frontdoor, 500, 2};
    TrainConfig cfg = default_train_config(spec.id);
    cfg.epochs = 2;
    const FittedExperiment f = fit_experiment(spec.id, generate(spec), cfg);
    REQUIRE(f.aux.has_value());
    CHECK(f.aux->inputs == std::vector<std::string>{"Mg", "T"});
    CHECK(!fit_experiment(ExperimentId::continuous_outcome, generate({ExperimentId::continuous_outcome, 500, 2}), cfg)
               .aux.has_value());
}

TEST_CASE("scored estimands have the expected shapes") {
    SweepConfig sweep;
    sweep.mc_outer = 10;
    sweep.mc_inner = 4;
    sweep.oracle_draws = 40;
    TrainConfig cfg;
    cfg.epochs = 2;
    for (auto id : all_experiments()) {
        const DgpSpec spec{id, 400, 5};
        const Dataset data = generate(spec);
        const ScoredEstimate s = score_experiment(spec, fit_experiment(id, data, cfg), data, sweep);
        CAPTURE(to_string(id));
        CHECK(s.estimate.size() == s.truth.size());
        CHECK(s.grid.size() == s.truth.size());
        if (is_curve_experiment(id)) {
            CHECK(s.grid.size() == 50);
        } else if (id == ExperimentId::frontdoor) {
            CHECK(s.grid.size() == 80);
            CHECK(std::is_sorted(s.truth.begin(), s.truth.begin() + 40));
        } else {
            CHECK(s.grid.size() == 1);
        }
    }
}

TEST_CASE("run_experiment writes each setting's artifacts reproducibly") {
    const std::map<ExperimentId, std::vector<std::string>> expected{
        {ExperimentId::binary, {"ate.csv", "conditionals.csv"}},
        {ExperimentId::continuous_outcome, {"ate.csv"}},
        {ExperimentId::continuous_confounder_gamma, {"ate_by_samples.csv"}},
        {ExperimentId::nonlinear,
         {"cate_curve.csv", "cate_curve_linear.csv", "bands.csv", "bands_linear.csv", "histogram.csv", "truth.csv",
          "support.csv"}},
        {ExperimentId::frontdoor, {"interventional_draws.csv", "wasserstein.csv"}},
    };
    for (const auto& [id, files] : expected) {
        CAPTURE(to_string(id));
        const fs::path a = scratch(std::string(to_string(id)) + "_a");
        const fs::path b = scratch(std::string(to_string(id)) + "_b");
        const ExperimentReport ra = run_experiment(small(id), a);
        run_experiment(small(id), b);
        for (const auto& f : files) {
            CAPTURE(f);
            CHECK(fs::exists(a / f));
            CHECK(std::find(ra.files.begin(), ra.files.end(), f) != ra.files.end());
        }
        for (const auto& f : ra.files) CHECK(slurp(a / f) == slurp(b / f));
        fs::remove_all(a);
        fs::remove_all(b);
    }
}

TEST_CASE("curve artifacts carry the support window and truth") {
    const fs::path dir = scratch("curve");
    ExperimentSettings s = small(ExperimentId::unobs_mild);
    const ExperimentReport r = run_experiment(s, dir);
    CHECK(r.metrics.count("mae_neural_5_95") == 1);
    const std::string truth = slurp(dir / "truth.csv");
    CHECK(truth.rfind("grid_value,true_effect\n", 0) == 0);
    const std::string bands = slurp(dir / "bands.csv");
    CHECK(std::count(bands.begin(), bands.end(), '\n') == 101);
    fs::remove_all(dir);
}
