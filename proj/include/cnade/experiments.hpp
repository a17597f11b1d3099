#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cnade/dgp.hpp"
#include "cnade/effects.hpp"
#include "cnade/evalx.hpp"
#include "cnade/model.hpp"

namespace cnade {

/// A model trained for one experiment; front-door runs also carry the
/// auxiliary estimator of P(R | Mg, T).
struct FittedExperiment {
    CausalModel model;
    std::optional<Conditional> aux;
    double final_nll = 0.0;  // model NLL plus auxiliary NLL when present
};

FittedExperiment fit_experiment(ExperimentId id, const Dataset& train, const TrainConfig& cfg);

/// Estimate and oracle for the experiment's estimand, point by point:
///  - kidney graphs with binary confounder: exact back-door ATE (1 point)
///  - continuous confounder: Monte Carlo back-door ATE (1 point)
///  - curve experiments: conditional effect on `curve_points` evenly spaced
///    KS values between the 5th and 95th training percentiles
///  - front-door: sorted front-door draws against sorted mutilated-DGP draws
///    for T in {0, 0.5} (so their MAE is the mean W1 distance)
struct ScoredEstimate {
    std::vector<double> grid;
    std::vector<double> estimate;
    std::vector<double> truth;
};

ScoredEstimate score_experiment(const DgpSpec& spec, const FittedExperiment& fitted, const Dataset& train,
                                const SweepConfig& sweep);

/// Query used for the experiment's estimand.
EffectQuery experiment_query(ExperimentId id, const SweepConfig& sweep);

/// Training defaults used by `experiment` when no override is given.
TrainConfig default_train_config(ExperimentId id);
/// Reduced tanh selection grid (2 optimizers x 2 learning rates x 3 layouts).
GridSpec reduced_selection_grid();

struct ExperimentSettings {
    DgpSpec dgp;
    TrainConfig train;
    BootstrapConfig bootstrap;
    SweepConfig sweep;
    GridSpec selection_grid = reduced_selection_grid();
    /// Select the neural config on the selection grid (curve experiments).
    bool select = true;
    bool run_bootstrap = true;
};

ExperimentSettings default_settings(ExperimentId id, std::uint64_t seed);

struct ExperimentReport {
    std::map<std::string, double> metrics;
    std::vector<std::string> files;
    /// Neural config used for the curve (after selection when it ran).
    std::optional<TrainConfig> selected;
};

/// Generates data, trains the neural and linear models, evaluates the
/// estimand and writes the experiment's CSV artifacts into `results_dir`.
ExperimentReport run_experiment(const ExperimentSettings& settings, const std::filesystem::path& results_dir);

}  // namespace cnade
