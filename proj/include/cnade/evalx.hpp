#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cnade/dataset.hpp"
#include "cnade/dgp.hpp"
#include "cnade/model.hpp"

namespace cnade {

struct BootstrapConfig {
    std::size_t replicates = 50;
    double level = 0.90;
    std::uint64_t master_seed = 0;
};

/// Per-point bootstrap summary. lo/hi are the (1-level)/2 and 1-(1-level)/2
/// empirical quantiles across replicates, widened to include the mean when
/// a skewed replicate distribution would otherwise exclude it.
struct BandResult {
    std::vector<double> mean;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::vector<double>> replicates;  // [replicate][point]
};

/// Estimator run on one resampled dataset; receives the replicate seed.
using BootstrapEstimator = std::function<std::vector<double>(const Dataset&, std::uint64_t)>;

/// Nonparametric bootstrap. Replicate b resamples rows with a seed derived
/// from (master_seed, b). Replicates run in parallel; results are merged by
/// index. Any replicate failure aborts the run with estimator_failure naming
/// the replicate.
BandResult bootstrap_bands(const Dataset& data, const BootstrapEstimator& estimator, const BootstrapConfig& cfg);

double mae(std::span<const double> a, std::span<const double> b);
double rmse(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kWassersteinQuantileGrid = 10000;

/// W1 between two empirical distributions. Equal sizes use order statistics
/// exactly; unequal sizes integrate |F1^-1 - F2^-1| on a 10^4-point midpoint
/// quantile grid.
double wasserstein1d(std::span<const double> s1, std::span<const double> s2);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);

struct GridSpec {
    std::vector<Activation> activations{Activation::linear, Activation::relu, Activation::tanh};
    std::vector<OptimizerKind> optimizers{OptimizerKind::sgd, OptimizerKind::rmsprop};
    std::vector<double> learning_rates{1e-2, 5e-3, 1e-3, 5e-4};
    std::vector<std::vector<std::size_t>> layouts{{4}, {8}, {16}, {4, 4}, {8, 8}};
    enum class Metric { mae, rmse } metric = Metric::mae;

    std::size_t size() const {
        return activations.size() * optimizers.size() * learning_rates.size() * layouts.size();
    }
    /// Configs in declaration order: activation, optimizer, learning rate, layout.
    std::vector<TrainConfig> expand(const TrainConfig& base) const;
};

/// Settings shared by every cell of a sweep.
struct SweepConfig {
    TrainConfig base;           // epochs, batch size, warm start
    std::uint64_t seed = 0;     // per-cell seeds derive from this
    std::size_t curve_points = 50;
    std::size_t mc_outer = 1000;
    std::size_t mc_inner = kDefaultInnerSamplesForSweep;
    std::size_t oracle_draws = 5000;

    static constexpr std::size_t kDefaultInnerSamplesForSweep = 16;
};

struct GridRow {
    TrainConfig config;
    double mae = 0.0;
    double rmse = 0.0;
    double final_nll = 0.0;
    double estimate = 0.0;  // scalar estimand, or mean of the curve
};

struct GridResult {
    std::vector<GridRow> rows;  // declaration order
    std::size_t best = 0;
    /// Spearman correlation between -NLL and -MAE across rows.
    double nll_mae_spearman = 0.0;
};

/// Trains every grid cell on `train` and scores its estimate against the
/// experiment's oracle. Best = argmin of the selection metric, ties broken by
/// lower final NLL, then declaration order.
GridResult grid_search(const DgpSpec& experiment, const GridSpec& grid, const Dataset& train,
                       const SweepConfig& sweep);

/// Grid results CSV: activation,optimizer,lr,layout,mae,rmse,final_nll,seed
void write_grid_csv(std::ostream& out, const GridResult& result);

std::string layout_to_string(const std::vector<std::size_t>& layout);
std::vector<std::size_t> parse_layout(const std::string& text);

}  // namespace cnade
