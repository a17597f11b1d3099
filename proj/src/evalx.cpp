#include "cnade/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cnade/experiments.hpp"
#include "cnade/parallel.hpp"
#include "cnade/stats.hpp"

namespace cnade {

BandResult bootstrap_bands(const Dataset& data, const BootstrapEstimator& estimator, const BootstrapConfig& cfg) {
    if (cfg.replicates < 2) throw Error(ErrorCode::invalid_argument, "bootstrap needs at least 2 replicates");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "confidence level must lie in (0, 1)");
    }
    if (data.rows() == 0) throw Error(ErrorCode::empty_input, "bootstrap of an empty dataset");

    BandResult result;
    result.replicates.resize(cfg.replicates);
    parallel_for(cfg.replicates, [&](std::size_t b) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, b);
        Rng rng(seed);
        const Dataset sample = data.resample(rng);
        try {
            result.replicates[b] = estimator(sample, derive_seed(seed, 1));
        } catch (const std::exception& e) {
            throw Error(ErrorCode::estimator_failure, "replicate " + std::to_string(b) + ": " + e.what());
        }
    });

    const std::size_t points = result.replicates.front().size();
    for (std::size_t b = 0; b < cfg.replicates; ++b) {
        if (result.replicates[b].size() != points) {
            throw Error(ErrorCode::estimator_failure,
                        "replicate " + std::to_string(b) + " returned a different number of points");
        }
    }
    const double tail = (1.0 - cfg.level) / 2.0;
    std::vector<double> column(cfg.replicates);
    for (std::size_t p = 0; p < points; ++p) {
        for (std::size_t b = 0; b < cfg.replicates; ++b) column[b] = result.replicates[b][p];
        const double m = mean_of(column);
        std::sort(column.begin(), column.end());
        result.mean.push_back(m);
        result.lo.push_back(std::min(quantile_sorted(column, tail), m));
        result.hi.push_back(std::max(quantile_sorted(column, 1.0 - tail), m));
    }
    return result;
}

namespace {

void check_metric_inputs(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "metric inputs differ in length");
    if (a.empty()) throw Error(ErrorCode::empty_input, "metric of empty inputs");
}

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double mae(std::span<const double> a, std::span<const double> b) {
    check_metric_inputs(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

double rmse(std::span<const double> a, std::span<const double> b) {
    check_metric_inputs(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

double wasserstein1d(std::span<const double> s1, std::span<const double> s2) {
    if (s1.empty() || s2.empty()) throw Error(ErrorCode::empty_input, "wasserstein of an empty sample");
    std::vector<double> a(s1.begin(), s1.end());
    std::vector<double> b(s2.begin(), s2.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.size() == b.size()) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
        return s / static_cast<double>(a.size());
    }
    // Left-continuous inverse CDF: smallest order statistic with F >= u.
    auto inverse = [](const std::vector<double>& sorted, double u) {
        const double n = static_cast<double>(sorted.size());
        const auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(u * n) - 1.0));
        return sorted[std::min(k, sorted.size() - 1)];
    };
    double s = 0.0;
    for (std::size_t k = 0; k < kWassersteinQuantileGrid; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(kWassersteinQuantileGrid);
        s += std::abs(inverse(a, u) - inverse(b, u));
    }
    return s / static_cast<double>(kWassersteinQuantileGrid);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    check_metric_inputs(a, b);
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double ma = mean_of(ra);
    const double mb = mean_of(rb);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

std::vector<TrainConfig> GridSpec::expand(const TrainConfig& base) const {
    std::vector<TrainConfig> out;
    for (auto act : activations)
        for (auto opt : optimizers)
            for (double lr : learning_rates)
                for (const auto& layout : layouts) {
                    TrainConfig c = base;
                    c.activation = act;
                    c.optimizer = opt;
                    c.learning_rate = lr;
                    c.hidden = layout;
                    out.push_back(c);
                }
    return out;
}

GridResult grid_search(const DgpSpec& experiment, const GridSpec& grid, const Dataset& train,
                       const SweepConfig& sweep) {
    if (experiment.id == ExperimentId::frontdoor && sweep.mc_inner == 0) {
        throw Error(ErrorCode::oracle_unavailable, "front-door scoring needs inner samples");
    }
    const auto configs = grid.expand(sweep.base);
    if (configs.empty()) throw Error(ErrorCode::empty_grid, "grid has no configurations");
    GridResult result;
    result.rows.resize(configs.size());
    parallel_for(configs.size(), [&](std::size_t i) {
        GridRow& row = result.rows[i];
        row.config = configs[i];
        row.config.seed = derive_seed(sweep.seed, i);
        try {
            const FittedExperiment fitted = fit_experiment(experiment.id, train, row.config);
            const ScoredEstimate scored = score_experiment(experiment, fitted, train, sweep);
            row.mae = mae(scored.estimate, scored.truth);
            row.rmse = rmse(scored.estimate, scored.truth);
            row.final_nll = fitted.final_nll;
            row.estimate = mean_of(scored.estimate);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::non_finite_loss && e.code() != ErrorCode::non_finite_gradient) throw;
            // A diverged cell ranks last instead of aborting the sweep.
            constexpr double inf = std::numeric_limits<double>::infinity();
            row.mae = row.rmse = row.final_nll = inf;
            row.estimate = std::numeric_limits<double>::quiet_NaN();
        }
    });

    auto metric = [&](const GridRow& r) { return grid.metric == GridSpec::Metric::mae ? r.mae : r.rmse; };
    for (std::size_t i = 1; i < result.rows.size(); ++i) {
        const GridRow& cand = result.rows[i];
        const GridRow& best = result.rows[result.best];
        if (metric(cand) < metric(best) || (metric(cand) == metric(best) && cand.final_nll < best.final_nll)) {
            result.best = i;
        }
    }
    std::vector<double> neg_nll, neg_mae;
    for (const auto& r : result.rows) {
        neg_nll.push_back(-r.final_nll);
        neg_mae.push_back(-r.mae);
    }
    result.nll_mae_spearman = result.rows.size() > 1 ? spearman(neg_nll, neg_mae) : 0.0;
    return result;
}

std::string layout_to_string(const std::vector<std::size_t>& layout) {
    std::string s;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(layout[i]);
    }
    return s;
}

std::vector<std::size_t> parse_layout(const std::string& text) {
    std::vector<std::size_t> out;
    std::string item;
    std::istringstream in(text);
    const char delim = text.find(',') != std::string::npos ? ',' : 'x';
    while (std::getline(in, item, delim)) {
        if (item.empty()) continue;
        try {
            const long v = std::stol(item);
            if (v <= 0) throw std::invalid_argument("non-positive");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw Error(ErrorCode::parse_error, "bad layout '" + text + "'");
        }
    }
    return out;
}

void write_grid_csv(std::ostream& out, const GridResult& result) {
    out << "activation,optimizer,lr,layout,mae,rmse,final_nll,seed\n";
    for (const auto& r : result.rows) {
        out << to_string(r.config.activation) << ',' << to_string(r.config.optimizer) << ','
            << format_double(r.config.learning_rate) << ',' << layout_to_string(r.config.hidden) << ','
            << format_double(r.mae) << ',' << format_double(r.rmse) << ',' << format_double(r.final_nll) << ','
            << r.config.seed << '\n';
    }
}

}  // namespace cnade
