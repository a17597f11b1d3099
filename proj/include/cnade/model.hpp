#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cnade/dataset.hpp"
#include "cnade/graph.hpp"
#include "cnade/heads.hpp"
#include "cnade/netcore.hpp"

namespace cnade {

/// Per-input standardization applied before the network. Binary inputs keep
/// mean 0 / std 1 so they enter raw as 0/1.
struct Normalization {
    std::vector<double> mean;
    std::vector<double> std;

    static Normalization identity(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}; }
    bool operator==(const Normalization&) const = default;
};

/// A neural conditional density P(target | inputs): one causal mechanism of
/// the model, or a standalone auxiliary estimator.
struct Conditional {
    std::string target;
    std::vector<std::string> inputs;
    Head head;
    Mlp net;
    Normalization norm;

    /// Raw head outputs for unstandardized input values.
    std::vector<double> raw_output(std::span<const double> input_values) const;
    double mean(std::span<const double> input_values) const;
    double sample(std::span<const double> input_values, Rng& rng) const;
    double nll(std::span<const double> input_values, double x) const;

    bool operator==(const Conditional&) const = default;
};

struct TrainConfig {
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    OptimizerKind optimizer = OptimizerKind::rmsprop;
    double learning_rate = 1e-2;
    std::uint64_t seed = 0;
    Activation activation = Activation::tanh;
    std::vector<std::size_t> hidden = {8};
    /// Start output biases at the target's marginal maximum-likelihood
    /// parameters before the first epoch.
    bool warm_start = true;
};

struct TrainLog {
    std::vector<double> epoch_nll;  // full-data mean NLL after each epoch
    double final_nll = 0.0;
};

class CausalModel {
public:
    CausalModel() = default;
    CausalModel(Dag dag, std::vector<Conditional> nodes);

    const Dag& dag() const { return dag_; }
    const std::vector<Conditional>& nodes() const { return nodes_; }
    std::vector<Conditional>& nodes() { return nodes_; }
    const Conditional& node(std::string_view name) const { return nodes_[dag_.index_of(name)]; }
    Conditional& node(std::string_view name) { return nodes_[dag_.index_of(name)]; }

    bool operator==(const CausalModel&) const = default;

private:
    Dag dag_;
    std::vector<Conditional> nodes_;  // declaration order of dag_
};

/// One network per variable: input dim = |parents|, output dim = head size.
/// `heads` overrides the kind-derived family per variable.
CausalModel build(const Dag& dag, const std::vector<std::size_t>& hidden, Activation activation,
                  std::uint64_t seed, const std::map<std::string, HeadFamily>& heads = {});

/// Mean over rows of the summed per-node negative log-likelihoods.
double joint_nll(const CausalModel& model, const Dataset& data);

/// Minibatch training on the factorized NLL. Each node's network is updated
/// from its own loss term only. When `only` is non-empty, the remaining
/// nodes are frozen (parameters and normalization untouched).
TrainLog fit(CausalModel& model, const Dataset& data, const TrainConfig& cfg,
             std::span<const std::string> only = {});

/// Ancestral sampling in topological order of the (optionally mutilated)
/// graph; intervened variables are clamped, never sampled.
Dataset ancestral_sample(const CausalModel& model, std::size_t n, Rng& rng,
                         const std::optional<Intervention>& iv = std::nullopt);

struct AuxFit {
    Conditional estimator;
    TrainLog log;
};

/// Standalone conditional estimator of P(target | inputs).
AuxFit fit_auxiliary(const Dataset& data, const std::vector<std::string>& inputs, const std::string& target,
                     Head head, const TrainConfig& cfg);

/// Mean NLL of a conditional over the rows of `data`.
double conditional_nll(const Conditional& c, const Dataset& data);

void save_model(std::ostream& out, const CausalModel& model);
CausalModel load_model(std::istream& in);
void save_conditional(std::ostream& out, const Conditional& c);
Conditional load_conditional(std::istream& in);

}  // namespace cnade
