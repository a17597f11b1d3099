#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cnade/rng.hpp"

namespace cnade {

enum class Activation { linear, relu, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

/// Fully connected feed-forward network. The activation applies to hidden
/// layers only; the output layer is always affine. Layer l maps sizes[l] to
/// sizes[l+1] with a row-major weight matrix of shape sizes[l+1] x sizes[l].
/// An input size of 0 is allowed (root nodes): the network is then a function
/// of its biases alone.
struct Mlp {
    std::vector<std::size_t> sizes;
    Activation activation = Activation::linear;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    std::size_t input_dim() const { return sizes.front(); }
    std::size_t output_dim() const { return sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }
    std::size_t parameter_count() const;

    bool operator==(const Mlp&) const = default;
};

/// Parameter-shaped buffer: gradients, optimizer accumulators.
struct ParamBuffer {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static ParamBuffer zeros_like(const Mlp& net);
    void set_zero();
    void scale(double factor);
    bool all_finite() const;
};

struct Gradients {
    ParamBuffer params;
    std::vector<double> input;
};

/// Scratch space for repeated forward/backward passes without allocation.
class Workspace {
public:
    explicit Workspace(const Mlp& net);

    /// Forward pass; returns a view of the output valid until the next call.
    std::span<const double> forward(const Mlp& net, std::span<const double> input);
    /// Backward pass for the input most recently given to forward(). Adds the
    /// parameter gradients to `acc`; writes the input gradient into
    /// `input_grad` when it is non-empty.
    void backward(const Mlp& net, std::span<const double> input, std::span<const double> output_grad,
                  ParamBuffer& acc, std::span<double> input_grad = {});

private:
    std::vector<std::vector<double>> pre_;   // pre-activation per layer
    std::vector<std::vector<double>> post_;  // post-activation per layer
    std::vector<double> delta_;
    std::vector<double> delta_prev_;
};

Mlp init_mlp(std::vector<std::size_t> sizes, Activation activation, Rng& rng);

std::vector<double> forward(const Mlp& net, std::span<const double> input);
Gradients backward(const Mlp& net, std::span<const double> input, std::span<const double> output_grad);

enum class OptimizerKind { sgd, rmsprop };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view text);

inline constexpr double kRmspropDecay = 0.99;
inline constexpr double kRmspropEpsilon = 1e-8;

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::sgd;
    double learning_rate = 1e-2;
    double decay = kRmspropDecay;
    double epsilon = kRmspropEpsilon;
    ParamBuffer accumulators;

    static OptimizerState make(OptimizerKind kind, double learning_rate, const Mlp& net);
};

/// In-place parameter update. Throws non_finite_gradient (leaving both the
/// network and the state untouched) if any gradient entry is NaN or Inf.
void apply_update(Mlp& net, OptimizerState& state, const ParamBuffer& grads);

/// Line-oriented text format:
///   mlp <activation> <layer-count+1> <size0> <size1> ...
///   W<l> <row-major values>
///   b<l> <values>
/// Doubles are written in shortest round-trip form, so parse(serialize(x)) == x.
std::string serialize_mlp(const Mlp& net);
Mlp parse_mlp(std::string_view text);
/// Reads one serialized network from a token stream.
Mlp read_mlp(std::istream& in);

/// Shortest round-trip decimal form of a finite double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace cnade
