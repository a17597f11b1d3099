#include "cnade/netcore.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "cnade/error.hpp"

namespace cnade {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "?";
}

Activation parse_activation(std::string_view text) {
    if (text == "linear") return Activation::linear;
    if (text == "relu") return Activation::relu;
    if (text == "tanh") return Activation::tanh;
    throw Error(ErrorCode::parse_error, "unknown activation '" + std::string(text) + "'");
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "rmsprop"; }

OptimizerKind parse_optimizer(std::string_view text) {
    if (text == "sgd") return OptimizerKind::sgd;
    if (text == "rmsprop") return OptimizerKind::rmsprop;
    throw Error(ErrorCode::parse_error, "unknown optimizer '" + std::string(text) + "'");
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

ParamBuffer ParamBuffer::zeros_like(const Mlp& net) {
    ParamBuffer b;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        b.weights.emplace_back(net.weights[l].size(), 0.0);
        b.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return b;
}

void ParamBuffer::set_zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void ParamBuffer::scale(double factor) {
    for (auto& w : weights)
        for (auto& x : w) x *= factor;
    for (auto& b : biases)
        for (auto& x : b) x *= factor;
}

bool ParamBuffer::all_finite() const {
    for (const auto& w : weights)
        for (double x : w)
            if (!std::isfinite(x)) return false;
    for (const auto& b : biases)
        for (double x : b)
            if (!std::isfinite(x)) return false;
    return true;
}

Workspace::Workspace(const Mlp& net) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        pre_.emplace_back(net.sizes[l + 1], 0.0);
        post_.emplace_back(net.sizes[l + 1], 0.0);
    }
    std::size_t widest = 0;
    for (auto s : net.sizes) widest = std::max(widest, s);
    delta_.resize(widest);
    delta_prev_.resize(widest);
}

std::span<const double> Workspace::forward(const Mlp& net, std::span<const double> input) {
    if (input.size() != net.input_dim()) {
        throw Error(ErrorCode::dimension_mismatch, "network expects " + std::to_string(net.input_dim()) +
                                                       " inputs, got " + std::to_string(input.size()));
    }
    const std::size_t layers = net.layer_count();
    std::span<const double> a = input;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = net.sizes[l];
        const std::size_t out = net.sizes[l + 1];
        const double* w = net.weights[l].data();
        double* z = pre_[l].data();
        for (std::size_t i = 0; i < out; ++i) {
            double s = net.biases[l][i];
            const double* row = w + i * in;
            for (std::size_t j = 0; j < in; ++j) s += row[j] * a[j];
            z[i] = s;
        }
        double* h = post_[l].data();
        const bool hidden = l + 1 < layers;
        for (std::size_t i = 0; i < out; ++i) {
            if (!hidden) {
                h[i] = z[i];
                continue;
            }
            switch (net.activation) {
                case Activation::linear: h[i] = z[i]; break;
                case Activation::relu: h[i] = z[i] > 0.0 ? z[i] : 0.0; break;
                case Activation::tanh: h[i] = std::tanh(z[i]); break;
            }
        }
        a = post_[l];
    }
    return post_.back();
}

void Workspace::backward(const Mlp& net, std::span<const double> input, std::span<const double> output_grad,
                         ParamBuffer& acc, std::span<double> input_grad) {
    if (output_grad.size() != net.output_dim()) {
        throw Error(ErrorCode::dimension_mismatch, "output gradient has " + std::to_string(output_grad.size()) +
                                                       " entries, network has " +
                                                       std::to_string(net.output_dim()) + " outputs");
    }
    if (input.size() != net.input_dim()) {
        throw Error(ErrorCode::dimension_mismatch, "input length does not match network");
    }
    const std::size_t layers = net.layer_count();
    std::copy(output_grad.begin(), output_grad.end(), delta_.begin());

    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = net.sizes[l];
        const std::size_t out = net.sizes[l + 1];
        const std::span<const double> a = l == 0 ? input : std::span<const double>(post_[l - 1]);
        double* gw = acc.weights[l].data();
        double* gb = acc.biases[l].data();
        for (std::size_t i = 0; i < out; ++i) {
            const double d = delta_[i];
            gb[i] += d;
            double* row = gw + i * in;
            for (std::size_t j = 0; j < in; ++j) row[j] += d * a[j];
        }
        if (l == 0 && input_grad.empty()) break;

        const double* w = net.weights[l].data();
        for (std::size_t j = 0; j < in; ++j) delta_prev_[j] = 0.0;
        for (std::size_t i = 0; i < out; ++i) {
            const double d = delta_[i];
            const double* row = w + i * in;
            for (std::size_t j = 0; j < in; ++j) delta_prev_[j] += row[j] * d;
        }
        if (l == 0) {
            std::copy_n(delta_prev_.begin(), in, input_grad.begin());
            break;
        }
        const auto& z = pre_[l - 1];
        const auto& h = post_[l - 1];
        for (std::size_t j = 0; j < in; ++j) {
            switch (net.activation) {
                case Activation::linear: break;
                case Activation::relu: delta_prev_[j] = z[j] > 0.0 ? delta_prev_[j] : 0.0; break;
                case Activation::tanh: delta_prev_[j] *= 1.0 - h[j] * h[j]; break;
            }
        }
        std::swap(delta_, delta_prev_);
    }
}

Mlp init_mlp(std::vector<std::size_t> sizes, Activation activation, Rng& rng) {
    if (sizes.size() < 2) throw Error(ErrorCode::invalid_argument, "network needs input and output sizes");
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        if (sizes[l] == 0) throw Error(ErrorCode::invalid_argument, "layer sizes after the input must be positive");
    }
    Mlp net;
    net.sizes = std::move(sizes);
    net.activation = activation;
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
        const std::size_t in = net.sizes[l];
        const std::size_t out = net.sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::vector<double> w(in * out);
        for (auto& x : w) x = -limit + 2.0 * limit * rng.uniform();
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(out, 0.0);
    }
    return net;
}

std::vector<double> forward(const Mlp& net, std::span<const double> input) {
    Workspace ws(net);
    const auto out = ws.forward(net, input);
    return {out.begin(), out.end()};
}

Gradients backward(const Mlp& net, std::span<const double> input, std::span<const double> output_grad) {
    Workspace ws(net);
    ws.forward(net, input);
    Gradients g{ParamBuffer::zeros_like(net), std::vector<double>(net.input_dim(), 0.0)};
    ws.backward(net, input, output_grad, g.params, g.input);
    return g;
}

OptimizerState OptimizerState::make(OptimizerKind kind, double learning_rate, const Mlp& net) {
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "learning rate must be positive");
    OptimizerState s;
    s.kind = kind;
    s.learning_rate = learning_rate;
    s.accumulators = ParamBuffer::zeros_like(net);
    return s;
}

namespace {

void check_shapes(const Mlp& net, const ParamBuffer& b, const char* what) {
    bool ok = b.weights.size() == net.layer_count() && b.biases.size() == net.layer_count();
    for (std::size_t l = 0; ok && l < net.layer_count(); ++l) {
        ok = b.weights[l].size() == net.weights[l].size() && b.biases[l].size() == net.biases[l].size();
    }
    if (!ok) throw Error(ErrorCode::dimension_mismatch, std::string(what) + " shape does not match network");
}

void update_block(std::vector<double>& theta, std::vector<double>& acc, const std::vector<double>& g,
                  const OptimizerState& s) {
    const double lr = s.learning_rate;
    if (s.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * g[i];
        return;
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
        acc[i] = s.decay * acc[i] + (1.0 - s.decay) * g[i] * g[i];
        theta[i] -= lr * g[i] / (std::sqrt(acc[i]) + s.epsilon);
    }
}

}  // namespace

void apply_update(Mlp& net, OptimizerState& state, const ParamBuffer& grads) {
    check_shapes(net, grads, "gradient");
    check_shapes(net, state.accumulators, "optimizer state");
    if (!grads.all_finite()) throw Error(ErrorCode::non_finite_gradient, "gradient contains NaN or Inf");
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        update_block(net.weights[l], state.accumulators.weights[l], grads.weights[l], state);
        update_block(net.biases[l], state.accumulators.biases[l], grads.biases[l], state);
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::parse_error, "not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::string serialize_mlp(const Mlp& net) {
    std::string out = "mlp " + std::string(to_string(net.activation)) + " " + std::to_string(net.sizes.size());
    for (auto s : net.sizes) out += " " + std::to_string(s);
    out += "\n";
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        out += "W" + std::to_string(l);
        for (double x : net.weights[l]) out += " " + format_double(x);
        out += "\nb" + std::to_string(l);
        for (double x : net.biases[l]) out += " " + format_double(x);
        out += "\n";
    }
    return out;
}

Mlp parse_mlp(std::string_view text) {
    std::istringstream in{std::string(text)};
    return read_mlp(in);
}

Mlp read_mlp(std::istream& in) {
    std::string tag, act;
    std::size_t count = 0;
    if (!(in >> tag >> act >> count) || tag != "mlp" || count < 2) {
        throw Error(ErrorCode::parse_error, "bad network header");
    }
    Mlp net;
    net.activation = parse_activation(act);
    net.sizes.resize(count);
    for (auto& s : net.sizes) {
        if (!(in >> s)) throw Error(ErrorCode::parse_error, "bad network sizes");
    }
    auto read_block = [&](const std::string& expect, std::size_t n) {
        std::string t;
        if (!(in >> t) || t != expect) throw Error(ErrorCode::parse_error, "expected block " + expect);
        std::vector<double> v(n);
        for (auto& x : v) {
            std::string tok;
            if (!(in >> tok)) throw Error(ErrorCode::parse_error, "truncated block " + expect);
            x = parse_double(tok);
        }
        return v;
    };
    for (std::size_t l = 0; l + 1 < count; ++l) {
        net.weights.push_back(read_block("W" + std::to_string(l), net.sizes[l] * net.sizes[l + 1]));
        net.biases.push_back(read_block("b" + std::to_string(l), net.sizes[l + 1]));
    }
    return net;
}

}  // namespace cnade
