#include "cnade/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cnade {

namespace {

std::vector<double> standardized(const Conditional& c, std::span<const double> values) {
    if (values.size() != c.inputs.size()) {
        throw Error(ErrorCode::dimension_mismatch, "'" + c.target + "' expects " + std::to_string(c.inputs.size()) +
                                                       " inputs, got " + std::to_string(values.size()));
    }
    std::vector<double> x(values.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (values[i] - c.norm.mean[i]) / c.norm.std[i];
    return x;
}

bool is_binary_column(const Dataset& data, std::size_t col) {
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const double v = data.at(r, col);
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

Normalization compute_normalization(const Dataset& data, const std::vector<std::size_t>& cols,
                                    const std::vector<bool>& binary) {
    Normalization norm = Normalization::identity(cols.size());
    const double n = static_cast<double>(data.rows());
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (binary[i] || data.rows() == 0) continue;
        double sum = 0.0;
        for (std::size_t r = 0; r < data.rows(); ++r) sum += data.at(r, cols[i]);
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t r = 0; r < data.rows(); ++r) {
            const double d = data.at(r, cols[i]) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / n);
        norm.mean[i] = mean;
        norm.std[i] = sd > 1e-12 ? sd : 1.0;
    }
    return norm;
}

// Training view of one conditional: standardized inputs and targets.
struct Prepared {
    Conditional* node = nullptr;
    std::size_t k = 0;
    std::vector<double> x;  // rows x k
    std::vector<double> y;
};

Prepared prepare(Conditional& c, const Dataset& data) {
    Prepared p;
    p.node = &c;
    p.k = c.inputs.size();
    std::vector<std::size_t> cols;
    for (const auto& in : c.inputs) cols.push_back(data.require(in));
    const std::size_t target = data.require(c.target);
    p.x.resize(data.rows() * p.k);
    p.y.resize(data.rows());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t i = 0; i < p.k; ++i) {
            p.x[r * p.k + i] = (data.at(r, cols[i]) - c.norm.mean[i]) / c.norm.std[i];
        }
        p.y[r] = data.at(r, target);
        c.head.check_support(p.y[r]);
    }
    return p;
}

double mean_nll(const Prepared& p, Workspace& ws) {
    if (p.y.empty()) return 0.0;
    double total = 0.0;
    const Conditional& c = *p.node;
    for (std::size_t r = 0; r < p.y.size(); ++r) {
        const auto out = ws.forward(c.net, std::span<const double>(p.x.data() + r * p.k, p.k));
        total += c.head.nll(out, p.y[r]);
    }
    return total / static_cast<double>(p.y.size());
}

void warm_start(Conditional& c, const std::vector<double>& y) {
    if (y.empty()) return;
    auto& bias = c.net.biases.back();
    double sum = 0.0;
    for (double v : y) sum += c.head.family == HeadFamily::lognormal ? std::log(v) : v;
    const double n = static_cast<double>(y.size());
    const double m = sum / n;
    if (c.head.family == HeadFamily::bernoulli) {
        const double p = std::clamp(m, 1e-3, 1.0 - 1e-3);
        bias[0] = std::log(p / (1.0 - p));
        return;
    }
    double ss = 0.0;
    for (double v : y) {
        const double d = (c.head.family == HeadFamily::lognormal ? std::log(v) : v) - m;
        ss += d * d;
    }
    bias[0] = m;
    bias[1] = raw_scale_for_sigma(std::max(std::sqrt(ss / n), 2.0 * kSigmaFloor));
}

TrainLog train(std::vector<Prepared>& parts, std::size_t rows, const TrainConfig& cfg) {
    if (cfg.epochs == 0 || cfg.batch_size == 0) {
        throw Error(ErrorCode::invalid_argument, "epochs and batch size must be positive");
    }
    if (rows == 0) throw Error(ErrorCode::empty_input, "training data has no rows");

    std::vector<Workspace> spaces;
    std::vector<OptimizerState> states;
    std::vector<ParamBuffer> grads;
    for (auto& p : parts) {
        if (cfg.warm_start) warm_start(*p.node, p.y);
        spaces.emplace_back(p.node->net);
        states.push_back(OptimizerState::make(cfg.optimizer, cfg.learning_rate, p.node->net));
        grads.push_back(ParamBuffer::zeros_like(p.node->net));
    }

    Rng shuffle(derive_seed(cfg.seed, 0x5eed));
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double raw_grad[2];

    TrainLog log;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[shuffle.index(i)]);

        for (std::size_t start = 0; start < rows; start += cfg.batch_size) {
            const std::size_t end = std::min(rows, start + cfg.batch_size);
            const double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t j = 0; j < parts.size(); ++j) {
                const Prepared& p = parts[j];
                Conditional& c = *p.node;
                ParamBuffer& g = grads[j];
                g.set_zero();
                double loss = 0.0;
                const std::span<double> head_grad(raw_grad, c.head.raw_size());
                for (std::size_t b = start; b < end; ++b) {
                    const std::size_t r = order[b];
                    const std::span<const double> x(p.x.data() + r * p.k, p.k);
                    const auto out = spaces[j].forward(c.net, x);
                    loss += c.head.nll_grad(out, p.y[r], head_grad);
                    spaces[j].backward(c.net, x, head_grad, g);
                }
                if (!std::isfinite(loss)) {
                    throw Error(ErrorCode::non_finite_loss,
                                "node '" + c.target + "' at epoch " + std::to_string(epoch));
                }
                g.scale(inv);
                apply_update(c.net, states[j], g);
            }
        }

        double total = 0.0;
        for (std::size_t j = 0; j < parts.size(); ++j) total += mean_nll(parts[j], spaces[j]);
        if (!std::isfinite(total)) {
            throw Error(ErrorCode::non_finite_loss, "training NLL diverged at epoch " + std::to_string(epoch));
        }
        log.epoch_nll.push_back(total);
    }
    log.final_nll = log.epoch_nll.back();
    return log;
}

}  // namespace

std::vector<double> Conditional::raw_output(std::span<const double> input_values) const {
    const auto x = standardized(*this, input_values);
    return forward(net, x);
}

double Conditional::mean(std::span<const double> input_values) const { return head.mean(raw_output(input_values)); }

double Conditional::sample(std::span<const double> input_values, Rng& rng) const {
    return head.sample(raw_output(input_values), rng);
}

double Conditional::nll(std::span<const double> input_values, double x) const {
    return head.nll(raw_output(input_values), x);
}

CausalModel::CausalModel(Dag dag, std::vector<Conditional> nodes) : dag_(std::move(dag)), nodes_(std::move(nodes)) {
    validate(dag_);
    if (nodes_.size() != dag_.size()) throw Error(ErrorCode::length_mismatch, "one conditional per variable required");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& v = dag_.variables()[i];
        const auto& c = nodes_[i];
        if (c.target != v.name || c.inputs != v.parents) {
            throw Error(ErrorCode::invalid_argument, "conditional for '" + v.name + "' does not match its parents");
        }
        if (c.net.input_dim() != v.parents.size() || c.net.output_dim() != c.head.raw_size()) {
            throw Error(ErrorCode::dimension_mismatch, "network shape for '" + v.name + "'");
        }
        if (c.norm.mean.size() != v.parents.size() || c.norm.std.size() != v.parents.size()) {
            throw Error(ErrorCode::dimension_mismatch, "normalization for '" + v.name + "'");
        }
        for (double s : c.norm.std) {
            if (!(s > 0.0)) throw Error(ErrorCode::domain_error, "normalization std must be positive");
        }
    }
}

CausalModel build(const Dag& dag, const std::vector<std::size_t>& hidden, Activation activation,
                  std::uint64_t seed, const std::map<std::string, HeadFamily>& heads) {
    validate(dag);
    for (const auto& [name, family] : heads) dag.index_of(name);
    std::vector<Conditional> nodes;
    for (std::size_t i = 0; i < dag.size(); ++i) {
        const auto& v = dag.variables()[i];
        Conditional c;
        c.target = v.name;
        c.inputs = v.parents;
        const auto it = heads.find(v.name);
        c.head.family = it != heads.end() ? it->second : default_head(v.kind);
        std::vector<std::size_t> sizes{v.parents.size()};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(c.head.raw_size());
        Rng rng(derive_seed(seed, i));
        c.net = init_mlp(sizes, activation, rng);
        c.norm = Normalization::identity(v.parents.size());
        nodes.push_back(std::move(c));
    }
    return CausalModel(dag, std::move(nodes));
}

double joint_nll(const CausalModel& model, const Dataset& data) {
    double total = 0.0;
    for (const auto& c : model.nodes()) total += conditional_nll(c, data);
    return total;
}

double conditional_nll(const Conditional& c, const Dataset& data) {
    Conditional copy = c;
    Prepared p = prepare(copy, data);
    Workspace ws(copy.net);
    return mean_nll(p, ws);
}

TrainLog fit(CausalModel& model, const Dataset& data, const TrainConfig& cfg, std::span<const std::string> only) {
    for (const auto& name : only) model.dag().index_of(name);
    std::vector<Prepared> parts;
    for (std::size_t i = 0; i < model.nodes().size(); ++i) {
        Conditional& c = model.nodes()[i];
        if (!only.empty() && std::find(only.begin(), only.end(), c.target) == only.end()) continue;
        std::vector<std::size_t> cols;
        std::vector<bool> binary;
        for (const auto& in : c.inputs) {
            cols.push_back(data.require(in));
            binary.push_back(model.dag().variable(in).kind == VarKind::binary);
        }
        c.norm = compute_normalization(data, cols, binary);
    }
    for (std::size_t i = 0; i < model.nodes().size(); ++i) {
        Conditional& c = model.nodes()[i];
        if (!only.empty() && std::find(only.begin(), only.end(), c.target) == only.end()) continue;
        parts.push_back(prepare(c, data));
    }
    return train(parts, data.rows(), cfg);
}

Dataset ancestral_sample(const CausalModel& model, std::size_t n, Rng& rng, const std::optional<Intervention>& iv) {
    const Dag& dag = model.dag();
    const Intervention none;
    const Intervention& assign = iv ? *iv : none;
    const auto order = topological_order(mutilate(dag, assign));

    struct Step {
        std::size_t var;
        std::optional<double> clamp;
        std::vector<std::size_t> parents;
    };
    std::vector<Step> steps;
    for (const auto& name : order) {
        Step s{dag.index_of(name), assign.value_of(name), {}};
        for (const auto& p : dag.variables()[s.var].parents) s.parents.push_back(dag.index_of(p));
        steps.push_back(std::move(s));
    }
    std::vector<Workspace> spaces;
    for (const auto& c : model.nodes()) spaces.emplace_back(c.net);

    std::vector<std::string> names;
    for (const auto& v : dag.variables()) names.push_back(v.name);
    Dataset out(names);
    out.reserve(n);
    std::vector<double> row(dag.size(), 0.0);
    std::vector<double> x;
    for (std::size_t r = 0; r < n; ++r) {
        for (const auto& s : steps) {
            if (s.clamp) {
                row[s.var] = *s.clamp;
                continue;
            }
            const Conditional& c = model.nodes()[s.var];
            x.resize(s.parents.size());
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = (row[s.parents[i]] - c.norm.mean[i]) / c.norm.std[i];
            row[s.var] = c.head.sample(spaces[s.var].forward(c.net, x), rng);
        }
        out.add_row(row);
    }
    return out;
}

AuxFit fit_auxiliary(const Dataset& data, const std::vector<std::string>& inputs, const std::string& target,
                     Head head, const TrainConfig& cfg) {
    AuxFit result;
    Conditional& c = result.estimator;
    c.target = target;
    c.inputs = inputs;
    c.head = head;
    std::vector<std::size_t> sizes{inputs.size()};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(head.raw_size());
    Rng rng(derive_seed(cfg.seed, 0xa0c));
    c.net = init_mlp(sizes, cfg.activation, rng);

    std::vector<std::size_t> cols;
    std::vector<bool> binary;
    for (const auto& in : inputs) {
        cols.push_back(data.require(in));
        binary.push_back(is_binary_column(data, cols.back()));
    }
    data.require(target);
    c.norm = compute_normalization(data, cols, binary);
    std::vector<Prepared> parts{prepare(c, data)};
    result.log = train(parts, data.rows(), cfg);
    return result;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void check_token(const std::string& name) {
    if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
        throw Error(ErrorCode::invalid_name, "name '" + name + "' cannot be stored (whitespace)");
    }
}

std::string expect_token(std::istream& in, const char* what) {
    std::string t;
    if (!(in >> t)) throw Error(ErrorCode::parse_error, std::string("truncated model file, expected ") + what);
    return t;
}

std::size_t expect_count(std::istream& in, const char* what) {
    const std::string t = expect_token(in, what);
    try {
        return static_cast<std::size_t>(std::stoull(t));
    } catch (const std::exception&) {
        throw Error(ErrorCode::parse_error, std::string("bad count for ") + what);
    }
}

}  // namespace

void save_conditional(std::ostream& out, const Conditional& c) {
    check_token(c.target);
    out << "conditional " << c.target << ' ' << to_string(c.head.family) << ' ' << c.inputs.size();
    for (const auto& in : c.inputs) {
        check_token(in);
        out << ' ' << in;
    }
    out << "\nnorm";
    for (double m : c.norm.mean) out << ' ' << format_double(m);
    for (double s : c.norm.std) out << ' ' << format_double(s);
    out << '\n' << serialize_mlp(c.net);
}

Conditional load_conditional(std::istream& in) {
    if (expect_token(in, "conditional") != "conditional") throw Error(ErrorCode::parse_error, "expected conditional");
    Conditional c;
    c.target = expect_token(in, "target");
    c.head.family = parse_head_family(expect_token(in, "head"));
    const std::size_t k = expect_count(in, "inputs");
    for (std::size_t i = 0; i < k; ++i) c.inputs.push_back(expect_token(in, "input name"));
    if (expect_token(in, "norm") != "norm") throw Error(ErrorCode::parse_error, "expected norm");
    c.norm = Normalization::identity(k);
    for (auto& m : c.norm.mean) m = parse_double(expect_token(in, "norm mean"));
    for (auto& s : c.norm.std) s = parse_double(expect_token(in, "norm std"));
    c.net = read_mlp(in);
    if (c.net.input_dim() != k || c.net.output_dim() != c.head.raw_size()) {
        throw Error(ErrorCode::dimension_mismatch, "stored network for '" + c.target + "' has wrong shape");
    }
    return c;
}

void save_model(std::ostream& out, const CausalModel& model) {
    out << "causal-nade-model 1\n";
    out << "variables " << model.dag().size() << '\n';
    for (const auto& v : model.dag().variables()) {
        check_token(v.name);
        out << "variable " << v.name << ' ' << to_string(v.kind) << ' ' << v.parents.size();
        for (const auto& p : v.parents) out << ' ' << p;
        out << '\n';
    }
    for (const auto& c : model.nodes()) save_conditional(out, c);
}

CausalModel load_model(std::istream& in) {
    if (expect_token(in, "magic") != "causal-nade-model" || expect_token(in, "version") != "1") {
        throw Error(ErrorCode::parse_error, "not a causal-nade model file");
    }
    if (expect_token(in, "variables") != "variables") throw Error(ErrorCode::parse_error, "expected variables");
    const std::size_t n = expect_count(in, "variables");
    std::vector<Variable> vars;
    for (std::size_t i = 0; i < n; ++i) {
        if (expect_token(in, "variable") != "variable") throw Error(ErrorCode::parse_error, "expected variable");
        Variable v;
        v.name = expect_token(in, "name");
        v.kind = parse_var_kind(expect_token(in, "kind"));
        const std::size_t k = expect_count(in, "parents");
        for (std::size_t j = 0; j < k; ++j) v.parents.push_back(expect_token(in, "parent"));
        vars.push_back(std::move(v));
    }
    std::vector<Conditional> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back(load_conditional(in));
    return CausalModel(Dag(std::move(vars)), std::move(nodes));
}

}  // namespace cnade
