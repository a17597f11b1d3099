#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "cnade/dataset.hpp"
#include "cnade/dgp.hpp"
#include "cnade/effects.hpp"
#include "cnade/error.hpp"
#include "cnade/evalx.hpp"
#include "cnade/experiments.hpp"
#include "cnade/heads.hpp"
#include "cnade/model.hpp"
#include "cnade/netcore.hpp"
#include "cnade/version.hpp"

namespace cnade::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum class Kind { text, count, real, flag };

struct FlagDef {
    std::string key;
    Kind kind;
    std::string help;
    std::vector<std::string> commands;
};

const std::vector<std::string> kCommands{"generate", "train", "sample", "intervene", "experiment", "sweep", "bootstrap"};

const std::vector<FlagDef>& flag_table() {
    static const std::vector<FlagDef> table{
        {"seed", Kind::count, "master seed", kCommands},
        {"experiment", Kind::text, "experiment id", {"generate", "train", "experiment", "sweep", "bootstrap"}},
        {"n", Kind::count, "rows or draws", {"generate", "sample", "experiment", "sweep", "bootstrap"}},
        {"out", Kind::text, "output file", {"generate", "sample", "intervene"}},
        {"data", Kind::text, "input CSV", {"train", "sweep", "bootstrap", "intervene"}},
        {"model", Kind::text, "model file", {"sample", "intervene"}},
        {"aux", Kind::text, "auxiliary estimator file", {"intervene"}},
        {"model-out", Kind::text, "model output file", {"train"}},
        {"aux-out", Kind::text, "auxiliary output file", {"train"}},
        {"aux-target", Kind::text, "auxiliary target column", {"train"}},
        {"aux-inputs", Kind::text, "auxiliary input columns, comma separated", {"train"}},
        {"results-dir", Kind::text, "results directory", {"experiment", "sweep", "bootstrap"}},
        {"confounding", Kind::real, "T*U coefficient (0 = experiment default)", {"generate", "experiment", "sweep", "bootstrap"}},
        {"center-treatment", Kind::flag, "center KS in treatment assignment", {"generate", "experiment", "sweep", "bootstrap"}},
        {"center-outcome", Kind::flag, "center KS in the outcome equation", {"generate", "experiment", "sweep", "bootstrap"}},
        {"flip-treatment-sign", Kind::flag, "opposite treatment slope sign", {"generate", "experiment", "sweep", "bootstrap"}},
        {"epochs", Kind::count, "training epochs", {"train", "experiment", "sweep", "bootstrap"}},
        {"batch-size", Kind::count, "minibatch size", {"train", "experiment", "sweep", "bootstrap"}},
        {"lr", Kind::real, "learning rate", {"train", "experiment", "bootstrap"}},
        {"optimizer", Kind::text, "sgd | rmsprop", {"train", "experiment", "bootstrap"}},
        {"activation", Kind::text, "linear | relu | tanh", {"train", "experiment", "bootstrap"}},
        {"hidden", Kind::text, "hidden layout, e.g. 8,8", {"train", "experiment", "bootstrap"}},
        {"warm-start", Kind::flag, "start output biases at the marginal fit", {"train", "experiment", "sweep", "bootstrap"}},
        {"do", Kind::text, "interventions, e.g. T=1,Mg=2", {"sample"}},
        {"treatment", Kind::text, "treatment variable", {"intervene"}},
        {"outcome", Kind::text, "outcome variable", {"intervene"}},
        {"treated", Kind::real, "treated value", {"intervene"}},
        {"control", Kind::real, "control value", {"intervene"}},
        {"adjustment", Kind::text, "backdoor-discrete | backdoor-mc | frontdoor-mc | none", {"intervene"}},
        {"t-hat", Kind::real, "emit interventional draws at this treatment value", {"intervene"}},
        {"curve-out", Kind::text, "write the conditional effect curve here", {"intervene"}},
        {"curve-points", Kind::count, "curve grid size", {"intervene", "sweep"}},
        {"mc-outer", Kind::count, "outer Monte Carlo samples", {"intervene", "experiment", "sweep", "bootstrap"}},
        {"mc-inner", Kind::count, "inner Monte Carlo samples", {"intervene", "experiment", "sweep", "bootstrap"}},
        {"bootstrap-b", Kind::count, "bootstrap replicates", {"experiment", "bootstrap"}},
        {"level", Kind::real, "band level", {"experiment", "bootstrap"}},
        {"select", Kind::flag, "run the selection grid", {"experiment"}},
        {"bootstrap", Kind::flag, "run bootstrap bands", {"experiment"}},
        {"grid", Kind::text, "full | reduced", {"sweep"}},
    };
    return table;
}

const FlagDef& flag_def(const std::string& key) {
    for (const auto& f : flag_table()) {
        if (f.key == key) return f;
    }
    throw Error(ErrorCode::bad_flags, "unknown key '" + key + "'");
}

bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw Error(ErrorCode::bad_flags, "expected true/false, got '" + text + "'");
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::bad_flags, "--" + key + " expects a non-negative integer, got '" + text + "'");
    }
    return v;
}

json typed_value(const std::string& key, const std::string& text) {
    switch (flag_def(key).kind) {
        case Kind::count: return parse_count(key, text);
        case Kind::real: {
            try {
                return parse_double(text);
            } catch (const Error&) {
                throw Error(ErrorCode::bad_flags, "--" + key + " expects a number, got '" + text + "'");
            }
        }
        case Kind::flag: return parse_bool(text);
        case Kind::text: return text;
    }
    return text;
}

/// Resolved configuration: file values overlaid by flags. Every value read
/// through a getter is written back so the manifest records defaults too.
class Config {
public:
    Config(std::string command, json values) : command_(std::move(command)), values_(std::move(values)) {}

    const std::string& command() const { return command_; }
    bool has(const std::string& key) const { return values_.contains(key) && !values_[key].is_null(); }

    std::string text(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) {
        if (!has(key)) return remember(key, require_fallback(key, fallback));
        const auto& v = values_[key];
        if (!v.is_string()) throw Error(ErrorCode::bad_flags, "'" + key + "' must be a string");
        return v.get<std::string>();
    }
    std::uint64_t count(const std::string& key, const std::optional<std::uint64_t>& fallback = std::nullopt) {
        if (!has(key)) return remember(key, require_fallback(key, fallback));
        const auto& v = values_[key];
        if (v.is_string()) return parse_count(key, v.get<std::string>());
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw Error(ErrorCode::bad_flags, "'" + key + "' must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }
    double real(const std::string& key, const std::optional<double>& fallback = std::nullopt) {
        if (!has(key)) return remember(key, require_fallback(key, fallback));
        const auto& v = values_[key];
        if (v.is_string()) return typed_value(key, v.get<std::string>()).get<double>();
        if (!v.is_number()) throw Error(ErrorCode::bad_flags, "'" + key + "' must be a number");
        return v.get<double>();
    }
    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return remember(key, fallback);
        const auto& v = values_[key];
        if (v.is_string()) return parse_bool(v.get<std::string>());
        if (!v.is_boolean()) throw Error(ErrorCode::bad_flags, "'" + key + "' must be a boolean");
        return v.get<bool>();
    }
    std::uint64_t seed() {
        if (!has("seed")) throw Error(ErrorCode::bad_flags, "--seed is required for " + command_);
        return count("seed");
    }
    const json& raw(const std::string& key) const { return values_[key]; }

    json manifest() const {
        json m;
        m["command"] = command_;
        for (const auto& [k, v] : values_.items()) {
            if (k != "command" && k != "constants" && k != "version" && k != "config") m[k] = v;
        }
        m["constants"] = {
            {"sigma_floor", kSigmaFloor},
            {"probability_clamp", {kProbabilityClamp, 1.0 - kProbabilityClamp}},
            {"rmsprop_decay", kRmspropDecay},
            {"rmsprop_epsilon", kRmspropEpsilon},
            {"wasserstein_quantile_grid", kWassersteinQuantileGrid},
        };
        m["version"] = std::string(kVersion);
        return m;
    }

private:
    template <class T>
    T require_fallback(const std::string& key, const std::optional<T>& fallback) const {
        if (!fallback) throw Error(ErrorCode::bad_flags, "--" + key + " is required for " + command_);
        return *fallback;
    }
    template <class T>
    T remember(const std::string& key, T value) {
        values_[key] = value;
        return value;
    }

    std::string command_;
    json values_;
};

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
}

void write_manifest(const fs::path& path, const Config& cfg) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << cfg.manifest().dump(2) << '\n';
}

fs::path file_manifest(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

std::ofstream open_for_write(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    return out;
}

std::ifstream open_for_read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    return in;
}

std::vector<std::string> split(const std::string& text, char delim) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, delim)) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

DgpSpec dgp_from(Config& cfg, std::uint64_t seed, std::size_t default_n = 10000) {
    DgpSpec spec;
    spec.id = parse_experiment(cfg.text("experiment"));
    spec.n = cfg.count("n", default_n);
    spec.seed = seed;
    spec.confounding = cfg.real("confounding", 0.0);
    spec.center_treatment = cfg.flag("center-treatment", true);
    spec.center_outcome = cfg.flag("center-outcome", false);
    spec.flip_treatment_sign = cfg.flag("flip-treatment-sign", false);
    return spec;
}

TrainConfig train_from(Config& cfg, TrainConfig base) {
    base.epochs = cfg.count("epochs", base.epochs);
    base.batch_size = cfg.count("batch-size", base.batch_size);
    base.learning_rate = cfg.real("lr", base.learning_rate);
    base.optimizer = parse_optimizer(cfg.text("optimizer", std::string(to_string(base.optimizer))));
    base.activation = parse_activation(cfg.text("activation", std::string(to_string(base.activation))));
    base.hidden = parse_layout(cfg.text("hidden", layout_to_string(base.hidden)));
    base.warm_start = cfg.flag("warm-start", base.warm_start);
    return base;
}

/// Graph literal: [{"name", "kind", "parents": [...], "head"?}].
std::pair<Dag, std::map<std::string, HeadFamily>> graph_from(const json& literal) {
    if (!literal.is_array()) throw Error(ErrorCode::bad_flags, "'graph' must be an array of variables");
    std::vector<Variable> vars;
    std::map<std::string, HeadFamily> heads;
    for (const auto& v : literal) {
        Variable var;
        var.name = v.at("name").get<std::string>();
        var.kind = parse_var_kind(v.value("kind", std::string("continuous-real")));
        var.parents = v.value("parents", std::vector<std::string>{});
        if (v.contains("head")) heads[var.name] = parse_head_family(v["head"].get<std::string>());
        vars.push_back(std::move(var));
    }
    Dag dag(std::move(vars));
    validate(dag);
    return {std::move(dag), std::move(heads)};
}

std::optional<Intervention> intervention_from(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::vector<std::pair<std::string, double>> assignments;
    for (const auto& part : split(text, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::bad_flags, "--do expects NAME=VALUE, got '" + part + "'");
        assignments.emplace_back(part.substr(0, eq), parse_double(part.substr(eq + 1)));
    }
    return Intervention(std::move(assignments));
}

void cmd_generate(Config& cfg, std::ostream& out) {
    const std::uint64_t seed = cfg.seed();
    const DgpSpec spec = dgp_from(cfg, seed);
    const fs::path path = cfg.text("out");
    const Dataset data = generate(spec);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_csv(path, data);
    write_manifest(file_manifest(path), cfg);
    out << "wrote " << data.rows() << " rows to " << path.string() << '\n';
}

void cmd_train(Config& cfg, std::ostream& out) {
    const std::uint64_t seed = cfg.seed();
    const Dataset data = read_csv(fs::path(cfg.text("data")));
    const fs::path model_path = cfg.text("model-out");

    std::optional<ExperimentId> id;
    if (cfg.has("experiment")) id = parse_experiment(cfg.text("experiment"));
    TrainConfig train = train_from(cfg, id ? default_train_config(*id) : TrainConfig{});
    train.seed = derive_seed(seed, 1);

    CausalModel model;
    std::optional<AuxFit> aux;
    double final_nll = 0.0;
    if (cfg.has("graph")) {
        auto [dag, heads] = graph_from(cfg.raw("graph"));
        model = build(dag, train.hidden, train.activation, train.seed, heads);
        final_nll = fit(model, data, train).final_nll;
    } else if (id) {
        FittedExperiment fitted = fit_experiment(*id, data, train);
        model = std::move(fitted.model);
        final_nll = fitted.final_nll;
        if (fitted.aux) aux = AuxFit{std::move(*fitted.aux), {}};
    } else {
        throw Error(ErrorCode::bad_flags, "train needs --experiment or a 'graph' in --config");
    }

    if (cfg.has("aux-target")) {
        const std::string target = cfg.text("aux-target");
        const auto inputs = split(cfg.text("aux-inputs"), ',');
        const VarKind kind = model.dag().find(target) ? model.dag().variable(target).kind : VarKind::continuous_real;
        TrainConfig aux_cfg = train;
        aux_cfg.seed = derive_seed(seed, 4);
        aux = fit_auxiliary(data, inputs, target, Head{default_head(kind)}, aux_cfg);
        final_nll += aux->log.final_nll;
    }

    {
        auto file = open_for_write(model_path);
        save_model(file, model);
    }
    if (aux) {
        const fs::path aux_path = cfg.text("aux-out", model_path.string() + ".aux");
        auto file = open_for_write(aux_path);
        save_conditional(file, aux->estimator);
    }
    write_manifest(file_manifest(model_path), cfg);
    out << "final_nll " << format_double(final_nll) << '\n';
}

CausalModel load_model_file(const fs::path& path) {
    auto in = open_for_read(path);
    return load_model(in);
}

void cmd_sample(Config& cfg, std::ostream& out) {
    const std::uint64_t seed = cfg.seed();
    const CausalModel model = load_model_file(cfg.text("model"));
    const std::size_t n = cfg.count("n");
    const auto iv = intervention_from(cfg.text("do", ""));
    const fs::path path = cfg.text("out");
    Rng rng(seed);
    const Dataset draws = ancestral_sample(model, n, rng, iv);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_csv(path, draws);
    write_manifest(file_manifest(path), cfg);
    out << "wrote " << draws.rows() << " samples to " << path.string() << '\n';
}

void cmd_intervene(Config& cfg, std::ostream& out) {
    const std::uint64_t seed = cfg.seed();
    const CausalModel model = load_model_file(cfg.text("model"));
    std::optional<Conditional> aux;
    if (cfg.has("aux")) {
        auto in = open_for_read(cfg.text("aux"));
        aux = load_conditional(in);
    }
    EffectQuery q;
    q.treatment = cfg.text("treatment", std::string("T"));
    q.outcome = cfg.text("outcome", std::string("R"));
    q.treated = cfg.real("treated", 1.0);
    q.control = cfg.real("control", 0.0);
    q.adjustment = parse_adjustment(cfg.text("adjustment", std::string("backdoor-mc")));
    q.n_outer = cfg.count("mc-outer", 1000);
    q.n_inner = cfg.count("mc-inner", kDefaultInnerSamples);
    q.seed = derive_seed(seed, 5);
    const fs::path path = cfg.text("out");

    auto file = open_for_write(path);
    if (cfg.has("t-hat")) {
        const double t_hat = cfg.real("t-hat");
        Rng rng(q.seed);
        InterventionalDraws draws;
        if (q.adjustment == Adjustment::frontdoor_mc) {
            draws = frontdoor_mc(model, aux ? &*aux : nullptr, q.treatment, q.outcome, t_hat, q.n_outer, q.n_inner,
                                 rng);
        } else {
            const Dataset s = ancestral_sample(model, q.n_outer, rng, Intervention({{q.treatment, t_hat}}));
            draws.draws = s.column(q.outcome);
        }
        write_draws_csv(file, t_hat, draws.draws);
        out << "wrote " << draws.draws.size() << " draws to " << path.string() << '\n';
    } else {
        const EffectEstimate est = ate(model, q, aux ? &*aux : nullptr);
        file << "adjustment,treated,control,ate\n"
             << to_string(q.adjustment) << ',' << format_double(q.treated) << ',' << format_double(q.control) << ','
             << format_double(est.point) << '\n';
        out << "ate " << format_double(est.point) << '\n';
    }
    if (cfg.has("curve-out")) {
        const fs::path curve_path = cfg.text("curve-out");
        const std::string confounder = find_backdoor_confounder(model.dag(), q.treatment, q.outcome);
        const Dataset data = read_csv(fs::path(cfg.text("data")));
        const auto grid = quantile_grid(data.column(confounder), 0.01, 0.99, cfg.count("curve-points", 100));
        std::vector<double> xs, ys;
        for (const auto& p : cate_curve(model, q, grid)) {
            xs.push_back(p.x);
            ys.push_back(p.effect);
        }
        auto curve = open_for_write(curve_path);
        write_curve_csv(curve, xs, ys, ys, ys);
    }
    write_manifest(file_manifest(path), cfg);
}

ExperimentSettings settings_from(Config& cfg) {
    const std::uint64_t seed = cfg.seed();
    const ExperimentId id = parse_experiment(cfg.text("experiment"));
    ExperimentSettings s = default_settings(id, seed);
    s.dgp = dgp_from(cfg, seed, s.dgp.n);
    s.train = train_from(cfg, s.train);
    s.sweep.base = s.train;
    s.sweep.mc_outer = cfg.count("mc-outer", s.sweep.mc_outer);
    s.sweep.mc_inner = cfg.count("mc-inner", s.sweep.mc_inner);
    s.bootstrap.replicates = cfg.count("bootstrap-b", s.bootstrap.replicates);
    s.bootstrap.level = cfg.real("level", s.bootstrap.level);
    return s;
}

void cmd_experiment(Config& cfg, std::ostream& out) {
    ExperimentSettings s = settings_from(cfg);
    s.select = cfg.flag("select", s.select);
    s.run_bootstrap = cfg.flag("bootstrap", s.run_bootstrap);
    const fs::path dir = cfg.text("results-dir");
    const ExperimentReport report = run_experiment(s, dir);
    write_manifest(dir / "run_manifest.json", cfg);
    for (const auto& [k, v] : report.metrics) out << k << ' ' << format_double(v) << '\n';
}

void cmd_sweep(Config& cfg, std::ostream& out) {
    const std::uint64_t seed = cfg.seed();
    const DgpSpec spec = dgp_from(cfg, seed, 2000);
    TrainConfig base = default_train_config(spec.id);
    base.epochs = cfg.count("epochs", 100);
    base.batch_size = cfg.count("batch-size", base.batch_size);
    base.warm_start = cfg.flag("warm-start", base.warm_start);
    SweepConfig sweep;
    sweep.base = base;
    sweep.seed = derive_seed(seed, 3);
    sweep.curve_points = cfg.count("curve-points", sweep.curve_points);
    sweep.mc_outer = cfg.count("mc-outer", sweep.mc_outer);
    sweep.mc_inner = cfg.count("mc-inner", sweep.mc_inner);
    const std::string which = cfg.text("grid", std::string("full"));
    GridSpec grid;
    if (which == "reduced") {
        grid = reduced_selection_grid();
    } else if (which != "full") {
        throw Error(ErrorCode::bad_flags, "--grid expects full or reduced, got '" + which + "'");
    }
    const fs::path dir = cfg.text("results-dir");
    const Dataset data = cfg.has("data") ? read_csv(fs::path(cfg.text("data"))) : generate(spec);

    const GridResult result = grid_search(spec, grid, data, sweep);
    fs::create_directories(dir);
    {
        auto file = open_for_write(dir / "grid.csv");
        write_grid_csv(file, result);
    }
    double max_smooth = -std::numeric_limits<double>::infinity();
    double min_relu = std::numeric_limits<double>::infinity();
    for (const auto& row : result.rows) {
        if (row.config.activation == Activation::relu) {
            min_relu = std::min(min_relu, row.mae);
        } else {
            max_smooth = std::max(max_smooth, row.mae);
        }
    }
    const auto& best = result.rows[result.best];
    auto file = open_for_write(dir / "summary.csv");
    file << "quantity,value\n"
         << "rows," << result.rows.size() << '\n'
         << "best_activation," << to_string(best.config.activation) << '\n'
         << "best_optimizer," << to_string(best.config.optimizer) << '\n'
         << "best_lr," << format_double(best.config.learning_rate) << '\n'
         << "best_layout," << layout_to_string(best.config.hidden) << '\n'
         << "best_mae," << format_double(best.mae) << '\n'
         << "max_mae_linear_tanh," << format_double(max_smooth) << '\n'
         << "min_mae_relu," << format_double(min_relu) << '\n'
         << "nll_mae_spearman," << format_double(result.nll_mae_spearman) << '\n';
    write_manifest(dir / "run_manifest.json", cfg);
    out << "rows " << result.rows.size() << "\nbest_mae " << format_double(best.mae) << "\nnll_mae_spearman "
        << format_double(result.nll_mae_spearman) << '\n';
}

void cmd_bootstrap(Config& cfg, std::ostream& out) {
    const ExperimentSettings s = settings_from(cfg);
    const fs::path dir = cfg.text("results-dir");
    const Dataset data = cfg.has("data") ? read_csv(fs::path(cfg.text("data"))) : generate(s.dgp);

    const FittedExperiment full = fit_experiment(s.dgp.id, data, s.train);
    const ScoredEstimate point = score_experiment(s.dgp, full, data, s.sweep);
    const BootstrapEstimator estimator = [&](const Dataset& sample, std::uint64_t seed) {
        TrainConfig c = s.train;
        c.seed = seed;
        return score_experiment(s.dgp, fit_experiment(s.dgp.id, sample, c), data, s.sweep).estimate;
    };
    const BandResult bands = bootstrap_bands(data, estimator, s.bootstrap);
    fs::create_directories(dir);
    auto file = open_for_write(dir / "bands.csv");
    write_curve_csv(file, point.grid, bands.mean, bands.lo, bands.hi);
    write_manifest(dir / "run_manifest.json", cfg);
    out << "replicates " << bands.replicates.size() << '\n';
}

/// Pulls `--config <path>` out of args; returns the file contents or {}.
json take_config(std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            continue;
        }
        json j = read_json(path);
        if (!j.is_object()) throw Error(ErrorCode::parse_error, path + ": config must be a JSON object");
        return j;
    }
    return json::object();
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neural causal models: data generation, training and interventional inference", "causal-nade"};
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, std::string>> given;
    std::map<std::string, CLI::App*> subs;
    for (const auto& name : kCommands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", "JSON config; flags override its values");
        subs[name] = sub;
    }
    for (const auto& f : flag_table()) {
        for (const auto& c : f.commands) {
            std::string names = "--" + f.key;
            if (f.key == "experiment") names += ",--id";
            subs[c]->add_option(names, given[c][f.key], f.help);
        }
    }

    try {
        std::vector<std::string> args = args_in;
        json file = take_config(args);
        if ((args.empty() || args.front().rfind("-", 0) == 0) && file.contains("command")) {
            args.insert(args.begin(), file["command"].get<std::string>());
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? 0 : 2;
        }

        std::string command;
        for (const auto& [name, sub] : subs) {
            if (sub->parsed()) command = name;
        }
        for (const auto& f : flag_table()) {
            if (std::find(f.commands.begin(), f.commands.end(), command) == f.commands.end()) continue;
            if (subs[command]->count("--" + f.key) > 0) file[f.key] = typed_value(f.key, given[command][f.key]);
        }
        file.erase("command");
        Config cfg(command, std::move(file));

        if (command == "generate") cmd_generate(cfg, out);
        else if (command == "train") cmd_train(cfg, out);
        else if (command == "sample") cmd_sample(cfg, out);
        else if (command == "intervene") cmd_intervene(cfg, out);
        else if (command == "experiment") cmd_experiment(cfg, out);
        else if (command == "sweep") cmd_sweep(cfg, out);
        else cmd_bootstrap(cfg, out);
        return 0;
    } catch (const Error& e) {
        err << "causal-nade: " << e.what() << '\n';
        return e.code() == ErrorCode::bad_flags ? 2 : 1;
    } catch (const nlohmann::json::exception& e) {
        err << "causal-nade: parse-error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "causal-nade: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace cnade::cli
