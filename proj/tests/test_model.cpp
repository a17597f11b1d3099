#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "cnade/dgp.hpp"
#include "cnade/error.hpp"
#include "cnade/experiments.hpp"
#include "cnade/model.hpp"
#include "cnade/stats.hpp"
#include "support.hpp"

using namespace cnade;
using testing::KidneyTable;
using testing::kidney_model;

namespace {

const KidneyTable kObserved{343.0 / 700, 87.0 / 357, 263.0 / 343, 234.0 / 270, 81.0 / 87, 55.0 / 80, 192.0 / 263};

Dataset kidney_counts() {
    // (KS, T, R, count) from the 700-patient table
    const std::array<std::array<double, 4>, 8> cells{{{0, 1, 1, 81},
                                                      {0, 1, 0, 6},
                                                      {0, 0, 1, 234},
                                                      {0, 0, 0, 36},
                                                      {1, 1, 1, 192},
                                                      {1, 1, 0, 71},
                                                      {1, 0, 1, 55},
                                                      {1, 0, 0, 25}}};
    Dataset d({"KS", "T", "R"});
    for (const auto& c : cells) {
        for (int i = 0; i < static_cast<int>(c[3]); ++i) d.add_row(std::vector<double>{c[0], c[1], c[2]});
    }
    return d;
}

Dataset row(const std::vector<std::string>& cols, const std::vector<double>& values) {
    Dataset d(cols);
    d.add_row(values);
    return d;
}

TrainConfig quick(std::size_t epochs = 30) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = 5;
    cfg.hidden = {4};
    return cfg;
}

double sigma_of(const Conditional& c, std::span<const double> inputs) {
    return c.head.params(c.raw_output(inputs)).sigma;
}

}  // namespace

TEST_CASE("build shapes") {
    const CausalModel k = build(model_dag(ExperimentId::binary), {8}, Activation::tanh, 1);
    CHECK(k.node("KS").net.input_dim() == 0);
    CHECK(k.node("T").net.input_dim() == 1);
    CHECK(k.node("R").net.input_dim() == 2);
    for (const auto& n : k.nodes()) CHECK(n.net.output_dim() == 1);

    const CausalModel f = build(model_dag(ExperimentId::frontdoor), {8}, Activation::tanh, 1);
    CHECK(f.node("T").net.input_dim() == 0);
    CHECK(f.node("Mg").net.input_dim() == 1);
    CHECK(f.node("R").net.input_dim() == 1);
    CHECK(f.node("R").net.output_dim() == 2);

    const CausalModel empty = build(Dag{}, {4}, Activation::tanh, 1);
    CHECK(empty.nodes().empty());
    CHECK(joint_nll(empty, Dataset{}) == 0.0);

    const CausalModel ln = build(model_dag(ExperimentId::continuous_confounder_gamma), {4}, Activation::tanh, 1);
    CHECK(ln.node("KS").head.family == HeadFamily::lognormal);
    const CausalModel over = build(model_dag(ExperimentId::continuous_outcome), {4}, Activation::tanh, 1,
                                   {{"R", HeadFamily::lognormal}});
    CHECK(over.node("R").head.family == HeadFamily::lognormal);

    Dag cyc({{"A", VarKind::binary, {"B"}}, {"B", VarKind::binary, {"A"}}});
    CHECK_THROWS_AS(build(cyc, {4}, Activation::tanh, 1), Error);
}

TEST_CASE("joint nll examples") {
    Dag one({{"X", VarKind::binary, {}}});
    CausalModel m = build(one, {}, Activation::linear, 1);
    m.node("X").net.biases[0][0] = 0.0;
    CHECK(joint_nll(m, row({"X"}, {1})) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(joint_nll(m, row({"X"}, {0})) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    // the generating conditionals are the empirical MLE, so the joint NLL is
    // the empirical entropy of the 8 cells
    const Dataset counts = kidney_counts();
    const CausalModel exact = kidney_model(kObserved);
    const std::array<double, 8> c{81, 6, 234, 36, 192, 71, 55, 25};
    double entropy = 0.0;
    for (double v : c) entropy -= v / 700 * std::log(v / 700);
    CHECK(joint_nll(exact, counts) == doctest::Approx(entropy).epsilon(1e-12));

    Dag two({{"A", VarKind::continuous_real, {}}, {"B", VarKind::binary, {}}});
    Rng rng(2);
    CausalModel ind = build(two, {4}, Activation::tanh, 3);
    ind.node("A").net.biases[1] = {0.4, -0.2};
    ind.node("B").net.biases[1] = {0.9};
    const Dataset d = row({"A", "B"}, {1.3, 1});
    const double a = ind.node("A").nll({}, 1.3);
    const double b = ind.node("B").nll({}, 1.0);
    CHECK(joint_nll(ind, d) == doctest::Approx(a + b).epsilon(1e-14));

    CHECK_THROWS_AS(joint_nll(ind, row({"A"}, {1.0})), Error);
}

TEST_CASE("property: discrete joint sums to one") {
    for (const auto& model : {kidney_model(kObserved), build(model_dag(ExperimentId::binary), {8}, Activation::tanh, 17)}) {
        double total = 0.0;
        for (int ks = 0; ks < 2; ++ks) {
            for (int t = 0; t < 2; ++t) {
                for (int r = 0; r < 2; ++r) total += std::exp(-joint_nll(model, row({"KS", "T", "R"}, {double(ks), double(t), double(r)})));
            }
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("fit recovers the kidney conditionals") {
    const Dataset data = generate({ExperimentId::binary, 10000, 7});
    const TrainConfig cfg = default_train_config(ExperimentId::binary);
    CausalModel m = build(model_dag(ExperimentId::binary), cfg.hidden, cfg.activation, 3);
    fit(m, data, cfg);
    using namespace kidney;
    CHECK(std::abs(m.node("KS").mean({}) - (1 - p_small)) < 0.02);
    CHECK(std::abs(m.node("T").mean(std::vector<double>{0.0}) - p_a_given_small) < 0.02);
    CHECK(std::abs(m.node("T").mean(std::vector<double>{1.0}) - p_a_given_large) < 0.02);
    CHECK(std::abs(m.node("R").mean(std::vector<double>{1.0, 1.0}) - p_recover_large_a) < 0.02);
    CHECK(std::abs(m.node("R").mean(std::vector<double>{0.0, 1.0}) - p_recover_small_a) < 0.02);
    CHECK(std::abs(m.node("R").mean(std::vector<double>{1.0, 0.0}) - p_recover_large_b) < 0.02);
    CHECK(std::abs(m.node("R").mean(std::vector<double>{0.0, 0.0}) - p_recover_small_b) < 0.02);

    SUBCASE("ancestral samples follow the fitted factorization") {
        Rng rng(99);
        const std::size_t n = 100000;
        const Dataset s = ancestral_sample(m, n, rng);
        std::array<double, 8> freq{};
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = s.row(i);
            freq[static_cast<std::size_t>(r[0] * 4 + r[1] * 2 + r[2])] += 1.0 / n;
        }
        for (int cell = 0; cell < 8; ++cell) {
            const double ks = cell / 4, t = (cell / 2) % 2, y = cell % 2;
            const double p = std::exp(-joint_nll(m, row({"KS", "T", "R"}, {ks, t, y})));
            CHECK(std::abs(freq[cell] - p) <= 3 * std::sqrt(p * (1 - p) / n));
        }
        CHECK(std::abs(mean_of(s.column("KS")) - m.node("KS").mean({})) < 0.01);
    }
}

TEST_CASE("interventions clamp the intervened column") {
    const CausalModel m = kidney_model(kObserved);
    Rng rng(1);
    const Dataset s = ancestral_sample(m, 1000, rng, Intervention({{"T", 1.0}}));
    for (double v : s.column("T")) CHECK(v == 1.0);
    CHECK_THROWS_AS(ancestral_sample(m, 10, rng, Intervention({{"Q", 1.0}})), Error);
}

TEST_CASE("gamma confounder model reproduces the confounder mean") {
    const Dataset data = generate({ExperimentId::continuous_confounder_gamma, 10000, 3});
    CausalModel m = build(model_dag(ExperimentId::continuous_confounder_gamma), {4}, Activation::tanh, 3);
    fit(m, data, quick(20));
    Rng rng(5);
    CHECK(std::abs(mean_of(ancestral_sample(m, 100000, rng).column("KS")) - 10.0) < 0.3);
}

TEST_CASE("constant gaussian column collapses to the floor") {
    Dataset d({"X"});
    for (int i = 0; i < 200; ++i) d.add_row(std::vector<double>{2.5});
    CausalModel m = build(Dag({{"X", VarKind::continuous_real, {}}}), {4}, Activation::tanh, 1);
    fit(m, d, quick(5));
    CHECK(m.node("X").mean({}) == doctest::Approx(2.5).epsilon(1e-3));
    CHECK(sigma_of(m.node("X"), {}) < 2e-3);
}

TEST_CASE("training NLL is non-increasing on continuous-outcome data") {
    const Dataset data = generate({ExperimentId::continuous_outcome, 10000, 11});
    CausalModel m = build(model_dag(ExperimentId::continuous_outcome), {8}, Activation::tanh, 2);
    TrainConfig cfg = quick(40);
    const TrainLog log = fit(m, data, cfg);
    REQUIRE(log.epoch_nll.size() == 40);
    for (std::size_t e = 1; e < log.epoch_nll.size(); ++e) CHECK(log.epoch_nll[e] <= log.epoch_nll[e - 1] + 0.05);
    CHECK(log.final_nll == log.epoch_nll.back());
    CHECK(log.final_nll == doctest::Approx(joint_nll(m, data)).epsilon(1e-12));
}

TEST_CASE("fit is seed-deterministic and mechanisms are independent") {
    const Dataset data = generate({ExperimentId::continuous_outcome, 2000, 4});
    auto run = [&] {
        CausalModel m = build(model_dag(ExperimentId::continuous_outcome), {8}, Activation::tanh, 6);
        fit(m, data, quick(10));
        return m;
    };
    const CausalModel a = run();
    CHECK(a == run());

    CausalModel b = a;
    TrainConfig cfg = quick(5);
    cfg.seed = 77;
    const std::vector<std::string> only{"R"};
    fit(b, data, cfg, only);
    CHECK(b.node("KS") == a.node("KS"));
    CHECK(b.node("T") == a.node("T"));
    CHECK(!(b.node("R").net == a.node("R").net));
}

TEST_CASE("hidden columns never reach training") {
    const Dataset data = generate({ExperimentId::unobs_strong, 500, 4});
    Dag with_u({{"U", VarKind::continuous_real, {}}, {"R", VarKind::continuous_real, {"U"}}});
    CausalModel m = build(with_u, {4}, Activation::tanh, 1);
    try {
        fit(m, data, quick(1));
        FAIL("hidden column was consumed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::missing_column);
    }
}

TEST_CASE("divergent training reports the epoch") {
    const Dataset data = generate({ExperimentId::continuous_outcome, 500, 4});
    CausalModel m = build(model_dag(ExperimentId::continuous_outcome), {8}, Activation::linear, 6);
    TrainConfig cfg = quick(50);
    cfg.optimizer = OptimizerKind::sgd;
    cfg.learning_rate = 1e6;
    cfg.activation = Activation::linear;
    try {
        fit(m, data, cfg);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK((e.code() == ErrorCode::non_finite_loss || e.code() == ErrorCode::non_finite_gradient));
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("auxiliary estimators") {
    const Dataset data = generate({ExperimentId::frontdoor, 10000, 8});
    const Dataset test = generate({ExperimentId::frontdoor, 5000, 9});
    TrainConfig cfg = quick(30);
    cfg.hidden = {16};
    const AuxFit aux = fit_auxiliary(data, {"Mg", "T"}, "R", Head{HeadFamily::gaussian}, cfg);
    CHECK(aux.estimator.inputs == std::vector<std::string>{"Mg", "T"});
    const auto r = data.column("R");
    const Conditional base{"R", {}, Head{HeadFamily::gaussian},
                           Mlp{{0, 2}, Activation::linear, {{}}, {{mean_of(r), raw_scale_for_sigma(stddev_of(r))}}},
                           Normalization::identity(0)};
    CHECK(conditional_nll(aux.estimator, test) <= conditional_nll(base, test));

    const AuxFit self = fit_auxiliary(data, {"R"}, "R", Head{HeadFamily::gaussian}, cfg);
    const std::vector<double> probe{mean_of(r)};
    CHECK(sigma_of(self.estimator, probe) < 0.05 * stddev_of(r));

    const AuxFit marginal = fit_auxiliary(data, {}, "T", Head{HeadFamily::gaussian}, cfg);
    CHECK(std::abs(marginal.estimator.mean({}) - mean_of(data.column("T"))) < 0.05);

    CHECK_THROWS_AS(fit_auxiliary(data, {"KS"}, "R", Head{HeadFamily::gaussian}, cfg), Error);
    CHECK_THROWS_AS(fit_auxiliary(data, {"Q"}, "R", Head{HeadFamily::gaussian}, cfg), Error);
}

TEST_CASE("model persistence round-trips exactly") {
    const Dataset data = generate({ExperimentId::continuous_confounder_lognormal, 1000, 4});
    CausalModel m = build(model_dag(ExperimentId::continuous_confounder_lognormal), {4, 4}, Activation::tanh, 6);
    fit(m, data, quick(3));
    std::stringstream s;
    save_model(s, m);
    CHECK(load_model(s) == m);

    std::stringstream c;
    save_conditional(c, m.node("R"));
    CHECK(load_conditional(c) == m.node("R"));

    std::istringstream bad("causal-nade-model 2\n");
    CHECK_THROWS_AS(load_model(bad), Error);
}

TEST_CASE("normalization keeps binary parents raw and guards constant columns") {
    Dataset d({"B", "C", "Y"});
    Rng rng(3);
    for (int i = 0; i < 100; ++i) d.add_row(std::vector<double>{double(i % 2), 5.0, rng.normal()});
    Dag g({{"B", VarKind::binary, {}}, {"C", VarKind::continuous_real, {}}, {"Y", VarKind::continuous_real, {"B", "C"}}});
    CausalModel m = build(g, {4}, Activation::tanh, 1);
    fit(m, d, quick(1));
    const Normalization& n = m.node("Y").norm;
    CHECK(n.mean[0] == 0.0);
    CHECK(n.std[0] == 1.0);
    CHECK(n.mean[1] == 5.0);
    CHECK(n.std[1] == 1.0);
}
