#pragma once

#include <cmath>

#include "cnade/model.hpp"

namespace cnade::testing {

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Probabilities of an all-binary kidney model (KS=1 large, T=1 treatment A).
struct KidneyTable {
    double p_large;
    double p_a_small;
    double p_a_large;
    double r_small_b;
    double r_small_a;
    double r_large_b;
    double r_large_a;
};

/// Exact all-binary kidney model: the R network is a ReLU net whose third
/// hidden unit computes KS*T, so all four cells are representable.
inline CausalModel kidney_model(const KidneyTable& t) {
    Dag dag({{"KS", VarKind::binary, {}}, {"T", VarKind::binary, {"KS"}}, {"R", VarKind::binary, {"KS", "T"}}});
    auto node = [](std::string target, std::vector<std::string> inputs, Mlp net) {
        const std::size_t n = inputs.size();
        return Conditional{std::move(target), std::move(inputs), Head{HeadFamily::bernoulli}, std::move(net),
                           Normalization::identity(n)};
    };
    Mlp ks{{0, 1}, Activation::linear, {{}}, {{logit(t.p_large)}}};
    const double t0 = logit(t.p_a_small);
    Mlp tr{{1, 1}, Activation::linear, {{logit(t.p_a_large) - t0}}, {{t0}}};
    const double b = logit(t.r_small_b);
    const double a_ks = logit(t.r_large_b) - b;
    const double a_t = logit(t.r_small_a) - b;
    const double a_int = logit(t.r_large_a) - b - a_ks - a_t;
    Mlp r{{2, 3, 1},
          Activation::relu,
          {{1, 0, 0, 1, 1, 1}, {a_ks, a_t, a_int}},
          {{0, 0, -1}, {b}}};
    return CausalModel(dag, {node("KS", {}, ks), node("T", {"KS"}, tr), node("R", {"KS", "T"}, r)});
}

}  // namespace cnade::testing
