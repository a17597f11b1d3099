#include <doctest.h>

#include <algorithm>
#include <map>

#include "cnade/error.hpp"
#include "cnade/graph.hpp"
#include "cnade/rng.hpp"

using namespace cnade;

namespace {

Dag kidney() {
    return Dag({{"KS", VarKind::binary, {}}, {"T", VarKind::binary, {"KS"}}, {"R", VarKind::binary, {"KS", "T"}}});
}

Dag frontdoor() {
    return Dag({{"KS", VarKind::continuous_real, {}},
                {"T", VarKind::continuous_real, {"KS"}},
                {"Mg", VarKind::continuous_real, {"T"}},
                {"R", VarKind::continuous_real, {"KS", "Mg"}}});
}

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::invalid_argument;
}

bool respects_parents(const Dag& dag, const std::vector<std::string>& order) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    if (pos.size() != dag.size()) return false;
    for (const auto& v : dag.variables()) {
        for (const auto& p : v.parents) {
            if (pos.at(p) >= pos.at(v.name)) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("validate accepts the kidney graph") { CHECK_NOTHROW(validate(kidney())); }

TEST_CASE("validate errors") {
    Dag cyc({{"A", VarKind::binary, {"B"}}, {"B", VarKind::binary, {"A"}}});
    CHECK(code_of([&] { validate(cyc); }) == ErrorCode::cycle_detected);
    try {
        validate(cyc);
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("A") != std::string::npos);
        CHECK(msg.find("B") != std::string::npos);
    }
    CHECK(code_of([] { validate(Dag({{"A", VarKind::binary, {"Z"}}})); }) == ErrorCode::unknown_parent);
    CHECK(code_of([] { validate(Dag({{"A", VarKind::binary, {}}, {"A", VarKind::binary, {}}})); }) ==
          ErrorCode::duplicate_name);
    CHECK(code_of([] { validate(Dag({{"", VarKind::binary, {}}})); }) == ErrorCode::invalid_name);
    CHECK(code_of([] { validate(Dag({{"A", VarKind::binary, {"A"}}})); }) == ErrorCode::cycle_detected);
}

TEST_CASE("topological order") {
    CHECK(topological_order(kidney()) == std::vector<std::string>{"KS", "T", "R"});
    Dag loose({{"C", VarKind::binary, {}}, {"A", VarKind::binary, {}}, {"B", VarKind::binary, {}}});
    CHECK(topological_order(loose) == std::vector<std::string>{"C", "A", "B"});
    CHECK(topological_order(frontdoor()) == std::vector<std::string>{"KS", "T", "Mg", "R"});
    Dag late({{"R", VarKind::binary, {"T"}}, {"T", VarKind::binary, {}}});
    CHECK(topological_order(late) == std::vector<std::string>{"T", "R"});
    Dag cyc({{"A", VarKind::binary, {"B"}}, {"B", VarKind::binary, {"A"}}});
    CHECK(code_of([&] { topological_order(cyc); }) == ErrorCode::cycle_detected);
}

TEST_CASE("mutilate") {
    const Dag g = kidney();
    const Dag m = mutilate(g, Intervention({{"T", 1.0}}));
    CHECK(m.parents("T").empty());
    CHECK(m.parents("R") == std::vector<std::string>{"KS", "T"});
    CHECK(!m.has_edge("KS", "T"));
    CHECK(mutilate(g, Intervention({{"KS", 0.0}})) == g);

    const Dag f = mutilate(frontdoor(), Intervention({{"T", 0.5}}));
    CHECK(f.parents("T").empty());
    CHECK(f.has_edge("KS", "R"));
    CHECK(f.has_edge("T", "Mg"));
    CHECK(f.has_edge("Mg", "R"));
    CHECK(f.size() == 4);

    CHECK(code_of([&] { mutilate(g, Intervention({{"Q", 1.0}})); }) == ErrorCode::unknown_variable);
    CHECK(code_of([] { Intervention({{"T", 1.0}, {"T", 0.0}}); }) == ErrorCode::duplicate_assignment);
}

TEST_CASE("intervention lookup") {
    const Intervention iv({{"T", 0.5}});
    CHECK(iv.value_of("T") == 0.5);
    CHECK(!iv.value_of("R").has_value());
}

TEST_CASE("kind strings round-trip") {
    for (auto k : {VarKind::binary, VarKind::continuous_real, VarKind::continuous_positive}) {
        CHECK(parse_var_kind(to_string(k)) == k);
    }
    CHECK(code_of([] { parse_var_kind("integer"); }) == ErrorCode::parse_error);
}

namespace {

Dag random_dag(Rng& rng, std::size_t n) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    std::vector<Variable> vars(n);
    for (std::size_t i = 0; i < n; ++i) vars[i] = {"v" + std::to_string(i), VarKind::continuous_real, {}};
    // perm gives the causal order; edges only go forward in it
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (rng.uniform() < 0.3) vars[perm[b]].parents.push_back(vars[perm[a]].name);
        }
    }
    return Dag(vars);
}

}  // namespace

TEST_CASE("property: random DAGs, mutilation and injected cycles") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.index(9);
        const Dag g = random_dag(rng, n);
        REQUIRE_NOTHROW(validate(g));
        CHECK(respects_parents(g, topological_order(g)));

        const std::string target = g.variables()[rng.index(n)].name;
        const Intervention iv({{target, 1.0}});
        const Dag m = mutilate(g, iv);
        CHECK(mutilate(m, iv) == m);
        CHECK(respects_parents(m, topological_order(m)));
        CHECK(m.parents(target).empty());

        // inject a back edge along an existing directed path
        std::vector<Variable> vars = g.variables();
        std::size_t child_idx = 0;
        bool found = false;
        for (std::size_t i = 0; i < vars.size() && !found; ++i) {
            if (!vars[i].parents.empty()) {
                child_idx = i;
                found = true;
            }
        }
        if (!found) continue;
        const std::string parent = vars[child_idx].parents.front();
        vars[g.index_of(parent)].parents.push_back(vars[child_idx].name);
        CHECK(code_of([&] { validate(Dag(vars)); }) == ErrorCode::cycle_detected);
    }
}
