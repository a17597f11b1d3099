#include "cnade/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace cnade {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::cycle_detected: return "cycle-detected";
        case ErrorCode::unknown_parent: return "unknown-parent";
        case ErrorCode::duplicate_name: return "duplicate-name";
        case ErrorCode::invalid_name: return "invalid-name";
        case ErrorCode::unknown_variable: return "unknown-variable";
        case ErrorCode::duplicate_assignment: return "duplicate-assignment";
        case ErrorCode::dimension_mismatch: return "dimension-mismatch";
        case ErrorCode::non_finite_gradient: return "non-finite-gradient";
        case ErrorCode::non_finite_loss: return "non-finite-loss";
        case ErrorCode::domain_error: return "domain-error";
        case ErrorCode::missing_column: return "missing-column";
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::non_discrete_variables: return "non-discrete-variables";
        case ErrorCode::adjustment_set_not_found: return "adjustment-set-not-found";
        case ErrorCode::adjustment_graph_mismatch: return "adjustment-graph-mismatch";
        case ErrorCode::mc_samples_zero: return "mc-samples-zero";
        case ErrorCode::missing_aux: return "missing-aux";
        case ErrorCode::empty_grid: return "empty-grid";
        case ErrorCode::ks_required: return "ks-required";
        case ErrorCode::estimator_failure: return "estimator-failure";
        case ErrorCode::length_mismatch: return "length-mismatch";
        case ErrorCode::empty_input: return "empty-input";
        case ErrorCode::oracle_unavailable: return "oracle-unavailable";
        case ErrorCode::parse_error: return "parse-error";
        case ErrorCode::io_error: return "io-error";
        case ErrorCode::bad_flags: return "bad-flags";
    }
    return "unknown-error";
}

std::string_view to_string(VarKind kind) {
    switch (kind) {
        case VarKind::binary: return "binary";
        case VarKind::continuous_real: return "continuous-real";
        case VarKind::continuous_positive: return "continuous-positive";
    }
    return "?";
}

VarKind parse_var_kind(std::string_view text) {
    if (text == "binary") return VarKind::binary;
    if (text == "continuous-real") return VarKind::continuous_real;
    if (text == "continuous-positive") return VarKind::continuous_positive;
    throw Error(ErrorCode::parse_error, "unknown variable kind '" + std::string(text) + "'");
}

std::optional<std::size_t> Dag::find(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i].name == name) return i;
    }
    return std::nullopt;
}

std::size_t Dag::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw Error(ErrorCode::unknown_variable, "'" + std::string(name) + "' is not in the graph");
}

bool Dag::has_edge(std::string_view from, std::string_view to) const {
    const auto& ps = parents(to);
    return std::find(ps.begin(), ps.end(), from) != ps.end();
}

Intervention::Intervention(std::vector<std::pair<std::string, double>> assignments)
    : assignments_(std::move(assignments)) {
    std::set<std::string> seen;
    for (const auto& [name, value] : assignments_) {
        if (!seen.insert(name).second) {
            throw Error(ErrorCode::duplicate_assignment, "'" + name + "' assigned twice");
        }
    }
}

std::optional<double> Intervention::value_of(std::string_view name) const {
    for (const auto& [n, v] : assignments_) {
        if (n == name) return v;
    }
    return std::nullopt;
}

namespace {

// Returns one cycle as a list of names (first == last), found by DFS over the
// parent relation restricted to the nodes Kahn's algorithm could not order.
std::vector<std::string> find_cycle(const Dag& dag, const std::vector<bool>& ordered) {
    const auto& vars = dag.variables();
    std::vector<int> state(vars.size(), 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::size_t> stack;

    std::function<bool(std::size_t)> dfs = [&](std::size_t v) -> bool {
        state[v] = 1;
        stack.push_back(v);
        for (const auto& p : vars[v].parents) {
            const std::size_t u = *dag.find(p);
            if (ordered[u]) continue;
            if (state[u] == 1) {
                stack.push_back(u);
                return true;
            }
            if (state[u] == 0 && dfs(u)) return true;
        }
        stack.pop_back();
        state[v] = 2;
        return false;
    };

    for (std::size_t v = 0; v < vars.size(); ++v) {
        if (ordered[v] || state[v] != 0) continue;
        if (dfs(v)) {
            // stack holds v0 <- ... <- u where u already appears earlier; trim
            // to the cycle and reverse into edge direction.
            const std::size_t closing = stack.back();
            auto start = std::find(stack.begin(), stack.end(), closing);
            std::vector<std::string> cycle;
            for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                cycle.push_back(vars[*it].name);
                if (it.base() - 1 == start) break;
            }
            return cycle;
        }
    }
    return {};
}

std::vector<std::string> kahn(const Dag& dag) {
    const auto& vars = dag.variables();
    const std::size_t n = vars.size();
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (const auto& p : vars[v].parents) {
            const auto u = dag.find(p);
            if (!u) {
                throw Error(ErrorCode::unknown_parent,
                            "'" + vars[v].name + "' has undeclared parent '" + p + "'");
            }
            children[*u].push_back(v);
            ++indegree[v];
        }
    }

    // Min-heap on declaration index gives deterministic tie-breaking.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t v = 0; v < n; ++v) {
        if (indegree[v] == 0) ready.push(v);
    }
    std::vector<std::string> order;
    std::vector<bool> ordered(n, false);
    while (!ready.empty()) {
        const std::size_t v = ready.top();
        ready.pop();
        order.push_back(vars[v].name);
        ordered[v] = true;
        for (std::size_t c : children[v]) {
            if (--indegree[c] == 0) ready.push(c);
        }
    }
    if (order.size() != n) {
        const auto cycle = find_cycle(dag, ordered);
        std::string text;
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            if (i) text += " -> ";
            text += cycle[i];
        }
        throw Error(ErrorCode::cycle_detected, text);
    }
    return order;
}

}  // namespace

void validate(const Dag& dag) {
    std::unordered_set<std::string> names;
    for (const auto& v : dag.variables()) {
        if (v.name.empty()) throw Error(ErrorCode::invalid_name, "variable with empty name");
        if (!names.insert(v.name).second) {
            throw Error(ErrorCode::duplicate_name, "'" + v.name + "' declared twice");
        }
    }
    for (const auto& v : dag.variables()) {
        for (const auto& p : v.parents) {
            if (p == v.name) throw Error(ErrorCode::cycle_detected, v.name + " -> " + v.name);
        }
    }
    kahn(dag);
}

std::vector<std::string> topological_order(const Dag& dag) { return kahn(dag); }

Dag mutilate(const Dag& dag, const Intervention& iv) {
    for (const auto& [name, value] : iv.assignments()) dag.index_of(name);
    std::vector<Variable> vars = dag.variables();
    for (auto& v : vars) {
        if (iv.value_of(v.name)) v.parents.clear();
    }
    return Dag(std::move(vars));
}

}  // namespace cnade
