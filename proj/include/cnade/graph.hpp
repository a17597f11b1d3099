#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cnade/error.hpp"

namespace cnade {

enum class VarKind { binary, continuous_real, continuous_positive };

std::string_view to_string(VarKind kind);
VarKind parse_var_kind(std::string_view text);

struct Variable {
    std::string name;
    VarKind kind = VarKind::continuous_real;
    std::vector<std::string> parents;

    bool operator==(const Variable&) const = default;
};

/// Causal DAG. Variables keep their declaration order, which is also the
/// tie-break for topological ordering.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::vector<Variable> variables) : variables_(std::move(variables)) {}

    const std::vector<Variable>& variables() const { return variables_; }
    std::size_t size() const { return variables_.size(); }

    /// Declaration index of `name`, or nullopt.
    std::optional<std::size_t> find(std::string_view name) const;
    /// Like find but throws unknown_variable.
    std::size_t index_of(std::string_view name) const;
    const Variable& variable(std::string_view name) const { return variables_[index_of(name)]; }
    const std::vector<std::string>& parents(std::string_view name) const {
        return variable(name).parents;
    }
    bool has_edge(std::string_view from, std::string_view to) const;

    bool operator==(const Dag&) const = default;

private:
    std::vector<Variable> variables_;
};

/// do(X = x) assignments, in the order given.
class Intervention {
public:
    Intervention() = default;
    /// Throws duplicate_assignment if a name appears twice.
    explicit Intervention(std::vector<std::pair<std::string, double>> assignments);

    const std::vector<std::pair<std::string, double>>& assignments() const { return assignments_; }
    std::optional<double> value_of(std::string_view name) const;
    bool empty() const { return assignments_.empty(); }

private:
    std::vector<std::pair<std::string, double>> assignments_;
};

/// Throws Error (duplicate_name, invalid_name, unknown_parent, cycle_detected)
/// for the first violated invariant.
void validate(const Dag& dag);

/// Kahn's algorithm with declaration-order tie-breaking.
std::vector<std::string> topological_order(const Dag& dag);

/// Removes every incoming edge of each intervened variable.
Dag mutilate(const Dag& dag, const Intervention& iv);

}  // namespace cnade
