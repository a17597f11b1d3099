#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cnade {

enum class ErrorCode {
    cycle_detected,
    unknown_parent,
    duplicate_name,
    invalid_name,
    unknown_variable,
    duplicate_assignment,
    dimension_mismatch,
    non_finite_gradient,
    non_finite_loss,
    domain_error,
    missing_column,
    invalid_argument,
    non_discrete_variables,
    adjustment_set_not_found,
    adjustment_graph_mismatch,
    mc_samples_zero,
    missing_aux,
    empty_grid,
    ks_required,
    estimator_failure,
    length_mismatch,
    empty_input,
    oracle_unavailable,
    parse_error,
    io_error,
    bad_flags,
};

std::string_view to_string(ErrorCode code);

/// Every library failure surfaces as this exception; `code()` identifies the
/// contract that was violated and `what()` names the offending item.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cnade
