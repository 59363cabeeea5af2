#pragma once

#include <stdexcept>
#include <string>

namespace travwave {

enum class ErrorKind {
    invalid_parameter,
    domain,
    not_a_saddle,
    bracket_failure,
    singularity,
    construction_failure,
    no_solution,
    nonconvergence,
    regime,
    nonexistence,
    config,
    instability,
    domain_exceeded,
    front_not_found,
    convexity_violation,
    invalid_substitute,
    cap_exceeded,
    integrability,
    ordering,
    invalid_trajectory,
    singular_cost,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace travwave
