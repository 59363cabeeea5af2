#include "travwave/error.hpp"

namespace travwave {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_parameter: return "invalid parameter";
        case ErrorKind::domain: return "domain error";
        case ErrorKind::not_a_saddle: return "not a saddle";
        case ErrorKind::bracket_failure: return "bracket failure";
        case ErrorKind::singularity: return "singularity";
        case ErrorKind::construction_failure: return "construction failure";
        case ErrorKind::no_solution: return "no solution";
        case ErrorKind::nonconvergence: return "nonconvergence";
        case ErrorKind::regime: return "regime error";
        case ErrorKind::nonexistence: return "nonexistence";
        case ErrorKind::config: return "config error";
        case ErrorKind::instability: return "instability";
        case ErrorKind::domain_exceeded: return "domain exceeded";
        case ErrorKind::front_not_found: return "front not found";
        case ErrorKind::convexity_violation: return "convexity violation";
        case ErrorKind::invalid_substitute: return "invalid substitute";
        case ErrorKind::cap_exceeded: return "cap exceeded";
        case ErrorKind::integrability: return "integrability error";
        case ErrorKind::ordering: return "ordering error";
        case ErrorKind::invalid_trajectory: return "invalid trajectory";
        case ErrorKind::singular_cost: return "singular cost";
    }
    return "error";
}

}  // namespace travwave
